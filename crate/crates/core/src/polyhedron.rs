//! Triangle classes glued by group elements, and the polygon classes obtained after merging.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_traits::Zero;

use crate::canonize::FlipTrace;
use crate::error::{Error, Result};
use crate::exact::{det3, sign, Mat3, Vec3};
use crate::group::{Cusp, GroupContext, GroupElem, Word};
use crate::predicates::{side_of_face, Side};

/// A light-cone lift together with the word carrying the base cusp lift onto it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corner {
    pub lift: Vec3,
    pub word: Word,
    pub cusp: usize,
}

impl Corner {
    pub fn moved(&self, g: &GroupElem) -> Corner {
        Corner { lift: g.mat.apply(&self.lift), word: g.word.mul(&self.word), cusp: self.cusp }
    }
}

/// Neighbor across an edge: its class, its edge index and the element taking its frame into ours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub tri: usize,
    pub edge: usize,
    pub g: GroupElem,
}

/// Edge `i` joins corners `i + 1` and `i + 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleClass {
    pub corners: [Corner; 3],
    pub neighbors: [Gluing; 3],
}

impl TriangleClass {
    pub fn lifts(&self) -> [&Vec3; 3] {
        [&self.corners[0].lift, &self.corners[1].lift, &self.corners[2].lift]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientPolyhedron {
    pub group: GroupContext,
    pub triangles: Vec<TriangleClass>,
    pub genus: usize,
    pub num_cusps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub tri: usize,
    pub edge: Option<usize>,
    pub check: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.edge {
            Some(e) => write!(f, "triangle {} edge {}: {}", self.tri, e, self.check),
            None => write!(f, "triangle {}: {}", self.tri, self.check),
        }
    }
}

fn next(i: usize) -> usize {
    (i + 1) % 3
}

fn prev(i: usize) -> usize {
    (i + 2) % 3
}

/// Euler count `-2 chi` for a closed surface with punctures.
pub fn triangle_count(genus: usize, num_cusps: usize) -> i64 {
    4 * genus as i64 - 4 + 2 * num_cusps as i64
}

/// Two-triangle polyhedron of a once-punctured torus with generators `a`, `b` and cusp lift `v`.
pub fn punctured_torus_polyhedron(a: &Mat3, b: &Mat3, v: &Vec3) -> Result<QuotientPolyhedron> {
    let (x, y) = (Word::gen(0), Word::gen(1));
    let mut group = GroupContext::new(
        vec!["A".into(), "B".into()],
        vec![a.clone(), b.clone()],
        vec![Cusp { word: x.lower_commutator(&y), lift: v.clone() }],
    );
    let k = group.realize(&x.lower_commutator(&y));
    if k.apply(v) != *v {
        group.cusps[0].word = x.commutator(&y);
    }
    torus_polyhedron(group, &x, &y)
}

/// Builds the torus polyhedron from two generator words and the context's single cusp.
///
/// The quadrilateral `v, Xv, XYv, Yv` closes up when `v` is fixed by `X^-1 Y^-1 X Y`; when it is fixed by
/// `X Y X^-1 Y^-1` instead, the inverse pair is used.
pub fn torus_polyhedron(group: GroupContext, x: &Word, y: &Word) -> Result<QuotientPolyhedron> {
    let v = group.cusps.first().ok_or(Error::NotCusped)?.lift.clone();
    let k = group.realize(&x.lower_commutator(y));
    if !k.is_cusp_parabolic() {
        return Err(Error::NotCusped);
    }
    let (x, y) = if k.apply(&v) == v {
        (x.clone(), y.clone())
    } else if group.realize(&x.commutator(y)).apply(&v) == v {
        (x.inv(), y.inv())
    } else {
        return Err(Error::BadCuspLift);
    };
    let (ex, ey) = (group.elem(&x), group.elem(&y));
    let base = Corner { lift: v, word: Word::identity(), cusp: 0 };
    let xy = ex.mul(&ey);
    let glue = |tri, edge, g: &GroupElem| Gluing { tri, edge, g: g.clone() };
    let id = group.identity();
    let t0 = TriangleClass {
        corners: [base.clone(), base.moved(&ex), base.moved(&ey)],
        neighbors: [glue(1, 0, &id), glue(1, 1, &ex.inv()), glue(1, 2, &ey.inv())],
    };
    let t1 = TriangleClass {
        corners: [base.moved(&xy), base.moved(&ey), base.moved(&ex)],
        neighbors: [glue(0, 0, &id), glue(0, 1, &ex), glue(0, 2, &ey)],
    };
    let p = QuotientPolyhedron { group, triangles: vec![t0, t1], genus: 1, num_cusps: 1 };
    match p.validate().first() {
        None => Ok(p),
        Some(v) => Err(Error::InternalInconsistency(v.to_string())),
    }
}

impl QuotientPolyhedron {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let expected = triangle_count(self.genus, self.num_cusps);
        if self.triangles.len() as i64 != expected {
            out.push(Violation {
                tri: 0,
                edge: None,
                check: format!("Euler count: {} triangles, expected {}", self.triangles.len(), expected),
            });
        }
        let n = self.triangles.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            let bad = |edge, check: &str| Violation { tri: t, edge, check: check.to_string() };
            for c in &tri.corners {
                match self.group.cusps.get(c.cusp) {
                    Some(cusp) if self.group.realize(&c.word).apply(&cusp.lift) == c.lift => {}
                    _ => out.push(bad(None, "corner word does not reproduce its lift")),
                }
            }
            let [c0, c1, c2] = tri.lifts();
            if det3(c0, c1, c2).is_zero() {
                out.push(bad(None, "corners span a plane through the origin"));
            }
            for (i, nb) in tri.neighbors.iter().enumerate() {
                if nb.tri >= n || nb.edge > 2 {
                    out.push(bad(Some(i), "gluing points outside the polyhedron"));
                    continue;
                }
                if self.group.realize(&nb.g.word) != nb.g.mat {
                    out.push(bad(Some(i), "gluing word does not realize its matrix"));
                }
                let other = &self.triangles[nb.tri];
                let j = nb.edge;
                let first = nb.g.mat.apply(&other.corners[next(j)].lift);
                let second = nb.g.mat.apply(&other.corners[prev(j)].lift);
                if first != tri.corners[prev(i)].lift || second != tri.corners[next(i)].lift {
                    out.push(bad(Some(i), "endpoint matching"));
                }
                let back = &other.neighbors[j];
                let reciprocal = back.tri == t
                    && back.edge == i
                    && (&back.g.mat * &nb.g.mat) == Mat3::identity();
                if !reciprocal {
                    out.push(bad(Some(i), "reciprocity"));
                }
            }
        }
        out
    }

    /// The neighbor's corner opposite the shared edge, in this triangle's frame.
    pub fn transported_apex(&self, tri: usize, edge: usize) -> Vec3 {
        self.transported_apex_corner(tri, edge).lift
    }

    fn transported_apex_corner(&self, tri: usize, edge: usize) -> Corner {
        let nb = &self.triangles[tri].neighbors[edge];
        self.triangles[nb.tri].corners[nb.edge].moved(&nb.g)
    }

    pub fn apex_side(&self, tri: usize, edge: usize) -> Result<Side> {
        let [f1, f2, f3] = self.triangles[tri].lifts();
        side_of_face(&self.transported_apex(tri, edge), f1, f2, f3)
    }

    pub fn sides(&self) -> impl Iterator<Item = (usize, usize)> {
        (0..self.triangles.len()).flat_map(|t| (0..3).map(move |i| (t, i)))
    }

    /// Re-diagonalizes the quadrilateral formed by `tri` and its neighbor across `edge`.
    pub fn flip(&self, tri: usize, edge: usize) -> Result<QuotientPolyhedron> {
        let (t, i) = (tri, edge);
        let bad = |reason: &str| Error::BadFlip { tri: t, edge: i, reason: reason.into() };
        let nb = self.triangles.get(t).ok_or_else(|| bad("no such triangle"))?.neighbors[i].clone();
        let (u, j, g) = (nb.tri, nb.edge, nb.g);
        if u == t {
            return Err(bad("edge glues a triangle class to itself"));
        }
        let tt = &self.triangles[t];
        let c = tt.corners[i].clone();
        let a = tt.corners[next(i)].clone();
        let b = tt.corners[prev(i)].clone();
        let v = self.triangles[u].corners[j].moved(&g);
        let reference = sign(&det3(&c.lift, &a.lift, &b.lift));
        let turns = [
            det3(&c.lift, &a.lift, &v.lift),
            det3(&c.lift, &v.lift, &b.lift),
            det3(&a.lift, &v.lift, &b.lift),
        ];
        if reference == 0 || turns.iter().any(|d| sign(d) != reference) {
            return Err(bad("quadrilateral is not in strictly convex position"));
        }

        let id = self.group.identity();
        // Old outer sides and where they land: (old triangle, old edge) -> (new triangle, new edge).
        let moves = [((t, next(next(i))), (t, 2)), ((u, next(j)), (t, 0)), ((u, prev(j)), (u, 0)), ((t, next(i)), (u, 1))];
        let frame = |x: usize| if x == t { id.clone() } else { g.clone() };
        let relocate = |side: (usize, usize)| moves.iter().find(|(old, _)| *old == side).map(|(_, new)| *new);

        let mut out = self.clone();
        let placeholder = Gluing { tri: t, edge: 1, g: id.clone() };
        out.triangles[t] = TriangleClass {
            corners: [c.clone(), a, v.clone()],
            neighbors: [placeholder.clone(), Gluing { tri: u, edge: 2, g: id.clone() }, placeholder.clone()],
        };
        out.triangles[u] = TriangleClass {
            corners: [c, v, b],
            neighbors: [placeholder.clone(), placeholder, Gluing { tri: t, edge: 1, g: id.clone() }],
        };
        for ((old_tri, old_edge), (new_tri, new_edge)) in moves {
            let rec = &self.triangles[old_tri].neighbors[old_edge];
            let fs = frame(old_tri);
            let record = match relocate((rec.tri, rec.edge)) {
                Some((nt, ne)) => {
                    Gluing { tri: nt, edge: ne, g: fs.mul(&rec.g).mul(&frame(rec.tri).inv()) }
                }
                None => {
                    let g_new = fs.mul(&rec.g);
                    out.triangles[rec.tri].neighbors[rec.edge] =
                        Gluing { tri: new_tri, edge: new_edge, g: g_new.inv() };
                    Gluing { tri: rec.tri, edge: rec.edge, g: g_new }
                }
            };
            out.triangles[new_tri].neighbors[new_edge] = record;
        }
        Ok(out)
    }

    /// The new interior edge created by `flip(tri, edge)`, as a side of `tri`.
    pub fn flipped_edge(tri: usize) -> (usize, usize) {
        (tri, 1)
    }

    /// Every triangle as its own cell, without merging.
    pub fn cells(&self) -> CellDecomposition {
        let faces = self
            .triangles
            .iter()
            .map(|tri| Cell {
                corners: tri.corners.to_vec(),
                edges: (0..3)
                    .map(|k| {
                        let nb = &tri.neighbors[prev(k)];
                        Gluing { tri: nb.tri, edge: next(nb.edge), g: nb.g.clone() }
                    })
                    .collect(),
            })
            .collect();
        CellDecomposition {
            group: self.group.clone(),
            faces,
            genus: self.genus,
            num_cusps: self.num_cusps,
            trace: FlipTrace::default(),
        }
    }

    /// Removes every edge whose two faces are coplanar.
    pub fn merge_coplanar(&self) -> Result<CellDecomposition> {
        let mut coplanar = HashMap::new();
        for (t, i) in self.sides() {
            match self.apex_side(t, i)? {
                Side::Below => return Err(Error::NotConvexYet { tri: t, edge: i }),
                Side::Coplanar => {
                    coplanar.insert((t, i), ());
                }
                Side::Above => {}
            }
        }
        let n = self.triangles.len();
        let mut owner = vec![usize::MAX; n];
        let mut to_root: Vec<Option<GroupElem>> = vec![None; n];
        let mut components: Vec<Vec<usize>> = Vec::new();
        for root in 0..n {
            if owner[root] != usize::MAX {
                continue;
            }
            let id = components.len();
            owner[root] = id;
            to_root[root] = Some(self.group.identity());
            let mut members = vec![root];
            let mut queue = VecDeque::from([root]);
            while let Some(t) = queue.pop_front() {
                for i in 0..3 {
                    if !coplanar.contains_key(&(t, i)) {
                        continue;
                    }
                    let nb = &self.triangles[t].neighbors[i];
                    if owner[nb.tri] == usize::MAX {
                        owner[nb.tri] = id;
                        let m = to_root[t].as_ref().expect("visited").mul(&nb.g);
                        to_root[nb.tri] = Some(m);
                        members.push(nb.tri);
                        queue.push_back(nb.tri);
                    }
                }
            }
            components.push(members);
        }

        // Boundary of each component as a directed cycle of triangle sides in the root frame.
        let mut cycles: Vec<Vec<(usize, usize)>> = Vec::new();
        for members in &components {
            let mut by_start: HashMap<Vec3, (usize, usize)> = HashMap::new();
            let mut root_start = None;
            for &t in members {
                let m = &to_root[t].as_ref().expect("visited").mat;
                for i in 0..3 {
                    if coplanar.contains_key(&(t, i)) {
                        continue;
                    }
                    let start = m.apply(&self.triangles[t].corners[next(i)].lift);
                    if by_start.insert(start, (t, i)).is_some() {
                        return Err(Error::InternalInconsistency("polygon boundary is not simple".into()));
                    }
                    if t == members[0] && root_start.is_none_or(|(_, k)| next(i) < k) {
                        root_start = Some(((t, i), next(i)));
                    }
                }
            }
            let (first, _) = root_start
                .ok_or_else(|| Error::InternalInconsistency("root triangle has no boundary edge".into()))?;
            let mut cycle = vec![first];
            loop {
                let (t, i) = *cycle.last().expect("nonempty");
                let m = &to_root[t].as_ref().expect("visited").mat;
                let end = m.apply(&self.triangles[t].corners[prev(i)].lift);
                let step = *by_start
                    .get(&end)
                    .ok_or_else(|| Error::InternalInconsistency("polygon boundary is open".into()))?;
                if step == first {
                    break;
                }
                cycle.push(step);
                if cycle.len() > by_start.len() {
                    return Err(Error::InternalInconsistency("polygon boundary does not close".into()));
                }
            }
            if cycle.len() != by_start.len() {
                return Err(Error::InternalInconsistency("polygon boundary has several loops".into()));
            }
            cycles.push(cycle);
        }

        let position: HashMap<(usize, usize), usize> = cycles
            .iter()
            .flat_map(|c| c.iter().enumerate().map(|(k, &side)| (side, k)))
            .collect();
        let faces = cycles
            .iter()
            .map(|cycle| {
                let corners = cycle
                    .iter()
                    .map(|&(t, i)| {
                        let m = to_root[t].as_ref().expect("visited");
                        self.triangles[t].corners[next(i)].moved(m)
                    })
                    .collect();
                let edges = cycle
                    .iter()
                    .map(|&(t, i)| {
                        let nb = &self.triangles[t].neighbors[i];
                        let own = to_root[t].as_ref().expect("visited");
                        let theirs = to_root[nb.tri].as_ref().expect("visited");
                        Gluing {
                            tri: owner[nb.tri],
                            edge: position[&(nb.tri, nb.edge)],
                            g: own.mul(&nb.g).mul(&theirs.inv()),
                        }
                    })
                    .collect();
                Cell { corners, edges }
            })
            .collect();
        let mut merges: Vec<usize> = coplanar
            .keys()
            .map(|&(t, i)| {
                let nb = &self.triangles[t].neighbors[i];
                (3 * t + i).min(3 * nb.tri + nb.edge)
            })
            .collect();
        merges.sort_unstable();
        merges.dedup();
        Ok(CellDecomposition {
            group: self.group.clone(),
            faces,
            genus: self.genus,
            num_cusps: self.num_cusps,
            trace: FlipTrace { merges, ..FlipTrace::default() },
        })
    }

    /// Recomputes every lift and gluing matrix from its word in another realization of the group.
    pub fn realized_in(&self, group: &GroupContext) -> QuotientPolyhedron {
        let corner = |c: &Corner| Corner {
            lift: group.realize(&c.word).apply(&group.cusps[c.cusp].lift),
            word: c.word.clone(),
            cusp: c.cusp,
        };
        let mut out = self.clone();
        out.group = group.clone();
        for tri in &mut out.triangles {
            tri.corners = std::array::from_fn(|k| corner(&tri.corners[k]));
            for nb in &mut tri.neighbors {
                nb.g = group.elem(&nb.g.word);
            }
        }
        out
    }
}

/// Edge `k` joins corners `k` and `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub corners: Vec<Corner>,
    pub edges: Vec<Gluing>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDecomposition {
    pub group: GroupContext,
    pub faces: Vec<Cell>,
    pub genus: usize,
    pub num_cusps: usize,
    pub trace: FlipTrace,
}

impl CellDecomposition {
    pub fn edge_count(&self) -> usize {
        self.faces.iter().map(|f| f.edges.len()).sum::<usize>() / 2
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (f, cell) in self.faces.iter().enumerate() {
            let bad = |edge, check: &str| Violation { tri: f, edge, check: check.to_string() };
            let n = cell.corners.len();
            if n < 3 || cell.edges.len() != n {
                out.push(bad(None, "cell needs at least three corners and one edge per corner"));
                continue;
            }
            let lift = |k: usize| &cell.corners[k % n].lift;
            let base = det3(lift(0), lift(1), lift(2));
            if base.is_zero() {
                out.push(bad(None, "plane passes through the origin"));
                continue;
            }
            for k in 3..n {
                if side_of_face(lift(k), lift(0), lift(1), lift(2)) != Ok(Side::Coplanar) {
                    out.push(bad(None, "corners are not coplanar"));
                }
            }
            if (0..n).any(|k| sign(&det3(lift(k), lift(k + 1), lift(k + 2))) != sign(&base)) {
                out.push(bad(None, "corners are not in strictly convex position"));
            }
            for (k, e) in cell.edges.iter().enumerate() {
                let Some(other) = self.faces.get(e.tri).filter(|o| e.edge < o.edges.len()) else {
                    out.push(bad(Some(k), "gluing points outside the decomposition"));
                    continue;
                };
                let m = other.corners.len();
                let start = e.g.mat.apply(&other.corners[e.edge].lift);
                let end = e.g.mat.apply(&other.corners[(e.edge + 1) % m].lift);
                if start != *lift(k + 1) || end != *lift(k) {
                    out.push(bad(Some(k), "endpoint matching"));
                }
                let back = &other.edges[e.edge];
                if back.tri != f || back.edge != k || &back.g.mat * &e.g.mat != Mat3::identity() {
                    out.push(bad(Some(k), "reciprocity"));
                }
                let apex = e.g.mat.apply(&other.corners[(e.edge + 2) % m].lift);
                if side_of_face(&apex, lift(0), lift(1), lift(2)) != Ok(Side::Above) {
                    out.push(bad(Some(k), "neighboring corner is not strictly above"));
                }
            }
        }
        out
    }

    pub fn realized_in(&self, group: &GroupContext) -> CellDecomposition {
        let mut out = self.clone();
        out.group = group.clone();
        for cell in &mut out.faces {
            for c in &mut cell.corners {
                c.lift = group.realize(&c.word).apply(&group.cusps[c.cusp].lift);
            }
            for e in &mut cell.edges {
                e.g = group.elem(&e.g.word);
            }
        }
        out
    }
}

/// Bound on the power of a cusp stabilizer tried when aligning two cells.
pub const ISOMORPHISM_BOUND: i64 = 8;

/// Corner sequences of a cell seen from each corner, which is moved back to its cusp's base lift.
fn normalized_rotations(group: &GroupContext, cell: &Cell) -> Vec<Vec<Vec3>> {
    let n = cell.corners.len();
    (0..n)
        .map(|k| {
            let back = group.realize(&cell.corners[k].word.inv());
            (0..n).map(|m| back.apply(&cell.corners[(k + m) % n].lift)).collect()
        })
        .collect()
}

/// Whether the two decompositions have the same cells up to the group action, within the stabilizer bound.
pub fn decompositions_isomorphic(a: &CellDecomposition, b: &CellDecomposition) -> bool {
    if a.faces.len() != b.faces.len() || a.group.generators != b.group.generators {
        return false;
    }
    let group = &a.group;
    let stabilizers: Vec<Vec<Mat3>> = group
        .cusps
        .iter()
        .map(|c| {
            let k = group.realize(&c.word);
            (-ISOMORPHISM_BOUND..=ISOMORPHISM_BOUND).map(|e| k.pow(e).expect("invertible")).collect()
        })
        .collect();
    let targets: Vec<Vec<Vec<Vec3>>> = a.faces.iter().map(|f| normalized_rotations(group, f)).collect();
    let mut used = vec![false; a.faces.len()];
    for cell in &b.faces {
        let seq = &normalized_rotations(group, cell)[0];
        let cusp = cell.corners[0].cusp;
        let found = (0..a.faces.len()).find(|&fa| {
            !used[fa]
                && a.faces[fa].corners.len() == seq.len()
                && stabilizers[cusp].iter().any(|k| {
                    let moved: Vec<Vec3> = seq.iter().map(|x| k.apply(x)).collect();
                    targets[fa].contains(&moved)
                })
        });
        match found {
            Some(fa) => used[fa] = true,
            None => return false,
        }
    }
    true
}

pub fn polyhedra_isomorphic(a: &QuotientPolyhedron, b: &QuotientPolyhedron) -> bool {
    decompositions_isomorphic(&a.cells(), &b.cells())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn lifted_pair() -> (Mat3, Mat3) {
        let a = Mat3::from_rows([
            [ratio(7, 2), int(3), ratio(3, 2)],
            [int(3), int(3), int(1)],
            [ratio(3, 2), int(1), ratio(3, 2)],
        ]);
        let b = Mat3::from_rows([
            [ratio(7, 2), int(-3), ratio(3, 2)],
            [int(-3), int(3), int(-1)],
            [ratio(3, 2), int(-1), ratio(3, 2)],
        ]);
        (a, b)
    }

    fn start() -> QuotientPolyhedron {
        let (a, b) = lifted_pair();
        punctured_torus_polyhedron(&a, &b, &Vec3::from_ints([1, 0, -1])).unwrap()
    }

    #[test]
    fn torus_builder() {
        let p = start();
        assert!(p.validate().is_empty());
        assert_eq!(p.triangles.len(), 2);
        let (a, b) = lifted_pair();
        assert!(matches!(
            punctured_torus_polyhedron(&Mat3::identity(), &Mat3::identity(), &Vec3::basis(0)),
            Err(Error::NotCusped)
        ));
        assert!(matches!(
            punctured_torus_polyhedron(&a, &b, &Vec3::basis(0)),
            Err(Error::BadCuspLift)
        ));
    }

    #[test]
    fn corrupted_inputs_are_reported() {
        let mut p = start();
        p.triangles[0].neighbors[1].g = p.group.identity();
        let v = p.validate();
        assert!(v.iter().any(|x| x.check == "endpoint matching" && x.edge == Some(1)));
        let mut q = start();
        q.triangles.pop();
        let v = q.validate();
        assert!(v.iter().any(|x| x.check.starts_with("Euler count: 1 triangles, expected 2")));
    }

    #[test]
    fn apex_transport() {
        let p = start();
        let (a, b) = lifted_pair();
        let v = Vec3::from_ints([1, 0, -1]);
        assert_eq!(p.transported_apex(0, 0), a.apply(&b.apply(&v)));
        for (t, i) in p.sides() {
            let nb = &p.triangles[t].neighbors[i];
            let other = &p.triangles[nb.tri];
            let back = &other.neighbors[nb.edge];
            let round = back.g.mat.apply(&nb.g.mat.apply(&p.triangles[t].corners[i].lift));
            assert_eq!(round, p.triangles[t].corners[i].lift);
            assert_eq!(nb.g.mat.apply(&other.corners[next(nb.edge)].lift), p.triangles[t].corners[prev(i)].lift);
        }
    }

    #[test]
    fn flips_stay_valid_and_invert() {
        let p = start();
        for (t, i) in p.sides() {
            let q = p.flip(t, i).unwrap();
            assert!(q.validate().is_empty(), "{:?}", q.validate());
            let (ft, fi) = QuotientPolyhedron::flipped_edge(t);
            let back = q.flip(ft, fi).unwrap();
            assert!(back.validate().is_empty());
            assert!(polyhedra_isomorphic(&back, &p));
            assert!(!polyhedra_isomorphic(&q, &p));
        }
    }

    #[test]
    fn cells_of_a_polyhedron_are_valid_when_convex() {
        let q = start().flip(0, 0).unwrap();
        let cells = q.merge_coplanar().unwrap();
        assert_eq!(cells.faces.len(), 2);
        assert!(cells.validate().is_empty(), "{:?}", cells.validate());
        assert_eq!(cells, q.cells());
        assert!(matches!(start().merge_coplanar(), Err(Error::NotConvexYet { tri: 0, edge: 0 })));
    }

    #[test]
    fn realization_round_trip() {
        let q = start().flip(0, 0).unwrap();
        assert_eq!(q.realized_in(&q.group), q);
    }
}
