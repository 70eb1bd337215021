//! The flip loop, random scrambling, and truncated-orbit oracles for convexity and height.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::Vec3;
use crate::group::{orbit_ball, GroupContext, OrbitBall};
use crate::polyhedron::{CellDecomposition, Corner, QuotientPolyhedron};
use crate::predicates::{FacePlane, Side};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipStep {
    pub tri: usize,
    pub edge: usize,
    pub apex: Vec3,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlipTrace {
    pub steps: Vec<FlipStep>,
    pub terminated: bool,
    /// Removed edges, each named by `3 * triangle + edge` of its lower side.
    pub merges: Vec<usize>,
}

pub fn is_admissible(p: &QuotientPolyhedron, tri: usize, edge: usize) -> Result<bool> {
    Ok(p.apex_side(tri, edge)? == Side::Below)
}

/// First admissible side in ascending (triangle, edge) order.
pub fn first_admissible(p: &QuotientPolyhedron) -> Result<Option<(usize, usize)>> {
    for (t, i) in p.sides() {
        if is_admissible(p, t, i)? {
            return Ok(Some((t, i)));
        }
    }
    Ok(None)
}

/// Full record of a run: every polyhedron visited, the final cells and the trace.
#[derive(Clone, Debug)]
pub struct CanonRun {
    pub history: Vec<QuotientPolyhedron>,
    pub decomposition: CellDecomposition,
    pub trace: FlipTrace,
}

impl CanonRun {
    pub fn terminal(&self) -> &QuotientPolyhedron {
        self.history.last().expect("history starts with the input")
    }
}

pub fn canonize_run(p: &QuotientPolyhedron, max_steps: usize) -> Result<CanonRun> {
    let mut history = vec![p.clone()];
    let mut trace = FlipTrace::default();
    loop {
        let current = history.last().expect("nonempty");
        let Some((t, i)) = first_admissible(current)? else {
            break;
        };
        if trace.steps.len() == max_steps {
            return Err(Error::StepBudgetExceeded(max_steps));
        }
        let apex = current.transported_apex(t, i);
        let next = current.flip(t, i)?;
        trace.steps.push(FlipStep { tri: t, edge: i, apex });
        history.push(next);
    }
    let mut decomposition = history.last().expect("nonempty").merge_coplanar()?;
    trace.terminated = true;
    trace.merges = std::mem::take(&mut decomposition.trace.merges);
    decomposition.trace = trace.clone();
    Ok(CanonRun { history, decomposition, trace })
}

pub fn canonize(p: &QuotientPolyhedron, max_steps: usize) -> Result<(CellDecomposition, FlipTrace)> {
    let run = canonize_run(p, max_steps)?;
    Ok((run.decomposition, run.trace))
}

/// Applies `n` seeded random flips, each drawn from the currently non-admissible, flippable sides.
pub fn scramble(p: &QuotientPolyhedron, n: usize, seed: u64) -> Result<QuotientPolyhedron> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = p.clone();
    for _ in 0..n {
        let mut options = Vec::new();
        for (t, i) in current.sides() {
            if is_admissible(&current, t, i)? {
                continue;
            }
            if let Ok(next) = current.flip(t, i) {
                options.push(next);
            }
        }
        current = options.choose(&mut rng).cloned().ok_or(Error::CannotScramble)?;
    }
    Ok(current)
}

/// Number of ball points strictly below the face.
pub fn face_height(face: [&Vec3; 3], ball: &OrbitBall) -> usize {
    match FacePlane::through(face[0], face[1], face[2]) {
        Ok(plane) => points_below(&plane, ball),
        Err(_) => 0,
    }
}

fn points_below(plane: &FacePlane, ball: &OrbitBall) -> usize {
    ball.points.iter().filter(|x| plane.side(x) == Side::Below).count()
}

/// `g x` is below `F` exactly when `x` is below `g^-1 F`, so each corner pulls the face back to the base ball.
fn clear_at_corners(group: &GroupContext, corners: &[Corner], ball: &OrbitBall) -> bool {
    let plane = [&corners[0].lift, &corners[1].lift, &corners[2].lift];
    corners.iter().all(|c| {
        let back = group.realize(&c.word.inv());
        let [f1, f2, f3] = plane.map(|x| back.apply(x));
        FacePlane::through(&f1, &f2, &f3).is_ok_and(|p| points_below(&p, ball) == 0)
    })
}

pub fn cusp_ball(p: &QuotientPolyhedron, depth: usize) -> OrbitBall {
    group_ball(&p.group, depth)
}

fn group_ball(g: &GroupContext, depth: usize) -> OrbitBall {
    let lifts: Vec<Vec3> = g.cusps.iter().map(|c| c.lift.clone()).collect();
    orbit_ball(&g.generators, &lifts, depth)
}

/// Heights of the cells against the base ball, each cell's plane taken through its first three corners.
pub fn cell_heights(d: &CellDecomposition, depth: usize) -> Vec<usize> {
    let ball = group_ball(&d.group, depth);
    d.faces
        .par_iter()
        .map(|f| face_height([&f.corners[0].lift, &f.corners[1].lift, &f.corners[2].lift], &ball))
        .collect()
}

/// Cell version of [`convexity_certificate`].
pub fn cells_certificate(d: &CellDecomposition, depth: usize) -> bool {
    let ball = group_ball(&d.group, depth);
    d.faces.par_iter().all(|f| clear_at_corners(&d.group, &f.corners, &ball))
}

pub fn total_height(p: &QuotientPolyhedron, ball: &OrbitBall) -> usize {
    p.triangles.par_iter().map(|t| face_height(t.lifts(), ball)).sum()
}

/// True iff no orbit point within `depth` of some corner lies strictly below that face class.
pub fn convexity_certificate(p: &QuotientPolyhedron, depth: usize) -> bool {
    let ball = cusp_ball(p, depth);
    p.triangles.par_iter().all(|t| clear_at_corners(&p.group, &t.corners, &ball))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio, Mat3};
    use crate::polyhedron::{decompositions_isomorphic, punctured_torus_polyhedron};

    fn start() -> QuotientPolyhedron {
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
        punctured_torus_polyhedron(&a, &b, &Vec3::from_ints([1, 0, -1])).unwrap()
    }

    #[test]
    fn single_flip_run() {
        let p = start();
        assert_eq!(is_admissible(&p, 0, 0), Ok(true));
        let run = canonize_run(&p, DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(run.trace.steps.len(), 1);
        assert!(run.trace.merges.is_empty());
        assert!(run.trace.terminated);
        assert_eq!(run.decomposition.faces.len(), 2);
        let end = run.terminal();
        for (t, i) in end.sides() {
            assert_eq!(is_admissible(end, t, i), Ok(false));
        }
        assert_eq!(canonize(&p, DEFAULT_MAX_STEPS).unwrap(), (run.decomposition.clone(), run.trace.clone()));
        assert_eq!(canonize(&p, 0), Err(Error::StepBudgetExceeded(0)));
    }

    #[test]
    fn scramble_then_recover() {
        let end = canonize_run(&start(), DEFAULT_MAX_STEPS).unwrap();
        let canonical = end.terminal().clone();
        assert_eq!(scramble(&canonical, 0, 3).unwrap(), canonical);
        for seed in 0..3 {
            let s = scramble(&canonical, 2, seed).unwrap();
            assert!(s.validate().is_empty());
            let again = canonize_run(&s, DEFAULT_MAX_STEPS).unwrap();
            assert!(again.trace.steps.len() >= 2);
            assert!(decompositions_isomorphic(&again.decomposition, &end.decomposition));
        }
    }

    #[test]
    fn heights_and_certificates() {
        let p = start();
        let ball = cusp_ball(&p, 6);
        assert!(face_height(p.triangles[0].lifts(), &ball) >= 1);
        assert_eq!(face_height(p.triangles[0].lifts(), &OrbitBall::empty()), 0);
        assert!(!convexity_certificate(&p, 2));
        assert!(convexity_certificate(&p, 0));
        let end = canonize_run(&p, DEFAULT_MAX_STEPS).unwrap();
        assert!(convexity_certificate(end.terminal(), 6));
        assert!(total_height(end.terminal(), &ball) < total_height(&p, &ball));
        assert!(cells_certificate(&end.decomposition, 6));
        assert!(!cells_certificate(&p.cells(), 2));
        assert_eq!(cell_heights(&p.cells(), 6)[0], face_height(p.triangles[0].lifts(), &ball));
    }
}
