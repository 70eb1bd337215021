//! Builders for the surface families, cusp-lift selection and parameter sweeps.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::canonize::{canonize_run, FlipTrace, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::exact::{format_scalar, int, Mat3, Scalar, Vec3};
use crate::group::{Cusp, GroupContext, Word};
use crate::polyhedron::{decompositions_isomorphic, torus_polyhedron, CellDecomposition, QuotientPolyhedron};
use crate::predicates::lifts_compatible;

pub type Mat2 = [[Scalar; 2]; 2];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Psl2Lift { a: Mat2, b: Mat2 },
    Series { z: Scalar, w: Scalar },
    Goldman { values: [Scalar; 6] },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Explicit => "explicit",
            Provenance::Psl2Lift { .. } => "psl2-lift",
            Provenance::Series { .. } => "series",
            Provenance::Goldman { .. } => "goldman",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspSpec {
    pub word: Word,
    pub fixed: Vec3,
    pub scale: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureSpec {
    pub genus: usize,
    pub names: Vec<String>,
    pub generators: Vec<Mat3>,
    pub cusps: Vec<CuspSpec>,
    pub provenance: Provenance,
}

impl StructureSpec {
    /// Checks generators and cusps, then returns the spec.
    pub fn explicit(
        genus: usize,
        names: Vec<String>,
        generators: Vec<Mat3>,
        cusps: Vec<CuspSpec>,
        provenance: Provenance,
    ) -> Result<StructureSpec> {
        let spec = StructureSpec { genus, names, generators, cusps, provenance };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.generators.iter().any(|g| !g.det().is_one()) {
            return Err(Error::InternalInconsistency("generator with determinant other than 1".into()));
        }
        if self.cusps.is_empty() {
            return Err(Error::NotCusped);
        }
        let ctx = self.bare_context();
        for (k, c) in self.cusps.iter().enumerate() {
            let m = ctx.realize(&c.word);
            if !m.is_cusp_parabolic() {
                return Err(Error::NotCusped);
            }
            if m.apply(&c.fixed) != c.fixed || c.fixed.is_zero() {
                return Err(Error::BadCuspLift);
            }
            if !c.scale.is_positive() || (k == 0 && !c.scale.is_one()) {
                return Err(Error::BadCuspLift);
            }
        }
        Ok(())
    }

    fn bare_context(&self) -> GroupContext {
        GroupContext::new(self.names.clone(), self.generators.clone(), Vec::new())
    }

    /// Generators with the chosen cusp lifts.
    pub fn group(&self) -> Result<GroupContext> {
        let lifts = choose_compatible_lifts(self)?;
        let cusps = self
            .cusps
            .iter()
            .zip(lifts)
            .map(|(c, lift)| Cusp { word: c.word.clone(), lift })
            .collect();
        Ok(GroupContext::new(self.names.clone(), self.generators.clone(), cusps))
    }

    /// Two-triangle starting polyhedron on the first two generators.
    pub fn initial_polyhedron(&self) -> Result<QuotientPolyhedron> {
        if self.genus != 1 || self.cusps.len() != 1 || self.generators.len() != 2 {
            return Err(Error::InternalInconsistency(
                "the starting triangulation is only built for once-punctured tori".into(),
            ));
        }
        torus_polyhedron(self.group()?, &Word::gen(0), &Word::gen(1))
    }
}

/// Image of a unimodular 2x2 matrix acting on symmetric forms by `X -> M X M^T`,
/// in coordinates `X = [[x0 + x2, x1], [x1, x0 - x2]]`.
pub fn sym_square_lift(m: &Mat2) -> Result<Mat3> {
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if !det.is_one() {
        return Err(Error::NotUnimodular(format_scalar(&det)));
    }
    let (one, zero) = (int(1), int(0));
    let basis: [Mat2; 3] = [
        [[one.clone(), zero.clone()], [zero.clone(), one.clone()]],
        [[zero.clone(), one.clone()], [one.clone(), zero.clone()]],
        [[one.clone(), zero.clone()], [zero.clone(), -one.clone()]],
    ];
    let mul2 = |x: &Mat2, y: &Mat2| -> Mat2 {
        std::array::from_fn(|i| std::array::from_fn(|j| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j]))
    };
    let mt: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| m[j][i].clone()));
    let half = Scalar::new(1.into(), 2.into());
    let cols: Vec<[Scalar; 3]> = basis
        .iter()
        .map(|x| {
            let y = mul2(&mul2(m, x), &mt);
            [(&y[0][0] + &y[1][1]) * &half, y[0][1].clone(), (&y[0][0] - &y[1][1]) * &half]
        })
        .collect();
    Ok(Mat3(std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()))))
}

fn torus_from_pair(a: Mat3, b: Mat3, provenance: Provenance) -> Result<StructureSpec> {
    let names = vec!["A".to_string(), "B".to_string()];
    let word = Word::gen(0).lower_commutator(&Word::gen(1));
    let ctx = GroupContext::new(names.clone(), vec![a.clone(), b.clone()], Vec::new());
    let k = ctx.realize(&word);
    if !k.is_cusp_parabolic() {
        return Err(Error::NotCusped);
    }
    let fixed = k.fixed_vector()?;
    StructureSpec::explicit(1, names, vec![a, b], vec![CuspSpec { word, fixed, scale: int(1) }], provenance)
}

/// Hyperbolic once-punctured torus from a pair of unimodular 2x2 matrices.
pub fn psl2_structure(a: &Mat2, b: &Mat2) -> Result<StructureSpec> {
    torus_from_pair(
        sym_square_lift(a)?,
        sym_square_lift(b)?,
        Provenance::Psl2Lift { a: a.clone(), b: b.clone() },
    )
}

pub fn series_matrices(z: &Scalar, w: &Scalar) -> Result<(Mat2, Mat2)> {
    if z.is_zero() || w.is_zero() {
        return Err(Error::DegenerateParams("z and w must be nonzero".into()));
    }
    let one = int(1);
    let a = [[(z * z + &one) / w, z.clone()], [z.clone(), w.clone()]];
    let b = [[(w * w + &one) / z, -w], [-w, z.clone()]];
    Ok((a, b))
}

/// Two-parameter hyperbolic family.
pub fn series_structure(z: &Scalar, w: &Scalar) -> Result<StructureSpec> {
    let (a, b) = series_matrices(z, w)?;
    torus_from_pair(
        sym_square_lift(&a)?,
        sym_square_lift(&b)?,
        Provenance::Series { z: z.clone(), w: w.clone() },
    )
}

pub const GOLDMAN_FIELDS: [&str; 6] = ["c1", "c2", "b1", "a", "b", "e"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldmanParams {
    pub c1: Scalar,
    pub c2: Scalar,
    pub b1: Scalar,
    pub a: Scalar,
    pub b: Scalar,
    pub e: Scalar,
    pub a2: Scalar,
}

impl GoldmanParams {
    pub fn values(&self) -> [Scalar; 6] {
        [&self.c1, &self.c2, &self.b1, &self.a, &self.b, &self.e].map(Clone::clone)
    }
}

fn pw(x: &Scalar, n: i32) -> Scalar {
    num_traits::pow::Pow::pow(x, n)
}

/// Coefficient of `a2` and the right-hand side of the linear constraint fixing `a2`.
pub fn goldman_constraint(v: &[Scalar; 6]) -> (Scalar, Scalar) {
    let [c1, c2, b1, a, b, e] = v;
    let (a3, a6, b2, b3, b4) = (pw(a, 3), pw(a, 6), pw(b, 2), pw(b, 3), pw(b, 4));
    let one = int(1);
    let coef = &a3 * &b3 * b1 * pw(e, 6) - &b4 * pw(e, 8)
        + (&a3 * &b3 * c1 - &a3 * &b3) * c2 * pw(e, 3)
        + (&a6 * &b2 * b1 * c1 - &a6 * &b2 * b1) * (&one - c2) * e;
    let rhs = &a3 * &b3 * pw(e, 6) + &a3 * b * b1 * pw(e, 5) - &a6 * b1 * c1 * c2
        - int(2) * &a3 * &b2 * pw(e, 4)
        - &b2 * pw(e, 7)
        + &a6 * b1 * c1
        + &a3 * b * c1 * c2 * pw(e, 2)
        + (&a6 * &b2 * c1 - &a6 * &b2) * (&one - c2) * e;
    (coef, rhs)
}

pub fn goldman_matrices(p: &GoldmanParams) -> (Mat3, Mat3) {
    let GoldmanParams { c1, c2, b1, a, b, e, a2 } = p;
    let z = int(0);
    let be2 = b * e * e;
    let ee = Mat3([
        [a * b1 + a * c1 / &be2, a.clone(), a / &be2],
        [a * b1 - &be2 / (a * a), a.clone(), z.clone()],
        [-(a * b1), -a, z.clone()],
    ]);
    let ff = Mat3([
        [a2 * b, z.clone(), a2 * b - (b * e).recip()],
        [-b, z.clone(), -b],
        [c2 * b, e.clone(), b * c2 + e],
    ]);
    (ee, ff)
}

/// Goldman-coordinate projective structure from named parameters `(c1, c2, b1, a, b, e)`.
pub fn goldman_structure(v: &[Scalar; 6]) -> Result<(StructureSpec, GoldmanParams)> {
    let [c1, c2, b1, a, b, e] = v;
    let one = int(1);
    if !(c1 > &one && c2 > &one && a.is_positive() && b.is_positive() && e.is_positive()) {
        return Err(Error::NotConvex("need c1 > 1, c2 > 1 and a, b, e > 0".into()));
    }
    let (coef, rhs) = goldman_constraint(v);
    if coef.is_zero() {
        return Err(Error::DegenerateParams("a2 has a vanishing coefficient".into()));
    }
    let a2 = rhs / coef;
    if &a2 * b1 <= one {
        return Err(Error::NotConvex(format!("a2 * b1 = {} is not above 1", format_scalar(&(&a2 * b1)))));
    }
    let params = GoldmanParams {
        c1: c1.clone(),
        c2: c2.clone(),
        b1: b1.clone(),
        a: a.clone(),
        b: b.clone(),
        e: e.clone(),
        a2,
    };
    let (ee, ff) = goldman_matrices(&params);
    if !ee.det().is_one() || !ff.det().is_one() {
        return Err(Error::InternalInconsistency("face pairings are not unimodular".into()));
    }
    let names = vec!["E".to_string(), "F".to_string()];
    let word = Word::gen(0).commutator(&Word::gen(1));
    let ctx = GroupContext::new(names.clone(), vec![ee.clone(), ff.clone()], Vec::new());
    let k = ctx.realize(&word);
    if !k.is_cusp_parabolic() {
        return Err(Error::InternalInconsistency("commutator of the face pairings is not parabolic".into()));
    }
    let fixed = k.fixed_vector()?;
    let spec = StructureSpec::explicit(
        1,
        names,
        vec![ee, ff],
        vec![CuspSpec { word, fixed, scale: int(1) }],
        Provenance::Goldman { values: v.clone() },
    )?;
    Ok((spec, params))
}

/// Readings of a positional six-tuple, tried in order.
pub const GOLDMAN_ORDERINGS: [[&str; 6]; 5] = [
    ["c1", "c2", "b1", "a", "b", "e"],
    ["c1", "c2", "b", "a", "e", "b1"],
    ["c1", "c2", "b", "e", "a", "b1"],
    ["c1", "b1", "b", "a", "e", "c2"],
    ["c1", "b1", "b", "e", "a", "c2"],
];

/// Rearranges a positional tuple read under `ordering` into `(c1, c2, b1, a, b, e)`.
pub fn named_values(tuple: &[Scalar; 6], ordering: &[&str; 6]) -> [Scalar; 6] {
    std::array::from_fn(|k| {
        let pos = ordering.iter().position(|n| *n == GOLDMAN_FIELDS[k]).expect("ordering names every field");
        tuple[pos].clone()
    })
}

#[derive(Clone, Debug)]
pub struct Reconciled {
    pub ordering: [&'static str; 6],
    pub spec: StructureSpec,
    pub params: GoldmanParams,
    /// Orderings rejected before the accepted one, with the reason.
    pub rejected: Vec<([&'static str; 6], Error)>,
}

/// Picks the first ordering whose structure builds and yields a starting triangulation.
pub fn reconcile_goldman(tuple: &[Scalar; 6]) -> std::result::Result<Reconciled, Vec<([&'static str; 6], Error)>> {
    let mut rejected = Vec::new();
    for ordering in GOLDMAN_ORDERINGS {
        let attempt = goldman_structure(&named_values(tuple, &ordering))
            .and_then(|(spec, params)| spec.initial_polyhedron().map(|_| (spec, params)));
        match attempt {
            Ok((spec, params)) => return Ok(Reconciled { ordering, spec, params, rejected }),
            Err(e) => rejected.push((ordering, e)),
        }
    }
    Err(rejected)
}

/// Cusp lifts on a common sheet; the first keeps scale 1.
pub fn choose_compatible_lifts(spec: &StructureSpec) -> Result<Vec<Vec3>> {
    let first = spec.cusps.first().ok_or(Error::NotCusped)?;
    let base = first.fixed.scale(&first.scale);
    let ctx = spec.bare_context();
    let words: Vec<Word> = ctx.words_up_to(2).into_iter().filter(|w| !w.is_empty()).collect();
    let mut lifts = vec![base.clone()];
    'cusps: for cusp in &spec.cusps[1..] {
        let candidate = cusp.fixed.scale(&cusp.scale);
        // A cusp in the orbit of the first one has its lift forced by the group.
        for w in &words {
            let image = ctx.realize(w).apply(&base);
            if image.ratio_to(&candidate).is_some() {
                lifts.push(image);
                continue 'cusps;
            }
        }
        let mut last = Error::BadWitness("no witness available".into());
        for w in ctx.words_up_to(1).iter().filter(|w| !w.is_empty()) {
            match lifts_compatible(&base, &candidate, &ctx.realize(w)) {
                Ok(true) => {
                    lifts.push(candidate);
                    continue 'cusps;
                }
                Ok(false) => {
                    lifts.push(-&candidate);
                    continue 'cusps;
                }
                Err(e @ Error::BadWitness(_)) => last = e,
                Err(e) => return Err(e),
            }
        }
        return Err(last);
    }
    Ok(lifts)
}

#[derive(Clone, Debug)]
pub struct SweepSample {
    pub lambda: Scalar,
    pub tuple: [Scalar; 6],
    pub outcome: Result<(CellDecomposition, FlipTrace)>,
}

#[derive(Clone, Debug)]
pub struct Bracket {
    pub lo: Scalar,
    pub hi: Scalar,
    pub lo_cells: CellDecomposition,
    pub hi_cells: CellDecomposition,
    /// Set when refinement stopped early, e.g. at a parameter outside the convex region.
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub ordering: [&'static str; 6],
    pub samples: Vec<SweepSample>,
    pub brackets: Vec<Bracket>,
}

pub fn interpolate(start: &[Scalar; 6], end: &[Scalar; 6], lambda: &Scalar) -> [Scalar; 6] {
    let keep = int(1) - lambda;
    std::array::from_fn(|k| &keep * &start[k] + lambda * &end[k])
}

/// Canonical cells of the Goldman structure at one point of the segment.
pub fn sample_at(tuple: &[Scalar; 6], ordering: &[&str; 6]) -> Result<(CellDecomposition, FlipTrace)> {
    let (spec, _) = goldman_structure(&named_values(tuple, ordering))?;
    let run = canonize_run(&spec.initial_polyhedron()?, DEFAULT_MAX_STEPS)?;
    Ok((run.decomposition, run.trace))
}

/// Same cells after carrying the words of `b` into the realization of `a`.
pub fn same_cells(a: &CellDecomposition, b: &CellDecomposition) -> bool {
    decompositions_isomorphic(a, &b.realized_in(&a.group))
}

pub fn sweep(start: &[Scalar; 6], end: &[Scalar; 6], samples: usize, bisect_width: &Scalar) -> Result<SweepReport> {
    let pick = |t: &[Scalar; 6]| {
        reconcile_goldman(t).map_err(|tried| {
            let reasons: Vec<String> = tried.iter().map(|(o, e)| format!("{}: {e}", o.join(","))).collect();
            Error::NotConvex(format!("no ordering accepted: {}", reasons.join("; ")))
        })
    };
    let ordering = pick(start)?.ordering;
    pick(end)?;
    if let Err(e) = goldman_structure(&named_values(end, &ordering)) {
        return Err(Error::NotConvex(format!("end point rejects the start ordering: {e}")));
    }
    let lambdas: Vec<Scalar> = match samples {
        0 => Vec::new(),
        1 => vec![int(0)],
        n => (0..n).map(|i| Scalar::new(i.into(), (n - 1).into())).collect(),
    };
    let evaluated: Vec<SweepSample> = lambdas
        .into_par_iter()
        .map(|lambda| {
            let tuple = interpolate(start, end, &lambda);
            let outcome = sample_at(&tuple, &ordering);
            SweepSample { lambda, tuple, outcome }
        })
        .collect();
    let valid: Vec<&SweepSample> = evaluated.iter().filter(|s| s.outcome.is_ok()).collect();
    let mut brackets = Vec::new();
    for pair in valid.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let (lo_cells, hi_cells) = (&lo.outcome.as_ref().unwrap().0, &hi.outcome.as_ref().unwrap().0);
        if same_cells(lo_cells, hi_cells) {
            continue;
        }
        brackets.push(refine(start, end, &ordering, lo, hi, bisect_width));
    }
    Ok(SweepReport { ordering, samples: evaluated, brackets })
}

fn refine(
    start: &[Scalar; 6],
    end: &[Scalar; 6],
    ordering: &[&str; 6],
    lo: &SweepSample,
    hi: &SweepSample,
    width: &Scalar,
) -> Bracket {
    let mut b = Bracket {
        lo: lo.lambda.clone(),
        hi: hi.lambda.clone(),
        lo_cells: lo.outcome.as_ref().unwrap().0.clone(),
        hi_cells: hi.outcome.as_ref().unwrap().0.clone(),
        note: None,
    };
    let half = Scalar::new(1.into(), 2.into());
    while &(&b.hi - &b.lo) > width {
        let mid = (&b.lo + &b.hi) * &half;
        match sample_at(&interpolate(start, end, &mid), ordering) {
            Ok((cells, _)) => {
                if same_cells(&b.lo_cells, &cells) {
                    b.lo = mid;
                    b.lo_cells = cells;
                } else {
                    b.hi = mid;
                    b.hi_cells = cells;
                }
            }
            Err(e) => {
                b.note = Some(format!("stopped at {}: {e}", format_scalar(&mid)));
                break;
            }
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn m2(x: [[i64; 2]; 2]) -> Mat2 {
        x.map(|r| r.map(int))
    }

    #[test]
    fn lift_matches_displayed_matrices() {
        let a = sym_square_lift(&m2([[2, 1], [1, 1]])).unwrap();
        let expect = Mat3::from_rows([
            [ratio(7, 2), int(3), ratio(3, 2)],
            [int(3), int(3), int(1)],
            [ratio(3, 2), int(1), ratio(3, 2)],
        ]);
        assert_eq!(a, expect);
        assert_eq!(sym_square_lift(&m2([[1, 0], [0, 1]])).unwrap(), Mat3::identity());
        assert_eq!(sym_square_lift(&m2([[-2, -1], [-1, -1]])).unwrap(), expect);
        assert!(matches!(sym_square_lift(&m2([[2, 0], [0, 1]])), Err(Error::NotUnimodular(_))));
    }

    #[test]
    fn goldman_fixture_matrices() {
        let v = [int(4), int(7), int(7), int(1), ratio(3, 2), int(1)];
        let (spec, params) = goldman_structure(&v).unwrap();
        assert_eq!(params.a2, ratio(170, 207));
        let (coef, rhs) = goldman_constraint(&v);
        assert_eq!(&params.a2 * coef, rhs);
        assert_eq!(spec.cusps[0].fixed, Vec3::basis(0));
        let bad = [ratio(1, 2), int(7), int(7), int(1), ratio(3, 2), int(1)];
        assert!(matches!(goldman_structure(&bad), Err(Error::NotConvex(_))));
    }

    #[test]
    fn reconciliation_reports_its_choice() {
        let t = [int(4), int(7), ratio(3, 2), int(1), int(1), int(7)];
        let r = reconcile_goldman(&t).unwrap();
        assert_eq!(r.ordering, GOLDMAN_ORDERINGS[1]);
        assert_eq!(r.rejected.len(), 1);
        assert!(matches!(r.rejected[0].1, Error::NotConvex(_)));
    }

    #[test]
    fn series_fixed_vector() {
        let s = series_structure(&ratio(4, 5), &ratio(3, 5)).unwrap();
        assert_eq!(s.cusps[0].fixed, Vec3::from_ints([1, 0, -1]));
        assert!(series_structure(&int(0), &int(1)).is_err());
    }

    #[test]
    fn single_cusp_lift_is_unchanged() {
        let s = psl2_structure(&m2([[2, 1], [1, 1]]), &m2([[2, -1], [-1, 1]])).unwrap();
        assert_eq!(choose_compatible_lifts(&s).unwrap(), vec![Vec3::from_ints([1, 0, -1])]);
    }

    #[test]
    fn second_cusp_in_the_orbit_is_forced() {
        let s = psl2_structure(&m2([[2, 1], [1, 1]]), &m2([[2, -1], [-1, 1]])).unwrap();
        let ctx = s.bare_context();
        let b = Word::gen(1);
        let p = s.cusps[0].fixed.clone();
        let q = ctx.realize(&b).apply(&p);
        let conj = b.mul(&s.cusps[0].word).mul(&b.inv());
        for sign in [int(1), int(-1)] {
            let mut two = s.clone();
            two.cusps.push(CuspSpec { word: conj.clone(), fixed: q.scale(&sign).normalized(), scale: ratio(5, 3) });
            two.check().unwrap();
            let lifts = choose_compatible_lifts(&two).unwrap();
            assert_eq!(lifts[1], q);
        }
    }

    #[test]
    fn second_cusp_off_the_orbit_takes_the_positive_sheet() {
        let s = psl2_structure(&m2([[2, 1], [1, 1]]), &m2([[2, -1], [-1, 1]])).unwrap();
        // Conjugate the cusp by a hyperbolic element not in the group to move it off the orbit.
        let h = sym_square_lift(&m2([[2, 3], [1, 2]])).unwrap();
        let hi = h.inv().unwrap();
        let p = s.cusps[0].fixed.clone();
        let q = h.apply(&p);
        let ctx = s.bare_context();
        let k = &(&h * &ctx.realize(&s.cusps[0].word)) * &hi;
        let mut two = s.clone();
        two.names.push("K".into());
        two.generators.push(k);
        two.cusps.push(CuspSpec { word: Word::gen(2), fixed: q.normalized(), scale: ratio(2, 7) });
        two.check().unwrap();
        let lifts = choose_compatible_lifts(&two).unwrap();
        assert!(lifts[1][0].is_positive());
        let mut negated = two.clone();
        for x in negated.cusps[1].fixed.0.iter_mut() {
            *x = -x.clone();
        }
        let lifts = choose_compatible_lifts(&negated).unwrap();
        assert!(lifts[1][0].is_positive());
    }

    #[test]
    fn degenerate_sweep() {
        let v = [int(8), int(2), int(3), int(7), int(1), int(2)];
        let r = sweep(&v, &v, 1, &ratio(1, 10)).unwrap();
        assert_eq!(r.samples.len(), 1);
        assert!(r.samples[0].outcome.is_ok());
        assert!(r.brackets.is_empty());
    }
}
