//! Sign-based geometric decisions: side of a face, cone intersection, lift compatibility, conics.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{det3, sign, Mat3, Scalar, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Below,
    Above,
    Coplanar,
}

/// `det(f1 - x, f2 - x, f3 - x)`, an affine function of `x`.
pub fn face_determinant(x: &Vec3, f1: &Vec3, f2: &Vec3, f3: &Vec3) -> Scalar {
    det3(&(f1 - x), &(f2 - x), &(f3 - x))
}

/// Position of `v` relative to the plane through the face, measured from the origin's side.
pub fn side_of_face(v: &Vec3, f1: &Vec3, f2: &Vec3, f3: &Vec3) -> Result<Side> {
    let at_origin = det3(f1, f2, f3);
    if at_origin.is_zero() {
        return Err(Error::DegenerateFace);
    }
    let at_v = face_determinant(v, f1, f2, f3);
    Ok(match sign(&at_v) * sign(&at_origin) {
        1 => Side::Below,
        -1 => Side::Above,
        _ => Side::Coplanar,
    })
}

/// Plane of a face, scaled so a point is below exactly when `normal . x < 1`.
/// Agrees with [`side_of_face`]; built once when many points meet the same face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacePlane {
    normal: Vec3,
}

impl FacePlane {
    pub fn through(f1: &Vec3, f2: &Vec3, f3: &Vec3) -> Result<FacePlane> {
        let at_origin = det3(f1, f2, f3);
        if at_origin.is_zero() {
            return Err(Error::DegenerateFace);
        }
        let n = (f2 - f1).cross(&(f3 - f1));
        Ok(FacePlane { normal: n.scale(&at_origin.recip()) })
    }

    pub fn side(&self, v: &Vec3) -> Side {
        let level = self.normal.dot(v);
        match level.cmp(&Scalar::one()) {
            std::cmp::Ordering::Less => Side::Below,
            std::cmp::Ordering::Greater => Side::Above,
            std::cmp::Ordering::Equal => Side::Coplanar,
        }
    }
}

/// Whether nonzero `x` lies in the closed planar cone spanned by `a` and `b`.
fn in_cone(x: &Vec3, a: &Vec3, b: &Vec3) -> bool {
    let n = a.cross(b);
    if n.is_zero() {
        let on_ray = |r: &Vec3| r.ratio_to(x).is_some_and(|k| k.is_positive());
        return on_ray(a) || on_ray(b);
    }
    x.dot(&n).is_zero() && !a.cross(x).dot(&n).is_negative() && !x.cross(b).dot(&n).is_negative()
}

/// True iff the closed triangles `[d1a, d1b, o]` and `[d2a, d2b, o]` share only the origin.
pub fn triangles_meet_only_at_origin(d1a: &Vec3, d1b: &Vec3, d2a: &Vec3, d2b: &Vec3) -> bool {
    // Near the shared vertex each triangle agrees with its cone, so it suffices to test
    // whether the two cones share a ray.
    let n1 = d1a.cross(d1b);
    let n2 = d2a.cross(d2b);
    let shared = if n1.is_zero() || n2.is_zero() || n1.cross(&n2).is_zero() {
        in_cone(d1a, d2a, d2b)
            || in_cone(d1b, d2a, d2b)
            || in_cone(d2a, d1a, d1b)
            || in_cone(d2b, d1a, d1b)
    } else {
        let u = n1.cross(&n2);
        let w = -&u;
        (in_cone(&u, d1a, d1b) && in_cone(&u, d2a, d2b))
            || (in_cone(&w, d1a, d1b) && in_cone(&w, d2a, d2b))
    };
    !shared
}

/// Linear form strictly positive on every ray, when the rays span a pointed cone.
pub fn positive_functional(rays: &[Vec3]) -> Option<Vec3> {
    // Facet normals of a pointed cone are cross products of ray pairs; their sum over
    // the weakly positive ones lies inside the dual cone.
    let mut sum = Vec3::zero();
    for (i, a) in rays.iter().enumerate() {
        for b in &rays[i + 1..] {
            let n = a.cross(b);
            if n.is_zero() {
                continue;
            }
            for cand in [n.clone(), -&n] {
                if rays.iter().all(|r| !r.dot(&cand).is_negative()) {
                    sum = &sum + &cand;
                }
            }
        }
    }
    rays.iter().all(|r| r.dot(&sum).is_positive()).then_some(sum)
}

fn chart_for(l: &Vec3) -> (Vec3, Vec3) {
    let axes: Vec<Vec3> = (0..3)
        .map(Vec3::basis)
        .filter(|e| !l.cross(e).is_zero())
        .collect();
    let u = axes[0].clone();
    let v = axes
        .iter()
        .skip(1)
        .find(|e| !det3(l, &u, e).is_zero())
        .cloned()
        .expect("a nonzero form extends to a basis");
    (u, v)
}

fn orient2(o: &[Scalar; 2], a: &[Scalar; 2], b: &[Scalar; 2]) -> Scalar {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// True iff the rays lie in an open half-space and each one is an extreme ray of their cone
/// with no three coplanar on the boundary, i.e. they project to a strictly convex polygon.
pub fn rays_in_convex_position(rays: &[Vec3]) -> bool {
    if rays.len() < 3 {
        return rays.iter().all(|r| !r.is_zero());
    }
    let Some(l) = positive_functional(rays) else {
        return false;
    };
    let (u, v) = chart_for(&l);
    let mut pts: Vec<[Scalar; 2]> = rays
        .iter()
        .map(|r| {
            let s = r.dot(&l);
            [r.dot(&u) / &s, r.dot(&v) / &s]
        })
        .collect();
    pts.sort();
    if pts.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    // Monotone chain keeping only strict turns; all points must survive.
    let mut hull: Vec<&[Scalar; 2]> = Vec::new();
    let lower_floor = 2;
    for p in &pts {
        while hull.len() >= lower_floor
            && !orient2(hull[hull.len() - 2], hull[hull.len() - 1], p).is_positive()
        {
            hull.pop();
        }
        hull.push(p);
    }
    let upper_floor = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= upper_floor
            && !orient2(hull[hull.len() - 2], hull[hull.len() - 1], p).is_positive()
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull.len() == pts.len()
}

const WITNESS_POWERS: i64 = 6;

/// Decides whether two cusp lifts lie on the same sheet of the light cone.
pub fn lifts_compatible(p_lift: &Vec3, q_lift: &Vec3, witness: &Mat3) -> Result<bool> {
    if p_lift.ratio_to(q_lift).is_some() {
        return Err(Error::BadWitness("the two lifts project to the same point".into()));
    }
    let ap = witness.apply(p_lift);
    let aq = witness.apply(q_lift);
    if ap.ratio_to(p_lift).is_some() || aq.ratio_to(q_lift).is_some() {
        return Err(Error::BadWitness("witness fixes one of the points".into()));
    }
    if let Some(k) = q_lift.ratio_to(&ap) {
        return Ok(k.is_positive());
    }
    if let Some(k) = aq.ratio_to(p_lift) {
        return Ok(k.is_positive());
    }
    let sheet = witness_sheet(p_lift, q_lift, witness)?;
    // With the sheet known, the rectangle's cyclic order and hence its diagonals follow.
    let flipped = |x: &Vec3| if sheet { x.clone() } else { -x };
    let (q_s, aq_s) = (flipped(q_lift), flipped(&aq));
    let pairings = [
        [(p_lift, &q_s), (&ap, &aq_s)],
        [(p_lift, &ap), (&q_s, &aq_s)],
        [(p_lift, &aq_s), (&q_s, &ap)],
    ];
    let diagonal = pairings
        .iter()
        .position(|[(a, b), (c, d)]| !triangles_meet_only_at_origin(a, b, c, d))
        .ok_or_else(|| Error::BadWitness("rectangle has no crossing diagonals".into()))?;
    let given = [
        [(p_lift, q_lift), (&ap, &aq)],
        [(p_lift, &ap), (q_lift, &aq)],
        [(p_lift, &aq), (q_lift, &ap)],
    ];
    let [(a, b), (c, d)] = given[diagonal];
    Ok(!triangles_meet_only_at_origin(a, b, c, d))
}

/// Which sign of `q_lift` keeps the witness orbits of both points in convex position.
fn witness_sheet(p_lift: &Vec3, q_lift: &Vec3, witness: &Mat3) -> Result<bool> {
    let inverse = witness.inv()?;
    let mut p_orbit = vec![p_lift.clone()];
    let mut q_orbit = vec![q_lift.clone()];
    let mut alive = [true, true];
    for _ in 0..WITNESS_POWERS {
        for orbit in [&mut p_orbit, &mut q_orbit] {
            let first = inverse.apply(&orbit[0]);
            let last = witness.apply(orbit.last().expect("nonempty orbit"));
            orbit.insert(0, first);
            orbit.push(last);
        }
        for (hyp, flag) in alive.iter_mut().enumerate() {
            if !*flag {
                continue;
            }
            let mut rays = p_orbit.clone();
            rays.extend(q_orbit.iter().map(|q| if hyp == 0 { q.clone() } else { -q }));
            *flag = rays_in_convex_position(&rays);
        }
        match alive {
            [true, false] => return Ok(true),
            [false, true] => return Ok(false),
            [false, false] => {
                return Err(Error::BadWitness("orbits are not in convex position".into()))
            }
            [true, true] => {}
        }
    }
    Err(Error::BadWitness("witness orbits do not separate the sheets".into()))
}

/// `xx x^2 + xy x y + yy y^2 + x x + y y + c`, normalized so the first nonzero coefficient is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conic {
    pub coeffs: [Scalar; 6],
}

fn monomials(p: &(Scalar, Scalar)) -> [Scalar; 6] {
    let (x, y) = p;
    [x * x, x * y, y * y, x.clone(), y.clone(), Scalar::one()]
}

pub fn conic_eval(c: &Conic, p: &(Scalar, Scalar)) -> Scalar {
    monomials(p).iter().zip(&c.coeffs).map(|(m, k)| m * k).sum()
}

/// Unique conic through five points, by exact elimination.
pub fn conic_through_5(points: &[(Scalar, Scalar); 5]) -> Result<Conic> {
    let mut rows: Vec<[Scalar; 6]> = points.iter().map(monomials).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..6 {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][col].clone();
        for k in 0..6 {
            rows[r][k] = &rows[r][k] / &lead;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for k in 0..6 {
                    let delta = &f * &rows[r][k];
                    rows[i][k] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let nullity = 6 - pivots.len();
    if nullity != 1 {
        return Err(Error::DegenerateConicSystem(nullity));
    }
    let free = (0..6).find(|c| !pivots.contains(c)).expect("one free column");
    let mut coeffs: [Scalar; 6] = std::array::from_fn(|_| Scalar::zero());
    coeffs[free] = Scalar::one();
    for (row, &col) in pivots.iter().enumerate() {
        coeffs[col] = -&rows[row][free];
    }
    let lead = coeffs.iter().find(|c| !c.is_zero()).cloned().expect("nonzero solution");
    Ok(Conic { coeffs: coeffs.map(|c| c / &lead) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use proptest::prelude::*;

    fn v(x: [i64; 3]) -> Vec3 {
        Vec3::from_ints(x)
    }

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

    #[test]
    fn side_basics() {
        let (f1, f2, f3) = (v([1, 0, 0]), v([0, 1, 0]), v([0, 0, 1]));
        assert_eq!(side_of_face(&f1, &f1, &f2, &f3), Ok(Side::Coplanar));
        assert_eq!(side_of_face(&v([0, 0, 0]), &f1, &f2, &f3), Ok(Side::Below));
        assert_eq!(side_of_face(&v([1, 1, 1]), &f1, &f2, &f3), Ok(Side::Above));
        // Off-triangle points on the plane are still coplanar.
        assert_eq!(side_of_face(&v([2, 2, -3]), &f1, &f2, &f3), Ok(Side::Coplanar));
        let through_origin = side_of_face(&f1, &f1, &f2, &v([1, 1, 0]));
        assert_eq!(through_origin, Err(Error::DegenerateFace));
        let collinear = side_of_face(&f1, &f1, &v([2, 0, 0]), &v([3, 0, 0]));
        assert_eq!(collinear, Err(Error::DegenerateFace));
    }

    #[test]
    fn hyperbolic_apex_is_below() {
        let (a, b) = lifted_pair();
        let p = v([1, 0, -1]);
        let apex = a.apply(&b.apply(&p));
        assert_eq!(side_of_face(&apex, &p, &a.apply(&p), &b.apply(&p)), Ok(Side::Below));
    }

    #[test]
    fn cone_cases() {
        let (x, y) = (v([1, 0, 0]), v([0, 1, 0]));
        assert!(!triangles_meet_only_at_origin(&x, &y, &x, &y));
        assert!(triangles_meet_only_at_origin(&x, &y, &(-&x), &(-&y)));
        // Crossing in space.
        assert!(!triangles_meet_only_at_origin(&v([1, 0, 1]), &v([-1, 0, 1]), &v([0, 1, 1]), &v([0, -1, 1])));
        // Skew planes whose line of intersection misses one cone.
        assert!(triangles_meet_only_at_origin(&v([1, 0, 1]), &v([2, 0, 1]), &v([0, 1, 1]), &v([0, -1, 1])));
        // Shared boundary ray only.
        assert!(!triangles_meet_only_at_origin(&x, &y, &y, &v([0, 0, 1])));
        // Degenerate segment inside a cone.
        assert!(!triangles_meet_only_at_origin(&v([1, 1, 0]), &v([2, 2, 0]), &x, &y));
    }

    #[test]
    fn negated_rectangle_diagonals_do_not_meet() {
        let (a, _) = lifted_pair();
        let p = v([1, 0, -1]);
        let q = Vec3::new(int(1), ratio(3, 5), ratio(4, 5));
        let (ap, aq) = (a.apply(&p), a.apply(&q));
        let pairings = [[&p, &q, &ap, &aq], [&p, &ap, &q, &aq], [&p, &aq, &q, &ap]];
        let diag = pairings
            .iter()
            .find(|d| !triangles_meet_only_at_origin(d[0], d[1], d[2], d[3]))
            .expect("true lifts have crossing diagonals");
        let neg = |x: &Vec3| if x == &q || x == &aq { -x } else { x.clone() };
        assert!(triangles_meet_only_at_origin(&neg(diag[0]), &neg(diag[1]), &neg(diag[2]), &neg(diag[3])));
    }

    #[test]
    fn orbit_cases() {
        let (a, _) = lifted_pair();
        let p = v([1, 0, -1]);
        let q = a.apply(&p);
        assert_eq!(lifts_compatible(&p, &q, &a), Ok(true));
        assert_eq!(lifts_compatible(&p, &(-&q), &a), Ok(false));
        let back = a.inv().unwrap().apply(&p);
        assert_eq!(lifts_compatible(&p, &back.scale(&ratio(2, 3)), &a), Ok(true));
        assert!(matches!(lifts_compatible(&p, &p.scale(&int(2)), &a), Err(Error::BadWitness(_))));
    }

    #[test]
    fn lifts_decided_against_the_future_cone() {
        use rand::{Rng, SeedableRng};
        let (a, b) = lifted_pair();
        let ctx = crate::group::GroupContext::new(vec!["A".into(), "B".into()], vec![a, b], Vec::new());
        let words: Vec<_> = ctx.words_up_to(2).into_iter().filter(|w| !w.is_empty()).collect();
        let p = v([1, 0, -1]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut decided = 0;
        for _ in 0..60 {
            // Rational points of the unit circle via the tangent half-angle parametrization.
            let t = ratio(rng.gen_range(-40..40), rng.gen_range(1..13));
            let den = int(1) + &t * &t;
            let circle = Vec3::new(int(1), (int(1) - &t * &t) / &den, (int(2) * &t) / &den);
            let scale = ratio(rng.gen_range(1..9), rng.gen_range(1..9));
            let positive = rng.gen_bool(0.5);
            let q = circle.scale(&if positive { scale } else { -scale });
            let witness = ctx.realize(&words[rng.gen_range(0..words.len())]);
            match lifts_compatible(&p, &q, &witness) {
                Ok(answer) => {
                    assert_eq!(answer, q[0].is_positive(), "q = {q}");
                    decided += 1;
                }
                Err(Error::BadWitness(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(decided >= 50, "decided only {decided}");
    }

    #[test]
    fn convex_position() {
        let square = [v([1, 1, 1]), v([-1, 1, 1]), v([-1, -1, 1]), v([1, -1, 1])];
        assert!(rays_in_convex_position(&square));
        let mut with_center = square.to_vec();
        with_center.push(v([0, 0, 1]));
        assert!(!rays_in_convex_position(&with_center));
        let mut opposite = square.to_vec();
        opposite[0] = -&opposite[0];
        assert!(!rays_in_convex_position(&opposite));
    }

    #[test]
    fn unit_circle_conic() {
        let pts = [
            (ratio(3, 5), ratio(4, 5)),
            (ratio(-3, 5), ratio(4, 5)),
            (int(1), int(0)),
            (int(-1), int(0)),
            (int(0), int(-1)),
        ];
        let c = conic_through_5(&pts).unwrap();
        assert_eq!(c.coeffs, [int(1), int(0), int(1), int(0), int(0), int(-1)]);
        assert_eq!(conic_eval(&c, &(int(0), int(1))), int(0));
        assert_eq!(conic_eval(&c, &(int(0), int(2))), int(3));
        let collinear = [0, 1, 2, 3, 4].map(|i| (int(i), int(0)));
        assert!(matches!(conic_through_5(&collinear), Err(Error::DegenerateConicSystem(_))));
    }

    fn small() -> impl Strategy<Value = Scalar> {
        (-12i64..13, 1i64..6).prop_map(|(p, q)| ratio(p, q))
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        proptest::array::uniform3(small()).prop_map(Vec3)
    }

    proptest! {
        #[test]
        fn face_determinant_is_affine(x in vec3(), y in vec3(), f1 in vec3(), f2 in vec3(), f3 in vec3(), lam in small()) {
            let mix = &x.scale(&lam) + &y.scale(&(int(1) - &lam));
            let lhs = face_determinant(&mix, &f1, &f2, &f3);
            let rhs = &lam * face_determinant(&x, &f1, &f2, &f3)
                + (int(1) - &lam) * face_determinant(&y, &f1, &f2, &f3);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn plane_agrees_with_side_of_face(x in vec3(), f1 in vec3(), f2 in vec3(), f3 in vec3()) {
            match FacePlane::through(&f1, &f2, &f3) {
                Ok(plane) => prop_assert_eq!(Ok(plane.side(&x)), side_of_face(&x, &f1, &f2, &f3)),
                Err(e) => prop_assert_eq!(Err(e), side_of_face(&x, &f1, &f2, &f3)),
            }
        }

        #[test]
        fn origin_inversion_preserves_side(x in vec3(), f1 in vec3(), f2 in vec3(), f3 in vec3()) {
            let direct = side_of_face(&x, &f1, &f2, &f3);
            let inverted = side_of_face(&(-&x), &(-&f1), &(-&f2), &(-&f3));
            prop_assert_eq!(direct, inverted);
        }

        #[test]
        fn conic_vanishes_on_inputs(pts in proptest::array::uniform5((small(), small()))) {
            if let Ok(c) = conic_through_5(&pts) {
                for p in &pts {
                    prop_assert_eq!(conic_eval(&c, p), int(0));
                }
            }
        }

        #[test]
        fn side_is_equivariant(word in proptest::collection::vec((0usize..2, any::<bool>()), 0..=5), pick in 0usize..40) {
            let (a, b) = lifted_pair();
            let ctx = crate::group::GroupContext::new(vec!["A".into(), "B".into()], vec![a, b], Vec::new());
            let w = crate::group::Word::from_letters(word.into_iter().map(|(gen, inverse)| crate::group::Letter { gen, inverse }));
            let g = ctx.realize(&w);
            let p = v([1, 0, -1]);
            let ball = crate::group::orbit_ball(&ctx.generators, std::slice::from_ref(&p), 2);
            let n = ball.len();
            let (f1, f2, f3, x) = (&ball.points[pick % n], &ball.points[(pick + 1) % n], &ball.points[(pick + 5) % n], &ball.points[(pick * 7 + 3) % n]);
            prop_assume!(!det3(f1, f2, f3).is_zero());
            prop_assert_eq!(side_of_face(x, f1, f2, f3), side_of_face(&g.apply(x), &g.apply(f1), &g.apply(f2), &g.apply(f3)));
        }
    }
}
