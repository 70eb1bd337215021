//! Exact rationals and 3-dimensional linear algebra.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. Always stored in lowest terms with a positive denominator.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `p/q` or `p` with an optional sign. The typographic minus is accepted.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let cleaned = text.trim().replace('\u{2212}', "-");
    let bad = || Error::Parse(format!("invalid rational literal `{text}`"));
    let (num, den) = match cleaned.split_once('/') {
        Some((n, d)) => (n, d),
        None => (cleaned.as_str(), "1"),
    };
    let digits = |s: &str, signed: bool| {
        let body = if signed { s.strip_prefix(['-', '+']).unwrap_or(s) } else { s };
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(num, true) || !digits(den, false) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{text}`")));
    }
    Ok(Scalar::new(n, d))
}

/// Canonical text form: `p` for integers, `p/q` otherwise, ASCII minus.
pub fn format_scalar(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn sign(x: &Scalar) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec3(pub [Scalar; 3]);

impl Vec3 {
    pub fn new(x0: Scalar, x1: Scalar, x2: Scalar) -> Self {
        Vec3([x0, x1, x2])
    }

    pub fn from_ints(v: [i64; 3]) -> Self {
        Vec3(v.map(int))
    }

    pub fn zero() -> Self {
        Vec3::from_ints([0, 0, 0])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Vec3::zero();
        v.0[i] = int(1);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, k: &Scalar) -> Vec3 {
        Vec3(std::array::from_fn(|i| &self.0[i] * k))
    }

    pub fn dot(&self, other: &Vec3) -> Scalar {
        (0..3).map(|i| &self.0[i] * &other.0[i]).sum()
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        let (a, b) = (&self.0, &other.0);
        Vec3([
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ])
    }

    /// Returns `k` with `self = k * other` when the two are parallel and nonzero.
    pub fn ratio_to(&self, other: &Vec3) -> Option<Scalar> {
        if self.is_zero() || other.is_zero() || !self.cross(other).is_zero() {
            return None;
        }
        let i = (0..3).find(|&i| !other.0[i].is_zero())?;
        Some(&self.0[i] / &other.0[i])
    }

    /// Rescales so the first nonzero coordinate is 1.
    pub fn normalized(&self) -> Vec3 {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(lead) => self.scale(&lead.recip()),
            None => self.clone(),
        }
    }
}

impl Index<usize> for Vec3 {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl Add for &Vec3 {
    type Output = Vec3;
    fn add(self, rhs: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| &self.0[i] + &rhs.0[i]))
    }
}

impl Sub for &Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| &self.0[i] - &rhs.0[i]))
    }
}

impl Neg for &Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3(std::array::from_fn(|i| -&self.0[i]))
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_scalar).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Determinant of the matrix with columns `a`, `b`, `c`.
pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> Scalar {
    a.dot(&b.cross(c))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat3(pub [[Scalar; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { int(1) } else { int(0) })
        }))
    }

    pub fn from_ints(rows: [[i64; 3]; 3]) -> Self {
        Mat3(rows.map(|r| r.map(int)))
    }

    pub fn from_rows(rows: [[Scalar; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3(self.0[i].clone())
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].clone())))
    }

    pub fn det(&self) -> Scalar {
        det3(&self.row(0), &self.row(1), &self.row(2))
    }

    pub fn trace(&self) -> Scalar {
        &self.0[0][0] + &self.0[1][1] + &self.0[2][2]
    }

    pub fn inv(&self) -> Result<Mat3> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let (r0, r1, r2) = (self.row(0), self.row(1), self.row(2));
        // Columns of the inverse are the cross products of row pairs.
        let cols = [r1.cross(&r2), r2.cross(&r0), r0.cross(&r1)];
        Ok(Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| &cols[j].0[i] / &d)
        })))
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.row(i).dot(v)))
    }

    pub fn pow(&self, n: i64) -> Result<Mat3> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut out = Mat3::identity();
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    pub fn minus_identity(&self) -> Mat3 {
        let mut m = self.clone();
        for i in 0..3 {
            m.0[i][i] -= int(1);
        }
        m
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<Scalar>> = self.0.iter().map(|r| r.to_vec()).collect();
        let mut rank = 0;
        for col in 0..3 {
            let Some(p) = (rank..3).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            for r in 0..3 {
                if r != rank && !rows[r][col].is_zero() {
                    let f = &rows[r][col] / &rows[rank][col];
                    for c in 0..3 {
                        let delta = &f * &rows[rank][c];
                        rows[r][c] -= delta;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Spanning vector of the fixed line, first nonzero coordinate 1.
    pub fn fixed_vector(&self) -> Result<Vec3> {
        let k = self.minus_identity();
        let rank = k.rank();
        if rank != 2 {
            return Err(Error::NotParabolicFixedLine(3 - rank));
        }
        let rows = [k.row(0), k.row(1), k.row(2)];
        let kernel = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| rows[i].cross(&rows[j]))
            .find(|v| !v.is_zero())
            .ok_or_else(|| Error::InternalInconsistency("rank-2 matrix without kernel".into()))?;
        Ok(kernel.normalized())
    }

    /// Unipotent with a one-dimensional fixed line.
    pub fn is_cusp_parabolic(&self) -> bool {
        let m = &self.0;
        let minors = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0] + &m[0][0] * &m[2][2]
            - &m[0][2] * &m[2][0]
            + &m[1][1] * &m[2][2]
            - &m[1][2] * &m[2][1];
        self.trace() == int(3)
            && minors == int(3)
            && self.det().is_one()
            && self.minus_identity().rank() == 2
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: &Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).map(|k| &self.0[i][k] * &rhs.0[k][j]).sum())
        }))
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.0.iter().enumerate() {
            let parts: Vec<String> = row.iter().map(format_scalar).collect();
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}
