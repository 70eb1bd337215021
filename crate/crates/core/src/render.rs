//! Affine charts, developing the cells across their gluings, and SVG output.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{parse_scalar, ratio, Mat3, Scalar, Vec3};
use crate::group::{orbit_ball, GroupContext};
use crate::polyhedron::CellDecomposition;
use crate::predicates::{conic_eval, conic_through_5, Conic};
use crate::structures::Provenance;

pub type Point2 = [Scalar; 2];

/// Maps a ray `x` to `(u(x) / l(x), v(x) / l(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub name: String,
    pub functional: Vec3,
    pub u: Vec3,
    pub v: Vec3,
}

impl Chart {
    pub fn klein() -> Chart {
        Chart { name: "klein".into(), functional: Vec3::basis(0), u: Vec3::basis(1), v: Vec3::basis(2) }
    }

    pub fn affine_sum() -> Chart {
        Chart {
            name: "affine-sum".into(),
            functional: Vec3::from_ints([1, 1, 1]),
            u: Vec3::from_ints([-1, 1, 0]),
            v: Vec3::new(ratio(-1, 2), ratio(-1, 2), ratio(1, 1)),
        }
    }

    pub fn default_for(p: &Provenance) -> Chart {
        match p {
            Provenance::Goldman { .. } | Provenance::Explicit => Chart::affine_sum(),
            Provenance::Psl2Lift { .. } | Provenance::Series { .. } => Chart::klein(),
        }
    }

    /// `klein`, `affine-sum`, or `custom:l0,l1,l2;u0,u1,u2;v0,v1,v2`.
    pub fn parse(text: &str) -> Result<Chart> {
        match text {
            "klein" => return Ok(Chart::klein()),
            "affine-sum" => return Ok(Chart::affine_sum()),
            _ => {}
        }
        let body = text
            .strip_prefix("custom:")
            .ok_or_else(|| Error::Parse(format!("unknown chart `{text}`")))?;
        let forms: Vec<Vec3> = body
            .split(';')
            .map(|part| {
                let xs: Vec<Scalar> = part.split(',').map(parse_scalar).collect::<Result<_>>()?;
                <[Scalar; 3]>::try_from(xs)
                    .map(Vec3)
                    .map_err(|_| Error::Parse(format!("chart form `{part}` needs three entries")))
            })
            .collect::<Result<_>>()?;
        let [l, u, v] = <[Vec3; 3]>::try_from(forms)
            .map_err(|_| Error::Parse("custom chart needs three forms".into()))?;
        Ok(Chart { name: text.into(), functional: l, u, v })
    }

    pub fn project(&self, x: &Vec3) -> Option<Point2> {
        let l = self.functional.dot(x);
        if l.is_zero() {
            return None;
        }
        Some([self.u.dot(x) / &l, self.v.dot(x) / &l])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon2 {
    pub face: usize,
    pub points: Vec<Point2>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scene2D {
    pub polygons: Vec<Polygon2>,
    pub boundary_dots: Vec<Point2>,
    pub metadata: Vec<(String, String)>,
}

/// Breadth-first development of the cells: depth 0 is the stored fundamental domain.
pub fn develop(d: &CellDecomposition, depth: usize, chart: &Chart) -> Result<Scene2D> {
    let mut scene = Scene2D { metadata: vec![("chart".into(), chart.name.clone())], ..Scene2D::default() };
    let mut seen: HashSet<Vec<Point2>> = HashSet::new();
    let mut queue: VecDeque<(usize, Mat3, usize)> = VecDeque::new();
    let mut emit = |face: usize, m: &Mat3, scene: &mut Scene2D| -> Result<bool> {
        let points = d.faces[face]
            .corners
            .iter()
            .map(|c| chart.project(&m.apply(&c.lift)).ok_or(Error::ChartOverflow { face }))
            .collect::<Result<Vec<_>>>()?;
        let mut key = points.clone();
        key.sort();
        if !seen.insert(key) {
            return Ok(false);
        }
        scene.polygons.push(Polygon2 { face, points });
        Ok(true)
    };
    for f in 0..d.faces.len() {
        if emit(f, &Mat3::identity(), &mut scene)? {
            queue.push_back((f, Mat3::identity(), 0));
        }
    }
    while let Some((f, m, dist)) = queue.pop_front() {
        if dist == depth {
            continue;
        }
        for e in &d.faces[f].edges {
            let next = &m * &e.g.mat;
            if emit(e.tri, &next, &mut scene)? {
                queue.push_back((e.tri, next, dist + 1));
            }
        }
    }
    Ok(scene)
}

/// Chart images of the truncated cusp orbit, without repeats.
pub fn boundary_samples(group: &GroupContext, depth: usize, chart: &Chart) -> Result<Vec<Point2>> {
    let lifts: Vec<Vec3> = group.cusps.iter().map(|c| c.lift.clone()).collect();
    let ball = orbit_ball(&group.generators, &lifts, depth);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for x in &ball.points {
        let p = chart.project(x).ok_or(Error::ChartOverflow { face: 0 })?;
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Conic through the first five samples in general position, found in lexicographic index order.
pub fn fit_conic(points: &[Point2]) -> Result<(Conic, [usize; 5])> {
    let n = points.len();
    let pair = |k: usize| (points[k][0].clone(), points[k][1].clone());
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    for e in d + 1..n {
                        let chosen = [a, b, c, d, e];
                        if let Ok(conic) = conic_through_5(&chosen.map(pair)) {
                            return Ok((conic, chosen));
                        }
                    }
                }
            }
        }
    }
    Err(Error::DegenerateConicSystem(n.min(5)))
}

/// Indices of samples off the conic.
pub fn conic_outliers(conic: &Conic, points: &[Point2]) -> Vec<usize> {
    (0..points.len())
        .filter(|&k| !conic_eval(conic, &(points[k][0].clone(), points[k][1].clone())).is_zero())
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    pub unit_circle: bool,
    pub conic: Option<Conic>,
    pub pixels: u32,
}

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Decimal rendering with a fixed number of significant digits.
pub fn decimal(x: &Scalar) -> String {
    decimal_f64(x.to_f64().unwrap_or(f64::NAN))
}

fn decimal_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i64;
    let places = (SIGNIFICANT_DIGITS as i64 - 1 - magnitude).clamp(0, 40) as usize;
    let mut s = format!("{x:.places$}");
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

const PALETTE: [&str; 6] = ["#8fb8de", "#f2b880", "#a3d9a5", "#e5a3c7", "#d6d38a", "#b3a7e0"];

fn conic_outline(c: &Conic, center: (f64, f64), steps: usize) -> Vec<(f64, f64)> {
    let k: Vec<f64> = c.coeffs.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
    let q = |x: f64, y: f64| k[0] * x * x + k[1] * x * y + k[2] * y * y + k[3] * x + k[4] * y + k[5];
    let mut out = Vec::new();
    for s in 0..steps {
        let theta = std::f64::consts::TAU * s as f64 / steps as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        // q(center + t d) = alpha t^2 + beta t + gamma.
        let gamma = q(center.0, center.1);
        let alpha = k[0] * dx * dx + k[1] * dx * dy + k[2] * dy * dy;
        let beta = q(center.0 + dx, center.1 + dy) - alpha - gamma;
        let disc = beta * beta - 4.0 * alpha * gamma;
        if alpha.abs() < f64::EPSILON || disc < 0.0 {
            continue;
        }
        let t = (-beta + disc.sqrt()) / (2.0 * alpha);
        let t = if t > 0.0 { t } else { (-beta - disc.sqrt()) / (2.0 * alpha) };
        if t > 0.0 {
            out.push((center.0 + t * dx, center.1 + t * dy));
        }
    }
    out
}

/// Standalone SVG. Geometry is written in chart coordinates; the y axis is flipped by a transform.
pub fn render_svg(s: &Scene2D, options: &SvgOptions) -> Vec<u8> {
    let pts = s.polygons.iter().flat_map(|p| p.points.iter()).chain(s.boundary_dots.iter());
    let coords: Vec<(f64, f64)> = pts
        .map(|p| (p[0].to_f64().unwrap_or(0.0), p[1].to_f64().unwrap_or(0.0)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    if !coords.is_empty() {
        x0 = coords.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        x1 = coords.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = coords.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        y1 = coords.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    }
    if options.unit_circle {
        (x0, x1, y0, y1) = (x0.min(-1.0), x1.max(1.0), y0.min(-1.0), y1.max(1.0));
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9);
    let pad = span * 0.05;
    let (x0, y0, w) = (x0 - pad, y0 - pad, span + 2.0 * pad);
    let stroke = w / 500.0;
    let pixels = if options.pixels == 0 { 800 } else { options.pixels };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{pixels}" height="{pixels}" viewBox="{} {} {} {}">"#,
        decimal_f64(x0),
        decimal_f64(-(y0 + w)),
        decimal_f64(w),
        decimal_f64(w)
    );
    let _ = writeln!(out, "<desc>");
    for (k, v) in &s.metadata {
        let _ = writeln!(out, "{}: {}", escape(k), escape(v));
    }
    let _ = writeln!(out, "coordinates: chart values with {SIGNIFICANT_DIGITS} significant digits");
    let _ = writeln!(out, "</desc>");
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black" stroke-width="{}"/>"#,
        decimal_f64(x0),
        decimal_f64(-(y0 + w)),
        decimal_f64(w),
        decimal_f64(w),
        decimal_f64(stroke)
    );
    let _ = writeln!(out, r#"<g transform="scale(1,-1)">"#);
    if options.unit_circle {
        let _ = writeln!(
            out,
            r##"<circle cx="0" cy="0" r="1" fill="none" stroke="#555555" stroke-width="{}"/>"##,
            decimal_f64(stroke)
        );
    }
    for poly in &s.polygons {
        let points: Vec<String> =
            poly.points.iter().map(|p| format!("{},{}", decimal(&p[0]), decimal(&p[1]))).collect();
        let _ = writeln!(
            out,
            r#"<polygon class="face-{}" points="{}" fill="{}" fill-opacity="0.6" stroke="black" stroke-width="{}"/>"#,
            poly.face,
            points.join(" "),
            PALETTE[poly.face % PALETTE.len()],
            decimal_f64(stroke)
        );
    }
    for p in &s.boundary_dots {
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#c0392b"/>"##,
            decimal(&p[0]),
            decimal(&p[1]),
            decimal_f64(stroke * 2.5)
        );
    }
    if let Some(c) = &options.conic {
        let n = coords.len().max(1) as f64;
        let center = (coords.iter().map(|c| c.0).sum::<f64>() / n, coords.iter().map(|c| c.1).sum::<f64>() / n);
        let ring = conic_outline(c, center, 360);
        if !ring.is_empty() {
            let points: Vec<String> =
                ring.iter().map(|(x, y)| format!("{},{}", decimal_f64(*x), decimal_f64(*y))).collect();
            let _ = writeln!(
                out,
                r##"<polygon class="conic" points="{}" fill="none" stroke="#1f6f3f" stroke-dasharray="{}" stroke-width="{}"/>"##,
                points.join(" "),
                decimal_f64(stroke * 4.0),
                decimal_f64(stroke)
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let font = w / 40.0;
    for (idx, poly) in s.polygons.iter().enumerate().take(64) {
        let n = poly.points.len() as f64;
        let cx = poly.points.iter().map(|p| p[0].to_f64().unwrap_or(0.0)).sum::<f64>() / n;
        let cy = poly.points.iter().map(|p| p[1].to_f64().unwrap_or(0.0)).sum::<f64>() / n;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="middle" font-family="sans-serif" data-index="{idx}">{}</text>"#,
            decimal_f64(cx),
            decimal_f64(-cy),
            decimal_f64(font),
            poly.face
        );
    }
    let _ = writeln!(out, "</svg>");
    out.into_bytes()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
