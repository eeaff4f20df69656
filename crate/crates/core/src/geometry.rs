//! Doubly connected planar domains bounded by two star-shaped curves.
//!
//! Each boundary is a radius function `rho(theta) = a0 + sum_k (a_k cos k(theta - phi) + b_k sin k(theta - phi))`
//! about its own center, where `phi` is a rotation offset. Curves are smooth by
//! construction. Area and perimeter are computed from the radius function (area in
//! closed form, perimeter by the periodic trapezoid rule, which converges
//! geometrically for trigonometric polynomials); the cached polyline is used for
//! distance queries and point sampling.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use crate::error::{Result, RfkError};
use crate::robin::{RobinPair, RobinParam};

/// Default number of polyline vertices per boundary curve.
pub const DEFAULT_RESOLUTION: usize = 1024;

/// Quadrature nodes used for perimeter integrals.
const PERIMETER_NODES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise rotation by `angle` about the origin.
    pub fn rotated(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Shoelace area of a closed polyline (positive for counterclockwise order).
pub fn shoelace_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// Length of a closed polyline.
pub fn closed_polyline_length(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].dist(poly[(i + 1) % n])).sum()
}

/// Minimum distance from `p` to a closed polyline.
pub fn closed_polyline_distance(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        // cheap reject on the bounding box of the segment
        let dx = (a.x.min(b.x) - p.x).max(p.x - a.x.max(b.x)).max(0.0);
        let dy = (a.y.min(b.y) - p.y).max(p.y - a.y.max(b.y)).max(0.0);
        if dx * dx + dy * dy >= best * best {
            continue;
        }
        best = best.min(segment_distance(p, a, b));
    }
    best
}

/// A star-shaped closed curve given by a truncated Fourier radius function.
#[derive(Debug, Clone, PartialEq)]
pub struct StarBoundary {
    center: Point,
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
    rotation: f64,
    samples: Vec<Point>,
}

impl StarBoundary {
    /// Builds `rho(theta) = a0 + sum_k cos[k-1] cos(k theta) + sin[k-1] sin(k theta)`.
    pub fn new(center: Point, a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::with_resolution(center, a0, cos, sin, 0.0, DEFAULT_RESOLUTION)
    }

    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, Vec::new(), Vec::new())
    }

    pub fn with_resolution(
        center: Point,
        a0: f64,
        mut cos: Vec<f64>,
        mut sin: Vec<f64>,
        rotation: f64,
        resolution: usize,
    ) -> Result<Self> {
        if resolution < 3 {
            return Err(RfkError::InvalidDomain(format!(
                "boundary polyline needs at least 3 vertices, got {resolution}"
            )));
        }
        let finite = [center.x, center.y, a0, rotation]
            .iter()
            .chain(cos.iter())
            .chain(sin.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(RfkError::InvalidDomain("non-finite boundary coefficient".into()));
        }
        let k = cos.len().max(sin.len());
        cos.resize(k, 0.0);
        sin.resize(k, 0.0);
        let mut b = Self {
            center,
            a0,
            cos,
            sin,
            rotation,
            samples: Vec::new(),
        };
        let check = (8 * resolution).max(64 * (k + 1));
        for i in 0..check {
            let th = 2.0 * PI * i as f64 / check as f64;
            let rho = b.radius(th);
            if !(rho > 0.0) {
                return Err(RfkError::InvalidDomain(format!(
                    "radius function is not positive (rho = {rho:.4e} at theta = {th:.4})"
                )));
            }
        }
        b.samples = (0..resolution).map(|i| b.point(b.sample_angle(i, resolution))).collect();
        Ok(b)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn mean_radius(&self) -> f64 {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn resolution(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn is_circle(&self) -> bool {
        self.cos.iter().chain(self.sin.iter()).all(|c| *c == 0.0)
    }

    /// Angle of the `i`-th of `n` equispaced samples, including the rotation offset.
    pub fn sample_angle(&self, i: usize, n: usize) -> f64 {
        self.rotation + 2.0 * PI * i as f64 / n as f64
    }

    pub fn radius(&self, theta: f64) -> f64 {
        let phi = theta - self.rotation;
        let mut rho = self.a0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (s, c) = ((k + 1) as f64 * phi).sin_cos();
            rho += a * c + b * s;
        }
        rho
    }

    pub fn radius_derivative(&self, theta: f64) -> f64 {
        let phi = theta - self.rotation;
        let mut d = 0.0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kf = (k + 1) as f64;
            let (s, c) = (kf * phi).sin_cos();
            d += kf * (b * c - a * s);
        }
        d
    }

    pub fn point(&self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        self.center + Point::new(c, s) * self.radius(theta)
    }

    /// Enclosed area, `pi (a0^2 + (1/2) sum (a_k^2 + b_k^2))`.
    pub fn area(&self) -> f64 {
        let harmonics: f64 = self.cos.iter().chain(self.sin.iter()).map(|c| c * c).sum();
        PI * (self.a0 * self.a0 + 0.5 * harmonics)
    }

    /// Arc length of the smooth curve.
    pub fn perimeter(&self) -> f64 {
        if self.is_circle() {
            return 2.0 * PI * self.a0;
        }
        let n = PERIMETER_NODES.max(32 * (self.cos.len() + 1));
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|i| {
                let th = i as f64 * h;
                self.radius(th).hypot(self.radius_derivative(th))
            })
            .sum::<f64>()
            * h
    }

    pub fn polyline_area(&self) -> f64 {
        shoelace_area(&self.samples)
    }

    pub fn polyline_perimeter(&self) -> f64 {
        closed_polyline_length(&self.samples)
    }

    /// Angle of `p` seen from the center, and its distance from the center.
    pub fn polar(&self, p: Point) -> (f64, f64) {
        let d = p - self.center;
        (d.y.atan2(d.x), d.norm())
    }

    /// `|p - c| - rho(theta)`: negative inside, positive outside.
    pub fn radial_gap(&self, p: Point) -> f64 {
        let (th, r) = self.polar(p);
        r - self.radius(th)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.radial_gap(p) < 0.0
    }

    /// Euclidean distance to the cached polyline.
    pub fn distance(&self, p: Point) -> f64 {
        closed_polyline_distance(p, &self.samples)
    }

    /// Distance to the polyline, negative inside the curve.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.samples {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn translated(&self, shift: Point) -> Self {
        self.rebuild(self.center + shift, 1.0, 0.0)
    }

    /// Rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        self.rebuild(self.center.rotated(angle), 1.0, angle)
    }

    /// Homothety about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        self.rebuild(self.center * factor, factor, 0.0)
    }

    fn rebuild(&self, center: Point, factor: f64, extra_rotation: f64) -> Self {
        let mut b = Self {
            center,
            a0: self.a0 * factor,
            cos: self.cos.iter().map(|c| c * factor).collect(),
            sin: self.sin.iter().map(|c| c * factor).collect(),
            rotation: self.rotation + extra_rotation,
            samples: Vec::new(),
        };
        let n = self.samples.len();
        b.samples = (0..n).map(|i| b.point(b.sample_angle(i, n))).collect();
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

impl std::str::FromStr for Side {
    type Err = RfkError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" | "in" => Ok(Side::Inner),
            "outer" | "out" => Ok(Side::Outer),
            _ => Err(RfkError::Config(format!("side must be 'inner' or 'outer', got '{s}'"))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Inner => "inner",
            Side::Outer => "outer",
        })
    }
}

/// `Omega = Omega_out \ closure(Omega_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    inner: StarBoundary,
    outer: StarBoundary,
}

impl DomainSpec {
    /// Validates nesting with a clearance of `1e-3` times the outer mean radius.
    pub fn new(inner: StarBoundary, outer: StarBoundary) -> Result<Self> {
        let margin = 1e-3 * outer.mean_radius();
        Self::with_margin(inner, outer, margin)
    }

    pub fn with_margin(inner: StarBoundary, outer: StarBoundary, margin: f64) -> Result<Self> {
        if !outer.contains(inner.center()) {
            return Err(RfkError::InvalidDomain("inner center lies outside the outer curve".into()));
        }
        for (i, p) in inner.samples().iter().enumerate() {
            if !outer.contains(*p) {
                return Err(RfkError::InvalidDomain(format!(
                    "inner vertex {i} at ({:.4}, {:.4}) is not inside the outer curve",
                    p.x, p.y
                )));
            }
        }
        let clearance = inner
            .samples()
            .iter()
            .map(|p| outer.distance(*p))
            .fold(f64::INFINITY, f64::min);
        if clearance < margin {
            return Err(RfkError::InvalidDomain(format!(
                "clearance {clearance:.3e} between boundaries is below margin {margin:.3e}"
            )));
        }
        let d = Self { inner, outer };
        if d.area() <= 0.0 {
            return Err(RfkError::InvalidDomain("domain area is not positive".into()));
        }
        Ok(d)
    }

    /// Concentric annulus `A_{r,R}` centered at the origin.
    pub fn annulus(r: f64, big_r: f64) -> Result<Self> {
        Self::new(
            StarBoundary::circle(Point::default(), r)?,
            StarBoundary::circle(Point::default(), big_r)?,
        )
    }

    /// Circular hole of radius `r` centered at `offset`, outer circle of radius `big_r` at the origin.
    pub fn eccentric_annulus(r: f64, big_r: f64, offset: Point) -> Result<Self> {
        Self::new(
            StarBoundary::circle(offset, r)?,
            StarBoundary::circle(Point::default(), big_r)?,
        )
    }

    pub fn inner(&self) -> &StarBoundary {
        &self.inner
    }

    pub fn outer(&self) -> &StarBoundary {
        &self.outer
    }

    pub fn boundary(&self, side: Side) -> &StarBoundary {
        match side {
            Side::Inner => &self.inner,
            Side::Outer => &self.outer,
        }
    }

    /// `|Omega| = area(Omega_out) - area(Omega_in)`.
    pub fn area(&self) -> f64 {
        self.outer.area() - self.inner.area()
    }

    pub fn polyline_area(&self) -> f64 {
        self.outer.polyline_area() - self.inner.polyline_area()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.outer.contains(p) && !self.inner.contains(p)
    }

    pub fn distance_to_boundary(&self, p: Point, side: Side) -> f64 {
        self.boundary(side).distance(p)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        self.outer.bounding_box()
    }

    /// `|dOmega_out|^2 - |dOmega_in|^2 - 4 pi |Omega|`, zero exactly when the isoperimetric
    /// deficits of the two curves agree.
    pub fn compatibility_defect(&self) -> f64 {
        let pi = self.inner.perimeter();
        let po = self.outer.perimeter();
        po * po - pi * pi - 4.0 * PI * self.area()
    }

    pub fn translated(&self, shift: Point) -> Self {
        Self {
            inner: self.inner.translated(shift),
            outer: self.outer.translated(shift),
        }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            inner: self.inner.rotated(angle),
            outer: self.outer.rotated(angle),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            inner: self.inner.scaled(factor),
            outer: self.outer.scaled(factor),
        }
    }

    /// Parses the text domain format:
    ///
    /// ```text
    /// inner_center x y
    /// inner_coeffs a0 a1 b1 a2 b2 ...
    /// outer_center x y
    /// outer_coeffs a0 a1 b1 ...
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut inner_center = None;
        let mut outer_center = None;
        let mut inner_coeffs = None;
        let mut outer_coeffs = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let values = parts
                .map(|tok| {
                    let v: f64 = tok.parse().map_err(|_| RfkError::Parse {
                        line: lineno + 1,
                        message: format!("cannot parse number '{tok}'"),
                    })?;
                    if !v.is_finite() {
                        return Err(RfkError::Parse {
                            line: lineno + 1,
                            message: format!("non-finite number '{tok}'"),
                        });
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<f64>>>()?;
            let bad = |message: String| RfkError::Parse { line: lineno + 1, message };
            match key {
                "inner_center" | "outer_center" => {
                    if values.len() != 2 {
                        return Err(bad(format!("{key} expects 2 numbers, got {}", values.len())));
                    }
                    let p = Point::new(values[0], values[1]);
                    if key == "inner_center" {
                        inner_center = Some(p);
                    } else {
                        outer_center = Some(p);
                    }
                }
                "inner_coeffs" | "outer_coeffs" => {
                    if values.is_empty() || values.len() % 2 == 0 {
                        return Err(bad(format!(
                            "{key} expects a0 followed by (a_k, b_k) pairs, got {} numbers",
                            values.len()
                        )));
                    }
                    if key == "inner_coeffs" {
                        inner_coeffs = Some(values);
                    } else {
                        outer_coeffs = Some(values);
                    }
                }
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        let missing = |what: &str| RfkError::Parse {
            line: 0,
            message: format!("missing '{what}' line"),
        };
        let build = |center: Point, coeffs: Vec<f64>| {
            let cos = coeffs.iter().skip(1).step_by(2).copied().collect();
            let sin = coeffs.iter().skip(2).step_by(2).copied().collect();
            StarBoundary::new(center, coeffs[0], cos, sin)
        };
        let inner = build(
            inner_center.ok_or_else(|| missing("inner_center"))?,
            inner_coeffs.ok_or_else(|| missing("inner_coeffs"))?,
        )?;
        let outer = build(
            outer_center.ok_or_else(|| missing("outer_center"))?,
            outer_coeffs.ok_or_else(|| missing("outer_coeffs"))?,
        )?;
        Self::new(inner, outer)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, b) in [("inner", &self.inner), ("outer", &self.outer)] {
            if b.rotation() != 0.0 {
                // the file format has no rotation field; fold it into the coefficients
                let b = b.with_rotation_folded();
                write_boundary(&mut s, name, &b);
            } else {
                write_boundary(&mut s, name, b);
            }
        }
        s
    }
}

fn write_boundary(s: &mut String, name: &str, b: &StarBoundary) {
    let _ = writeln!(s, "{name}_center {:?} {:?}", b.center().x, b.center().y);
    let _ = write!(s, "{name}_coeffs {:?}", b.mean_radius());
    for (a, c) in b.cos_coeffs().iter().zip(b.sin_coeffs()) {
        let _ = write!(s, " {a:?} {c:?}");
    }
    s.push('\n');
}

impl StarBoundary {
    /// Same curve with the rotation offset absorbed into the Fourier coefficients.
    pub fn with_rotation_folded(&self) -> StarBoundary {
        let phi = self.rotation;
        let (cos, sin): (Vec<f64>, Vec<f64>) = self
            .cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(k, (a, b))| {
                let (s, c) = ((k + 1) as f64 * phi).sin_cos();
                // a cos k(t - phi) + b sin k(t - phi)
                (a * c - b * s, a * s + b * c)
            })
            .unzip();
        let mut out = Self {
            center: self.center,
            a0: self.a0,
            cos,
            sin,
            rotation: 0.0,
            samples: Vec::new(),
        };
        let n = self.samples.len();
        out.samples = (0..n).map(|i| out.point(out.sample_angle(i, n))).collect();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    Area,
    InnerPerimeter,
    OuterPerimeter,
}

/// Annulus `A_{r,R}` matched to a domain under the constraints of the Robin regime.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusMatch {
    pub r: f64,
    pub big_r: f64,
    pub matched: Vec<Constraint>,
    /// Relative mismatch per constraint, same order as `matched`.
    pub residuals: Vec<f64>,
    /// `(|dOmega_out|^2 - |dOmega_in|^2 - 4 pi |Omega|) / (4 pi |Omega|)`; only meaningful in the
    /// Robin-Robin regime.
    pub compatibility_residual: f64,
}

impl AnnulusMatch {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Default tolerance on the relative compatibility residual.
pub const MATCH_TOLERANCE: f64 = 1e-8;

pub fn match_annulus(domain: &DomainSpec, robin: &RobinPair) -> Result<AnnulusMatch> {
    match_annulus_with_tolerance(domain, robin, MATCH_TOLERANCE)
}

pub fn match_annulus_with_tolerance(
    domain: &DomainSpec,
    robin: &RobinPair,
    tolerance: f64,
) -> Result<AnnulusMatch> {
    robin.check_admissible()?;
    if robin.is_pure_neumann() {
        return Err(RfkError::UnsupportedRegime {
            h_in: robin.h_in.to_string(),
            h_out: robin.h_out.to_string(),
        });
    }
    let area = domain.area();
    let p_in = domain.inner().perimeter();
    let p_out = domain.outer().perimeter();
    let compat = (p_out * p_out - p_in * p_in - 4.0 * PI * area) / (4.0 * PI * area);
    let rel = |a: f64, b: f64| (a - b) / b;

    let (r, big_r, matched) = if robin.h_out == RobinParam::NEUMANN {
        let r = p_in / (2.0 * PI);
        let big_r = (r * r + area / PI).sqrt();
        (r, big_r, vec![Constraint::Area, Constraint::InnerPerimeter])
    } else if robin.h_in == RobinParam::NEUMANN {
        let big_r = p_out / (2.0 * PI);
        let r2 = big_r * big_r - area / PI;
        if r2 < -1e-12 * big_r * big_r {
            return Err(RfkError::InfeasibleMatch(format!(
                "R^2 - |Omega|/pi = {r2:.4e} < 0 (outer perimeter too short for the area)"
            )));
        }
        (r2.max(0.0).sqrt(), big_r, vec![Constraint::Area, Constraint::OuterPerimeter])
    } else {
        if compat.abs() > tolerance {
            return Err(RfkError::IncompatibleDomain {
                residual: compat,
                tolerance,
            });
        }
        (
            p_in / (2.0 * PI),
            p_out / (2.0 * PI),
            vec![Constraint::Area, Constraint::InnerPerimeter, Constraint::OuterPerimeter],
        )
    };
    let residuals = matched
        .iter()
        .map(|c| match c {
            Constraint::Area => rel(PI * (big_r * big_r - r * r), area),
            Constraint::InnerPerimeter => rel(2.0 * PI * r, p_in),
            Constraint::OuterPerimeter => rel(2.0 * PI * big_r, p_out),
        })
        .collect();
    Ok(AnnulusMatch {
        r,
        big_r,
        matched,
        residuals,
        compatibility_residual: compat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Dense midpoint-rule polar quadrature, independent of the closed forms above.
    fn polar_area_oracle(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|i| 0.5 * f((i as f64 + 0.5) * h).powi(2) * h).sum()
    }

    #[test]
    fn concentric_area() {
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        assert!(rel(d.area(), 3.0 * PI) < 1e-14);
    }

    #[test]
    fn translated_hole_keeps_area() {
        let d = DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.3, 0.0)).unwrap();
        assert!(rel(d.area(), 3.0 * PI) < 1e-14);
    }

    #[test]
    fn perturbed_outer_area_matches_polar_quadrature() {
        let outer = StarBoundary::new(Point::default(), 2.0, vec![0.0, 0.0, 0.1], vec![]).unwrap();
        let inner = StarBoundary::circle(Point::default(), 1.0).unwrap();
        let d = DomainSpec::new(inner, outer).unwrap();
        let oracle = polar_area_oracle(|t| 2.0 + 0.1 * (3.0 * t).cos(), 1_000_000)
            - polar_area_oracle(|_| 1.0, 1_000_000);
        assert!(rel(d.area(), oracle) < 1e-10, "{} vs {}", d.area(), oracle);
        // polyline shoelace converges toward it
        assert!(rel(d.polyline_area(), oracle) < 1e-4);
    }

    #[test]
    fn degenerate_polyline_rejected() {
        let r = StarBoundary::with_resolution(Point::default(), 1.0, vec![], vec![], 0.0, 2);
        assert!(matches!(r, Err(RfkError::InvalidDomain(_))));
    }

    #[test]
    fn nonpositive_radius_rejected() {
        let r = StarBoundary::new(Point::default(), 1.0, vec![1.2], vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn circle_perimeter() {
        let c = StarBoundary::circle(Point::new(0.5, -1.0), 2.0).unwrap();
        assert!(rel(c.perimeter(), 4.0 * PI) < 1e-14);
    }

    #[test]
    fn perimeter_matches_dense_quadrature() {
        let b = StarBoundary::new(Point::default(), 1.0, vec![0.0, 0.2], vec![]).unwrap();
        let n = 1_000_000;
        let h = 2.0 * PI / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                let rho = 1.0 + 0.2 * (2.0 * t).cos();
                let drho = -0.4 * (2.0 * t).sin();
                rho.hypot(drho) * h
            })
            .sum();
        assert!(rel(b.perimeter(), oracle) < 1e-6);
        assert!(rel(b.polyline_perimeter(), oracle) < 1e-5);
    }

    #[test]
    fn perimeter_is_homogeneous() {
        let b = StarBoundary::new(
            Point::new(0.1, 0.2),
            1.0,
            vec![0.05, 0.1, 0.0, 0.02, 0.0, 0.01, 0.0, 0.005],
            vec![0.0, 0.03, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!(rel(b.scaled(2.0).perimeter(), 2.0 * b.perimeter()) < 1e-13);
    }

    #[test]
    fn distance_examples() {
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        let dist = d.distance_to_boundary(Point::new(1.5, 0.0), Side::Inner);
        assert!((dist - 0.5).abs() < 1e-12);
        let on = d.inner().samples()[17];
        assert!(d.distance_to_boundary(on, Side::Inner) < 1e-15);
    }

    #[test]
    fn match_concentric_all_regimes() {
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        for (a, b) in [(1.0, 0.0), (0.0, -1.0), (1.0, 1.0), (f64::INFINITY, f64::INFINITY), (-1.0, -2.0)] {
            let m = match_annulus(&d, &RobinPair::from_f64(a, b).unwrap()).unwrap();
            assert!((m.r - 1.0).abs() < 1e-12 && (m.big_r - 2.0).abs() < 1e-12);
            assert!(m.max_residual() < 1e-12);
        }
    }

    #[test]
    fn match_neumann_outer_branch() {
        let d = DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.4, 0.2)).unwrap();
        let m = match_annulus(&d, &RobinPair::from_f64(1.0, 0.0).unwrap()).unwrap();
        assert!((m.r - 1.0).abs() < 1e-12 && (m.big_r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn match_errors() {
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        assert!(matches!(
            match_annulus(&d, &RobinPair::from_f64(-1.0, 1.0).unwrap()),
            Err(RfkError::UnsupportedRegime { .. })
        ));
        // elongated outer curve with a big hole: outer perimeter is long, robin-robin incompatible
        let outer = StarBoundary::new(Point::default(), 2.0, vec![0.0, 0.3], vec![]).unwrap();
        let inner = StarBoundary::circle(Point::default(), 1.0).unwrap();
        let e = DomainSpec::new(inner, outer).unwrap();
        assert!(matches!(
            match_annulus(&e, &RobinPair::from_f64(1.0, 1.0).unwrap()),
            Err(RfkError::IncompatibleDomain { .. })
        ));
        // h_in = 0 with an outer perimeter that is fine
        assert!(match_annulus(&e, &RobinPair::from_f64(0.0, 1.0).unwrap()).is_ok());
    }

    #[test]
    fn parse_roundtrip_and_rejects_nonfinite() {
        let text = "# test\ninner_center 0.3 0\ninner_coeffs 1 0.1 0.0\nouter_center 0 0\nouter_coeffs 2\n";
        let d = DomainSpec::parse(text).unwrap();
        assert_eq!(d.inner().cos_coeffs(), &[0.1]);
        let again = DomainSpec::parse(&d.to_text()).unwrap();
        assert_eq!(again, d);
        let bad = "inner_center 0 NaN\ninner_coeffs 1\nouter_center 0 0\nouter_coeffs 2\n";
        assert!(matches!(DomainSpec::parse(bad), Err(RfkError::Parse { .. })));
        let bad = "inner_center 0 0\ninner_coeffs 1 inf 0\nouter_center 0 0\nouter_coeffs 2\n";
        assert!(DomainSpec::parse(bad).is_err());
        let missing = "inner_center 0 0\ninner_coeffs 1\n";
        assert!(DomainSpec::parse(missing).is_err());
    }

    #[test]
    fn nesting_is_enforced() {
        let inner = StarBoundary::circle(Point::new(1.5, 0.0), 1.0).unwrap();
        let outer = StarBoundary::circle(Point::default(), 2.0).unwrap();
        assert!(DomainSpec::new(inner, outer).is_err());
    }

    #[test]
    fn rotation_folding_preserves_curve() {
        let b = StarBoundary::new(Point::new(0.2, 0.0), 1.0, vec![0.1, 0.05], vec![0.02, 0.0])
            .unwrap()
            .rotated(0.7);
        let f = b.with_rotation_folded();
        for i in 0..50 {
            let t = i as f64 * 0.13;
            assert!((b.radius(t) - f.radius(t)).abs() < 1e-14);
        }
    }
}
