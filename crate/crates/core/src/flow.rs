//! Gradient flow of the first eigenfunction, its basins of attraction to the
//! two boundary components, and the interface between them.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::contour::{Grid, ScalarField};
use crate::error::{Result, RfkError};
use crate::fem::{EigenResult, Mesh};
use crate::geometry::{DomainSpec, Point};
use crate::radial::RadialEigen;
use crate::robin::{RobinPair, RobinParam};

/// A scalar field with gradient, defined on (a neighborhood of) the domain.
pub trait GradientField: Sync {
    /// `(u, grad u)` at `p`, `None` outside the field's support.
    fn eval(&self, p: Point) -> Option<(f64, Point)>;
    /// Suggested arc-length step near `p`.
    fn step_hint(&self, p: Point) -> f64;
    fn max_gradient(&self) -> f64;
    /// `max u - min u`.
    fn value_range(&self) -> f64;
}

/// P1 field with node-recovered gradients, both interpolated linearly.
pub struct FemField<'a> {
    mesh: &'a Mesh,
    u: &'a [f64],
    grad: &'a [Point],
    bbox: (Point, Point),
    buckets: Grid,
    bucket_tris: Vec<Vec<u32>>,
    scale: Vec<f64>,
    max_grad: f64,
    range: f64,
}

impl<'a> FemField<'a> {
    pub fn new(mesh: &'a Mesh, eigen: &'a EigenResult) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let n = ((mesh.triangles.len() as f64).sqrt() as usize).clamp(8, 512);
        let buckets = Grid::covering(lo, hi, n + 1);
        let mut bucket_tris = vec![Vec::new(); buckets.len()];
        let mut scale = Vec::with_capacity(mesh.triangles.len());
        for (k, _) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = mesh.triangle_vertices(k);
            let tlo = Point::new(a.x.min(b.x).min(c.x), a.y.min(b.y).min(c.y));
            let thi = Point::new(a.x.max(b.x).max(c.x), a.y.max(b.y).max(c.y));
            let (i0, j0) = buckets.cell_of(tlo);
            let (i1, j1) = buckets.cell_of(thi);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    bucket_tris[buckets.index(i, j)].push(k as u32);
                }
            }
            scale.push(a.dist(b).min(b.dist(c)).min(c.dist(a)));
        }
        let max_grad = eigen.recovered_grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
        let umax = eigen.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let umin = eigen.u.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            mesh,
            u: &eigen.u,
            grad: &eigen.recovered_grad,
            bbox: (lo, hi),
            buckets,
            bucket_tris,
            scale,
            max_grad,
            range: umax - umin,
        }
    }

    /// Triangle containing `p` with its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (lo, hi) = self.bbox;
        if p.x < lo.x || p.y < lo.y || p.x > hi.x || p.y > hi.y {
            return None;
        }
        let (i, j) = self.buckets.cell_of(p);
        for &k in &self.bucket_tris[self.buckets.index(i, j)] {
            let k = k as usize;
            let [a, b, c] = self.mesh.triangle_vertices(k);
            let det = (b - a).cross(c - a);
            let l1 = (p - a).cross(c - a) / det;
            let l2 = (b - a).cross(p - a) / det;
            let l0 = 1.0 - l1 - l2;
            let eps = -1e-12;
            if l0 >= eps && l1 >= eps && l2 >= eps {
                return Some((k, [l0, l1, l2]));
            }
        }
        None
    }
}

impl GradientField for FemField<'_> {
    fn eval(&self, p: Point) -> Option<(f64, Point)> {
        let (k, l) = self.locate(p)?;
        let t = self.mesh.triangles[k];
        let u = l[0] * self.u[t[0]] + l[1] * self.u[t[1]] + l[2] * self.u[t[2]];
        let g = self.grad[t[0]] * l[0] + self.grad[t[1]] * l[1] + self.grad[t[2]] * l[2];
        Some((u, g))
    }

    fn step_hint(&self, p: Point) -> f64 {
        self.locate(p).map_or(self.scale[0], |(k, _)| 0.5 * self.scale[k])
    }

    fn max_gradient(&self) -> f64 {
        self.max_grad
    }

    fn value_range(&self) -> f64 {
        self.range
    }
}

/// `u(x) = v(|x - c|)` from the radial solver, with the exact gradient.
pub struct RadialField<'a> {
    pub center: Point,
    pub eigen: &'a RadialEigen,
    step: f64,
    max_grad: f64,
}

impl<'a> RadialField<'a> {
    pub fn new(center: Point, eigen: &'a RadialEigen) -> Self {
        let max_grad = eigen.vprime.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        Self {
            center,
            eigen,
            step: (eigen.big_r - eigen.r) / 200.0,
            max_grad,
        }
    }
}

impl GradientField for RadialField<'_> {
    fn eval(&self, p: Point) -> Option<(f64, Point)> {
        let d = p - self.center;
        let rho = d.norm();
        if rho < self.eigen.r || rho > self.eigen.big_r || rho == 0.0 {
            return None;
        }
        let g = d * (self.eigen.derivative_at(rho) / rho);
        Some((self.eigen.value_at(rho), g))
    }

    fn step_hint(&self, _: Point) -> f64 {
        self.step
    }

    fn max_gradient(&self) -> f64 {
        self.max_grad
    }

    fn value_range(&self) -> f64 {
        self.eigen.max_value() - self.eigen.min_value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Along `-grad u`, toward decreasing `u`.
    Forward,
    /// Along `+grad u`.
    Backward,
}

impl Direction {
    /// The direction whose flow lines end on the boundary: toward decreasing `u`
    /// when `lambda > 0` (interior maximum), toward increasing `u` when `lambda < 0`.
    pub fn toward_boundary(lambda: f64) -> Self {
        if lambda >= 0.0 {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    ReachedInner,
    ReachedOuter,
    CriticalPoint(Point),
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowLine {
    pub seed: Point,
    pub points: Vec<Point>,
    pub termination: Termination,
    /// Largest step against the expected monotonicity of `u`.
    pub max_reversal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Gradient threshold for critical points, relative to `max |grad u|`. Kept small:
    /// in narrow gaps the eigenfunction is exponentially small without being critical.
    pub eps_crit: f64,
    /// Distance (radial gap) to a boundary counted as reaching it.
    pub eps_bd: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            eps_crit: 1e-6,
            eps_bd: 1e-2,
            max_steps: 20_000,
        }
    }
}

fn boundary_hit(domain: &DomainSpec, p: Point, eps: f64) -> Option<Termination> {
    let gin = domain.inner().radial_gap(p);
    let gout = -domain.outer().radial_gap(p);
    if gin <= eps || gout <= eps {
        Some(if gin <= gout {
            Termination::ReachedInner
        } else {
            Termination::ReachedOuter
        })
    } else {
        None
    }
}

pub fn trace_flow<F: GradientField + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    seed: Point,
    direction: Direction,
    opts: &FlowOptions,
) -> Result<FlowLine> {
    let tol = 1e-12 * domain.outer().mean_radius();
    if domain.inner().radial_gap(seed) < -tol || domain.outer().radial_gap(seed) > tol {
        return Err(RfkError::InvalidSeed(seed.x, seed.y));
    }
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Backward => 1.0,
    };
    let gmin = opts.eps_crit * field.max_gradient();
    let mut points = vec![seed];
    let mut p = seed;
    let mut max_reversal = 0.0_f64;
    let finish = |points: Vec<Point>, termination, max_reversal| FlowLine {
        seed,
        points,
        termination,
        max_reversal,
    };
    let Some((mut u, g0)) = field.eval(p) else {
        let t = boundary_hit(domain, p, f64::INFINITY).unwrap_or(Termination::Budget);
        return Ok(finish(points, t, 0.0));
    };
    if g0.norm() < gmin {
        return Ok(finish(points, Termination::CriticalPoint(p), 0.0));
    }
    if let Some(t) = boundary_hit(domain, p, opts.eps_bd) {
        return Ok(finish(points, t, 0.0));
    }
    // unit speed; critical sets show up as a reversal of the direction
    let dir = |q: Point| -> Option<Point> {
        let (_, g) = field.eval(q)?;
        let n = g.norm();
        (n > 0.0).then(|| g * (sign / n))
    };
    let mut prev_dir: Option<Point> = None;
    for _ in 0..opts.max_steps {
        let ds = field.step_hint(p);
        let step = (|| {
            let k1 = dir(p)?;
            if let Some(d) = prev_dir {
                if d.dot(k1) < 0.0 {
                    // overshoot across a ridge or valley
                    return Some(None);
                }
            }
            prev_dir = Some(k1);
            let k2 = dir(p + k1 * (0.5 * ds))?;
            let k3 = dir(p + k2 * (0.5 * ds))?;
            let k4 = dir(p + k3 * ds)?;
            Some(Some(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (ds / 6.0)))
        })();
        if step == Some(None) {
            return Ok(finish(points, Termination::CriticalPoint(p), max_reversal));
        }
        let Some(Some(next)) = step else {
            // left the support of the field: we are at the boundary
            let t = boundary_hit(domain, p, f64::INFINITY).unwrap_or(Termination::Budget);
            return Ok(finish(points, t, max_reversal));
        };
        points.push(next);
        p = next;
        if let Some(t) = boundary_hit(domain, p, opts.eps_bd) {
            return Ok(finish(points, t, max_reversal));
        }
        let Some((u_next, g)) = field.eval(p) else {
            let t = boundary_hit(domain, p, f64::INFINITY).unwrap_or(Termination::Budget);
            return Ok(finish(points, t, max_reversal));
        };
        max_reversal = max_reversal.max(-sign * (u_next - u));
        u = u_next;
        if g.norm() < gmin {
            return Ok(finish(points, Termination::CriticalPoint(p), max_reversal));
        }
    }
    Ok(finish(points, Termination::Budget, max_reversal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    In,
    Out,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowDecomposition {
    /// Seed grid; node `k` is the center of cell `k`.
    pub grid: Grid,
    /// Per-node label; nodes outside `Omega` take the label of the region they lie in.
    pub labels: Vec<Label>,
    pub inside: Vec<bool>,
    pub in_star: Vec<bool>,
    pub out_star: Vec<bool>,
    /// Segments of `E`.
    pub cut: Vec<(Point, Point)>,
    pub area_in: f64,
    pub area_out: f64,
    pub domain_area: f64,
    pub unresolved: usize,
    pub seeds_in_domain: usize,
    pub direction: Direction,
}

fn closing(mask: &[bool], grid: &Grid) -> Vec<bool> {
    let morph = |src: &[bool], dilate: bool| -> Vec<bool> {
        (0..grid.len())
            .map(|k| {
                let (i, j) = ((k % grid.nx) as isize, (k / grid.nx) as isize);
                let mut acc = !dilate;
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let (ni, nj) = (i + di, j + dj);
                        let v = if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                            src[k]
                        } else {
                            src[grid.index(ni as usize, nj as usize)]
                        };
                        if dilate {
                            acc |= v;
                        } else {
                            acc &= v;
                        }
                    }
                }
                acc
            })
            .collect()
    };
    morph(&morph(mask, true), false)
}

impl FlowDecomposition {
    pub fn unresolved_fraction(&self) -> f64 {
        self.unresolved as f64 / self.seeds_in_domain.max(1) as f64
    }

    pub fn mask_at(&self, p: Point, inner: bool) -> bool {
        let g = &self.grid;
        let i = (((p.x - g.origin.x) / g.step).round().max(0.0) as usize).min(g.nx - 1);
        let j = (((p.y - g.origin.y) / g.step).round().max(0.0) as usize).min(g.ny - 1);
        let k = g.index(i, j);
        if inner {
            self.in_star[k]
        } else {
            self.out_star[k]
        }
    }

    /// Closed components of the cut, found by chaining segment endpoints.
    pub fn cut_components(&self) -> usize {
        chain_components(&self.cut, 1e-9 * self.grid.step.max(1e-300) * 1e6)
    }

    /// Largest `| |p - c| - sigma |` over cut vertices.
    pub fn cut_deviation_from_circle(&self, center: Point, sigma: f64) -> f64 {
        self.cut
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .map(|p| ((p - center).norm() - sigma).abs())
            .fold(0.0, f64::max)
    }

    /// Radii `(sigma_1, sigma_2)` of the annuli matched to `G_in*` by (area, inner perimeter)
    /// and to `G_out*` by (area, outer perimeter).
    pub fn interface_radii(&self, domain: &DomainSpec) -> (f64, f64) {
        use std::f64::consts::PI;
        let r1 = domain.inner().perimeter() / (2.0 * PI);
        let r2 = domain.outer().perimeter() / (2.0 * PI);
        let s1 = (r1 * r1 + self.area_in / PI).sqrt();
        let s2 = (r2 * r2 - self.area_out / PI).max(0.0).sqrt();
        (s1, s2)
    }
}

fn chain_components(segs: &[(Point, Point)], tol: f64) -> usize {
    let key = |p: Point| ((p.x / tol).round() as i64, (p.y / tol).round() as i64);
    let mut parent: Vec<usize> = (0..segs.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: HashMap<(i64, i64), usize> = HashMap::new();
    for (k, (a, b)) in segs.iter().enumerate() {
        for p in [*a, *b] {
            if let Some(&o) = owner.get(&key(p)) {
                let (ra, rb) = (find(&mut parent, o), find(&mut parent, k));
                parent[ra] = rb;
            } else {
                owner.insert(key(p), k);
            }
        }
    }
    (0..segs.len()).filter(|&k| find(&mut parent, k) == k).count()
}

/// Labels a grid of seeds by the boundary their flow line reaches and regularizes
/// the two basins by a one-cell morphological closing.
pub fn decompose<F: GradientField + ?Sized>(
    field: &F,
    domain: &DomainSpec,
    mesh: &Mesh,
    lambda: f64,
    grid_n: usize,
    opts: &FlowOptions,
) -> Result<FlowDecomposition> {
    // eigenfunctions are normalized to max |u| = 1; a flat one has no flow (the
    // solver leaves ~1e-7 noise on a constant)
    if !(field.max_gradient() > 0.0 && field.value_range() > 1e-6) {
        return Err(RfkError::DecompositionFailure("eigenfunction is constant; no flow".into()));
    }
    let (lo, hi) = domain.bounding_box();
    let grid = Grid::covering(lo, hi, grid_n);
    let direction = Direction::toward_boundary(lambda);
    let inside: Vec<bool> = (0..grid.len())
        .map(|k| domain.contains(grid.point(k % grid.nx, k / grid.nx)))
        .collect();
    let labels: Vec<Label> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let p = grid.point(k % grid.nx, k / grid.nx);
            if !inside[k] {
                return Ok(if domain.inner().contains(p) { Label::In } else { Label::Out });
            }
            Ok(match trace_flow(field, domain, p, direction, opts)?.termination {
                Termination::ReachedInner => Label::In,
                Termination::ReachedOuter => Label::Out,
                _ => Label::Unresolved,
            })
        })
        .collect::<Result<_>>()?;
    let seeds_in_domain = inside.iter().filter(|&&b| b).count();
    let unresolved = labels.iter().filter(|&&l| l == Label::Unresolved).count();
    if unresolved as f64 > 0.1 * seeds_in_domain as f64 {
        return Err(RfkError::DecompositionFailure(format!(
            "{unresolved} of {seeds_in_domain} seeds unresolved"
        )));
    }
    // unresolved seeds sit on critical sets; ties go to the inner basin
    let in_mask: Vec<bool> = labels.iter().map(|&l| l != Label::Out).collect();
    let out_mask: Vec<bool> = labels.iter().map(|&l| l == Label::Out).collect();
    let in_star = closing(&in_mask, &grid);
    let out_closed = closing(&out_mask, &grid);
    let out_star: Vec<bool> = out_closed.iter().zip(&in_star).map(|(&o, &i)| o && !i).collect();

    let indicator = ScalarField {
        grid,
        values: in_star.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    };
    let cut: Vec<(Point, Point)> = indicator
        .contour(0.5)
        .into_iter()
        .filter(|(a, b)| domain.contains(*a) && domain.contains(*b))
        .collect();

    let mut decomposition = FlowDecomposition {
        grid,
        labels,
        inside,
        in_star,
        out_star,
        cut,
        area_in: 0.0,
        area_out: 0.0,
        domain_area: mesh.area(),
        unresolved,
        seeds_in_domain,
        direction,
    };
    let (a_in, a_out) = basin_areas(mesh, &decomposition);
    decomposition.area_in = a_in;
    decomposition.area_out = a_out;
    if a_in <= 0.0 || a_out <= 0.0 {
        return Err(RfkError::EmptyBasin(format!("basin areas {a_in:.4e}, {a_out:.4e}")));
    }
    Ok(decomposition)
}

/// Quadrature points (barycentric) used for mask coverage fractions.
const COVERAGE_POINTS: [[f64; 3]; 7] = [
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [0.6, 0.2, 0.2],
    [0.2, 0.6, 0.2],
    [0.2, 0.2, 0.6],
    [0.1, 0.45, 0.45],
    [0.45, 0.1, 0.45],
    [0.45, 0.45, 0.1],
];

fn coverage(mesh: &Mesh, dec: &FlowDecomposition, k: usize, inner: bool) -> f64 {
    let [a, b, c] = mesh.triangle_vertices(k);
    let hits = COVERAGE_POINTS
        .iter()
        .filter(|l| dec.mask_at(a * l[0] + b * l[1] + c * l[2], inner))
        .count();
    hits as f64 / COVERAGE_POINTS.len() as f64
}

fn basin_areas(mesh: &Mesh, dec: &FlowDecomposition) -> (f64, f64) {
    (0..mesh.triangles.len()).fold((0.0, 0.0), |(ai, ao), k| {
        let a = mesh.triangle_area(k);
        (ai + a * coverage(mesh, dec, k, true), ao + a * coverage(mesh, dec, k, false))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basin {
    In,
    Out,
}

/// Rayleigh quotient of `u` restricted to one basin, with the Robin term of the
/// boundary component it contains and no term on the cut.
pub fn restricted_rayleigh(
    mesh: &Mesh,
    eigen: &EigenResult,
    dec: &FlowDecomposition,
    basin: Basin,
    robin: &RobinPair,
) -> Result<f64> {
    let inner = basin == Basin::In;
    let u = &eigen.u;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, t) in mesh.triangles.iter().enumerate() {
        let f = coverage(mesh, dec, k, inner);
        if f == 0.0 {
            continue;
        }
        let area = mesh.triangle_area(k);
        let g = eigen.grad[k];
        num += f * area * g.norm2();
        let (a, b, c) = (u[t[0]], u[t[1]], u[t[2]]);
        den += f * area / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    }
    if !(den > 0.0) {
        return Err(RfkError::EmptyBasin(format!("{basin:?} basin carries no mass")));
    }
    let (edges, h) = if inner {
        (&mesh.inner_edges, robin.h_in)
    } else {
        (&mesh.outer_edges, robin.h_out)
    };
    if let RobinParam::Finite(h) = h {
        let bd: f64 = edges
            .iter()
            .map(|&e| {
                let (a, b) = (u[e[0]], u[e[1]]);
                mesh.edge_length(e) / 3.0 * (a * a + a * b + b * b)
            })
            .sum();
        num += h * bd;
    }
    Ok(num / den)
}

/// Length-weighted RMS of `grad u . n` over the cut, relative to `max |grad u|`.
pub fn cut_neumann_residual<F: GradientField + ?Sized>(field: &F, cut: &[(Point, Point)]) -> f64 {
    let mut acc = 0.0;
    let mut len = 0.0;
    for &(a, b) in cut {
        let l = a.dist(b);
        if l == 0.0 {
            continue;
        }
        let Some((_, g)) = field.eval((a + b) * 0.5) else {
            continue;
        };
        let n = (b - a).perp() * (1.0 / l);
        acc += l * g.dot(n).powi(2);
        len += l;
    }
    if len == 0.0 {
        return 0.0;
    }
    (acc / len).sqrt() / field.max_gradient()
}

/// Polygonal circle, used as a reference cut.
pub fn circle_cut(center: Point, radius: f64, n: usize) -> Vec<(Point, Point)> {
    use std::f64::consts::PI;
    let p = |k: usize| {
        let th = 2.0 * PI * k as f64 / n as f64;
        center + Point::new(th.cos(), th.sin()) * radius
    };
    (0..n).map(|k| (p(k), p(k + 1))).collect()
}

/// `(seed_x, seed_y, label)` rows for seeds inside the domain.
pub fn labels_csv(dec: &FlowDecomposition) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed_x", "seed_y", "label"])?;
    for k in 0..dec.grid.len() {
        if !dec.inside[k] {
            continue;
        }
        let p = dec.grid.point(k % dec.grid.nx, k / dec.grid.nx);
        let label = match dec.labels[k] {
            Label::In => "in",
            Label::Out => "out",
            Label::Unresolved => "unresolved",
        };
        w.write_record([format!("{:.8}", p.x), format!("{:.8}", p.y), label.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| RfkError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
