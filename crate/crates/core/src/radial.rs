//! First eigenpair of the radial problem on an annulus `A_{r,R}`:
//!
//! ```text
//! -(t v')' = lambda t v   on (r, R),
//! -v'(r) + h_in v(r) = 0,   v'(R) + h_out v(R) = 0,
//! ```
//!
//! solved by shooting from the inner boundary with fixed-step RK4 on
//! `(v, w = t v')` and bisection on the first sign change of the outer residual
//! among nodeless solutions. `r = 0` is the disk, launched from a small offset
//! off the axis with `v = 1, v' = 0`.

use std::f64::consts::PI;

use crate::error::{Result, RfkError};
use crate::robin::RobinParam;

/// Launch offset for the disk (`r = 0`) case.
pub const AXIS_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProblem {
    pub r: f64,
    pub big_r: f64,
    pub h_in: RobinParam,
    pub h_out: RobinParam,
}

impl RadialProblem {
    pub fn new(r: f64, big_r: f64, h_in: RobinParam, h_out: RobinParam) -> Result<Self> {
        if !(r >= 0.0 && big_r > r && big_r.is_finite()) {
            return Err(RfkError::InconsistentInput(format!(
                "radial problem needs 0 <= r < R, got r = {r}, R = {big_r}"
            )));
        }
        Ok(Self { r, big_r, h_in, h_out })
    }

    pub fn is_disk(&self) -> bool {
        self.r == 0.0
    }

    fn start(&self) -> f64 {
        if self.is_disk() {
            AXIS_EPSILON
        } else {
            self.r
        }
    }

    /// Initial `(v, w)` at the launch point.
    fn launch(&self) -> (f64, f64) {
        if self.is_disk() {
            return (1.0, 0.0);
        }
        match self.h_in {
            RobinParam::Finite(h) => (1.0, self.r * h),
            RobinParam::Dirichlet => (0.0, self.r),
        }
    }

    /// Outer boundary residual for the state `(v, w)` at `t = R`.
    fn outer_residual(&self, v: f64, w: f64) -> f64 {
        match self.h_out {
            RobinParam::Finite(h) => w / self.big_r + h * v,
            RobinParam::Dirichlet => v,
        }
    }

    /// Same problem on `(c r, c R)` with `h / c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            r: self.r * c,
            big_r: self.big_r * c,
            h_in: self.h_in.scaled_by_length(c),
            h_out: self.h_out.scaled_by_length(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// RK4 steps across `[r, R]`.
    pub steps: usize,
    /// Bisection stops once the bracket is below `rel_tol * max(1, |lambda|)`.
    pub rel_tol: f64,
    /// Coarse scan points used to narrow the initial bracket.
    pub scan_points: usize,
    /// Bracket expansions (factor 4 each) before giving up.
    pub max_expansions: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            steps: 4096,
            rel_tol: 1e-10,
            scan_points: 32,
            max_expansions: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialEigen {
    pub lambda1: f64,
    pub r: f64,
    pub big_r: f64,
    pub grid: Vec<f64>,
    /// Eigenfunction on `grid`, normalized so that `max v = 1`.
    pub v: Vec<f64>,
    pub vprime: Vec<f64>,
    /// Interior critical radius when `h_in * h_out > 0`.
    pub sigma: Option<f64>,
}

impl RadialEigen {
    /// Cubic Hermite interpolation of `v` at radius `t` (clamped to `[r, R]`).
    pub fn value_at(&self, t: f64) -> f64 {
        let (i, s, h) = self.locate(t);
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (d0, d1) = (self.vprime[i] * h, self.vprime[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * v0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * v1
            + (s3 - s2) * d1
    }

    /// Derivative of the Hermite interpolant.
    pub fn derivative_at(&self, t: f64) -> f64 {
        let (i, s, h) = self.locate(t);
        let (v0, v1) = (self.v[i], self.v[i + 1]);
        let (d0, d1) = (self.vprime[i] * h, self.vprime[i + 1] * h);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * v0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * v1
            + (3.0 * s2 - 2.0 * s) * d1)
            / h
    }

    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let n = self.grid.len();
        let t0 = self.grid[0];
        let h = (self.grid[n - 1] - t0) / (n - 1) as f64;
        let x = ((t - t0) / h).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        (i, x - i as f64, h)
    }

    pub fn min_value(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `int_r^R v^2 t dt * 2 pi`, the L2 norm squared of `u(x) = v(|x|)` on the annulus.
    pub fn l2_norm2(&self) -> f64 {
        2.0 * PI * trapezoid(&self.grid, |i| self.v[i] * self.v[i] * self.grid[i])
    }

    /// `2 pi int_r^R v'^2 t dt`, the Dirichlet energy of `u(x) = v(|x|)`.
    pub fn dirichlet_energy(&self) -> f64 {
        2.0 * PI * trapezoid(&self.grid, |i| self.vprime[i] * self.vprime[i] * self.grid[i])
    }
}

fn trapezoid(grid: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (0..grid.len() - 1)
        .map(|i| 0.5 * (grid[i + 1] - grid[i]) * (f(i) + f(i + 1)))
        .sum()
}

struct Shot {
    residual: f64,
    positive: bool,
}

fn rk4_step(t: f64, h: f64, v: f64, w: f64, lambda: f64) -> (f64, f64) {
    let f = |t: f64, v: f64, w: f64| (w / t, -lambda * t * v);
    let (k1v, k1w) = f(t, v, w);
    let (k2v, k2w) = f(t + 0.5 * h, v + 0.5 * h * k1v, w + 0.5 * h * k1w);
    let (k3v, k3w) = f(t + 0.5 * h, v + 0.5 * h * k2v, w + 0.5 * h * k2w);
    let (k4v, k4w) = f(t + h, v + h * k3v, w + h * k3w);
    (
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )
}

/// Integrates from the inner boundary; `trace` receives every `(t, v, w)`.
fn integrate(
    p: &RadialProblem,
    lambda: f64,
    steps: usize,
    mut trace: Option<&mut Vec<(f64, f64, f64)>>,
) -> Result<Shot> {
    let t0 = p.start();
    let h = (p.big_r - t0) / steps as f64;
    let (mut v, mut w) = p.launch();
    let mut positive = true;
    if let Some(tr) = trace.as_deref_mut() {
        tr.push((t0, v, w));
    }
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        (v, w) = rk4_step(t, h, v, w, lambda);
        if !(v.is_finite() && w.is_finite()) {
            return Err(RfkError::Overflow(format!("lambda = {lambda:.6e}, t = {:.6}", t + h)));
        }
        // the last node only matters when the outer condition is Robin
        let last = i + 1 == steps;
        if v <= 0.0 && !(last && p.h_out.is_dirichlet()) {
            positive = false;
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((t + h, v, w));
        }
    }
    // rescale so that the residual sign is independent of the growth of v
    let scale = v.abs().max(w.abs()).max(f64::MIN_POSITIVE);
    Ok(Shot {
        residual: p.outer_residual(v / scale, w / scale),
        positive,
    })
}

/// `true` iff `lambda < lambda_1`: the shooting solution is positive on `(r, R]`
/// and the outer residual has not changed sign yet.
fn below_first(p: &RadialProblem, lambda: f64, steps: usize) -> Result<bool> {
    let shot = match integrate(p, lambda, steps, None) {
        Ok(s) => s,
        Err(RfkError::Overflow(_)) => integrate(p, lambda, 2 * steps, None)?,
        Err(e) => return Err(e),
    };
    Ok(shot.positive && shot.residual > 0.0)
}

fn initial_window(p: &RadialProblem) -> (f64, f64) {
    let hmax = [p.h_in, p.h_out]
        .iter()
        .filter_map(|h| h.finite())
        .fold(0.0_f64, |m, h| m.max(h.abs()));
    let nonneg = p.h_in.sign() >= 0 && p.h_out.sign() >= 0;
    let lo = if nonneg && !(p.h_in.is_neumann() && p.h_out.is_neumann()) {
        0.0
    } else {
        -4.0 * (hmax + 1.0).powi(2)
    };
    let width = p.big_r - p.r;
    let hi = (PI / width).powi(2) * 16.0;
    (lo, hi)
}

/// First eigenvalue and eigenfunction of the radial problem.
pub fn lambda1_radial(problem: &RadialProblem, opts: &RadialOptions) -> Result<RadialEigen> {
    let steps = opts.steps.max(8);
    let (mut lo, mut hi) = initial_window(problem);

    let mut expansions = 0;
    while !below_first(problem, lo, steps)? {
        if expansions == opts.max_expansions {
            return Err(RfkError::NoEigenvalueFound(format!(
                "no lower bracket down to lambda = {lo:.4e}"
            )));
        }
        lo = 4.0 * lo.min(-1.0);
        expansions += 1;
    }
    expansions = 0;
    while below_first(problem, hi, steps)? {
        if expansions == opts.max_expansions {
            return Err(RfkError::NoEigenvalueFound(format!(
                "no upper bracket up to lambda = {hi:.4e}"
            )));
        }
        hi *= 4.0;
        expansions += 1;
    }

    // coarse scan for the first transition, then bisection
    let n = opts.scan_points.max(2);
    let mut prev = lo;
    for k in 1..n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        if !below_first(problem, x, steps)? {
            hi = x;
            break;
        }
        prev = x;
    }
    lo = prev;
    while hi - lo > opts.rel_tol * 1.0_f64.max(0.5 * (lo + hi).abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below_first(problem, mid, steps)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    build_eigen(problem, lambda, steps)
}

fn build_eigen(p: &RadialProblem, lambda: f64, steps: usize) -> Result<RadialEigen> {
    let mut trace = Vec::with_capacity(steps + 1);
    integrate(p, lambda, steps, Some(&mut trace))?;
    let vmax = trace.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !(vmax > 0.0) {
        return Err(RfkError::StructureViolation("eigenfunction has no positive values".into()));
    }
    let mut grid = Vec::with_capacity(trace.len());
    let mut v = Vec::with_capacity(trace.len());
    let mut vprime = Vec::with_capacity(trace.len());
    for &(t, vv, w) in &trace {
        grid.push(t);
        v.push(vv / vmax);
        vprime.push(w / t / vmax);
    }
    if p.is_disk() {
        grid[0] = 0.0;
    }
    if p.h_out.is_dirichlet() {
        // the shot lands within the bisection tolerance of zero; impose the condition exactly
        let last = v.len() - 1;
        v[last] = 0.0;
    }
    let mut eig = RadialEigen {
        lambda1: lambda,
        r: p.r,
        big_r: p.big_r,
        grid,
        v,
        vprime,
        sigma: None,
    };
    if p.h_in.sign() * p.h_out.sign() > 0 && !p.is_disk() {
        eig.sigma = Some(sigma_of(&eig, p)?);
    }
    Ok(eig)
}

/// Unique interior zero of `v'` for `h_in * h_out > 0`.
pub fn sigma_of(eigen: &RadialEigen, problem: &RadialProblem) -> Result<f64> {
    if problem.h_in.sign() * problem.h_out.sign() <= 0 {
        return Err(RfkError::InconsistentInput(
            "sigma is defined only for h_in * h_out > 0".into(),
        ));
    }
    let d = &eigen.vprime;
    let n = d.len();
    let mut crossings = Vec::new();
    for i in 1..n - 2 {
        if d[i] == 0.0 || (d[i] > 0.0) != (d[i + 1] > 0.0) {
            crossings.push(i);
        }
    }
    // consecutive hits from an exact zero at a node count once
    crossings.dedup_by(|b, a| *b == *a + 1 && d[*b] == 0.0);
    if crossings.len() != 1 {
        return Err(RfkError::StructureViolation(format!(
            "v' changes sign {} times, expected exactly once",
            crossings.len()
        )));
    }
    let i = crossings[0];
    // w = t v' has w' = -lambda t v; bisect the cubic Hermite interpolant of w on [t_i, t_{i+1}]
    let (t0, t1) = (eigen.grid[i], eigen.grid[i + 1]);
    let h = t1 - t0;
    let w0 = t0 * d[i];
    let w1 = t1 * d[i + 1];
    let dw0 = -eigen.lambda1 * t0 * eigen.v[i] * h;
    let dw1 = -eigen.lambda1 * t1 * eigen.v[i + 1] * h;
    let w = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * w0 + (s3 - 2.0 * s2 + s) * dw0 + (-2.0 * s3 + 3.0 * s2) * w1 + (s3 - s2) * dw1
    };
    let (mut a, mut b) = (0.0, 1.0);
    let sa = w(a) > 0.0;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (w(m) > 0.0) == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(t0 + 0.5 * (a + b) * h)
}

/// Which boundary carries the Robin condition in a domain-monotonicity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobinSide {
    /// `lambda_1^{RN}(A_{r,delta})` with this `h_in`, Neumann at `delta`.
    Inner(RobinParam),
    /// `lambda_1^{NR}(A_{delta,R})`, Neumann at `delta`, this `h_out` at `R`.
    Outer(RobinParam),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl RobinSide {
    /// Direction in which the sub-annulus eigenvalue moves as `delta` grows.
    pub fn expected_direction(self) -> Option<Monotonicity> {
        match self {
            RobinSide::Inner(h) if h.sign() > 0 => Some(Monotonicity::Decreasing),
            RobinSide::Inner(h) if h.sign() < 0 => Some(Monotonicity::Increasing),
            RobinSide::Outer(h) if h.sign() > 0 => Some(Monotonicity::Increasing),
            RobinSide::Outer(h) if h.sign() < 0 => Some(Monotonicity::Decreasing),
            _ => None,
        }
    }

    fn problem(self, r: f64, big_r: f64, delta: f64) -> Result<RadialProblem> {
        match self {
            RobinSide::Inner(h) => RadialProblem::new(r, delta, h, RobinParam::NEUMANN),
            RobinSide::Outer(h) => RadialProblem::new(delta, big_r, RobinParam::NEUMANN, h),
        }
    }
}

/// `(delta, lambda_1)` on `n_samples` equispaced interior points of `(r, R)`.
pub fn monotonicity_scan(
    r: f64,
    big_r: f64,
    side: RobinSide,
    n_samples: usize,
    opts: &RadialOptions,
) -> Result<Vec<(f64, f64)>> {
    if side.expected_direction().is_none() {
        return Err(RfkError::InconsistentInput("monotonicity scan needs a nonzero Robin side".into()));
    }
    (0..n_samples)
        .map(|k| {
            let delta = r + (big_r - r) * (k + 1) as f64 / (n_samples + 1) as f64;
            let lam = lambda1_radial(&side.problem(r, big_r, delta)?, opts)?.lambda1;
            Ok((delta, lam))
        })
        .collect()
}

/// Number of consecutive pairs that violate strict monotonicity in `dir`.
pub fn monotonicity_violations(table: &[(f64, f64)], dir: Monotonicity) -> usize {
    table
        .windows(2)
        .filter(|w| match dir {
            Monotonicity::Increasing => w[1].1 <= w[0].1,
            Monotonicity::Decreasing => w[1].1 >= w[0].1,
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaxCrossing {
    pub delta_star: f64,
    pub lambda_minimax: f64,
    pub lambda_maximin: f64,
}

/// Crossing of `delta -> lambda_1^{RN}(A_{r,delta})` and `delta -> lambda_1^{NR}(A_{delta,R})`.
pub fn minimax_crossing(
    r: f64,
    big_r: f64,
    h_in: RobinParam,
    h_out: RobinParam,
    opts: &RadialOptions,
) -> Result<MinimaxCrossing> {
    if h_in.sign() * h_out.sign() <= 0 {
        return Err(RfkError::InconsistentInput("minimax needs h_in * h_out > 0".into()));
    }
    let pair = |delta: f64| -> Result<(f64, f64)> {
        let a = lambda1_radial(&RadialProblem::new(r, delta, h_in, RobinParam::NEUMANN)?, opts)?.lambda1;
        let b = lambda1_radial(&RadialProblem::new(delta, big_r, RobinParam::NEUMANN, h_out)?, opts)?.lambda1;
        Ok((a, b))
    };
    let width = big_r - r;
    let mut lo = r + 1e-6 * width;
    let mut hi = big_r - 1e-6 * width;
    let (a_lo, b_lo) = pair(lo)?;
    let (a_hi, b_hi) = pair(hi)?;
    let s_lo = a_lo - b_lo;
    let s_hi = a_hi - b_hi;
    if s_lo.signum() == s_hi.signum() {
        return Err(RfkError::StructureViolation(format!(
            "sub-annulus eigenvalue curves do not cross (differences {s_lo:.3e}, {s_hi:.3e})"
        )));
    }
    let mut best = (a_lo, b_lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (a, b) = pair(mid)?;
        best = (a, b);
        if (a - b).signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        let scale = 1.0_f64.max(a.abs());
        if hi - lo < 1e-13 * width || (a - b).abs() < 1e-10 * scale {
            break;
        }
    }
    let delta_star = 0.5 * (lo + hi);
    Ok(MinimaxCrossing {
        delta_star,
        lambda_minimax: best.0.max(best.1),
        lambda_maximin: best.0.min(best.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use RobinParam::{Dirichlet, Finite};

    fn solve(r: f64, big_r: f64, a: RobinParam, b: RobinParam) -> RadialEigen {
        lambda1_radial(&RadialProblem::new(r, big_r, a, b).unwrap(), &RadialOptions::default()).unwrap()
    }

    #[test]
    fn neumann_neumann_is_zero_and_constant() {
        let e = solve(1.0, 2.0, Finite(0.0), Finite(0.0));
        assert!(e.lambda1.abs() < 1e-9, "{}", e.lambda1);
        assert!(e.v.iter().all(|v| (v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn negative_robin_gives_negative_eigenvalue() {
        let e = solve(1.0, 2.0, Finite(-1.0), Finite(-1.0));
        assert!(e.lambda1 < 0.0);
        assert!(e.v.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn boundary_residuals_vanish() {
        for (a, b) in [
            (Finite(1.0), Finite(2.0)),
            (Finite(-0.5), Finite(-1.0)),
            (Dirichlet, Finite(1.0)),
            (Finite(0.7), Dirichlet),
        ] {
            let e = solve(1.0, 2.0, a, b);
            let n = e.v.len() - 1;
            match a {
                Finite(h) => assert!((-e.vprime[0] + h * e.v[0]).abs() < 1e-8),
                Dirichlet => assert!(e.v[0].abs() < 1e-12),
            }
            match b {
                Finite(h) => assert!((e.vprime[n] + h * e.v[n]).abs() < 1e-7),
                Dirichlet => assert!(e.v[n].abs() < 1e-7),
            }
        }
    }

    #[test]
    fn sigma_splits_profile() {
        let e = solve(1.0, 2.0, Finite(1.0), Finite(1.0));
        let s = e.sigma.unwrap();
        assert!(s > 1.0 && s < 2.0);
        for (t, d) in e.grid.iter().zip(&e.vprime) {
            if *t < s - 1e-3 {
                assert!(*d > 0.0);
            } else if *t > s + 1e-3 {
                assert!(*d < 0.0);
            }
        }
        let e = solve(1.0, 2.0, Finite(-1.0), Finite(-1.0));
        let s = e.sigma.unwrap();
        assert!(e.derivative_at(0.5 * (1.0 + s)) < 0.0 && e.derivative_at(0.5 * (s + 2.0)) > 0.0);
    }

    #[test]
    fn sigma_rejects_wrong_regime() {
        let p = RadialProblem::new(1.0, 2.0, Finite(1.0), Finite(0.0)).unwrap();
        let e = lambda1_radial(&p, &RadialOptions::default()).unwrap();
        assert!(sigma_of(&e, &p).is_err());
    }

    #[test]
    fn hermite_interpolation_matches_nodes() {
        let e = solve(1.0, 2.0, Finite(1.0), Finite(0.0));
        for i in [0, 7, 100, 4000, 4096] {
            assert!((e.value_at(e.grid[i]) - e.v[i]).abs() < 1e-14);
        }
        // between nodes the interpolant agrees with the neighbors to O(h)
        let t = 0.5 * (e.grid[10] + e.grid[11]);
        assert!((e.value_at(t) - 0.5 * (e.v[10] + e.v[11])).abs() < 1e-6);
    }

    #[test]
    fn bad_problem_rejected() {
        assert!(RadialProblem::new(2.0, 1.0, Finite(1.0), Finite(1.0)).is_err());
        assert!(RadialProblem::new(-1.0, 1.0, Finite(1.0), Finite(1.0)).is_err());
    }

    #[test]
    fn scan_requires_robin_side() {
        let r = monotonicity_scan(1.0, 2.0, RobinSide::Inner(Finite(0.0)), 4, &RadialOptions::default());
        assert!(r.is_err());
    }
}
