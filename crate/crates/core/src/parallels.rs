//! Interior parallels: lengths of distance level sets, their comparison with
//! the matched annulus, and the transplanted radial test functions.
//!
//! Inner side: `s(delta)` is the length of `{d(., Omega_in) = delta}` inside `Omega`,
//! compared with `S(delta) = 2 pi (r + delta)`, and parametrized by
//! `t = int 1/s`, `T = int 1/S`. Outer side: level sets of the distance to
//! `partial Omega_out` inside `Omega`, `S(delta) = 2 pi (R - delta)`,
//! `l = int s`, `L = int S`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::contour::{Grid, ScalarField};
use crate::distance::polyline_distance_field;
use crate::error::{Result, RfkError};
use crate::fem::{assemble_matrices, Mesh, NodeFlag};
use crate::geometry::{closed_polyline_distance, DomainSpec, Point, Side};
use crate::radial::RadialEigen;
use crate::robin::RobinPair;

pub const DEFAULT_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Background grid nodes along the longer side of the bounding box.
    pub grid: usize,
    /// Levels with `s <= threshold * |partial Omega|` count as empty.
    pub threshold: f64,
    /// Relative level-extraction tolerance used by the Nagy check.
    pub level_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            threshold: 1e-3,
            level_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelProfile {
    pub side: Side,
    /// Inner and outer radius of the annulus matched on this side.
    pub r: f64,
    pub big_r: f64,
    /// `0, h, 2h, ...` up to the last nonempty level.
    pub delta: Vec<f64>,
    pub s: Vec<f64>,
    pub big_s: Vec<f64>,
    /// `t(delta)` (inner) or `l(delta)` (outer).
    pub param: Vec<f64>,
    /// `T(delta)` (inner) or `L(delta)` (outer).
    pub reference: Vec<f64>,
    /// `delta_*` (inner) or `delta^*` (outer).
    pub terminal_delta: f64,
    /// `t_*` or `l(delta^*)`.
    pub terminal_param: f64,
    /// `T_# = T(R - r)` or `L(R - r) = |A_{r,R}|`.
    pub sharp: f64,
    pub grid_step: f64,
    pub area: f64,
    pub boundary_length: f64,
    pub level_tol: f64,
}

fn side_field(domain: &DomainSpec, side: Side, grid: &Grid) -> ScalarField {
    let b = domain.boundary(side);
    let unsigned = polyline_distance_field(grid, b.samples());
    // positive on the Omega side of the curve
    let values = unsigned
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &d)| {
            let p = grid.point(k % grid.nx, k / grid.nx);
            let outside_curve = b.radial_gap(p) >= 0.0;
            match side {
                Side::Inner if outside_curve => d,
                Side::Outer if !outside_curve => d,
                _ => -d,
            }
        })
        .collect();
    ScalarField { grid: *grid, values }
}

/// Background grid covering the outer boundary with a two-cell margin.
pub fn background_grid(domain: &DomainSpec, n: usize) -> Grid {
    let (lo, hi) = domain.bounding_box();
    let pad = 2.0 * (hi.x - lo.x).max(hi.y - lo.y) / (n as f64 - 1.0);
    Grid::covering(
        Point::new(lo.x - pad, lo.y - pad),
        Point::new(hi.x + pad, hi.y + pad),
        n,
    )
}

/// Signed distance field of one boundary on `grid`, positive inside `Omega`'s side.
pub fn distance_field(domain: &DomainSpec, side: Side, grid: &Grid) -> ScalarField {
    side_field(domain, side, grid)
}

pub fn level_lengths(domain: &DomainSpec, side: Side, opts: &ProfileOptions) -> Result<ParallelProfile> {
    let grid = background_grid(domain, opts.grid);
    let field = side_field(domain, side, &grid);
    let h = grid.step;
    let inside = |p: Point| domain.contains(p);
    let max_d = field
        .values
        .iter()
        .enumerate()
        .filter(|(k, _)| inside(grid.point(k % grid.nx, k / grid.nx)))
        .map(|(_, &d)| d)
        .fold(0.0_f64, f64::max);
    let n_levels = (max_d / h).ceil() as usize + 1;
    let lengths = field.level_lengths(h, n_levels, inside);

    let p_in = domain.inner().perimeter();
    let p_out = domain.outer().perimeter();
    let boundary_length = p_in + p_out;
    let area = domain.area();
    let (r, big_r) = match side {
        Side::Inner => {
            let r = p_in / (2.0 * PI);
            (r, (r * r + area / PI).sqrt())
        }
        Side::Outer => {
            let big_r = p_out / (2.0 * PI);
            let r2 = big_r * big_r - area / PI;
            if r2 <= 0.0 {
                return Err(RfkError::InfeasibleMatch(format!(
                    "outer perimeter {p_out:.6} too short for area {area:.6}"
                )));
            }
            (r2.sqrt(), big_r)
        }
    };
    let cutoff = opts.threshold * boundary_length;
    let last = (1..=n_levels).rev().find(|&k| lengths[k] > cutoff).ok_or_else(|| {
        RfkError::DegenerateProfile(format!("no level set longer than {cutoff:.3e} on the {side} side"))
    })?;

    let mut delta = Vec::with_capacity(last + 1);
    let mut s = Vec::with_capacity(last + 1);
    delta.push(0.0);
    s.push(match side {
        Side::Inner => p_in,
        Side::Outer => p_out,
    });
    for (k, &len) in lengths.iter().enumerate().take(last + 1).skip(1) {
        delta.push(k as f64 * h);
        s.push(len);
    }
    if let Some(k) = s.iter().position(|&x| x <= 0.0) {
        return Err(RfkError::DegenerateProfile(format!(
            "empty level set at delta = {:.4} before the last nonempty one",
            delta[k]
        )));
    }
    let big_s: Vec<f64> = delta
        .iter()
        .map(|&d| match side {
            Side::Inner => 2.0 * PI * (r + d),
            Side::Outer => 2.0 * PI * (big_r - d),
        })
        .collect();
    let mut param = vec![0.0; delta.len()];
    for k in 1..delta.len() {
        let step = delta[k] - delta[k - 1];
        param[k] = param[k - 1]
            + 0.5
                * step
                * match side {
                    Side::Inner => 1.0 / s[k - 1] + 1.0 / s[k],
                    Side::Outer => s[k - 1] + s[k],
                };
    }
    let mut profile = ParallelProfile {
        side,
        r,
        big_r,
        reference: Vec::new(),
        terminal_delta: delta[delta.len() - 1],
        terminal_param: param[param.len() - 1],
        sharp: 0.0,
        delta,
        s,
        big_s,
        param,
        grid_step: h,
        area,
        boundary_length,
        level_tol: opts.level_tol,
    };
    profile.reference = profile.delta.iter().map(|&d| profile.reference_param(d)).collect();
    profile.sharp = profile.reference_param(big_r - r);
    Ok(profile)
}

impl ParallelProfile {
    /// `T(delta)` or `L(delta)` in closed form.
    pub fn reference_param(&self, delta: f64) -> f64 {
        match self.side {
            Side::Inner => ((self.r + delta) / self.r).ln() / (2.0 * PI),
            Side::Outer => 2.0 * PI * self.big_r * delta - PI * delta * delta,
        }
    }

    /// `T^{-1}(alpha)` or `L^{-1}(alpha)`.
    pub fn reference_inverse(&self, alpha: f64) -> f64 {
        match self.side {
            Side::Inner => self.r * ((2.0 * PI * alpha).exp() - 1.0),
            Side::Outer => self.big_r - (self.big_r * self.big_r - alpha / PI).max(0.0).sqrt(),
        }
    }

    /// Measured parametrization at distance `delta`, constant past the last level.
    pub fn param_at(&self, delta: f64) -> f64 {
        let h = self.grid_step;
        if delta <= 0.0 {
            return 0.0;
        }
        let x = delta / h;
        let k = x.floor() as usize;
        if k + 1 >= self.delta.len() {
            return self.terminal_param;
        }
        let f = x - k as f64;
        self.param[k] * (1.0 - f) + self.param[k + 1] * f
    }

    /// Number of levels with `s > S + tolerance`.
    pub fn nagy_violations(&self) -> usize {
        self.s
            .iter()
            .zip(&self.big_s)
            .filter(|(s, big)| **s > **big * (1.0 + self.level_tol) + self.grid_step)
            .count()
    }

    /// Largest `s / S - 1` over the profile.
    pub fn nagy_excess(&self) -> f64 {
        self.s
            .iter()
            .zip(&self.big_s)
            .map(|(s, big)| s / big - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `int_0^{t_*} g^2 dalpha` (inner) or `l(delta^*)` (outer); both approximate `|Omega|`.
    pub fn area_integral(&self) -> f64 {
        (1..self.delta.len())
            .map(|k| match self.side {
                Side::Inner => {
                    0.5 * (self.s[k - 1].powi(2) + self.s[k].powi(2)) * (self.param[k] - self.param[k - 1])
                }
                Side::Outer => self.param[k] - self.param[k - 1],
            })
            .sum()
    }

    /// `(alpha, g(alpha), G(alpha))` for inner profiles or `(alpha, h(alpha), H(alpha))` for outer ones,
    /// restricted to `alpha <= T_#` (resp. `|Omega|`).
    pub fn comparison_table(&self) -> Vec<(f64, f64, f64)> {
        self.param
            .iter()
            .zip(&self.s)
            .filter(|(a, _)| **a <= self.sharp)
            .map(|(&a, &s)| {
                let d = self.reference_inverse(a);
                let big = match self.side {
                    Side::Inner => 2.0 * PI * (self.r + d),
                    Side::Outer => 2.0 * PI * (self.big_r - d),
                };
                (a, s, big)
            })
            .collect()
    }

    /// Entries of [`comparison_table`](Self::comparison_table) with `g > G` beyond tolerance.
    pub fn comparison_violations(&self) -> usize {
        self.comparison_table()
            .iter()
            .filter(|(_, g, big)| *g > *big * (1.0 + self.level_tol) + self.grid_step)
            .count()
    }

    /// `R - r <= delta_* + h` and `T_# <= t_* + tol` (inner), `R - r <= delta^* + h` (outer).
    pub fn parametrization_consistent(&self, tol: f64) -> bool {
        let reach = self.big_r - self.r <= self.terminal_delta + self.grid_step;
        match self.side {
            Side::Inner => reach && self.sharp <= self.terminal_param + tol,
            Side::Outer => reach,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let (p, big) = match self.side {
            Side::Inner => ("t", "T"),
            Side::Outer => ("l", "L"),
        };
        w.write_record(["delta", "s", "S", p, big])?;
        for k in 0..self.delta.len() {
            w.write_record([
                format!("{:.10e}", self.delta[k]),
                format!("{:.10e}", self.s[k]),
                format!("{:.10e}", self.big_s[k]),
                format!("{:.10e}", self.param[k]),
                format!("{:.10e}", self.reference[k]),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| RfkError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub side: Side,
    pub values: Vec<f64>,
    /// Value taken beyond the transplanted range (`u(R)` of the annulus).
    pub cap: f64,
    /// `(alpha, phi(alpha))` on an equispaced grid of the comparison parameter.
    pub phi: Vec<(f64, f64)>,
}

impl TestFunction {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_consistent(profile: &ParallelProfile, radial: &RadialEigen, side: Side) -> Result<()> {
    if profile.side != side {
        return Err(RfkError::InconsistentInput(format!(
            "profile is for the {} side, expected {side}",
            profile.side
        )));
    }
    let tol = 1e-9 * profile.big_r;
    if (profile.r - radial.r).abs() > tol || (profile.big_r - radial.big_r).abs() > tol {
        return Err(RfkError::InconsistentInput(format!(
            "profile annulus ({:.9}, {:.9}) differs from radial annulus ({:.9}, {:.9})",
            profile.r, profile.big_r, radial.r, radial.big_r
        )));
    }
    Ok(())
}

fn nodal_distances(domain: &DomainSpec, mesh: &Mesh, side: Side) -> Vec<f64> {
    let poly = domain.boundary(side).samples();
    let own = match side {
        Side::Inner => NodeFlag::Inner,
        Side::Outer => NodeFlag::Outer,
    };
    mesh.nodes
        .par_iter()
        .zip(&mesh.node_flags)
        .map(|(&p, &f)| if f == own { 0.0 } else { closed_polyline_distance(p, poly) })
        .collect()
}

fn tabulate_phi(profile: &ParallelProfile, radial_of_delta: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let n = 256;
    (0..=n)
        .map(|k| {
            let a = profile.sharp * k as f64 / n as f64;
            (a, radial_of_delta(profile.reference_inverse(a)))
        })
        .collect()
}

/// `v = phi(t(d(x, partial Omega_in)))`, capped at `u(R)` once `t` exceeds `T_#`.
pub fn build_test_function_rn(
    domain: &DomainSpec,
    radial: &RadialEigen,
    profile: &ParallelProfile,
    mesh: &Mesh,
) -> Result<TestFunction> {
    check_consistent(profile, radial, Side::Inner)?;
    let r = profile.r;
    let w = |delta: f64| radial.value_at(r + delta);
    let cap = radial.value_at(profile.big_r);
    let values = nodal_distances(domain, mesh, Side::Inner)
        .into_iter()
        .map(|d| {
            let a = profile.param_at(d);
            if a <= profile.sharp {
                w(profile.reference_inverse(a).min(profile.big_r - r))
            } else {
                cap
            }
        })
        .collect();
    Ok(TestFunction {
        side: Side::Inner,
        values,
        cap,
        phi: tabulate_phi(profile, w),
    })
}

/// `v = phi(l(d(x, partial Omega_out)))` with `l` clamped to `L(R - r) = |Omega|`.
pub fn build_test_function_nr(
    domain: &DomainSpec,
    radial: &RadialEigen,
    profile: &ParallelProfile,
    mesh: &Mesh,
) -> Result<TestFunction> {
    check_consistent(profile, radial, Side::Outer)?;
    let big_r = profile.big_r;
    let w = |delta: f64| radial.value_at(big_r - delta);
    let cap = radial.value_at(profile.r);
    let values = nodal_distances(domain, mesh, Side::Outer)
        .into_iter()
        .map(|d| {
            let a = profile.param_at(d).min(profile.sharp);
            w(profile.reference_inverse(a).min(big_r - profile.r))
        })
        .collect();
    Ok(TestFunction {
        side: Side::Outer,
        values,
        cap,
        phi: tabulate_phi(profile, w),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub quotient: f64,
    pub lambda_domain: f64,
    pub lambda_annulus: f64,
    /// `lambda_domain - quotient`; nonpositive when the lower inequality holds.
    pub lower_residual: f64,
    /// `quotient - lambda_annulus`; nonpositive when the upper inequality holds.
    pub upper_residual: f64,
    /// Absolute allowance `rel_tol * |lambda_annulus|`.
    pub allowance: f64,
    pub dirichlet_energy: f64,
    pub annulus_dirichlet_energy: f64,
    pub l2_norm2: f64,
    pub annulus_l2_norm2: f64,
    pub boundary_term: f64,
    pub annulus_boundary_term: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_residual <= self.allowance && self.upper_residual <= self.allowance
    }
}

/// Evaluates `lambda(Omega) <= Q(v) <= lambda(A)` for a transplanted test function.
pub fn sandwich_check(
    mesh: &Mesh,
    robin: &RobinPair,
    test: &TestFunction,
    radial: &RadialEigen,
    lambda_domain: f64,
    rel_tol: f64,
) -> Result<SandwichReport> {
    let mats = assemble_matrices(mesh);
    let v = &test.values;
    let grad = mats.stiffness.quad_form(v);
    let l2 = mats.mass.quad_form(v);
    if !(l2 > 0.0) {
        return Err(RfkError::InvalidTestFunction("zero L2 norm".into()));
    }
    let (bd, h, bd_ann) = match test.side {
        Side::Inner => (
            mats.inner_mass.quad_form(v),
            robin.h_in,
            2.0 * PI * radial.r * radial.value_at(radial.r).powi(2),
        ),
        Side::Outer => (
            mats.outer_mass.quad_form(v),
            robin.h_out,
            2.0 * PI * radial.big_r * radial.value_at(radial.big_r).powi(2),
        ),
    };
    let quotient = crate::fem::rayleigh_quotient(mesh, robin, v)?;
    let lambda_annulus = radial.lambda1;
    let h = h.finite().unwrap_or(0.0);
    Ok(SandwichReport {
        quotient,
        lambda_domain,
        lambda_annulus,
        lower_residual: lambda_domain - quotient,
        upper_residual: quotient - lambda_annulus,
        allowance: rel_tol * lambda_annulus.abs(),
        dirichlet_energy: grad,
        annulus_dirichlet_energy: radial.dirichlet_energy(),
        l2_norm2: l2,
        annulus_l2_norm2: radial.l2_norm2(),
        boundary_term: h * bd,
        annulus_boundary_term: h * bd_ann,
    })
}
