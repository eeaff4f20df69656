//! Smallest generalized eigenpair by shift-and-invert inverse iteration.
//!
//! A successful Cholesky factorization of `A - mu M` certifies `mu < lambda_1`,
//! so the shift is walked up toward the current Rayleigh quotient only while
//! the factorization keeps succeeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assemble::{assemble, System};
use super::mesh::Mesh;
use super::sparse::{dot, rcm_ordering, SkylineCholesky};
use crate::error::{Result, RfkError};
use crate::geometry::Point;
use crate::robin::RobinPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Stop once the Rayleigh quotient moves by less than this (relative to `max(1, |lambda|)`).
    pub rq_tol: f64,
    /// ... and `||A u - lambda M u|| / ||M u||` is below this.
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub max_shift_retries: usize,
    /// Seed of the perturbation added to the constant initial iterate.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            rq_tol: 1e-12,
            residual_tol: 1e-8,
            max_iterations: 500,
            max_shift_retries: 5,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Nodal values on the whole mesh (zero on Dirichlet nodes), `max u = 1`.
    pub u: Vec<f64>,
    pub grad: Vec<Point>,
    pub recovered_grad: Vec<Point>,
    pub iterations: usize,
    pub residual: f64,
}

impl EigenResult {
    pub fn min_interior(&self, mesh: &Mesh) -> f64 {
        mesh.node_flags
            .iter()
            .zip(&self.u)
            .filter(|(f, _)| **f == super::mesh::NodeFlag::Interior)
            .map(|(_, u)| *u)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reduced eigenpair `(lambda, x)` of `sys`, with `x^T M x = 1`.
pub fn smallest_eig(sys: &System, opts: &EigenOptions) -> Result<(f64, Vec<f64>, usize, f64)> {
    let n = sys.a.n;
    if n == 0 {
        return Err(RfkError::InconsistentInput("no free unknowns".into()));
    }
    let perm = rcm_ordering(&sys.a);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..n).map(|_| 1.0 + 1e-3 * rng.random_range(-1.0..1.0)).collect();
    let ones = vec![1.0; n];
    let probe = sys.quotient(&ones)?.min(sys.quotient(&x)?);
    let h = sys.robin.max_finite_abs();
    let margin = 1.0 + h * h;

    let factor_at = |mu: f64| SkylineCholesky::factor(&sys.a.axpy(-mu, &sys.m), &perm);
    let mut mu = probe - margin;
    let mut factor = None;
    for _ in 0..=opts.max_shift_retries {
        match factor_at(mu) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(_) => mu -= margin + mu.abs(),
        }
    }
    let mut factor = factor.ok_or_else(|| {
        RfkError::Factorization(format!("no admissible shift after {} retries (last {mu:.4e})", opts.max_shift_retries))
    })?;

    let normalize = |v: &mut Vec<f64>| {
        let s = dot(v, &sys.m.matvec(v)).sqrt();
        v.iter_mut().for_each(|a| *a /= s);
    };
    normalize(&mut x);
    let mut q = sys.quotient(&x)?;
    let mut can_tighten = true;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let rhs = sys.m.matvec(&x);
        x = factor.solve(&rhs);
        normalize(&mut x);
        let q_new = sys.quotient(&x)?;
        let dq = (q_new - q).abs();
        q = q_new;
        residual = sys.residual(&x, q);
        if dq < opts.rq_tol * q.abs().max(1.0) && residual < opts.residual_tol {
            return Ok((q, x, it, residual));
        }
        if can_tighten && it % 3 == 0 && q - mu > 1e-9 * q.abs().max(1.0) {
            let target = q - 0.2 * (q - mu);
            match factor_at(target) {
                Ok(f) => {
                    factor = f;
                    mu = target;
                }
                Err(_) => can_tighten = false,
            }
        }
    }
    Err(RfkError::NonConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

pub fn solve_eigen(mesh: &Mesh, robin: &RobinPair, opts: &EigenOptions) -> Result<EigenResult> {
    let sys = assemble(mesh, robin);
    eigen_from_system(mesh, &sys, opts)
}

pub fn eigen_from_system(mesh: &Mesh, sys: &System, opts: &EigenOptions) -> Result<EigenResult> {
    let (_, x, iterations, residual) = smallest_eig(sys, opts)?;
    let mut u = sys.expand(&x);
    let mean: f64 = u.iter().sum();
    let peak = if mean >= 0.0 {
        u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        u.iter().copied().fold(f64::INFINITY, f64::min)
    };
    u.iter_mut().for_each(|v| *v /= peak);
    let lambda1 = sys.quotient(&sys.reduce(&u))?;
    let grad = mesh.gradients(&u);
    let recovered_grad = mesh.recovered_gradients(&grad);
    Ok(EigenResult {
        lambda1,
        u,
        grad,
        recovered_grad,
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::build_mesh;
    use crate::geometry::DomainSpec;

    #[test]
    fn pure_neumann_is_zero_constant() {
        let mesh = build_mesh(&DomainSpec::annulus(1.0, 2.0).unwrap(), 32, 4).unwrap();
        let r = solve_eigen(&mesh, &RobinPair::from_f64(0.0, 0.0).unwrap(), &EigenOptions::default()).unwrap();
        assert!(r.lambda1.abs() < 1e-8);
        assert!(r.u.iter().all(|u| (u - 1.0).abs() < 1e-6));
    }

    #[test]
    fn quotient_reproduces_eigenvalue() {
        let mesh = build_mesh(&DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.2, 0.0)).unwrap(), 48, 8).unwrap();
        for (a, b) in [(1.0, 1.0), (-1.0, -1.0), (f64::INFINITY, 0.5)] {
            let robin = RobinPair::from_f64(a, b).unwrap();
            let r = solve_eigen(&mesh, &robin, &EigenOptions::default()).unwrap();
            let q = crate::fem::assemble::rayleigh_quotient(&mesh, &robin, &r.u).unwrap();
            assert!((q - r.lambda1).abs() <= 1e-10 * r.lambda1.abs().max(1.0));
            assert!(r.min_interior(&mesh) > 0.0);
            assert!((r.u.iter().copied().fold(f64::MIN, f64::max) - 1.0).abs() < 1e-14);
        }
    }
}
