//! Seeded domain families.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{DeficitSpec, FamilyKind};
use crate::error::{Result, RfkError};
use crate::geometry::{DomainSpec, Point, StarBoundary};

const MAX_ATTEMPTS: usize = 64;

/// `P^2 - 4 pi A`.
pub fn isoperimetric_deficit(b: &StarBoundary) -> f64 {
    let p = b.perimeter();
    p * p - 4.0 * PI * b.area()
}

fn random_offset(rng: &mut ChaCha8Rng, max_offset: f64) -> Point {
    if max_offset == 0.0 {
        return Point::new(0.0, 0.0);
    }
    let rho = max_offset * rng.random_range(0.25..=1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    Point::new(rho * phi.cos(), rho * phi.sin())
}

/// Single-mode curve `a0 (1 + amp cos m (theta - phase))`.
fn single_mode(center: Point, a0: f64, m: usize, amp: f64, phase: f64) -> Result<StarBoundary> {
    let mut cos = vec![0.0; m];
    let mut sin = vec![0.0; m];
    let mp = m as f64 * phase;
    cos[m - 1] = a0 * amp * mp.cos();
    sin[m - 1] = a0 * amp * mp.sin();
    StarBoundary::new(center, a0, cos, sin)
}

fn random_fourier(rng: &mut ChaCha8Rng, center: Point, a0: f64, modes: &[usize], amplitude: f64) -> Result<StarBoundary> {
    let top = modes.iter().copied().max().unwrap_or(0);
    let mut cos = vec![0.0; top];
    let mut sin = vec![0.0; top];
    // |a_k| + |b_k| summed over modes stays below amplitude * a0
    let share = amplitude * a0 / (2.0 * modes.len().max(1) as f64);
    for &m in modes {
        if m == 0 {
            continue;
        }
        cos[m - 1] = share * rng.random_range(-1.0..=1.0);
        sin[m - 1] = share * rng.random_range(-1.0..=1.0);
    }
    StarBoundary::new(center, a0, cos, sin)
}

/// The `index`-th member of a family; deterministic in `(seed, index)`.
pub fn generate(kind: &FamilyKind, seed: u64, index: usize) -> Result<DomainSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    match kind {
        FamilyKind::Concentric { r, big_r } => DomainSpec::annulus(*r, *big_r),
        FamilyKind::Eccentric { r, big_r, max_offset } => {
            let offset = random_offset(&mut rng, *max_offset);
            DomainSpec::eccentric_annulus(*r, *big_r, offset)
        }
        FamilyKind::Fourier {
            r,
            big_r,
            modes,
            amplitude,
            max_offset,
        } => {
            let origin = Point::new(0.0, 0.0);
            let mut last = None;
            for _ in 0..MAX_ATTEMPTS {
                let center = random_offset(&mut rng, *max_offset);
                let built = random_fourier(&mut rng, center, *r, modes, *amplitude).and_then(|inner| {
                    let outer = random_fourier(&mut rng, origin, *big_r, modes, *amplitude)?;
                    DomainSpec::new(inner, outer)
                });
                match built {
                    Ok(d) => return Ok(d),
                    Err(e) => last = Some(e),
                }
            }
            Err(RfkError::Generation(format!(
                "no valid Fourier domain after {MAX_ATTEMPTS} attempts: {}",
                last.map(|e| e.to_string()).unwrap_or_default()
            )))
        }
        FamilyKind::DeficitMatched(spec) => generate_deficit_matched(spec, &mut rng),
    }
}

/// Builds a domain whose two boundaries have equal isoperimetric deficits, which is the
/// compatibility `|dOmega_out|^2 - |dOmega_in|^2 = 4 pi |Omega|`.
pub fn generate_deficit_matched(spec: &DeficitSpec, rng: &mut ChaCha8Rng) -> Result<DomainSpec> {
    if spec.inner_mode < 2 || spec.outer_mode < 2 {
        return Err(RfkError::Generation("modes must be at least 2 (mode 1 is a translation)".into()));
    }
    let center = random_offset(rng, spec.max_offset);
    let a = spec.inner_amplitude * rng.random_range(0.6..=1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    let psi = rng.random_range(0.0..2.0 * PI);
    let inner = single_mode(center, spec.r, spec.inner_mode, a, phi)?;
    deficit_matched_from(inner, spec.big_r, spec.outer_mode, psi, spec.amplitude_cap)
}

/// Finds the outer amplitude in `[0, cap]` matching the deficit of `inner` by bisection.
pub fn deficit_matched_from(inner: StarBoundary, big_r: f64, mode: usize, phase: f64, cap: f64) -> Result<DomainSpec> {
    let origin = Point::new(0.0, 0.0);
    let target = isoperimetric_deficit(&inner);
    let outer_at = |b: f64| single_mode(origin, big_r, mode, b, phase);
    let f = |b: f64| -> Result<f64> { Ok(isoperimetric_deficit(&outer_at(b)?) - target) };
    let (mut lo, mut hi) = (0.0, cap);
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(RfkError::Generation(format!(
            "outer amplitude cap {cap} cannot reach the inner deficit {target:.6e}"
        )));
    }
    let scale = 4.0 * PI * big_r * big_r;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v.abs() < 1e-12 * scale {
            lo = mid;
            hi = mid;
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let domain = DomainSpec::new(inner, outer_at(0.5 * (lo + hi))?)
        .map_err(|e| RfkError::Generation(format!("matched curves do not nest: {e}")))?;
    let area = domain.area();
    let residual = domain.compatibility_defect().abs() / (4.0 * PI * area);
    if residual > 1e-8 {
        return Err(RfkError::Generation(format!("compatibility residual {residual:.3e} after bisection")));
    }
    Ok(domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circles_have_zero_deficit() {
        let c = StarBoundary::circle(Point::new(0.3, -0.1), 1.7).unwrap();
        assert!(isoperimetric_deficit(&c).abs() < 1e-9);
        let d = deficit_matched_from(StarBoundary::circle(Point::new(0.2, 0.0), 1.0).unwrap(), 2.0, 5, 0.0, 0.3).unwrap();
        assert!(d.outer().is_circle() || d.outer().cos_coeffs().iter().all(|c| c.abs() < 1e-6));
    }

    #[test]
    fn matched_domain_satisfies_the_constraint() {
        let inner = single_mode(Point::new(0.0, 0.0), 1.0, 3, 0.15, 0.0).unwrap();
        let d = deficit_matched_from(inner, 2.0, 5, 0.0, 0.3).unwrap();
        let (pi, po, a) = (d.inner().perimeter(), d.outer().perimeter(), d.area());
        assert!(((po * po - pi * pi) - 4.0 * PI * a).abs() / (4.0 * PI * a) < 1e-8);
    }

    #[test]
    fn small_cap_is_a_generation_error() {
        let inner = single_mode(Point::new(0.0, 0.0), 1.0, 3, 0.15, 0.0).unwrap();
        assert!(matches!(deficit_matched_from(inner, 2.0, 5, 0.0, 1e-3), Err(RfkError::Generation(_))));
    }

    #[test]
    fn families_are_deterministic() {
        let kind = FamilyKind::Fourier {
            r: 1.0,
            big_r: 2.0,
            modes: vec![2, 3],
            amplitude: 0.1,
            max_offset: 0.2,
        };
        assert_eq!(generate(&kind, 5, 3).unwrap(), generate(&kind, 5, 3).unwrap());
        assert_ne!(generate(&kind, 5, 3).unwrap(), generate(&kind, 5, 4).unwrap());
    }
}
