//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

pub mod fd_radial {
    //! Vertex-centered finite-volume discretization of `-(t v')' = lambda t v`
    //! with the eigenvalue located by Sylvester inertia counts on the
    //! tridiagonal pencil. Independent of the shooting solver.

    /// `h = None` is Dirichlet.
    pub fn lambda1(r: f64, big_r: f64, h_in: Option<f64>, h_out: Option<f64>, n: usize) -> f64 {
        let h = (big_r - r) / n as f64;
        let t = |i: usize| r + i as f64 * h;
        // full (n+1)-node system, Dirichlet nodes dropped afterwards
        let mut diag_k = vec![0.0; n + 1];
        let mut off_k = vec![0.0; n];
        let mut w = vec![0.0; n + 1];
        for i in 0..n {
            let flux = (t(i) + 0.5 * h) / h;
            diag_k[i] += flux;
            diag_k[i + 1] += flux;
            off_k[i] = -flux;
        }
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = t(i) * h;
        }
        w[0] = 0.5 * h * (t(0) + 0.25 * h);
        w[n] = 0.5 * h * (t(n) - 0.25 * h);
        if let Some(hi) = h_in {
            diag_k[0] += r * hi;
        }
        if let Some(ho) = h_out {
            diag_k[n] += big_r * ho;
        }
        let first = if h_in.is_none() && r > 0.0 { 1 } else { 0 };
        let last = if h_out.is_none() { n - 1 } else { n };
        let a: Vec<f64> = diag_k[first..=last].to_vec();
        let b: Vec<f64> = off_k[first..last].to_vec();
        let m: Vec<f64> = w[first..=last].to_vec();

        let count_below = |lam: f64| -> usize {
            let mut neg = 0;
            let mut d = a[0] - lam * m[0];
            if d < 0.0 {
                neg += 1;
            }
            for i in 1..a.len() {
                let dd = if d == 0.0 { 1e-300 } else { d };
                d = a[i] - lam * m[i] - b[i - 1] * b[i - 1] / dd;
                if d < 0.0 {
                    neg += 1;
                }
            }
            neg
        };
        let mut lo = -1.0;
        while count_below(lo) > 0 {
            lo *= 4.0;
        }
        let mut hi = 1.0;
        while count_below(hi) == 0 {
            hi *= 4.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Richardson extrapolation of the `O(h^2)` scheme from `n` and `2n`.
    pub fn lambda1_extrapolated(r: f64, big_r: f64, h_in: Option<f64>, h_out: Option<f64>, n: usize) -> f64 {
        let a = lambda1(r, big_r, h_in, h_out, n);
        let b = lambda1(r, big_r, h_in, h_out, 2 * n);
        (4.0 * b - a) / 3.0
    }
}

/// Square of the first zero of `J_0`.
pub const J01_SQUARED: f64 = 5.783_185_962_946_784;

pub fn to_opt(h: rfk_core::RobinParam) -> Option<f64> {
    h.finite()
}
