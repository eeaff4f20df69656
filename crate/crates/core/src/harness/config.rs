//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! [resolution]
//! mesh = [128, 32]
//! [[family]]
//! name = "ecc"
//! kind = "eccentric"
//! count = 4
//! r = 1.0
//! big_r = 2.0
//! max_offset = 0.3
//! regimes = [[1, 0], ["inf", 0]]
//! ```
//!
//! Dirichlet is written `"inf"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RfkError};
use crate::robin::{RobinPair, RobinParam};

/// The suite run by `rfk-lab verify` without `--config`.
pub const DEFAULT_SUITE: &str = include_str!("../../configs/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(rename = "family")]
    pub families: Vec<FamilyConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    /// `(n_theta, n_radial)` of the coarse level; the fine level doubles both.
    pub mesh: [usize; 2],
    /// Background grid for parallel-set profiles.
    pub profile_grid: usize,
    /// Seed grid for flow decompositions.
    pub flow_grid: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            mesh: [128, 32],
            profile_grid: 1024,
            flow_grid: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack on `lambda(Omega) <= lambda(A)`.
    pub chain: f64,
    /// Relative slack on restricted quotients against `lambda(Omega)`.
    pub flow: f64,
    /// Relative slack on the area identity of the parallel-set profiles.
    pub area: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            chain: 0.02,
            flow: 0.03,
            area: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub name: String,
    #[serde(default = "one")]
    pub count: usize,
    pub regimes: Vec<[RobinParam; 2]>,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Concentric {
        r: f64,
        big_r: f64,
    },
    /// Circles with the inner one shifted by up to `max_offset`.
    Eccentric {
        r: f64,
        big_r: f64,
        max_offset: f64,
    },
    /// Random Fourier perturbations of both circles; `amplitude` bounds the total relative
    /// perturbation of each curve.
    Fourier {
        r: f64,
        big_r: f64,
        modes: Vec<usize>,
        amplitude: f64,
        #[serde(default)]
        max_offset: f64,
    },
    DeficitMatched(DeficitSpec),
}

/// Inner `r (1 + a cos m_in(theta - phi))`, outer `R (1 + b cos m_out(theta - psi))` with `b`
/// chosen so that both curves have the same isoperimetric deficit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitSpec {
    pub r: f64,
    pub big_r: f64,
    #[serde(default = "default_inner_mode")]
    pub inner_mode: usize,
    #[serde(default = "default_inner_amplitude")]
    pub inner_amplitude: f64,
    #[serde(default = "default_outer_mode")]
    pub outer_mode: usize,
    #[serde(default = "default_amplitude_cap")]
    pub amplitude_cap: f64,
    #[serde(default)]
    pub max_offset: f64,
}

fn default_inner_mode() -> usize {
    3
}
fn default_inner_amplitude() -> f64 {
    0.15
}
fn default_outer_mode() -> usize {
    5
}
fn default_amplitude_cap() -> f64 {
    0.3
}

impl FamilyKind {
    fn radii(&self) -> (f64, f64) {
        match self {
            FamilyKind::Concentric { r, big_r }
            | FamilyKind::Eccentric { r, big_r, .. }
            | FamilyKind::Fourier { r, big_r, .. } => (*r, *big_r),
            FamilyKind::DeficitMatched(s) => (s.r, s.big_r),
        }
    }
}

impl FamilyConfig {
    pub fn robin_pairs(&self) -> Vec<RobinPair> {
        self.regimes.iter().map(|[a, b]| RobinPair::new(*a, *b)).collect()
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| RfkError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn default_suite() -> Self {
        Self::parse(DEFAULT_SUITE).expect("bundled suite is valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RfkError::Config(m));
        let [nt, nr] = self.resolution.mesh;
        if !(16..=1024).contains(&nt) || !(4..=256).contains(&nr) {
            return bad(format!("mesh resolution {nt}x{nr} outside [16, 1024] x [4, 256]"));
        }
        if !(64..=4096).contains(&self.resolution.profile_grid) {
            return bad(format!("profile grid {} outside [64, 4096]", self.resolution.profile_grid));
        }
        if !(16..=1024).contains(&self.resolution.flow_grid) {
            return bad(format!("flow grid {} outside [16, 1024]", self.resolution.flow_grid));
        }
        let t = &self.tolerances;
        if [t.chain, t.flow, t.area].iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return bad("tolerances must be positive".into());
        }
        if self.families.is_empty() {
            return bad("no families".into());
        }
        for f in &self.families {
            if f.count == 0 {
                return bad(format!("family '{}' has count 0", f.name));
            }
            if f.regimes.is_empty() {
                return bad(format!("family '{}' has no regimes", f.name));
            }
            for pair in f.robin_pairs() {
                if !pair.is_admissible() || pair.is_pure_neumann() {
                    return bad(format!("family '{}': regime {pair} is not covered (need h_in * h_out >= 0, not both 0)", f.name));
                }
            }
            let (r, big_r) = f.kind.radii();
            if !(r > 0.0 && big_r > r && big_r.is_finite()) {
                return bad(format!("family '{}': need 0 < r < R", f.name));
            }
        }
        Ok(())
    }
}

/// Regimes of the sign map with `h_in * h_out >= 0`, one representative per cell.
pub fn covered_regimes() -> Vec<RobinPair> {
    let v = [
        RobinParam::Finite(-1.0),
        RobinParam::NEUMANN,
        RobinParam::Finite(1.0),
        RobinParam::Dirichlet,
    ];
    let mut out = Vec::new();
    for a in v {
        for b in v {
            let p = RobinPair::new(a, b);
            if p.is_admissible() && !p.is_pure_neumann() {
                out.push(p);
            }
        }
    }
    out
}
