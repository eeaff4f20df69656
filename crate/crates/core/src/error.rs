use thiserror::Error;

#[derive(Debug, Error)]
pub enum RfkError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("unsupported Robin regime: h_in = {h_in}, h_out = {h_out} (h_in * h_out < 0)")]
    UnsupportedRegime { h_in: String, h_out: String },

    #[error("infeasible annulus match: {0}")]
    InfeasibleMatch(String),

    #[error("incompatible domain: compatibility residual {residual:.3e} exceeds {tolerance:.3e}")]
    IncompatibleDomain { residual: f64, tolerance: f64 },

    #[error("no eigenvalue found: {0}")]
    NoEigenvalueFound(String),

    #[error("non-finite values during integration: {0}")]
    Overflow(String),

    #[error("structure violation: {0}")]
    StructureViolation(String),

    #[error("meshing failure at theta index {theta_index}, radial index {radial_index}: {reason}")]
    MeshingFailure {
        theta_index: usize,
        radial_index: usize,
        reason: String,
    },

    #[error("factorization breakdown: {0}")]
    Factorization(String),

    #[error("eigen iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("degenerate parallel profile: {0}")]
    DegenerateProfile(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("seed point ({0:.6}, {1:.6}) lies outside the domain")]
    InvalidSeed(f64, f64),

    #[error("flow decomposition failed: {0}")]
    DecompositionFailure(String),

    #[error("empty basin: {0}")]
    EmptyBasin(String),

    #[error("domain generation failed: {0}")]
    Generation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, RfkError>;
