use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice mismatch: expected M = {expected}, found M = {found}")]
    LatticeMismatch { expected: usize, found: usize },

    #[error("invalid lattice size {0}: must be even and at least 8")]
    InvalidLattice(usize),

    #[error("degree-{degree} product of fields with support radius {radius} does not fit on an M = {m} lattice")]
    DealiasCapacity {
        degree: usize,
        radius: usize,
        m: usize,
    },

    #[error("mode ({0}, {1}) is not representable on the lattice")]
    ModeOutsideLattice(i64, i64),

    #[error("field must be real-valued for this operation")]
    NotReal,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate}, error {error})")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
    },

    #[error("covariance matrix not positive semi-definite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("time mismatch: state at t = {state}, path step starts at t = {path}")]
    TimeMismatch { state: f64, path: f64 },

    #[error("renormalization constant overflow: beta^2 sigma / 2 = {0} exceeds 700")]
    GammaOverflow(f64),

    #[error("no ledger entry for eps = {eps}, N = {cutoff}, t = {t}")]
    LedgerMiss { eps: f64, cutoff: f64, t: f64 },

    #[error("blow-up at eps = {eps}, step {step} (t = {t})")]
    BlowUp { eps: f64, step: usize, t: f64 },

    #[error("Picard iteration did not contract after {iterations} iterations (last increment {increment})")]
    NonContraction { iterations: usize, increment: f64 },

    #[error("non-positive value {0} in rate fit")]
    NonPositive(f64),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}
