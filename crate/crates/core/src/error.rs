use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}] on a chain of {n} sites")]
    InvalidInterval { lo: usize, hi: usize, n: usize },

    #[error("invalid cut {cut}: must satisfy 1 <= cut < {n}")]
    InvalidCut { cut: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("dense dimension {dim} exceeds the cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Raised before an MPO with an oversized bond is allocated.
    #[error("bond dimension {actual} exceeds the cap {cap} (uncompressed ledger estimate e^{ledger_ln:.3})")]
    BondCapExceeded {
        actual: usize,
        cap: usize,
        ledger_ln: f64,
    },

    /// A measured error exceeded its analytic bound.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("budget: {0}")]
    Budget(String),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
