use thiserror::Error;

/// Errors raised by the hierarchy library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: N={left_n}, L={left_l} vs N={right_n}, L={right_l}")]
    GridMismatch {
        left_n: usize,
        left_l: f64,
        right_n: usize,
        right_l: f64,
    },

    #[error("{what} = {value} out of range (allowed {allowed})")]
    OutOfRange {
        what: &'static str,
        value: i64,
        allowed: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I_{n} has imaginary residue {im:e} (real part {re:e})")]
    ImaginaryResidue { n: usize, re: f64, im: f64 },

    #[error("symplectic gradient routes disagree for n={n}: diff {diff:e} vs scale {scale:e}")]
    GradientMismatch { n: usize, diff: f64, scale: f64 },

    #[error("scheme {scheme} cannot integrate flow n={n}")]
    SchemeMismatch { scheme: &'static str, n: usize },

    #[error("blow-up guard tripped at step {step} (t={time}, sup={sup:e})")]
    BlowUp { step: usize, time: f64, sup: f64 },

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("spectral parameter {lambda} too close to a branch point (|F/2 -/+ 1| = {distance:e})")]
    BranchPoint { lambda: f64, distance: f64 },

    #[error("symbolic mismatch: {0}")]
    SymbolicMismatch(String),

    #[error("snapshot stride {stride} too coarse for a centered time difference (need 1)")]
    StrideTooCoarse { stride: usize },

    #[error("identity violated: {what} (diff {diff:e}, tolerance {tol:e})")]
    IdentityViolation {
        what: String,
        diff: f64,
        tol: f64,
    },

    #[error("decomposition system singular after {attempts} point draws")]
    SingularSystem { attempts: usize },

    #[error("size guard: {0}")]
    TooLarge(String),

    #[error("malformed state: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;
