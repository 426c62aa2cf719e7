use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spin chain needs at least 2 spins, got {0}")]
    TooFewSpins(usize),
    #[error("expected {expected} couplings, got {got}")]
    CouplingCount { expected: usize, got: usize },
    #[error("operator is not Hermitian: max |H - H^T| = {defect:e}")]
    NotHermitian { defect: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("invalid subspace: {0}")]
    Subspace(String),
    #[error("time {t} outside pulse window [0, {t_f}]")]
    OutOfWindow { t: f64, t_f: f64 },
    #[error("singular linear system")]
    Singular,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("mismatched trial sets: {0}")]
    TrialSetMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
