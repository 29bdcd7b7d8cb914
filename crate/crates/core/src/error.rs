use thiserror::Error;

/// Errors surfaced by construction, spectral, and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("target rejected: {0}")]
    TargetRejected(String),

    #[error("s0 = {0} violates the span constraint (need 0 < s0 <= 1/13)")]
    SpanConstraint(f64),

    #[error("block length would fall below the dyadic floor 2^-{0}")]
    EllFloor(u32),

    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("eigensolver failed to converge (index {index}, {sweeps} sweeps)")]
    NoConvergence { index: usize, sweeps: usize },

    #[error("symbol out of range at N={n}: eigenvalue {value} outside [-{eps},1+{eps}]")]
    SymbolRange { n: usize, value: f64, eps: f64 },

    #[error("matrix is not Hermitian: max |H - H^*| = {0}")]
    NotHermitian(f64),

    #[error("density matrix violates positivity: min eigenvalue {0}")]
    NotPositive(f64),

    #[error("expectation has imaginary leak {0} (convention mismatch)")]
    ImaginaryLeak(f64),

    #[error("insufficient coefficients: need k_max >= {need}, have {have}")]
    InsufficientCoefficients { need: usize, have: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
