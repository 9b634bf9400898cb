use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum QocError {
    #[error("spin index {index} out of range 1..={count}")]
    SpinIndex { index: usize, count: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("amplitude bound violated at interval {interval}: |area| = {area:.6e} exceeds eps*tau = {limit:.6e}")]
    AmplitudeBound {
        interval: usize,
        area: f64,
        limit: f64,
    },

    #[error("pulse width {width:.6e} of control {control} at interval {interval} exceeds the bound {bound:.6e}")]
    WidthBound {
        control: usize,
        interval: usize,
        width: f64,
        bound: f64,
    },

    #[error("pulses overlap at interval {interval}")]
    Overlap { interval: usize },

    #[error("signal domain [{start}, {end}] does not cover [{from}, {to}]")]
    SignalDomain {
        start: f64,
        end: f64,
        from: f64,
        to: f64,
    },

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("spectral cache is missing the decomposition for {0}")]
    MissingSpectrum(String),

    #[error("gradient storage of {needed} bytes exceeds the memory budget of {budget} bytes")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("non-finite value at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("eigendecomposition failed")]
    Eigen,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl QocError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            QocError::NonFinite { .. } | QocError::Eigen | QocError::NotUnitary { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, QocError>;
