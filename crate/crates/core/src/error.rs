use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli label: unexpected character {found:?} at position {position}")]
    PauliParse { position: usize, found: char },

    #[error("empty Pauli label")]
    EmptyLabel,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{n} qubits exceeds the dense simulation limit of {limit}")]
    DenseLimit { n: usize, limit: usize },

    #[error("{n} qubits is not supported by the basis partition search (limit {limit})")]
    UnsupportedSize { n: usize, limit: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("phase multiplier must be a multiple of pi/2, got {0}")]
    InvalidBeta(f64),

    #[error("numerical integrity failure: {0}")]
    NumericalIntegrity(String),

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("process matrix is not completely positive (eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("unknown channel {0:?}")]
    UnknownChannel(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status the command-line front end reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalIntegrity(_)
            | Error::NotTracePreserving(_)
            | Error::NotCompletelyPositive(_) => 3,
            _ => 2,
        }
    }
}
