use thiserror::Error;

/// Errors raised by the coding, decoding and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StcError {
    #[error("unsupported modulation order {0}")]
    UnsupportedModulation(usize),

    #[error("degenerate channel: column {column} has residual norm {residual:e}")]
    DegenerateChannel { column: usize, residual: f64 },

    #[error("not a golden effective matrix: {0}")]
    NotGoldenMatrix(&'static str),

    #[error("permutation {0} is not one of the eight fast-decodable orderings")]
    DisallowedPermutation(String),

    #[error("fast golden decoder requires a golden-code effective channel, got {0}")]
    NotGoldenCode(&'static str),

    #[error("fast Alamouti path invalid for this channel: {0}")]
    AlamoutiStructure(String),

    #[error("exhaustive search cap exceeded: M^4 = {0} > 2^24")]
    ExhaustiveCap(u64),

    #[error("Gauss-Markov correlation {0} outside [0, 1]")]
    CorrelationOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for StcError {
    fn from(err: std::io::Error) -> Self {
        StcError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, StcError>;
