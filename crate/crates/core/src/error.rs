use std::fmt;

/// Errors produced by the survey pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("{source_name}: missing required column `{column}`")]
    MissingColumn { source_name: String, column: String },

    #[error("{what}: need at least {needed}, got {got}")]
    Insufficient {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("UTM zone mismatch: {0} vs {1}")]
    ZoneMismatch(Zone, Zone),

    #[error("empty result: {0}")]
    Empty(String),

    #[error("no feasible placement: {gate}")]
    Infeasible { gate: String },

    #[error("singular kriging system at cell {cell}")]
    Singular { cell: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("insufficient raster overlap: {overlap} cells")]
    InsufficientOverlap { overlap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Zone label used in error messages, e.g. `11N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zone {
    pub number: u8,
    pub north: bool,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.number, if self.north { 'N' } else { 'S' })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
