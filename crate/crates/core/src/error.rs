use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsaError {
    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("invalid segment [{a}, {b}]")]
    InvalidSegment { a: i64, b: i64 },

    #[error("site {0} lies outside the sampled window")]
    OutsideWindow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("resonant energy: E = {energy} lies within {distance:e} of the spectrum")]
    ResonantEnergy { energy: f64, distance: f64 },

    #[error("site {0} is not in the basis")]
    NotInBasis(String),

    #[error("window is not centered: [{a}, {b}] has even size")]
    NotCentered { a: i64, b: i64 },

    #[error("no samples requested")]
    NoSamples,

    #[error("projections not disjoint: {0}")]
    ProjectionsOverlap(String),

    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, MsaError>;
