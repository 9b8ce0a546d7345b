use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("path must contain at least one point")]
    EmptyPath,
    #[error("point set must contain at least one point")]
    EmptyPointSet,
    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },
    #[error("timestamps: {0}")]
    Timestamps(String),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid segment [{start}, {end}] for length {len}")]
    InvalidSegment { start: usize, end: usize, len: usize },
    #[error("window length must be at least 1")]
    EmptyWindow,
    #[error("soft-DTW gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
    #[error("band must be at least 1")]
    InvalidBand,
    #[error("signature level must be at least 1")]
    InvalidLevel,
    #[error("signature level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("demo set is empty")]
    EmptyDemoSet,
    #[error("input list is empty")]
    EmptyInput,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("infeasible environment: {0}")]
    Infeasible(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
