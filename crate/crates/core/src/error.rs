use thiserror::Error;

/// Failure modes shared by every module of the lab.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("singular matrix: smallest singular value {smallest:e} vs norm {norm:e}")]
    Singular { smallest: f64, norm: f64 },
    #[error("duplicate slice index {0}")]
    DuplicateSlice(usize),
    #[error("size cap exceeded: {size} > {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("missing kernel entry for pair ({0}, {1})")]
    MissingKernel(usize, usize),
    #[error("unknown experiment: {0}")]
    UnknownExperiment(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
