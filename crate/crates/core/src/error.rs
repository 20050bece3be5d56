use alloc::string::String;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("empty target list")]
    EmptyTargets,
    #[error("duplicate item `{0}`")]
    Duplicate(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("the two spaces share no vocabulary")]
    EmptySharedVocabulary,
    #[error("degenerate vector (zero norm)")]
    DegenerateVector,
    #[error("degenerate matrix (all entries zero)")]
    DegenerateMatrix,
    #[error("undefined correlation: zero variance")]
    UndefinedCorrelation,
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty group")]
    EmptyGroup,
}

pub type Result<T> = core::result::Result<T, Error>;
