use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rank must be between 1 and 26, got {0}")]
    InvalidRank(usize),

    #[error("invalid word {word:?}: {reason}")]
    InvalidWord { word: String, reason: String },

    #[error("{what}: estimated size {needed} exceeds budget {cap}")]
    BudgetExceeded { what: String, needed: f64, cap: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("density {0} has infinite mean")]
    InfiniteMean(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("tolerance {tolerance:e} unreachable within depth {max_depth} at parameter {parameter}")]
    ToleranceUnreachable { tolerance: f64, max_depth: usize, parameter: f64 },

    #[error("integer overflow while {0}")]
    Overflow(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no mixing by step cap {cap} (last distance {last_distance})")]
    NoMixing { cap: usize, last_distance: f64 },

    #[error("predicate {0} has no transfer-matrix counting")]
    DpUnsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, needed: f64, cap: f64) -> Self {
        Error::BudgetExceeded { what: what.into(), needed, cap }
    }

    /// True for the budget/size class of failures (the CLI maps these to a
    /// distinct exit code).
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
