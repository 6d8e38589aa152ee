use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{what} exceeded capacity {cap}")]
    Capacity { what: &'static str, cap: u64 },

    #[error("variable {0} is unset")]
    IncompleteAssignment(usize),

    #[error("{what} did not converge within {cap} attempts")]
    Nonconvergence { what: &'static str, cap: u64 },

    #[error("no feasible assignment for component {component:?} in block {block}")]
    InfeasibleComponent { block: usize, component: Vec<usize> },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
