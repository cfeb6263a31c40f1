use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants map onto the CLI exit codes: usage-type errors exit with 1,
/// numerical-consistency errors with 2 and search failures with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("size limit exceeded: {what} = {value} (cap {cap}){hint}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("numerical consistency error: {0}")]
    Numerical(String),

    #[error("degenerate representation: the non-invariant subspace is trivial")]
    DegenerateRep,

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingFailure { epoch: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
