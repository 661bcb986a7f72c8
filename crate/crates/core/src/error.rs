use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every hypothesis was driven to the likelihood floor by one update.
    #[error("all posterior mass lost: every cell hit the likelihood floor (check the noise settings)")]
    AllMassLost,

    #[error("reference distribution has zero mass where the posterior has support")]
    UnsupportedReference,

    #[error("kernel lattice does not cover the grid: {0}")]
    KernelGridMismatch(String),

    #[error("posterior grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("episode is done; reset before stepping")]
    EpisodeDone,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
