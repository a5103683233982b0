use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("energy variance vanishes")]
    ZeroVariance,

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("outcome has zero probability on the whole grid: {0}")]
    ImpossibleOutcome(usize),

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error("linear algebra: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::InvalidArgument(_)
                | Error::NotNormalized(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
