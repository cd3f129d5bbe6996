use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    Quadrature { estimate: f64, error_bound: f64 },
    #[error("grouping error: {0}")]
    Grouping(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("plan error: {0}")]
    Plan(String),
    #[error("singular channel estimate: Gram matrix is rank deficient")]
    Singular,
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
