use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("mgf argument {s} outside convergence region {region}")]
    MgfDomain { s: f64, region: String },

    #[error("expectation diverges: {0}")]
    Divergent(String),

    #[error("norm is infinite")]
    InfiniteNorm,

    #[error("statistic and bound are incompatible: {0}")]
    Incompatible(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("matrix is rank deficient")]
    RankDeficient,

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg.to_string()))
    }
}
