use thiserror::Error;

use crate::multiflow::ErgodicityCertificate;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters for a measure, flow, observable or run.
    #[error("configuration error: {0}")]
    Config(String),
    /// The operation was called with inputs it cannot accept (empty samples, too few trials).
    #[error("usage error: {0}")]
    Usage(String),
    /// The operation does not support this measure variant or dimension.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An exhaustive scan ran past its budget; `partial` covers what was scanned.
    #[error("scan budget of {budget} frequency vectors exhausted after {scanned}")]
    Budget {
        budget: u64,
        scanned: u64,
        partial: Box<ErgodicityCertificate>,
    },
    /// The flow failed its ergodicity certificate and the run was not waived.
    #[error("flow is not certified ergodic: offending frequency {offending:?}")]
    NotErgodic { offending: Vec<i64> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
