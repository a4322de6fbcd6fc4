use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations (last value {last})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("grid of {grid} points too coarse to separate roots of {what}; refine the grid")]
    GridTooCoarse { what: &'static str, grid: usize },

    #[error("balance point not bracketed between branch {upper} and branch {lower}")]
    BalanceNotBracketed { upper: usize, lower: usize },

    #[error("operation needs a check-degree distribution, which a generalized ensemble lacks")]
    RequiresCheckDistribution,

    #[error("oracle bound exceeded: {0}")]
    OracleBound(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
