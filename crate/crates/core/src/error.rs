use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{id} is singular at x = {x}")]
    Singularity { id: String, x: f64 },

    #[error("{what}: {value} is outside {expected}")]
    Domain {
        what: &'static str,
        value: f64,
        expected: String,
    },

    #[error("{id} has no Taylor rule at center {center}")]
    NoTaylorRule { id: String, center: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Horner accumulators of {id} cannot be bounded (bound {bound:e})")]
    Overflow { id: String, bound: f64 },

    #[error("least-squares system is singular: {0}")]
    SingularSystem(String),

    #[error("training diverged at iteration {iteration} (loss {loss})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("unknown function id {0:?}")]
    UnknownFunction(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid run config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
