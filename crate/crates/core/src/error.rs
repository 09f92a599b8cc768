use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible allocation: `{constraint}` violated by {violation:e}")]
    InfeasibleAllocation { constraint: &'static str, violation: f64 },

    #[error("infeasible input: {0}")]
    InfeasibleInput(String),

    #[error("degenerate solution: {0}")]
    DegenerateSolution(String),

    #[error("instance too large for the oracle (N = {n}, M = {m}; limits N <= 3, M <= 2)")]
    InstanceTooLarge { n: usize, m: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}
