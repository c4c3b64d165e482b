use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not place {kind} {index} in macrocell {cell} after {attempts} attempts")]
    PlacementInfeasible {
        kind: &'static str,
        index: usize,
        cell: usize,
        attempts: usize,
    },

    #[error("macrocell index {index} out of range (have {count})")]
    CellOutOfRange { index: usize, count: usize },

    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),

    #[error("instance too large for exhaustive search: {bs}^{users} assignments")]
    InstanceTooLarge { bs: usize, users: usize },

    #[error("energy-efficiency denominator is zero")]
    ZeroDenominator,

    #[error("log of non-positive value {value} for BS {bs}, user {user}")]
    LogDomain { bs: usize, user: usize, value: f64 },

    #[error("all loads are zero")]
    ZeroLoads,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("trial failed (sweep value {sweep_value}, trial {trial}): {source}")]
    Trial {
        sweep_value: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
