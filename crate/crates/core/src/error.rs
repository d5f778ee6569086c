//! Crate-wide error type.

use crate::engine::CapacityReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Distance between a transmitter and a receiver (or interferer) is zero.
    #[error("coincident nodes: distances must be positive")]
    CoincidentNodes,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("no route from node {src} to node {dst}: pair is disconnected at this range")]
    NoRoute { src: usize, dst: usize },

    /// The segment-covering construction found no node inside one of its
    /// covering discs. At finite n the high-probability event can fail.
    #[error("segment route construction failed: covering disc {disc} of {total} is empty")]
    EmptyCoveringDisc { disc: usize, total: usize },

    #[error("segment routing requires r > 4*r_c (r = {r}, r_c = {r_c})")]
    RangeTooSmall { r: f64, r_c: f64 },

    /// Exhaustive capacity search refused the instance; use simulation mode.
    #[error("instance too large for exhaustive search ({detail}); use the simulator instead")]
    InstanceTooLarge { detail: String },

    #[error("simulation did not drain all workloads within {max_slots} slots")]
    Timeout {
        max_slots: u64,
        partial: Box<CapacityReport>,
    },

    #[error("capacity gain undefined: low-power capacity is not positive")]
    UndefinedGain,

    #[error("could not generate a connected topology: seeds {first}..={last} all failed")]
    ConnectivityRetries { first: u64, last: u64 },

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
