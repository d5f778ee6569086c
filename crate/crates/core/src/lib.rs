//! Slotted TDMA capacity simulator for power-controlled wireless networks.
//!
//! The crate models a static multi-hop wireless network under the SINR
//! reception model and measures how network capacity (delivered workload per
//! time slot, in units of the channel rate `W`) responds to the common
//! transmission power. It provides:
//!
//! - [`phy`]: the physical layer (power decay, SINR, reception tests,
//!   transmission / interference / carrier-sensing ranges),
//! - [`topology`]: node placement generators and range-dependent
//!   connectivity graphs,
//! - [`routing`]: minimum hop-count routes and the segment-covering route
//!   construction,
//! - [`mac`]: per-slot link schedulers (carrier sensing with exponential
//!   backoff, a centralized collision-free greedy benchmark, and an
//!   exhaustive optimal-capacity oracle for small instances),
//! - [`engine`]: the slot loop that drains flow workloads and reports
//!   capacity, spatial reuse and hop statistics,
//! - [`verify`]: executable geometric and capacity checks used as tests and
//!   as runtime audits of scheduler traces,
//! - [`experiment`]: reproducible experiment orchestration (CSV sweeps,
//!   JSON manifests, built-in scenarios),
//! - [`formats`]: the serialized network / trace / manifest formats.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod geom;
mod lp;
pub mod mac;
pub mod phy;
pub mod routing;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
