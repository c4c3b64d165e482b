//! System-level simulation of uplink user association in two-tier
//! (macro + pico) cellular networks with open-loop power control.
//!
//! The pipeline is `topology` -> `channel` (a [`channel::LinkTable`]) ->
//! `association` (five strategies plus an exhaustive oracle) -> `metrics`,
//! with `harness` driving seeded Monte-Carlo sweeps.

pub mod association;
pub mod channel;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod topology;

pub use association::{Association, SolverConfig, Strategy};
pub use channel::{build_link_table, LinkTable, RadioParams};
pub use error::{Error, Result};
pub use harness::{run_sweep, run_trial, ExperimentConfig, SweepVariable};
pub use metrics::MetricsReport;
pub use topology::{generate_topology, DeploymentConfig, Topology};
