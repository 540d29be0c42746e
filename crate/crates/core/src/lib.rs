//! Angular multi-threshold clustering routing for wireless sensor networks:
//! radio energy model, closed-form cluster optimum, histogram-threshold
//! cluster formation with a Bat Algorithm search, cluster-head election and
//! a round-based simulator with two baseline protocols.

pub mod angular_otsu;
pub mod bat_optimizer;
pub mod ch_selection;
pub mod error;
pub mod experiment_cli;
pub mod network;
pub mod optimal_config;
pub mod radio_energy;
pub mod sim_engine;
pub mod stats;

pub use error::{Error, Result};
pub use network::{Cluster, ClusterAssignment, Node, Role};
pub use radio_energy::RadioParams;
pub use sim_engine::{run_simulation, NetworkConfig, ProtocolKind, RoundMetrics, Simulation};
