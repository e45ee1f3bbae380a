//! Hierarchical compressive-sensing data aggregation for wireless sensor
//! networks.
//!
//! The crate simulates two aggregation protocols over a grid cluster
//! hierarchy: A-HDACS, where every cluster head gates compressive sensing
//! on the sparsity of its own data, and HDACS, where a single network-wide
//! sparsity drives every head. Runs are fully deterministic given a seed.

pub mod config;
pub mod cs;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod field;
pub mod metrics;
pub mod protocol;
pub mod seed;
pub mod topology;
pub mod transform;

pub use config::{ExperimentConfig, FieldConfig, FieldName};
pub use error::{Error, Result};
pub use experiment::{run_experiment, simulate, sweep_threshold};
pub use field::{gen_gaussian_bumps, gen_gaussian_bumps_with_base, gen_piecewise, Point, ScalarField};
pub use protocol::{run_ahdacs, run_hdacs, run_protocol, AggregationTrace, Protocol, Status};
pub use topology::{build_hierarchy, place_nodes, ClusterTree, NodeSet};
