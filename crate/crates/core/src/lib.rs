//! Multi-cell LTE handover simulator producing labeled protocol-stack traces.
//!
//! - [`scenario`] / [`radio`]: hexagonal three-sector layout, obstacles, link budget
//! - [`mobility`] / [`traffic`]: UE drops, straight-line motion, rate-ramp transfers
//! - [`handover`] / [`sim`]: measurement reports, A2 benchmark, forced campaigns, RLF
//! - [`features`] / [`dataset`]: the 84-slot feature vectors and dataset files

pub mod dataset;
pub mod error;
pub mod features;
pub mod geometry;
pub mod handover;
pub mod mobility;
pub mod radio;
pub mod scenario;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
pub use features::{FeatureVector, StackCounters, NUM_FEATURES};
pub use geometry::Point;
pub use handover::{HandoverPolicy, MeasurementReport};
pub use scenario::{build_scenario, Scenario, ScenarioConfig};
pub use sim::{TraceLog, TraceMeta};
