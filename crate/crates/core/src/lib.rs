//! Multi-drone positioning that keeps every drone separately visible to a
//! single ground camera for camera-based visible light communication.
//!
//! - [`geometry`]: thin-lens distances, plane projection and the overlap predicate.
//! - [`planner`]: per-tick detour/wait decisions and kinematics.
//! - [`simulator`]: scenarios, the tick loop and trace recording.
//! - [`metrics`]: extra-distance and wait-time distributions.
//! - [`oracle`]: brute-force image overlap and trace audits.

pub mod error;
pub mod geometry;
pub mod metrics;
pub mod oracle;
pub mod planner;
pub mod simulator;

pub use error::{Error, Result};
pub use geometry::{CameraModel, Clearance, DetectableBand, Point3, ProjectedDisk};
pub use metrics::{DroneMetrics, Histogram, HistogramKind, RunMetrics};
pub use oracle::AuditReport;
pub use planner::{Action, Conflict, DroneState, Mode, PlannerConfig};
pub use simulator::{batch, generate_scenario, run, RunOutput, Scenario, ScenarioParams, SeedRun, TickRecord};
