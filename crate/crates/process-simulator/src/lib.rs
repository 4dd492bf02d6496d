//! Process-level reduction with seeded fault injection. Asynchrony lives in
//! the buffers; a run is a single sequential loop.

mod config;
mod engine;
mod monitor;
mod oracle;
mod run;
mod scenario;

pub use config::{Config, Session};
pub use engine::{ReductionPolicy, Rule, SimError, Simulator, Step, StepClass};
pub use monitor::{check_config, monitor_corollaries, MonitorKind, MonitorViolation};
pub use oracle::Expansion;
pub use run::{buffer_digest, Trace, TraceEvent};
pub use scenario::{Crash, FailureScenario, Link, Partition, ScenarioError};
