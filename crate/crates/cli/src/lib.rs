//! Scenario runner for `subfactor-core`.

pub mod report;
pub mod runner;
pub mod scenario;

pub use report::{Check, Outcome, Section};
pub use runner::{build_inclusion, load_scenario, run_scenario, Options, RunError};
pub use scenario::{parse_scenario, Analysis, Scenario, SchemaError};
