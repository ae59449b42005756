//! Scenario files, orchestration and output emission behind the `ghflow`
//! binary.

pub mod execute;
pub mod output;
pub mod scenario;

pub use execute::{analyse, execute, simulate, RunReport, Simulation};
pub use scenario::{bundled, emit_scenario, list_scenarios, parse_scenario, Scenario, ScenarioError};

/// Environment variable overriding the output root.
pub const OUTPUT_ENV: &str = "GHFLOW_OUT";

pub fn output_root() -> std::path::PathBuf {
    std::env::var_os(OUTPUT_ENV).map(Into::into).unwrap_or_else(|| "runs".into())
}
