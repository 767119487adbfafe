//! Scenario files, figure pipelines and CSV/JSON output for the `pulse-jcm`
//! command line.

pub mod config;
pub mod error;
pub mod output;
pub mod pipelines;
pub mod scenario;

pub use config::{ModelChoice, ScenarioConfig};
pub use error::{AppError, Result};
pub use output::{check_csv, SeriesTable};
pub use pipelines::{
    collapse_revival_experiment, fig3_suite, fig4_panel_a, fig4_subtraction, fig4_sweep, SubtractionPoint,
    SweepResult,
};
pub use scenario::{run_scenario, simulate, ScenarioOutput, ScenarioRun};
