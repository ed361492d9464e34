//! Experiment runner for `parareal-core`: a thread-pool executor for the
//! defect sweep, configuration parsing (JSON file and flags), the study
//! drivers and CSV/JSON report output.

pub mod config;
mod error;
pub mod executor;
pub mod report;
pub mod studies;

pub use config::{parse_config, CliArgs, CoarseChoice, ExperimentConfig, Study};
pub use error::CliError;
pub use executor::ThreadPoolExecutor;
pub use report::{Check, ExperimentReport, Table};
pub use studies::{build_report, run_experiment};

/// Exit code for a run whose checks all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code for usage or runtime errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when a verification check failed.
pub const EXIT_VERIFICATION_FAILED: i32 = 2;
