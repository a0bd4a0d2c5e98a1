//! Monte Carlo experiment drivers and the self-check suite.

pub mod config;
pub mod convergence;
pub mod ui_diag;
pub mod verify;

pub use config::{ExperimentConfig, RawConfig, TestFunction};
pub use convergence::{run_convergence, ConvergenceReport, ConvergenceRow};
pub use ui_diag::{run_ui_diagnostic, UiReport, UiRow};
pub use verify::{run_verify, CheckResult, VerifyReport};
