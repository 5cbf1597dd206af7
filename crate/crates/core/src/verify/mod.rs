//! Checks that turn grids and scans into pass/fail and report-only rows.

mod fit;
mod report;
mod suite;

pub use fit::{fit_power_law, linear_least_squares, FitModel, FitResult};
pub use report::{Check, Status, VerificationReport};
pub use suite::{run_suite, SuiteInputs, SuiteParams, SUITES};
