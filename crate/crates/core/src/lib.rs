//! Exact stochastic calculus on finite filtered probability spaces, plus a
//! streaming Monte Carlo simulator, used to verify martingale maximal and
//! square-function inequalities with explicit tracked constants.

pub mod calculus;
pub mod chain;
pub mod compensation;
pub mod config;
pub mod davis;
pub mod error;
pub mod inequalities;
pub mod montecarlo;
pub mod norms;
pub mod prob_space;
pub mod report;
pub mod serialize;
pub mod stein;
pub mod suites;

pub use config::{ExperimentConfig, McSettings, OutputFormat, SUITE_NAMES};
pub use error::{EngineError, Result};
pub use prob_space::{Adaptedness, FilteredSpace, Process, StoppingTime};
pub use report::InequalityReport;
pub use suites::{run_all, run_suite};
