//! Config-driven experiments: TOML configs, one runner per experiment kind,
//! CSV artifacts with provenance headers, and the shared measurement studies.

pub mod config;
pub mod output;
pub mod ratefit;
pub mod runners;
pub mod studies;

pub use config::{Bound, ExperimentConfig, ExperimentKind};
pub use output::{OutputSet, VERSION};
pub use ratefit::{format_fit, ratefit_csv};
pub use runners::{metric_names, run, Check, RunReport};
