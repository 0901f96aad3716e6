//! Experiment harness for `morawetz-core`: run configurations and presets,
//! two-sided runs with diagnostic observers, refinement studies, parallel
//! sweeps, and the report files they produce.

pub mod config;
pub mod convergence;
pub mod error;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{parse_override, PropagatorKind, RunConfig};
pub use convergence::{convergence_study, ConvergenceTable};
pub use error::{LabError, Result};
pub use presets::{preset, PRESETS};
pub use run::{execute, run_experiment, Report, RunManifest, RunOutput};
pub use sweep::{sweep, SweepResult, SweepRow};
