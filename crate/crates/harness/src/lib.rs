//! Experiment runner around the `gaga` estimators: replicated simulations,
//! sample-size sweeps, orthogonal-design checks and timing.

pub mod bench;
pub mod error;
pub mod experiment;
pub mod external;
pub mod spec;
pub mod theorems;

pub use bench::{benchmark_timing, TimingRow};
pub use error::{HarnessError, Result};
pub use experiment::{run_consistency_sweep, run_experiment, ExperimentReport, ResultRow, SummaryRow, SweepRow};
pub use spec::{Estimator, ExperimentSpec, ModelSpec};
pub use theorems::{validate_theorems, TheoremValidationReport};
