//! Sparse signal recovery by global adaptive generative adjustment.
//!
//! [`gaga_fit`] alternates ridge solves with per-coefficient penalty updates
//! and hard-truncates the result; [`gaga_qr_fit`] runs the same iteration on
//! an orthogonalized, reordered design. [`theory`] holds the scalar dynamics
//! of the penalty update and [`datagen`] the simulated designs.
//!
//! ```
//! use gaga::{gaga_fit, GagaConfig, Matrix, RegressionProblem};
//!
//! let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]);
//! let y = vec![3.0, 0.01, 3.02, 2.98];
//! let fit = gaga_fit(&RegressionProblem::new(x, y).unwrap(), &GagaConfig::default()).unwrap();
//! assert_eq!(fit.support, vec![true, false]);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod qr;
pub mod scalar;
pub mod solver;
pub mod theory;

pub use error::{GagaError, Result};
pub use linalg::Matrix;
pub use metrics::{acc, err, EvaluationReport};
pub use model::{
    build_gram, FitTrace, GagaConfig, GramSystem, IterationRecord, RegressionProblem, SignalEstimate,
    VarianceMode,
};
pub use qr::{gaga_qr_fit, plan_qr, QrPlan};
pub use scalar::Real;
pub use solver::{gaga_fit, gaga_fit_gram, gaga_step, hard_truncate, SolverState};

pub type Problem64 = RegressionProblem<f64>;
pub type Problem32 = RegressionProblem<f32>;
pub type Config64 = GagaConfig<f64>;
pub type Config32 = GagaConfig<f32>;
pub type Estimate64 = SignalEstimate<f64>;
pub type Estimate32 = SignalEstimate<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
