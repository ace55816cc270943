//! Distribution-agnostic min-max meta-learning initialization.
//!
//! This crate solves the saddle-point problem
//!
//! ```text
//! min over w in W   max over p in the simplex   sum_i p_i * E[ f_i(w - alpha * grad f^_i(w, theta)) ]
//! ```
//!
//! by alternating projected stochastic gradient descent-ascent over the
//! model parameters `w` and the task-weight simplex `p`. The pieces:
//!
//! - [`geometry`] — exact Euclidean projections onto the simplex and onto
//!   a ball, plus the prox form of the constrained update.
//! - [`task`] — the stochastic task-oracle abstraction and analytic
//!   (quadratic / trig-quadratic) suites with closed-form meta-losses.
//! - [`estimators`] — unbiased nested stochastic meta-gradients and their
//!   exact counterparts on analytic suites.
//! - [`solver`] — the descent-ascent loop, theory step-size schedules,
//!   both termination rules, and a plain averaged-loss baseline.
//! - [`diagnostics`] — theory constants, duality gap, projected gradient,
//!   stationarity certificates, and empirical moment checks.
//! - [`linalg`] — small dense symmetric-matrix helpers the suites need.

pub mod diagnostics;
pub mod estimators;
pub mod geometry;
pub mod linalg;
pub mod solver;
pub mod task;

pub use diagnostics::{ConstantsInput, ConstantsReport, DiagnosticsRecord};
pub use estimators::{GradientEstimate, Minibatch};
pub use geometry::{FeasibleSet, SimplexPoint};
pub use solver::{RunConfig, RunOutput, SaddleState, StepSizeRegime};
pub use task::{NoiseModel, QuadraticTask, TaskOracle, TaskSet, TrigQuadraticTask};
