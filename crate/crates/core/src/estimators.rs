//! Unbiased stochastic meta-gradients and their exact counterparts.
//!
//! One minibatch holds `C` task draws (uniform, with replacement) with
//! `D` independent (inner, outer) data pairs each. From a single batch
//! both estimates are computed off one shared set of inner adaptations:
//! per pair that costs one inner gradient, one Hessian-vector product,
//! one outer gradient, and one outer value.

use crate::geometry::SimplexPoint;
use crate::linalg::{self, all_finite};
use crate::task::{Datum, TaskError, TaskOracle, TaskSet};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("minibatch must contain at least one draw")]
    EmptyBatch,
    #[error("every draw must carry the same positive number of data pairs")]
    RaggedBatch,
    #[error("task index {index} out of range for {tasks} tasks")]
    TaskIndexOutOfRange { index: usize, tasks: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// One sampled task with its data pairs.
#[derive(Debug, Clone)]
pub struct TaskDraw {
    pub task_index: usize,
    pub pairs: Vec<(Datum, Datum)>,
}

/// A batch of `C` task draws, each with `D` (inner, outer) pairs. The
/// same task may appear several times; the estimator scaling assumes
/// with-replacement sampling.
#[derive(Debug, Clone)]
pub struct Minibatch {
    draws: Vec<TaskDraw>,
}

/// Maps one uniform variate to an index under a categorical distribution.
/// Both the uniform and the ambient-distribution sampling paths consume
/// exactly one variate per draw, so the random streams stay aligned
/// across methods.
pub(crate) fn index_from_weights(u: f64, probs: &[f64]) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

impl Minibatch {
    pub fn new(draws: Vec<TaskDraw>) -> Result<Self, EstimatorError> {
        if draws.is_empty() {
            return Err(EstimatorError::EmptyBatch);
        }
        let pairs = draws[0].pairs.len();
        if pairs == 0 || draws.iter().any(|d| d.pairs.len() != pairs) {
            return Err(EstimatorError::RaggedBatch);
        }
        Ok(Self { draws })
    }

    /// Samples `c` tasks uniformly with replacement, then `d` independent
    /// data pairs per draw.
    pub fn sample(
        set: &TaskSet,
        c: usize,
        d: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Self, EstimatorError> {
        let uniform = vec![1.0 / set.len() as f64; set.len()];
        Self::sample_weighted(set, &uniform, c, d, rng)
    }

    /// Samples `c` tasks with replacement from an explicit distribution.
    /// Used by the averaged-loss baseline, where tasks arrive from the
    /// ambient distribution instead of uniformly.
    pub fn sample_weighted(
        set: &TaskSet,
        probs: &[f64],
        c: usize,
        d: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Self, EstimatorError> {
        if c == 0 {
            return Err(EstimatorError::EmptyBatch);
        }
        if d == 0 {
            return Err(EstimatorError::RaggedBatch);
        }
        if probs.len() != set.len() {
            return Err(EstimatorError::DimensionMismatch {
                expected: set.len(),
                got: probs.len(),
            });
        }
        let mut draws = Vec::with_capacity(c);
        for _ in 0..c {
            let u: f64 = rand::Rng::gen(rng);
            let task_index = index_from_weights(u, probs);
            let task = set.task(task_index);
            let pairs = (0..d)
                .map(|_| crate::task::sample_pair(task, rng))
                .collect();
            draws.push(TaskDraw { task_index, pairs });
        }
        Ok(Self { draws })
    }

    pub fn draws(&self) -> &[TaskDraw] {
        &self.draws
    }

    /// Number of task draws (`C`).
    pub fn task_draws(&self) -> usize {
        self.draws.len()
    }

    /// Data pairs per draw (`D`).
    pub fn pairs_per_draw(&self) -> usize {
        self.draws[0].pairs.len()
    }

    fn validate_against(&self, set: &TaskSet) -> Result<(), EstimatorError> {
        for draw in &self.draws {
            if draw.task_index >= set.len() {
                return Err(EstimatorError::TaskIndexOutOfRange {
                    index: draw.task_index,
                    tasks: set.len(),
                });
            }
        }
        Ok(())
    }
}

/// Both stochastic gradients computed from one minibatch, with the batch
/// and the shared inner adaptations they were built from.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub grad_w: Vec<f64>,
    pub grad_p: Vec<f64>,
    pub batch: Minibatch,
    /// Adapted parameters per draw and data pair, reused between the two
    /// gradients.
    pub adaptations: Vec<Vec<Vec<f64>>>,
}

/// One inner stochastic gradient step `w - alpha * grad f^(w, theta_in)`.
pub fn adapt_inner(w: &[f64], task: &dyn TaskOracle, theta_in: &Datum, alpha: f64) -> Vec<f64> {
    linalg::add_scaled(w, -alpha, &task.gradient(w, theta_in))
}

/// Applies `(I - alpha * sampled Hessian)` to `v` without materializing
/// the matrix.
pub fn second_order_apply(
    w: &[f64],
    task: &dyn TaskOracle,
    theta_in: &Datum,
    alpha: f64,
    v: &[f64],
) -> Vec<f64> {
    linalg::add_scaled(v, -alpha, &task.hessian_vec(w, theta_in, v))
}

/// The shared inner loop: one adaptation per (draw, pair).
fn inner_adaptations(
    w: &[f64],
    set: &TaskSet,
    batch: &Minibatch,
    alpha: f64,
) -> Vec<Vec<Vec<f64>>> {
    batch
        .draws()
        .iter()
        .map(|draw| {
            let task = set.task(draw.task_index);
            draw.pairs
                .iter()
                .map(|(theta_in, _)| adapt_inner(w, task, theta_in, alpha))
                .collect()
        })
        .collect()
}

fn grad_w_from_adaptations(
    w: &[f64],
    weights: &[f64],
    set: &TaskSet,
    batch: &Minibatch,
    alpha: f64,
    adaptations: &[Vec<Vec<f64>>],
) -> Vec<f64> {
    let d = set.dim();
    let c = batch.task_draws() as f64;
    let pairs = batch.pairs_per_draw() as f64;
    let m = set.len() as f64;
    let mut total = vec![0.0; d];
    for (draw, adapted) in batch.draws().iter().zip(adaptations) {
        let task = set.task(draw.task_index);
        let p_i = weights[draw.task_index];
        let mut draw_sum = vec![0.0; d];
        for ((theta_in, theta_out), w_ij) in draw.pairs.iter().zip(adapted) {
            // Outer gradient first, then the second-order correction at
            // the same inner datum.
            let outer = task.gradient(w_ij, theta_out);
            let corrected = second_order_apply(w, task, theta_in, alpha, &outer);
            for (s, g) in draw_sum.iter_mut().zip(&corrected) {
                *s += p_i * g;
            }
        }
        for (t, s) in total.iter_mut().zip(&draw_sum) {
            *t += s / pairs;
        }
    }
    for t in &mut total {
        *t *= m / c;
    }
    total
}

fn grad_p_from_adaptations(
    set: &TaskSet,
    batch: &Minibatch,
    adaptations: &[Vec<Vec<f64>>],
) -> Vec<f64> {
    let m = set.len();
    let c = batch.task_draws() as f64;
    let pairs = batch.pairs_per_draw() as f64;
    // Entries of tasks absent from the batch stay exactly zero.
    let mut total = vec![0.0; m];
    for (draw, adapted) in batch.draws().iter().zip(adaptations) {
        let task = set.task(draw.task_index);
        let mut draw_sum = 0.0;
        for ((_, theta_out), w_ij) in draw.pairs.iter().zip(adapted) {
            draw_sum += task.value(w_ij, theta_out);
        }
        total[draw.task_index] += draw_sum;
    }
    let scale = m as f64 / (c * pairs);
    for t in &mut total {
        *t *= scale;
    }
    total
}

/// Unbiased stochastic gradient with respect to `w`.
pub fn estimate_grad_w(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    batch: &Minibatch,
    alpha: f64,
) -> Result<Vec<f64>, EstimatorError> {
    check_inputs(w, Some(p), set, batch)?;
    let adaptations = inner_adaptations(w, set, batch, alpha);
    Ok(grad_w_from_adaptations(
        w,
        p.weights(),
        set,
        batch,
        alpha,
        &adaptations,
    ))
}

/// Unbiased stochastic gradient with respect to `p`. Tasks absent from
/// the batch get entry exactly zero.
pub fn estimate_grad_p(
    w: &[f64],
    set: &TaskSet,
    batch: &Minibatch,
    alpha: f64,
) -> Result<Vec<f64>, EstimatorError> {
    check_inputs(w, None, set, batch)?;
    let adaptations = inner_adaptations(w, set, batch, alpha);
    Ok(grad_p_from_adaptations(set, batch, &adaptations))
}

/// Both gradients from one batch, sharing the inner adaptations.
pub fn estimate_pair(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    batch: Minibatch,
    alpha: f64,
) -> Result<GradientEstimate, EstimatorError> {
    check_inputs(w, Some(p), set, &batch)?;
    let adaptations = inner_adaptations(w, set, &batch, alpha);
    let grad_w = grad_w_from_adaptations(w, p.weights(), set, &batch, alpha, &adaptations);
    let grad_p = grad_p_from_adaptations(set, &batch, &adaptations);
    Ok(GradientEstimate {
        grad_w,
        grad_p,
        batch,
        adaptations,
    })
}

/// The baseline's meta-gradient: a plain `1/(CD)` average of the
/// per-sample meta-gradients, with no task weights and no `m/C` scaling.
pub fn estimate_grad_w_average(
    w: &[f64],
    set: &TaskSet,
    batch: &Minibatch,
    alpha: f64,
) -> Result<Vec<f64>, EstimatorError> {
    check_inputs(w, None, set, batch)?;
    let adaptations = inner_adaptations(w, set, batch, alpha);
    let d = set.dim();
    let mut total = vec![0.0; d];
    for (draw, adapted) in batch.draws().iter().zip(adaptations.iter()) {
        let task = set.task(draw.task_index);
        for ((theta_in, theta_out), w_ij) in draw.pairs.iter().zip(adapted) {
            let outer = task.gradient(w_ij, theta_out);
            let corrected = second_order_apply(w, task, theta_in, alpha, &outer);
            for (t, g) in total.iter_mut().zip(&corrected) {
                *t += g;
            }
        }
    }
    let scale = 1.0 / (batch.task_draws() as f64 * batch.pairs_per_draw() as f64);
    for t in &mut total {
        *t *= scale;
    }
    Ok(total)
}

/// Exact gradient with respect to `w`: the `p`-weighted sum of exact
/// meta-gradients.
pub fn exact_grad_w(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
) -> Result<Vec<f64>, TaskError> {
    let mut total = vec![0.0; set.dim()];
    for (task, &p_i) in set.iter().zip(p.weights()) {
        let g = task.meta_grad_exact(w, alpha)?;
        for (t, gi) in total.iter_mut().zip(&g) {
            *t += p_i * gi;
        }
    }
    Ok(total)
}

/// Exact gradient with respect to `p`: the vector of exact meta-losses.
pub fn exact_grad_p(w: &[f64], set: &TaskSet, alpha: f64) -> Result<Vec<f64>, TaskError> {
    set.iter().map(|t| t.meta_loss_exact(w, alpha)).collect()
}

fn check_inputs(
    w: &[f64],
    p: Option<&SimplexPoint>,
    set: &TaskSet,
    batch: &Minibatch,
) -> Result<(), EstimatorError> {
    if w.len() != set.dim() {
        return Err(EstimatorError::DimensionMismatch {
            expected: set.dim(),
            got: w.len(),
        });
    }
    if let Some(p) = p {
        if p.len() != set.len() {
            return Err(EstimatorError::DimensionMismatch {
                expected: set.len(),
                got: p.len(),
            });
        }
    }
    debug_assert!(all_finite(w));
    batch.validate_against(set)
}
