//! The alternating projected stochastic gradient descent-ascent loop,
//! its step-size schedules, both termination rules, and the plain
//! averaged-loss baseline.
//!
//! Updates are simultaneous: both stochastic gradients of one iteration
//! are evaluated at the same `(w, p)` before either variable moves.

use crate::diagnostics::{self, ConstantsReport, DiagnosticsRecord};
use crate::estimators::{
    estimate_grad_w_average, estimate_pair, EstimatorError, GradientEstimate, Minibatch,
};
use crate::geometry::{
    project_ball, project_simplex, prox_step, FeasibleSet, GeometryError, SimplexPoint,
};
use crate::linalg::{self, all_finite};
use crate::task::{TaskError, TaskSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("run aborted at iteration {iteration}: {reason}")]
    RunAborted { iteration: usize, reason: String },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("diagnostics failed: {0}")]
    Diagnostics(#[from] diagnostics::DiagnosticsError),
}

/// Step-size regimes. The three theory regimes derive their constant
/// steps from the constants report; `Manual` uses explicit values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSizeRegime {
    /// Convex schedule with iterate averaging (termination T1).
    Convex,
    /// Nonconvex schedule on all of space, sampled iterate (T2).
    NonconvexUnconstrained,
    /// Nonconvex schedule on a compact set; overrides the task batch to
    /// `ceil(T^beta)`, sampled iterate (T2).
    NonconvexConstrained,
    /// Explicit constant steps.
    Manual { eta_w: f64, eta_p: f64 },
}

/// How the run terminates: T1 averages all iterates, T2 returns a
/// uniformly sampled one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    AverageT1,
    SampledT2,
}

/// Initial parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPoint {
    /// The feasible set's center (the origin when unconstrained).
    Center,
    /// The origin. Must lie inside the feasible set.
    Zero,
    Explicit(Vec<f64>),
}

/// All hyperparameters of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Inner adaptation step size.
    pub alpha: f64,
    /// Iteration count `T`; the loop performs `T - 1` updates.
    pub iterations: usize,
    /// Task batch size `C`.
    pub task_batch: usize,
    /// Data batch size `D`.
    pub data_batch: usize,
    /// Rate exponent for the nonconvex schedules.
    pub beta: f64,
    pub regime: StepSizeRegime,
    pub termination: Termination,
    pub set: FeasibleSet,
    pub seed: u64,
    pub w_init: InitPoint,
    /// Record diagnostics every this many iterations (the first and last
    /// iterates are always recorded).
    pub trace_stride: usize,
    /// Record the duality gap in the trace (convex suites only).
    pub trace_gap: bool,
    /// Keep the full iterate history in the output.
    pub keep_history: bool,
    /// Divergence guard: abort when the stochastic gradient norm exceeds
    /// one million times this bound (normally the second-moment bound).
    pub grad_w_bound: Option<f64>,
}

impl RunConfig {
    /// A manual-schedule configuration with T1 termination and otherwise
    /// quiet defaults.
    #[allow(clippy::too_many_arguments)]
    pub fn manual(
        alpha: f64,
        iterations: usize,
        task_batch: usize,
        data_batch: usize,
        eta_w: f64,
        eta_p: f64,
        set: FeasibleSet,
        seed: u64,
    ) -> Self {
        Self {
            alpha,
            iterations,
            task_batch,
            data_batch,
            beta: 0.0,
            regime: StepSizeRegime::Manual { eta_w, eta_p },
            termination: Termination::AverageT1,
            set,
            seed,
            w_init: InitPoint::Center,
            trace_stride: 1,
            trace_gap: false,
            keep_history: false,
            grad_w_bound: None,
        }
    }

    fn initial_point(&self) -> Vec<f64> {
        match &self.w_init {
            InitPoint::Center => self.set.center(),
            InitPoint::Zero => vec![0.0; self.set.dim()],
            InitPoint::Explicit(w) => w.clone(),
        }
    }

    /// Validates the configuration against the task set and, for the
    /// theory regimes, the constants report.
    pub fn validate(
        &self,
        set: &TaskSet,
        report: Option<&ConstantsReport>,
    ) -> Result<(), SolverError> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(SolverError::Config(format!(
                "alpha must be finite and nonnegative, got {}",
                self.alpha
            )));
        }
        if self.iterations < 1 {
            return Err(SolverError::Config("iterations must be >= 1".to_string()));
        }
        if self.task_batch < 1 || self.data_batch < 1 {
            return Err(SolverError::Config(
                "task and data batch sizes must be >= 1".to_string(),
            ));
        }
        if self.trace_stride < 1 {
            return Err(SolverError::Config("trace_stride must be >= 1".to_string()));
        }
        if self.set != *set.domain() {
            return Err(SolverError::Config(
                "config feasible set must match the task set domain".to_string(),
            ));
        }
        let w1 = self.initial_point();
        if w1.len() != set.dim() {
            return Err(SolverError::Config(format!(
                "initial point has dimension {}, tasks have {}",
                w1.len(),
                set.dim()
            )));
        }
        if !self.set.contains(&w1, 1e-10) {
            return Err(SolverError::Config(
                "initial point lies outside the feasible set".to_string(),
            ));
        }
        match self.regime {
            StepSizeRegime::Convex => {
                if !self.set.is_bounded() {
                    return Err(SolverError::Config(
                        "convex regime requires a ball feasible set".to_string(),
                    ));
                }
                if self.termination != Termination::AverageT1 {
                    return Err(SolverError::Config(
                        "convex regime uses T1 (averaged) termination".to_string(),
                    ));
                }
                if report.is_none() {
                    return Err(SolverError::Config(
                        "convex regime needs a constants report".to_string(),
                    ));
                }
            }
            StepSizeRegime::NonconvexUnconstrained => {
                if self.set.is_bounded() {
                    return Err(SolverError::Config(
                        "nonconvex-unconstrained regime expects an all-of-space feasible set"
                            .to_string(),
                    ));
                }
                if !(self.beta > 0.0 && self.beta < 0.5) {
                    return Err(SolverError::Config(format!(
                        "nonconvex-unconstrained requires beta in (0, 1/2), got {}",
                        self.beta
                    )));
                }
                let report = report.ok_or_else(|| {
                    SolverError::Config(
                        "nonconvex-unconstrained regime needs a constants report".to_string(),
                    )
                })?;
                let t_pow = (self.iterations as f64).powf(self.beta);
                if !t_pow.is_finite() || t_pow <= report.meta_smoothness / 2.0 {
                    return Err(SolverError::Config(format!(
                        "requires T^beta > meta_smoothness/2: {} <= {}",
                        t_pow,
                        report.meta_smoothness / 2.0
                    )));
                }
                if self.termination != Termination::SampledT2 {
                    return Err(SolverError::Config(
                        "nonconvex regimes use T2 (sampled) termination".to_string(),
                    ));
                }
            }
            StepSizeRegime::NonconvexConstrained => {
                if !(self.beta > 0.0 && self.beta < 1.0) {
                    return Err(SolverError::Config(format!(
                        "nonconvex-constrained requires beta in (0, 1), got {}",
                        self.beta
                    )));
                }
                if !self.set.is_bounded() {
                    return Err(SolverError::Config(
                        "nonconvex-constrained regime requires a ball feasible set".to_string(),
                    ));
                }
                if report.is_none() {
                    return Err(SolverError::Config(
                        "nonconvex-constrained regime needs a constants report".to_string(),
                    ));
                }
                if self.termination != Termination::SampledT2 {
                    return Err(SolverError::Config(
                        "nonconvex regimes use T2 (sampled) termination".to_string(),
                    ));
                }
            }
            StepSizeRegime::Manual { eta_w, eta_p } => {
                if !eta_w.is_finite() || eta_w <= 0.0 || !eta_p.is_finite() || eta_p <= 0.0 {
                    return Err(SolverError::Config(format!(
                        "manual step sizes must be positive, got ({eta_w}, {eta_p})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The iterate pair at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleState {
    pub w: Vec<f64>,
    pub p: SimplexPoint,
    pub t: usize,
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// T1: the running average of all iterates. T2: iterate tau.
    pub w_out: Vec<f64>,
    pub p_out: SimplexPoint,
    /// The sampled index, for T2 runs.
    pub tau: Option<usize>,
    pub trace: Vec<DiagnosticsRecord>,
    /// Full history (iterates 1..=T) when requested.
    pub history: Option<Vec<SaddleState>>,
    /// The last iterate produced.
    pub final_state: SaddleState,
    /// The constant step sizes the run used.
    pub eta_w: f64,
    pub eta_p: f64,
    /// The task batch size actually used (the constrained regime
    /// overrides the configured one).
    pub task_batch: usize,
}

/// Convex-case schedule: `eta_w = 2 R_W / (G^_w sqrt(T))`,
/// `eta_p = 2 / (G^_p sqrt(T))`.
pub fn schedule_convex(
    radius: f64,
    grad_w_bound: f64,
    grad_p_bound: f64,
    iterations: usize,
) -> Result<(f64, f64), SolverError> {
    if !radius.is_finite() || radius <= 0.0 || iterations < 1 {
        return Err(SolverError::Config(format!(
            "schedule needs radius > 0 and T >= 1, got ({radius}, {iterations})"
        )));
    }
    if !grad_w_bound.is_finite()
        || grad_w_bound <= 0.0
        || !grad_p_bound.is_finite()
        || grad_p_bound <= 0.0
    {
        return Err(SolverError::Degenerate(
            "gradient second-moment bound is zero; gradients vanish identically".to_string(),
        ));
    }
    let sqrt_t = (iterations as f64).sqrt();
    Ok((
        2.0 * radius / (grad_w_bound * sqrt_t),
        2.0 / (grad_p_bound * sqrt_t),
    ))
}

/// Unconstrained nonconvex schedule: `eta_w = T^-beta`,
/// `eta_p = 2^-1/2 G^_p^-1 T^-2beta`, for `beta` in (0, 1/2). The caller
/// checks `T^beta > meta_smoothness / 2` against the diagnostics report.
pub fn schedule_nonconvex_unconstrained(
    beta: f64,
    grad_p_bound: f64,
    iterations: usize,
) -> Result<(f64, f64), SolverError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(SolverError::Config(format!(
            "requires beta in (0, 1/2), got {beta}"
        )));
    }
    if !grad_p_bound.is_finite() || grad_p_bound <= 0.0 {
        return Err(SolverError::Degenerate(
            "gradient second-moment bound is zero".to_string(),
        ));
    }
    let t = iterations as f64;
    Ok((
        t.powf(-beta),
        t.powf(-2.0 * beta) / (grad_p_bound * (2.0f64).sqrt()),
    ))
}

/// Constrained nonconvex schedule: `eta_w = 1/(2 M~)`,
/// `eta_p = 1/(G^_p sqrt(2) T^beta)`, and the task batch override
/// `C = ceil(T^beta)`.
pub fn schedule_nonconvex_constrained(
    meta_smoothness: f64,
    grad_p_bound: f64,
    beta: f64,
    iterations: usize,
) -> Result<(f64, f64, usize), SolverError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(SolverError::Config(format!(
            "requires beta in (0, 1), got {beta}"
        )));
    }
    if !meta_smoothness.is_finite() || meta_smoothness <= 0.0 {
        return Err(SolverError::Degenerate(
            "meta-smoothness is zero; the objective is flat".to_string(),
        ));
    }
    if !grad_p_bound.is_finite() || grad_p_bound <= 0.0 {
        return Err(SolverError::Degenerate(
            "gradient second-moment bound is zero".to_string(),
        ));
    }
    let t = iterations as f64;
    // Guard against powf landing a hair above an exact integer power.
    let c_override = (t.powf(beta) - 1e-9).ceil().max(1.0) as usize;
    Ok((
        1.0 / (2.0 * meta_smoothness),
        t.powf(-beta) / (grad_p_bound * (2.0f64).sqrt()),
        c_override,
    ))
}

/// One simultaneous update: both gradients evaluated at the old state,
/// then `w` steps along the descent direction and `p` along the ascent
/// direction, each projected back.
pub fn step(
    state: &SaddleState,
    set: &TaskSet,
    batch: Minibatch,
    eta_w: f64,
    eta_p: f64,
    alpha: f64,
) -> Result<(SaddleState, GradientEstimate), SolverError> {
    let estimate = estimate_pair(&state.w, &state.p, set, batch, alpha)?;
    apply_step(state, set.domain(), &estimate.grad_w, &estimate.grad_p, eta_w, eta_p)
        .map(|next| (next, estimate))
}

fn apply_step(
    state: &SaddleState,
    domain: &FeasibleSet,
    grad_w: &[f64],
    grad_p: &[f64],
    eta_w: f64,
    eta_p: f64,
) -> Result<SaddleState, SolverError> {
    if !all_finite(grad_w) || !all_finite(grad_p) {
        return Err(SolverError::RunAborted {
            iteration: state.t,
            reason: "stochastic gradient is not finite".to_string(),
        });
    }
    let w_next = prox_step(&state.w, grad_w, eta_w, domain)?;
    let ascended = linalg::add_scaled(state.p.weights(), eta_p, grad_p);
    let p_next = project_simplex(&ascended)?;
    Ok(SaddleState {
        w: w_next,
        p: p_next,
        t: state.t + 1,
    })
}

struct ResolvedSchedule {
    eta_w: f64,
    eta_p: f64,
    task_batch: usize,
    /// The degenerate-schedule escape: gradients vanish identically, so
    /// the run returns its initial state untouched.
    frozen: bool,
}

fn resolve_schedule(
    config: &RunConfig,
    report: Option<&ConstantsReport>,
) -> Result<ResolvedSchedule, SolverError> {
    let plain = |eta_w, eta_p| ResolvedSchedule {
        eta_w,
        eta_p,
        task_batch: config.task_batch,
        frozen: false,
    };
    match config.regime {
        StepSizeRegime::Manual { eta_w, eta_p } => Ok(plain(eta_w, eta_p)),
        StepSizeRegime::Convex => {
            let report = report.expect("validated");
            let radius = config.set.radius().expect("validated");
            match schedule_convex(
                radius,
                report.grad_w_sq_bound.sqrt(),
                report.grad_p_sq_bound.sqrt(),
                config.iterations,
            ) {
                Ok((eta_w, eta_p)) => Ok(plain(eta_w, eta_p)),
                Err(SolverError::Degenerate(_)) => Ok(ResolvedSchedule {
                    eta_w: 0.0,
                    eta_p: 0.0,
                    task_batch: config.task_batch,
                    frozen: true,
                }),
                Err(e) => Err(e),
            }
        }
        StepSizeRegime::NonconvexUnconstrained => {
            let report = report.expect("validated");
            let (eta_w, eta_p) = schedule_nonconvex_unconstrained(
                config.beta,
                report.grad_p_sq_bound.sqrt(),
                config.iterations,
            )?;
            Ok(plain(eta_w, eta_p))
        }
        StepSizeRegime::NonconvexConstrained => {
            let report = report.expect("validated");
            let (eta_w, eta_p, c_override) = schedule_nonconvex_constrained(
                report.meta_smoothness,
                report.grad_p_sq_bound.sqrt(),
                config.beta,
                config.iterations,
            )?;
            Ok(ResolvedSchedule {
                eta_w,
                eta_p,
                task_batch: c_override,
                frozen: false,
            })
        }
    }
}

/// Running (streamed) mean of vectors.
struct RunningMean {
    mean: Vec<f64>,
    count: usize,
}

impl RunningMean {
    fn new(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            count: 0,
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for (m, xi) in self.mean.iter_mut().zip(x) {
            *m += (xi - *m) / k;
        }
    }
}

enum Method<'a> {
    DaMaml,
    Baseline { task_probs: &'a SimplexPoint },
}

/// Runs the distribution-agnostic solver: uniform task sampling, weighted
/// descent on `w`, projected ascent on `p`.
pub fn run_da_maml(
    config: &RunConfig,
    set: &TaskSet,
    report: Option<&ConstantsReport>,
) -> Result<RunOutput, SolverError> {
    run_loop(config, set, report, Method::DaMaml)
}

/// Runs the averaged-loss baseline at matched oracle budget: tasks drawn
/// from the ambient distribution, the plain `1/(CD)` meta-gradient
/// average on `w`, no ascent step, weights frozen at uniform.
pub fn run_maml_baseline(
    config: &RunConfig,
    set: &TaskSet,
    report: Option<&ConstantsReport>,
    task_probs: &SimplexPoint,
) -> Result<RunOutput, SolverError> {
    if task_probs.len() != set.len() {
        return Err(SolverError::Config(format!(
            "task_probs has {} entries for {} tasks",
            task_probs.len(),
            set.len()
        )));
    }
    run_loop(config, set, report, Method::Baseline { task_probs })
}

fn run_loop(
    config: &RunConfig,
    set: &TaskSet,
    report: Option<&ConstantsReport>,
    method: Method<'_>,
) -> Result<RunOutput, SolverError> {
    config.validate(set, report)?;
    let schedule = resolve_schedule(config, report)?;
    let m = set.len();
    let t_total = config.iterations;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // T2 consumes its sampling draw up front, from the same seeded
    // stream, so the trace stays reproducible.
    let tau = match config.termination {
        Termination::SampledT2 => {
            let u: f64 = rng.gen();
            Some(((u * t_total as f64) as usize + 1).min(t_total))
        }
        Termination::AverageT1 => None,
    };

    let mut state = SaddleState {
        w: config.initial_point(),
        p: SimplexPoint::uniform(m).expect("m >= 1"),
        t: 1,
    };
    // The initial point is feasible by validation; project once anyway so
    // boundary inputs are exactly represented.
    state.w = project_ball(&state.w, &config.set)?;

    let mut mean_w = RunningMean::new(set.dim());
    let mut mean_p = RunningMean::new(m);
    let mut sampled: Option<SaddleState> = None;
    let mut history: Option<Vec<SaddleState>> = config.keep_history.then(Vec::new);
    let mut trace = Vec::new();
    let guard = config.grad_w_bound.map(|b| 1e6 * b);

    let record_due = |t: usize| t == t_total || (t - 1).is_multiple_of(config.trace_stride);

    for t in 1..=t_total {
        debug_assert_eq!(state.t, t);
        // Accumulate termination outputs for the iterate as produced.
        mean_w.push(&state.w);
        mean_p.push(state.p.weights());
        if Some(t) == tau {
            sampled = Some(state.clone());
        }
        if let Some(h) = history.as_mut() {
            h.push(state.clone());
        }

        if t == t_total {
            if record_due(t) {
                trace.push(diagnostics::record_at(
                    t,
                    &state.w,
                    &state.p,
                    None,
                    set,
                    config.alpha,
                    positive_eta(schedule.eta_w),
                    schedule.eta_p,
                    config.trace_gap,
                )?);
            }
            break;
        }

        if schedule.frozen {
            // Degenerate schedule: nothing can move; keep iterating the
            // same state so termination semantics stay intact.
            if record_due(t) {
                trace.push(diagnostics::record_at(
                    t,
                    &state.w,
                    &state.p,
                    None,
                    set,
                    config.alpha,
                    positive_eta(schedule.eta_w),
                    schedule.eta_p,
                    config.trace_gap,
                )?);
            }
            state.t += 1;
            continue;
        }

        let batch = match method {
            Method::DaMaml => Minibatch::sample(set, schedule.task_batch, config.data_batch, &mut rng)?,
            Method::Baseline { task_probs } => Minibatch::sample_weighted(
                set,
                task_probs.weights(),
                schedule.task_batch,
                config.data_batch,
                &mut rng,
            )?,
        };

        let (next, grad_norm) = match method {
            Method::DaMaml => {
                let estimate = estimate_pair(&state.w, &state.p, set, batch, config.alpha)?;
                let norm = linalg::norm(&estimate.grad_w);
                check_guard(guard, norm, t)?;
                let next = apply_step(
                    &state,
                    &config.set,
                    &estimate.grad_w,
                    &estimate.grad_p,
                    schedule.eta_w,
                    schedule.eta_p,
                )?;
                (next, norm)
            }
            Method::Baseline { .. } => {
                let grad = estimate_grad_w_average(&state.w, set, &batch, config.alpha)?;
                let norm = linalg::norm(&grad);
                check_guard(guard, norm, t)?;
                if !all_finite(&grad) {
                    return Err(SolverError::RunAborted {
                        iteration: t,
                        reason: "stochastic gradient is not finite".to_string(),
                    });
                }
                let w_next = prox_step(&state.w, &grad, schedule.eta_w, &config.set)?;
                (
                    SaddleState {
                        w: w_next,
                        p: state.p.clone(),
                        t: t + 1,
                    },
                    norm,
                )
            }
        };

        if record_due(t) {
            trace.push(diagnostics::record_at(
                t,
                &state.w,
                &state.p,
                Some(grad_norm),
                set,
                config.alpha,
                schedule.eta_w,
                schedule.eta_p,
                config.trace_gap,
            )?);
        }
        state = next;
    }

    let (w_out, p_out) = match config.termination {
        Termination::AverageT1 => {
            let p = simplex_from_average(&mean_p.mean);
            (mean_w.mean.clone(), p)
        }
        Termination::SampledT2 => {
            let s = sampled.expect("tau within 1..=T");
            (s.w.clone(), s.p.clone())
        }
    };

    Ok(RunOutput {
        w_out,
        p_out,
        tau,
        trace,
        history,
        final_state: state,
        eta_w: schedule.eta_w,
        eta_p: schedule.eta_p,
        task_batch: schedule.task_batch,
    })
}

fn check_guard(guard: Option<f64>, norm: f64, t: usize) -> Result<(), SolverError> {
    if let Some(limit) = guard {
        if norm > limit {
            return Err(SolverError::RunAborted {
                iteration: t,
                reason: format!("gradient norm {norm} exceeds divergence guard {limit}"),
            });
        }
    }
    Ok(())
}

/// Prox steps need a positive step size; trace records for iterates with
/// no step use a nominal one.
fn positive_eta(eta: f64) -> f64 {
    if eta > 0.0 {
        eta
    } else {
        1.0
    }
}

/// The streamed average of simplex points is a simplex point up to
/// accumulated rounding; restore the invariant exactly.
fn simplex_from_average(mean: &[f64]) -> SimplexPoint {
    SimplexPoint::new(mean.to_vec())
        .or_else(|_| project_simplex(mean))
        .expect("average of simplex points renormalizes")
}
