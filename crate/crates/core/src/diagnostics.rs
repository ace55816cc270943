//! Theory constants, duality gap, projected gradient, stationarity
//! certificates, and empirical moment checks.
//!
//! Every constant formula is pure; the empirical estimators exist so the
//! tests can verify that the formula values really upper-bound what the
//! estimators produce on the analytic suites.

use crate::estimators::{estimate_pair, exact_grad_p, exact_grad_w, Minibatch};
use crate::geometry::{prox_step, FeasibleSet, GeometryError, SimplexPoint};
use crate::linalg::{self, SymMatrix};
use crate::task::{SuiteBounds, TaskError, TaskOracle, TaskSet};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("duality gap requires every meta-loss to be convex")]
    NonconvexSuite,
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Inputs to the constant formulas: the suite's assumption bounds plus
/// the run's inner step, batch sizes, and domain radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsInput {
    /// Bound on |f_i| over the domain.
    pub value_bound: f64,
    /// Lipschitz constant of f_i over the domain.
    pub lipschitz: f64,
    /// Smoothness of the sampled losses.
    pub smoothness: f64,
    /// Strong-convexity modulus of f_i (0 when none).
    pub strong_convexity: f64,
    /// Value-noise bound: E|f^ - f|^2 <= value_noise^2.
    pub value_noise: f64,
    /// Gradient-noise bound.
    pub grad_noise: f64,
    /// Hessian-noise bound.
    pub hess_noise: f64,
    /// Hessian Lipschitz constant.
    pub hess_lipschitz: f64,
    /// Inner step size.
    pub alpha: f64,
    /// Number of tasks m.
    pub tasks: usize,
    /// Task batch size C.
    pub task_batch: usize,
    /// Data batch size D.
    pub data_batch: usize,
    /// Radius of the ball containing the domain.
    pub radius: f64,
}

impl ConstantsInput {
    pub fn from_suite(
        bounds: SuiteBounds,
        alpha: f64,
        tasks: usize,
        task_batch: usize,
        data_batch: usize,
        radius: f64,
    ) -> Self {
        Self {
            value_bound: bounds.value_bound,
            lipschitz: bounds.lipschitz,
            smoothness: bounds.smoothness,
            strong_convexity: bounds.strong_convexity,
            value_noise: bounds.value_noise,
            grad_noise: bounds.grad_noise,
            hess_noise: bounds.hess_noise,
            hess_lipschitz: bounds.hess_lipschitz,
            alpha,
            tasks,
            task_batch,
            data_batch,
            radius,
        }
    }
}

/// The derived constants of the convergence theory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsReport {
    /// Lipschitz constant of each meta-loss.
    pub meta_lipschitz: f64,
    /// Smoothness of each meta-loss.
    pub meta_smoothness: f64,
    /// Strong-convexity modulus of the meta-losses; `None` when the
    /// hypothesis `alpha < 1/M` fails, and possibly nonpositive (then
    /// strong convexity is simply not certified).
    pub meta_strong_convexity: Option<f64>,
    /// Variance bound on the stochastic w-gradient.
    pub grad_w_var: f64,
    /// Variance bound on the stochastic p-gradient, as the theory states
    /// it. The stated formula omits the task-multiplicity variance (see
    /// `grad_p_var_sound`), so it can undershoot the true variance.
    pub grad_p_var: f64,
    /// Second-moment bound on the stochastic w-gradient.
    pub grad_w_sq_bound: f64,
    /// Second-moment bound on the stochastic p-gradient (same caveat as
    /// `grad_p_var`).
    pub grad_p_sq_bound: f64,
    /// Corrected p-gradient variance bound carrying the task-multiplicity
    /// term: `m(m-1)/C * sup|F~|^2 + m^2/(CD) * sup Var(f^)`. Available
    /// when the report was derived from an analytic task set.
    pub grad_p_var_sound: Option<f64>,
    /// Corrected p-gradient second-moment bound:
    /// `m * sup|F~|^2 + grad_p_var_sound`.
    pub grad_p_sq_bound_sound: Option<f64>,
}

impl ConstantsReport {
    pub fn from_input(input: &ConstantsInput) -> Self {
        let meta_lipschitz = lipschitz_meta(
            input.lipschitz,
            input.smoothness,
            input.hess_noise,
            input.alpha,
        );
        let meta_smoothness = smoothness_meta(
            input.smoothness,
            input.lipschitz,
            input.hess_lipschitz,
            input.alpha,
        );
        let meta_strong_convexity = strong_convexity_meta(
            input.strong_convexity,
            input.smoothness,
            input.lipschitz,
            input.hess_lipschitz,
            input.alpha,
        );
        let (grad_w_var, grad_p_var) = variance_bounds(input, meta_lipschitz);
        let (grad_w_sq_bound, grad_p_sq_bound) = second_moment_bounds(
            meta_lipschitz,
            grad_w_var,
            input.value_bound,
            input.tasks,
            grad_p_var,
        );
        Self {
            meta_lipschitz,
            meta_smoothness,
            meta_strong_convexity,
            grad_w_var,
            grad_p_var,
            grad_w_sq_bound,
            grad_p_sq_bound,
            grad_p_var_sound: None,
            grad_p_sq_bound_sound: None,
        }
    }

    /// Builds the report from an analytic task set directly, with the
    /// assumption constants scoped to the given ball. Also fills the
    /// corrected p-side bounds, which need the suite's post-adaptation
    /// value bound and outer-sample variance.
    pub fn for_task_set(
        set: &TaskSet,
        center: &[f64],
        radius: f64,
        alpha: f64,
        task_batch: usize,
        data_batch: usize,
    ) -> Result<(ConstantsInput, Self), TaskError> {
        let bounds = crate::task::suite_constants_over(set, center, radius)?;
        let input = ConstantsInput::from_suite(
            bounds,
            alpha,
            set.len(),
            task_batch,
            data_batch,
            radius,
        );
        let mut report = Self::from_input(&input);
        let meta = crate::task::suite_meta_bounds(set, center, radius, alpha)?;
        let m = set.len() as f64;
        let c = task_batch as f64;
        let d = data_batch as f64;
        // Law of total variance over the binomial multiplicities: each
        // entry contributes (m-1)/C F~_i^2 from the count spread plus
        // m/(CD) times the per-sample variance.
        let var_sound = m * (m - 1.0) / c * meta.meta_value_bound.powi(2)
            + m * m / (c * d) * meta.outer_value_var;
        report.grad_p_var_sound = Some(var_sound);
        report.grad_p_sq_bound_sound = Some(m * meta.meta_value_bound.powi(2) + var_sound);
        Ok((input, report))
    }

    /// Strong convexity is certified only for a positive modulus.
    pub fn strong_convexity_certified(&self) -> bool {
        matches!(self.meta_strong_convexity, Some(mu) if mu > 0.0)
    }
}

/// Lipschitz constant of the meta-loss: `L (1 + alpha M + alpha sigma_H)`.
pub fn lipschitz_meta(lipschitz: f64, smoothness: f64, hess_noise: f64, alpha: f64) -> f64 {
    lipschitz * (1.0 + alpha * smoothness + alpha * hess_noise)
}

/// Smoothness of the meta-loss: `M (1 + alpha M)^2 + alpha L H`.
pub fn smoothness_meta(smoothness: f64, lipschitz: f64, hess_lipschitz: f64, alpha: f64) -> f64 {
    smoothness * (1.0 + alpha * smoothness).powi(2) + alpha * lipschitz * hess_lipschitz
}

/// Strong-convexity modulus of the meta-loss:
/// `mu (1 - alpha M)^2 - alpha L H`, valid only when `alpha < 1/M`.
/// Returns `None` when that hypothesis fails.
pub fn strong_convexity_meta(
    strong_convexity: f64,
    smoothness: f64,
    lipschitz: f64,
    hess_lipschitz: f64,
    alpha: f64,
) -> Option<f64> {
    if smoothness > 0.0 && alpha >= 1.0 / smoothness {
        return None;
    }
    Some(
        strong_convexity * (1.0 - alpha * smoothness).powi(2)
            - alpha * lipschitz * hess_lipschitz,
    )
}

/// Variance bounds of the stochastic gradients:
/// `sigma_w^2 = (m-1)/C L~^2 + m^2/(CD) (1 + alpha M)^2 (L^2 + sigma_R^2)`
/// and `sigma_p^2 = m^2 sigma^2 / (CD)`.
pub fn variance_bounds(input: &ConstantsInput, meta_lipschitz: f64) -> (f64, f64) {
    let m = input.tasks as f64;
    let c = input.task_batch as f64;
    let d = input.data_batch as f64;
    let grad_w_var = (m - 1.0) / c * meta_lipschitz * meta_lipschitz
        + m * m / (c * d)
            * (1.0 + input.alpha * input.smoothness).powi(2)
            * (input.lipschitz * input.lipschitz + input.grad_noise * input.grad_noise);
    let grad_p_var = m * m * input.value_noise * input.value_noise / (c * d);
    (grad_w_var, grad_p_var)
}

/// Second-moment bounds: `G^_w^2 = L~^2 + sigma_w^2` and
/// `G^_p^2 = m B^2 + sigma_p^2`.
pub fn second_moment_bounds(
    meta_lipschitz: f64,
    grad_w_var: f64,
    value_bound: f64,
    tasks: usize,
    grad_p_var: f64,
) -> (f64, f64) {
    (
        meta_lipschitz * meta_lipschitz + grad_w_var,
        tasks as f64 * value_bound * value_bound + grad_p_var,
    )
}

/// How the inner minimization of the duality gap is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMinMode {
    /// Solve the weighted quadratic's stationarity system, polishing with
    /// projected gradient descent only when the ball constraint binds.
    ClosedForm,
    /// Projected exact-gradient descent to gradient-mapping norm 1e-10
    /// (at most 1e5 steps).
    GdOracle,
}

const GD_ORACLE_TOL: f64 = 1e-10;
const GD_ORACLE_MAX_STEPS: usize = 100_000;

/// Duality gap `max_p phi(w, p) - min_w phi(w', p)` of a feasible pair.
/// The maximum over the simplex is attained at a vertex, so the first
/// term is the worst task meta-loss. Only convex suites are supported.
pub fn duality_gap(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
    mode: InnerMinMode,
) -> Result<f64, DiagnosticsError> {
    if !set.meta_convex(alpha) {
        return Err(DiagnosticsError::NonconvexSuite);
    }
    let losses = exact_grad_p(w, set, alpha)?;
    let max_loss = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_val = min_weighted_meta_loss(p, set, alpha, mode)?;
    Ok(max_loss - min_val)
}

/// Weighted meta-loss `phi(w, p)` at fixed weights.
pub fn weighted_meta_loss(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
) -> Result<f64, TaskError> {
    let losses = exact_grad_p(w, set, alpha)?;
    Ok(losses
        .iter()
        .zip(p.weights())
        .map(|(f, pi)| pi * f)
        .sum())
}

/// The weighted meta-quadratic: Hessian `sum_i p_i Q_i`, its linear
/// system right-hand side, and the weighted constant term.
fn weighted_quadratic(
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
) -> Result<(SymMatrix, Vec<f64>), TaskError> {
    let d = set.dim();
    let mut q_total = SymMatrix::diagonal(&vec![0.0; d]);
    let mut rhs = vec![0.0; d];
    for (task, &p_i) in set.iter().zip(p.weights()) {
        let (q_i, b_i, _) = task.meta_quadratic_form(alpha)?;
        q_total = q_total.add_scaled(p_i, &q_i);
        let qb = q_i.matvec(&b_i);
        for (r, v) in rhs.iter_mut().zip(&qb) {
            *r += p_i * v;
        }
    }
    Ok((q_total, rhs))
}

fn min_weighted_meta_loss(
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
    mode: InnerMinMode,
) -> Result<f64, DiagnosticsError> {
    let domain = set.domain();
    if mode == InnerMinMode::ClosedForm {
        let (q, rhs) = weighted_quadratic(p, set, alpha)?;
        if let Some(w_star) = linalg::solve_dense(set.dim(), q.as_slice(), &rhs) {
            if domain.contains(&w_star, 1e-12) {
                return Ok(weighted_meta_loss(&w_star, p, set, alpha)?);
            }
            // The unconstrained minimizer lies outside the ball; polish
            // from its projection.
            let start = crate::geometry::project_ball(&w_star, domain)?;
            return projected_descent_min(&start, p, set, alpha);
        }
        // Singular stationarity system; fall through to descent.
    }
    let start = domain.center();
    projected_descent_min(&start, p, set, alpha)
}

fn projected_descent_min(
    start: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
) -> Result<f64, DiagnosticsError> {
    let (q, _) = weighted_quadratic(p, set, alpha)?;
    let curvature = q.max_eigenvalue();
    if curvature <= 1e-300 {
        // Flat objective: every feasible point is a minimizer.
        return Ok(weighted_meta_loss(start, p, set, alpha)?);
    }
    let step = 1.0 / curvature;
    let mut x = start.to_vec();
    for _ in 0..GD_ORACLE_MAX_STEPS {
        let g = exact_grad_w(&x, p, set, alpha)?;
        let next = prox_step(&x, &g, step, set.domain())?;
        let mapping = linalg::distance(&x, &next) / step;
        x = next;
        if mapping <= GD_ORACLE_TOL {
            break;
        }
    }
    Ok(weighted_meta_loss(&x, p, set, alpha)?)
}

/// Gradient mapping of the prox step: `(w - prox_step(w, g, eta)) / eta`
/// and its norm. With an unconstrained set this is exactly `g`.
pub fn projected_grad(
    w: &[f64],
    g: &[f64],
    eta: f64,
    set: &FeasibleSet,
) -> Result<(Vec<f64>, f64), GeometryError> {
    let next = prox_step(w, g, eta, set)?;
    let bar: Vec<f64> = w
        .iter()
        .zip(&next)
        .map(|(wi, ni)| (wi - ni) / eta)
        .collect();
    let norm = linalg::norm(&bar);
    Ok((bar, norm))
}

/// Projected gradient computed from the exact meta-gradient.
pub fn projected_grad_exact(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
    eta: f64,
) -> Result<(Vec<f64>, f64), DiagnosticsError> {
    let g = exact_grad_w(w, p, set, alpha)?;
    Ok(projected_grad(w, &g, eta, set.domain())?)
}

/// Result of a stationarity check: the (projected) gradient norm in `w`
/// and the gap to the inner maximum in `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityCertificate {
    pub holds: bool,
    pub grad_norm: f64,
    pub p_gap: f64,
}

/// Checks whether `(w, p)` is an (epsilon, delta)-stationary point using
/// exact quantities: gradient norm (projected gradient norm on bounded
/// sets, using `eta_w` for the prox step) at most `epsilon`, and the
/// weighted loss within `delta` of the worst task loss.
pub fn stationarity_certificate(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
    eta_w: f64,
    epsilon: f64,
    delta: f64,
) -> Result<StationarityCertificate, DiagnosticsError> {
    let grad_norm = match set.domain() {
        FeasibleSet::AllSpace { .. } => linalg::norm(&exact_grad_w(w, p, set, alpha)?),
        FeasibleSet::Ball { .. } => projected_grad_exact(w, p, set, alpha, eta_w)?.1,
    };
    let losses = exact_grad_p(w, set, alpha)?;
    let max_loss = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weighted: f64 = losses
        .iter()
        .zip(p.weights())
        .map(|(f, pi)| pi * f)
        .sum();
    let p_gap = max_loss - weighted;
    Ok(StationarityCertificate {
        holds: grad_norm <= epsilon && p_gap <= delta,
        grad_norm,
        p_gap,
    })
}

/// Per-iteration diagnostics of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: usize,
    /// Norm of the exact weighted meta-gradient.
    pub exact_grad_norm: Option<f64>,
    /// Norm of the stochastic gradient evaluated at this iterate; absent
    /// on the final iterate, which takes no step.
    pub stochastic_grad_norm: Option<f64>,
    pub duality_gap: Option<f64>,
    pub projected_grad_norm: Option<f64>,
    /// Worst task meta-loss `max_i F~_i(w)`.
    pub worst_task_loss: f64,
    /// Unweighted average of the task meta-losses.
    pub avg_task_loss: f64,
    pub task_losses: Vec<f64>,
    pub eta_w: f64,
    pub eta_p: f64,
}

/// Builds the diagnostics record for one iterate. The duality gap is
/// attempted only when `want_gap` is set and the suite is convex.
#[allow(clippy::too_many_arguments)]
pub fn record_at(
    t: usize,
    w: &[f64],
    p: &SimplexPoint,
    stochastic_grad_norm: Option<f64>,
    set: &TaskSet,
    alpha: f64,
    eta_w: f64,
    eta_p: f64,
    want_gap: bool,
) -> Result<DiagnosticsRecord, DiagnosticsError> {
    let task_losses = exact_grad_p(w, set, alpha)?;
    let worst = task_losses
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let avg = task_losses.iter().sum::<f64>() / task_losses.len() as f64;
    let exact_grad_norm = Some(linalg::norm(&exact_grad_w(w, p, set, alpha)?));
    let projected_grad_norm = Some(projected_grad_exact(w, p, set, alpha, eta_w)?.1);
    let duality_gap = if want_gap && set.meta_convex(alpha) {
        Some(duality_gap(w, p, set, alpha, InnerMinMode::ClosedForm)?)
    } else {
        None
    };
    Ok(DiagnosticsRecord {
        t,
        exact_grad_norm,
        stochastic_grad_norm,
        duality_gap,
        projected_grad_norm,
        worst_task_loss: worst,
        avg_task_loss: avg,
        task_losses,
        eta_w,
        eta_p,
    })
}

/// Theorem bound on the expected duality gap after `T` averaged
/// iterations with the convex schedule: `(3 R_W G^_w + 3 G^_p) / sqrt(T)`.
pub fn convex_gap_bound(radius: f64, grad_w_bound: f64, grad_p_bound: f64, t: usize) -> f64 {
    (3.0 * radius * grad_w_bound + 3.0 * grad_p_bound) / (t as f64).sqrt()
}

/// Theorem bound on `E |grad_w phi|^2` for the unconstrained nonconvex
/// schedule: `(phi(w1,p1) + B + sqrt(2m) B + 2 M~ sigma_w^2) / (T^beta - M~/2)`.
pub fn unconstrained_grad_bound(
    phi_init: f64,
    value_bound: f64,
    tasks: usize,
    meta_smoothness: f64,
    grad_w_var: f64,
    beta: f64,
    t: usize,
) -> f64 {
    let numerator = phi_init
        + value_bound
        + (2.0 * tasks as f64).sqrt() * value_bound
        + 2.0 * meta_smoothness * grad_w_var;
    numerator / ((t as f64).powf(beta) - meta_smoothness / 2.0)
}

/// Theorem bound on the p-side gap for the unconstrained schedule:
/// `sqrt(2) G^_p / T^(min(2 beta, 1 - 2 beta))`.
pub fn unconstrained_p_gap_bound(grad_p_bound: f64, beta: f64, t: usize) -> f64 {
    (2.0f64).sqrt() * grad_p_bound / (t as f64).powf((2.0 * beta).min(1.0 - 2.0 * beta))
}

/// Proposition-style bound on `E |grad_w phi|^2` with explicit constant
/// steps, unconstrained variant: the variance term carries an extra
/// `eta_w M~` factor relative to the constrained variant.
#[allow(clippy::too_many_arguments)]
pub fn grad_bound_unconstrained_steps(
    phi_init: f64,
    value_bound: f64,
    tasks: usize,
    meta_smoothness: f64,
    grad_w_var: f64,
    grad_p_bound: f64,
    eta_w: f64,
    eta_p: f64,
    t: usize,
) -> f64 {
    let denom = 2.0 * eta_w - eta_w * eta_w * meta_smoothness;
    2.0 * (phi_init + value_bound) / (t as f64 * denom)
        + 4.0 * eta_p * (tasks as f64).sqrt() * value_bound * grad_p_bound / denom
        + eta_w * meta_smoothness * grad_w_var / (2.0 - eta_w * meta_smoothness)
}

/// Constrained variant of the same bound: the variance term is
/// `sigma_w^2 / (2 - eta_w M~)`, independent of the step size.
#[allow(clippy::too_many_arguments)]
pub fn grad_bound_constrained_steps(
    phi_init: f64,
    value_bound: f64,
    tasks: usize,
    meta_smoothness: f64,
    grad_w_var: f64,
    grad_p_bound: f64,
    eta_w: f64,
    eta_p: f64,
    t: usize,
) -> f64 {
    let denom = 2.0 * eta_w - eta_w * eta_w * meta_smoothness;
    2.0 * (phi_init + value_bound) / (t as f64 * denom)
        + 4.0 * eta_p * (tasks as f64).sqrt() * value_bound * grad_p_bound / denom
        + grad_w_var / (2.0 - eta_w * meta_smoothness)
}

/// Theorem bound on `E |g-bar|^2` for the constrained schedule with task
/// batch `C = T^beta`; `sigma_w_tilde_sq` is `C` times the per-batch
/// variance bound.
pub fn constrained_proj_grad_bound(
    phi_init: f64,
    value_bound: f64,
    tasks: usize,
    meta_smoothness: f64,
    sigma_w_tilde_sq: f64,
    beta: f64,
    t: usize,
) -> f64 {
    8.0 * meta_smoothness * (phi_init + value_bound) / (3.0 * t as f64)
        + (8.0 * meta_smoothness * value_bound * (tasks as f64).sqrt() + 4.0 * sigma_w_tilde_sq)
            / (3.0 * (t as f64).powf(beta))
}

/// Deterministic per-replica stream derivation: splitmix64 of
/// `seed XOR replica`.
pub fn derive_stream(seed: u64, replica: u64) -> u64 {
    let mut z = seed ^ replica;
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Empirical first and second moments of the stochastic gradients at a
/// fixed pair, against their exact values.
#[derive(Debug, Clone)]
pub struct GradMoments {
    pub mean_w: Vec<f64>,
    pub mean_p: Vec<f64>,
    /// Empirical `E |g^_w - g_w|^2`.
    pub var_w: f64,
    /// Empirical `E |g^_p - g_p|^2`.
    pub var_p: f64,
    /// Empirical `E |g^_w|^2`.
    pub second_w: f64,
    /// Empirical `E |g^_p|^2`.
    pub second_p: f64,
    /// Componentwise standard errors of the two means.
    pub se_w: Vec<f64>,
    pub se_p: Vec<f64>,
}

/// Samples `batches` independent minibatches at fixed `(w, p)` and
/// accumulates gradient moments. Deviations are measured against the
/// exact gradients of the analytic suite.
#[allow(clippy::too_many_arguments)]
pub fn empirical_grad_moments(
    w: &[f64],
    p: &SimplexPoint,
    set: &TaskSet,
    alpha: f64,
    task_batch: usize,
    data_batch: usize,
    batches: usize,
    seed: u64,
) -> Result<GradMoments, DiagnosticsError> {
    let exact_w = exact_grad_w(w, p, set, alpha)?;
    let exact_p = exact_grad_p(w, set, alpha)?;
    let d = set.dim();
    let m = set.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sum_w = vec![0.0; d];
    let mut sumsq_w = vec![0.0; d];
    let mut sum_p = vec![0.0; m];
    let mut sumsq_p = vec![0.0; m];
    let (mut var_w, mut var_p, mut second_w, mut second_p) = (0.0, 0.0, 0.0, 0.0);

    for _ in 0..batches {
        let batch = Minibatch::sample(set, task_batch, data_batch, &mut rng)
            .map_err(|e| DiagnosticsError::Degenerate(e.to_string()))?;
        let est = estimate_pair(w, p, set, batch, alpha)
            .map_err(|e| DiagnosticsError::Degenerate(e.to_string()))?;
        for i in 0..d {
            sum_w[i] += est.grad_w[i];
            sumsq_w[i] += est.grad_w[i] * est.grad_w[i];
        }
        for i in 0..m {
            sum_p[i] += est.grad_p[i];
            sumsq_p[i] += est.grad_p[i] * est.grad_p[i];
        }
        var_w += linalg::distance(&est.grad_w, &exact_w).powi(2);
        var_p += linalg::distance(&est.grad_p, &exact_p).powi(2);
        second_w += linalg::dot(&est.grad_w, &est.grad_w);
        second_p += linalg::dot(&est.grad_p, &est.grad_p);
    }

    let n = batches as f64;
    let mean_w: Vec<f64> = sum_w.iter().map(|s| s / n).collect();
    let mean_p: Vec<f64> = sum_p.iter().map(|s| s / n).collect();
    let se = |sum: f64, sumsq: f64| {
        let mean = sum / n;
        let var = (sumsq / n - mean * mean).max(0.0);
        (var / n).sqrt()
    };
    let se_w: Vec<f64> = sum_w
        .iter()
        .zip(&sumsq_w)
        .map(|(&s, &sq)| se(s, sq))
        .collect();
    let se_p: Vec<f64> = sum_p
        .iter()
        .zip(&sumsq_p)
        .map(|(&s, &sq)| se(s, sq))
        .collect();

    Ok(GradMoments {
        mean_w,
        mean_p,
        var_w: var_w / n,
        var_p: var_p / n,
        second_w: second_w / n,
        second_p: second_p / n,
        se_w,
        se_p,
    })
}

/// Uniform point in the ball of the given center and radius.
pub fn sample_in_ball(center: &[f64], radius: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let d = center.len();
    loop {
        let z: Vec<f64> = (0..d)
            .map(|_| {
                let v: f64 = rand_distr::StandardNormal.sample(rng);
                v
            })
            .collect();
        let n = linalg::norm(&z);
        if n < 1e-12 {
            continue;
        }
        let u: f64 = rng.gen();
        let r = radius * u.powf(1.0 / d as f64);
        return center
            .iter()
            .zip(&z)
            .map(|(c, zi)| c + r * zi / n)
            .collect();
    }
}

/// Largest observed meta-loss difference quotient over random pairs in
/// the ball; a lower bound for (and empirical check of) the Lipschitz
/// constant.
pub fn empirical_meta_lipschitz(
    task: &dyn TaskOracle,
    center: &[f64],
    radius: f64,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64, TaskError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let u = sample_in_ball(center, radius, &mut rng);
        let v = sample_in_ball(center, radius, &mut rng);
        let dist = linalg::distance(&u, &v);
        if dist < 1e-9 {
            continue;
        }
        let quotient = (task.meta_loss_exact(&u, alpha)? - task.meta_loss_exact(&v, alpha)?)
            .abs()
            / dist;
        worst = worst.max(quotient);
    }
    Ok(worst)
}

/// Largest observed meta-gradient difference quotient over random pairs;
/// an empirical check of the smoothness constant.
pub fn empirical_meta_smoothness(
    task: &dyn TaskOracle,
    center: &[f64],
    radius: f64,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64, TaskError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let u = sample_in_ball(center, radius, &mut rng);
        let v = sample_in_ball(center, radius, &mut rng);
        let dist = linalg::distance(&u, &v);
        if dist < 1e-9 {
            continue;
        }
        let gu = task.meta_grad_exact(&u, alpha)?;
        let gv = task.meta_grad_exact(&v, alpha)?;
        worst = worst.max(linalg::distance(&gu, &gv) / dist);
    }
    Ok(worst)
}
