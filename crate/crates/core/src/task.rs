//! Stochastic task oracles and analytic synthetic suites.
//!
//! A task exposes noisy evaluations of its loss, gradient, and
//! Hessian-vector products, each unbiased for the underlying
//! deterministic quantities. The two analytic suites (quadratic and
//! trigonometric-quadratic) additionally provide closed-form
//! post-adaptation meta-losses and meta-gradients, which is what makes
//! the convergence theory numerically checkable.

use crate::geometry::FeasibleSet;
use crate::linalg::{self, all_finite, SymMatrix};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("operation not implemented for this suite: {0}")]
    NotImplemented(&'static str),
    #[error("constants require a bounded domain; pass a reference ball for unconstrained runs")]
    UnboundedDomain,
    #[error("invalid task parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("task set must contain at least one task")]
    EmptyTaskSet,
}

/// Standard deviations of the additive evaluation noise. All zero-mean
/// and independent per query: the sampled loss adds `value_std * xi` with
/// `xi` standard normal, the sampled gradient adds a Gaussian with total
/// second moment `grad_std^2`, and the sampled Hessian adds
/// `hessian_std * S` for a symmetric `S` with `|S|_F <= 1` almost surely
/// and `E|S|_F^2 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub value_std: f64,
    pub grad_std: f64,
    pub hessian_std: f64,
}

impl NoiseModel {
    pub fn new(value_std: f64, grad_std: f64, hessian_std: f64) -> Result<Self, TaskError> {
        for (name, v) in [
            ("value_std", value_std),
            ("grad_std", grad_std),
            ("hessian_std", hessian_std),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(TaskError::InvalidParameter(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self {
            value_std,
            grad_std,
            hessian_std,
        })
    }

    pub fn zero() -> Self {
        Self {
            value_std: 0.0,
            grad_std: 0.0,
            hessian_std: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value_std == 0.0 && self.grad_std == 0.0 && self.hessian_std == 0.0
    }
}

/// One realized data draw: the noise record for a single query point.
///
/// Replaying the same datum reproduces the same perturbation, so the
/// inner gradient and the Hessian of one sample always see the same
/// data, as the meta-gradient estimator requires.
#[derive(Debug, Clone, PartialEq)]
pub struct Datum {
    value_noise: f64,
    grad_noise: Option<Vec<f64>>,
    hessian_noise: Option<SymMatrix>,
}

impl Datum {
    /// The degenerate datum of a zero-noise model.
    pub fn noiseless() -> Self {
        Self {
            value_noise: 0.0,
            grad_noise: None,
            hessian_noise: None,
        }
    }

    fn sample(noise: &NoiseModel, dim: usize, rng: &mut dyn RngCore) -> Self {
        let value_noise = if noise.value_std > 0.0 {
            let xi: f64 = StandardNormal.sample(rng);
            noise.value_std * xi
        } else {
            0.0
        };
        let grad_noise = if noise.grad_std > 0.0 {
            // Per-component variance grad_std^2 / d, so the total second
            // moment of the perturbation is grad_std^2.
            let scale = noise.grad_std / (dim as f64).sqrt();
            Some(
                (0..dim)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        scale * z
                    })
                    .collect(),
            )
        } else {
            None
        };
        let hessian_noise = if noise.hessian_std > 0.0 {
            Some(sample_hessian_noise(noise.hessian_std, dim, rng))
        } else {
            None
        };
        Self {
            value_noise,
            grad_noise,
            hessian_noise,
        }
    }
}

/// Symmetric noise `hessian_std * S` where `S` has independent Gaussian
/// upper-triangle entries scaled so `E|S|_F^2 = 1`, then clipped to
/// `|S|_F <= 1`. Clipping preserves the zero mean (the law is symmetric
/// under negation) and keeps every sampled Hessian within `hessian_std`
/// of the true one in operator norm.
fn sample_hessian_noise(hessian_std: f64, dim: usize, rng: &mut dyn RngCore) -> SymMatrix {
    let entry_std = 1.0 / dim as f64;
    let mut data = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let z: f64 = StandardNormal.sample(rng);
            let v = entry_std * z;
            data[i * dim + j] = v;
            data[j * dim + i] = v;
        }
    }
    let mut s = SymMatrix::new(dim, data).expect("constructed symmetric");
    let norm = s.frobenius_norm();
    let scale = if norm > 1.0 {
        hessian_std / norm
    } else {
        hessian_std
    };
    s = SymMatrix::diagonal(&vec![0.0; dim]).add_scaled(scale, &s);
    s
}

/// Per-task constants of the standing assumptions, valid over a stated
/// ball: bound on |f|, Lipschitz and smoothness constants, strong
/// convexity modulus (0 when none is certified), and the
/// Hessian-Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskBounds {
    pub value_bound: f64,
    pub lipschitz: f64,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub hess_lipschitz: f64,
}

/// Post-adaptation bounds at a fixed inner step size, valid over a
/// stated ball: a bound on |F~_i(w)| and on the variance of one outer
/// value sample f^(w_ij, theta_out).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaTaskBounds {
    pub meta_value_bound: f64,
    pub outer_value_var: f64,
}

/// A task's stochastic evaluation interface.
///
/// `value`, `gradient`, and `hessian_vec` evaluate the sampled loss at a
/// replayable datum; `loss`, `loss_gradient`, and `loss_hessian_vec` are
/// the deterministic expectations. The `meta_*` methods give closed-form
/// post-adaptation quantities where the suite permits.
pub trait TaskOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn noise(&self) -> &NoiseModel;

    /// Draws one datum (one realized noise record).
    fn sample_datum(&self, rng: &mut dyn RngCore) -> Datum {
        Datum::sample(self.noise(), self.dim(), rng)
    }

    /// Deterministic loss `f(w)`.
    fn loss(&self, w: &[f64]) -> f64;

    /// Deterministic gradient.
    fn loss_gradient(&self, w: &[f64]) -> Vec<f64>;

    /// Deterministic Hessian-vector product.
    fn loss_hessian_vec(&self, w: &[f64], v: &[f64]) -> Vec<f64>;

    /// Sampled loss at the datum.
    fn value(&self, w: &[f64], datum: &Datum) -> f64 {
        self.loss(w) + datum.value_noise
    }

    /// Sampled gradient at the datum.
    fn gradient(&self, w: &[f64], datum: &Datum) -> Vec<f64> {
        let mut g = self.loss_gradient(w);
        if let Some(noise) = &datum.grad_noise {
            for (gi, ni) in g.iter_mut().zip(noise) {
                *gi += ni;
            }
        }
        g
    }

    /// Sampled Hessian-vector product at the datum. The perturbation is
    /// applied as a matrix-vector product; the Hessian itself is never
    /// materialized by callers.
    fn hessian_vec(&self, w: &[f64], datum: &Datum, v: &[f64]) -> Vec<f64> {
        let mut hv = self.loss_hessian_vec(w, v);
        if let Some(noise) = &datum.hessian_noise {
            let nv = noise.matvec(v);
            for (hi, ni) in hv.iter_mut().zip(nv) {
                *hi += ni;
            }
        }
        hv
    }

    /// Exact post-adaptation meta-loss `E[f(w - alpha * grad f^(w, theta))]`.
    fn meta_loss_exact(&self, w: &[f64], alpha: f64) -> Result<f64, TaskError>;

    /// Exact gradient of the meta-loss.
    fn meta_grad_exact(&self, w: &[f64], alpha: f64) -> Result<Vec<f64>, TaskError>;

    /// Whether the meta-loss is convex at this inner step size.
    fn meta_convex(&self, alpha: f64) -> bool;

    /// The meta-loss as an explicit quadratic `1/2 (w-b)^T Q (w-b) + k`,
    /// for suites where it is one.
    fn meta_quadratic_form(&self, alpha: f64) -> Result<(SymMatrix, Vec<f64>, f64), TaskError> {
        let _ = alpha;
        Err(TaskError::NotImplemented("meta_quadratic_form"))
    }

    /// Assumption constants valid over the ball of the given center and
    /// radius.
    fn bounds_over(&self, center: &[f64], radius: f64) -> Result<TaskBounds, TaskError>;

    /// Post-adaptation bounds at the given inner step size over the same
    /// ball.
    fn meta_bounds_over(
        &self,
        center: &[f64],
        radius: f64,
        alpha: f64,
    ) -> Result<MetaTaskBounds, TaskError>;
}

/// Quadratic task `f(w) = 1/2 (w-b)^T A (w-b) + c` with positive
/// semidefinite `A`.
#[derive(Debug, Clone)]
pub struct QuadraticTask {
    matrix: SymMatrix,
    minimizer: Vec<f64>,
    offset: f64,
    noise: NoiseModel,
    eig_min: f64,
    eig_max: f64,
}

impl QuadraticTask {
    pub fn new(
        matrix: SymMatrix,
        minimizer: Vec<f64>,
        offset: f64,
        noise: NoiseModel,
    ) -> Result<Self, TaskError> {
        if matrix.dim() != minimizer.len() {
            return Err(TaskError::DimensionMismatch {
                expected: matrix.dim(),
                got: minimizer.len(),
            });
        }
        if !all_finite(&minimizer) || !offset.is_finite() {
            return Err(TaskError::InvalidParameter(
                "minimizer and offset must be finite".to_string(),
            ));
        }
        let eigs = matrix.eigenvalues();
        let eig_min = *eigs.first().expect("nonempty matrix");
        let eig_max = *eigs.last().expect("nonempty matrix");
        if eig_min < -1e-10 * eig_max.abs().max(1.0) {
            return Err(TaskError::InvalidParameter(format!(
                "matrix must be positive semidefinite; smallest eigenvalue {eig_min}"
            )));
        }
        Ok(Self {
            matrix,
            minimizer,
            offset,
            noise,
            eig_min: eig_min.max(0.0),
            eig_max,
        })
    }

    /// Convenience constructor for one-dimensional tasks.
    pub fn scalar(curvature: f64, minimizer: f64, offset: f64, noise: NoiseModel) -> Self {
        Self::new(
            SymMatrix::diagonal(&[curvature]),
            vec![minimizer],
            offset,
            noise,
        )
        .expect("valid scalar task")
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Eigenvalues of the meta-Hessian `(I - alpha A) A (I - alpha A)`:
    /// the map `a -> a (1 - alpha a)^2` applied to the spectrum of `A`.
    pub fn meta_hessian_eigenvalues(&self, alpha: f64) -> Vec<f64> {
        let mut eigs: Vec<f64> = self
            .matrix
            .eigenvalues()
            .into_iter()
            .map(|a| a * (1.0 - alpha * a).powi(2))
            .collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }

    /// Constant added to the meta-loss by the inner gradient noise:
    /// `alpha^2 grad_std^2 tr(A) / (2 d)`.
    fn noise_correction(&self, alpha: f64) -> f64 {
        if self.noise.grad_std == 0.0 {
            return 0.0;
        }
        let d = self.dim() as f64;
        0.5 * alpha * alpha * self.noise.grad_std.powi(2) * self.matrix.trace() / d
    }
}

impl TaskOracle for QuadraticTask {
    fn dim(&self) -> usize {
        self.minimizer.len()
    }

    fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let u = linalg::sub(w, &self.minimizer);
        0.5 * self.matrix.quad_form(&u) + self.offset
    }

    fn loss_gradient(&self, w: &[f64]) -> Vec<f64> {
        self.matrix.matvec(&linalg::sub(w, &self.minimizer))
    }

    fn loss_hessian_vec(&self, _w: &[f64], v: &[f64]) -> Vec<f64> {
        self.matrix.matvec(v)
    }

    fn meta_loss_exact(&self, w: &[f64], alpha: f64) -> Result<f64, TaskError> {
        // z = (I - alpha A)(w - b); the Gaussian inner-gradient noise
        // contributes an exact constant because the loss is quadratic.
        let u = linalg::sub(w, &self.minimizer);
        let au = self.matrix.matvec(&u);
        let z = linalg::add_scaled(&u, -alpha, &au);
        Ok(0.5 * self.matrix.quad_form(&z) + self.offset + self.noise_correction(alpha))
    }

    fn meta_grad_exact(&self, w: &[f64], alpha: f64) -> Result<Vec<f64>, TaskError> {
        let u = linalg::sub(w, &self.minimizer);
        let z = linalg::add_scaled(&u, -alpha, &self.matrix.matvec(&u));
        let az = self.matrix.matvec(&z);
        Ok(linalg::add_scaled(&az, -alpha, &self.matrix.matvec(&az)))
    }

    fn meta_convex(&self, _alpha: f64) -> bool {
        // a (1 - alpha a)^2 >= 0 for every eigenvalue a >= 0.
        true
    }

    fn meta_quadratic_form(&self, alpha: f64) -> Result<(SymMatrix, Vec<f64>, f64), TaskError> {
        let d = self.dim();
        let mut data = vec![0.0; d * d];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let ae = self.matrix.matvec(&e);
            let z = linalg::add_scaled(&e, -alpha, &ae);
            let az = self.matrix.matvec(&z);
            let col = linalg::add_scaled(&az, -alpha, &self.matrix.matvec(&az));
            for i in 0..d {
                data[i * d + j] = col[i];
            }
        }
        // Symmetric up to rounding; the constructor symmetrizes exactly.
        let q = SymMatrix::new(d, data)
            .map_err(|e| TaskError::InvalidParameter(format!("meta-Hessian: {e}")))?;
        Ok((
            q,
            self.minimizer.clone(),
            self.offset + self.noise_correction(alpha),
        ))
    }

    fn bounds_over(&self, center: &[f64], radius: f64) -> Result<TaskBounds, TaskError> {
        if center.len() != self.dim() {
            return Err(TaskError::DimensionMismatch {
                expected: self.dim(),
                got: center.len(),
            });
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(TaskError::InvalidParameter(format!(
                "bounding radius must be positive and finite, got {radius}"
            )));
        }
        let reach = radius + linalg::distance(center, &self.minimizer);
        // The sampled Hessian stays within hessian_std of A in operator
        // norm, so per-sample smoothness needs the inflation.
        Ok(TaskBounds {
            value_bound: 0.5 * self.eig_max * reach * reach + self.offset.abs(),
            lipschitz: self.eig_max * reach,
            smoothness: self.eig_max + self.noise.hessian_std,
            strong_convexity: self.eig_min,
            hess_lipschitz: 0.0,
        })
    }

    fn meta_bounds_over(
        &self,
        center: &[f64],
        radius: f64,
        alpha: f64,
    ) -> Result<MetaTaskBounds, TaskError> {
        self.bounds_over(center, radius)?;
        let reach = radius + linalg::distance(center, &self.minimizer);
        let eigs = self.matrix.eigenvalues();
        // The meta-loss is 1/2 (w-b)^T Q (w-b) + const with Q's spectrum
        // a (1 - alpha a)^2 over the spectrum of A.
        let q_max = eigs
            .iter()
            .map(|&a| a * (1.0 - alpha * a).powi(2))
            .fold(0.0f64, f64::max);
        let meta_value_bound =
            0.5 * q_max * reach * reach + self.offset.abs() + self.noise_correction(alpha);
        // Variance of one outer value sample f^(w_ij, theta_out): the
        // value noise, plus the exact Gaussian variance of the quadratic
        // evaluated at z - alpha*eps with z = (I - alpha A)(w - b):
        // alpha^2 s^2 z^T A^2 z + alpha^4 s^4 |A|_F^2 / 2, s^2 = grad
        // noise variance per component. |A z| <= max |a(1-alpha a)| reach.
        let s_sq = if self.noise.grad_std > 0.0 {
            self.noise.grad_std.powi(2) / self.dim() as f64
        } else {
            0.0
        };
        let s_max = eigs
            .iter()
            .map(|&a| (a * (1.0 - alpha * a)).abs())
            .fold(0.0f64, f64::max);
        let frob = self.matrix.frobenius_norm();
        let outer_value_var = self.noise.value_std.powi(2)
            + alpha * alpha * s_sq * s_max * s_max * reach * reach
            + 0.5 * alpha.powi(4) * s_sq * s_sq * frob * frob;
        Ok(MetaTaskBounds {
            meta_value_bound,
            outer_value_var,
        })
    }
}

/// Quadratic plus a separable sinusoidal ripple:
/// `f(w) = 1/2 (w-b)^T A (w-b) + amplitude * sum_k sin(frequency * w_k) + c`.
/// Nonconvex whenever `amplitude * frequency^2` exceeds the smallest
/// eigenvalue of `A`.
#[derive(Debug, Clone)]
pub struct TrigQuadraticTask {
    quad: QuadraticTask,
    amplitude: f64,
    frequency: f64,
}

impl TrigQuadraticTask {
    pub fn new(
        matrix: SymMatrix,
        minimizer: Vec<f64>,
        offset: f64,
        amplitude: f64,
        frequency: f64,
        noise: NoiseModel,
    ) -> Result<Self, TaskError> {
        if !amplitude.is_finite() || !frequency.is_finite() {
            return Err(TaskError::InvalidParameter(
                "amplitude and frequency must be finite".to_string(),
            ));
        }
        Ok(Self {
            quad: QuadraticTask::new(matrix, minimizer, offset, noise)?,
            amplitude,
            frequency,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Attenuation of the sinusoid under the Gaussian inner-gradient
    /// noise: `E[sin(freq (x - alpha eps_k))] = kappa sin(freq x)`.
    fn attenuation(&self, alpha: f64) -> f64 {
        let s = self.quad.noise.grad_std;
        if s == 0.0 {
            return 1.0;
        }
        let d = self.dim() as f64;
        (-0.5 * self.frequency.powi(2) * alpha * alpha * s * s / d).exp()
    }

    /// The deterministic inner step `w - alpha * grad f(w)`.
    fn adapted_point(&self, w: &[f64], alpha: f64) -> Vec<f64> {
        linalg::add_scaled(w, -alpha, &self.loss_gradient(w))
    }
}

impl TaskOracle for TrigQuadraticTask {
    fn dim(&self) -> usize {
        self.quad.dim()
    }

    fn noise(&self) -> &NoiseModel {
        &self.quad.noise
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let trig: f64 = w.iter().map(|&x| (self.frequency * x).sin()).sum();
        self.quad.loss(w) + self.amplitude * trig
    }

    fn loss_gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = self.quad.loss_gradient(w);
        for (gk, &wk) in g.iter_mut().zip(w) {
            *gk += self.amplitude * self.frequency * (self.frequency * wk).cos();
        }
        g
    }

    fn loss_hessian_vec(&self, w: &[f64], v: &[f64]) -> Vec<f64> {
        let mut hv = self.quad.loss_hessian_vec(w, v);
        let f2 = self.frequency * self.frequency;
        for ((hk, &wk), &vk) in hv.iter_mut().zip(w).zip(v) {
            *hk -= self.amplitude * f2 * (self.frequency * wk).sin() * vk;
        }
        hv
    }

    fn meta_loss_exact(&self, w: &[f64], alpha: f64) -> Result<f64, TaskError> {
        let x = self.adapted_point(w, alpha);
        let kappa = self.attenuation(alpha);
        let u = linalg::sub(&x, &self.quad.minimizer);
        let trig: f64 = x.iter().map(|&xk| (self.frequency * xk).sin()).sum();
        Ok(0.5 * self.quad.matrix.quad_form(&u)
            + self.quad.offset
            + self.quad.noise_correction(alpha)
            + self.amplitude * kappa * trig)
    }

    fn meta_grad_exact(&self, w: &[f64], alpha: f64) -> Result<Vec<f64>, TaskError> {
        let x = self.adapted_point(w, alpha);
        let kappa = self.attenuation(alpha);
        let u = linalg::sub(&x, &self.quad.minimizer);
        // Mean gradient of the outer loss at the (noise-averaged) inner point.
        let mut inner = self.quad.matrix.matvec(&u);
        for (gk, &xk) in inner.iter_mut().zip(&x) {
            *gk += self.amplitude * self.frequency * kappa * (self.frequency * xk).cos();
        }
        // Chain rule through the deterministic inner step.
        Ok(linalg::add_scaled(
            &inner,
            -alpha,
            &self.loss_hessian_vec(w, &inner),
        ))
    }

    fn meta_convex(&self, _alpha: f64) -> bool {
        self.amplitude == 0.0
    }

    fn bounds_over(&self, center: &[f64], radius: f64) -> Result<TaskBounds, TaskError> {
        let base = self.quad.bounds_over(center, radius)?;
        let d = self.dim() as f64;
        let a = self.amplitude.abs();
        let f = self.frequency.abs();
        let curvature_ripple = a * f * f;
        Ok(TaskBounds {
            value_bound: base.value_bound + a * d,
            lipschitz: base.lipschitz + a * f * d.sqrt(),
            smoothness: base.smoothness + curvature_ripple,
            strong_convexity: (base.strong_convexity - curvature_ripple).max(0.0),
            hess_lipschitz: a * f * f * f * d.sqrt(),
        })
    }

    fn meta_bounds_over(
        &self,
        center: &[f64],
        radius: f64,
        alpha: f64,
    ) -> Result<MetaTaskBounds, TaskError> {
        self.quad.bounds_over(center, radius)?;
        let d = self.dim() as f64;
        let a = self.amplitude.abs();
        let f = self.frequency.abs();
        let reach = radius + linalg::distance(center, &self.quad.minimizer);
        let eigs = self.quad.matrix.eigenvalues();
        // Deterministic adapted point: x = (I - alpha A)(w - b) shifted
        // by the bounded trig gradient.
        let stretch = eigs
            .iter()
            .map(|&e| (1.0 - alpha * e).abs())
            .fold(0.0f64, f64::max);
        let reach_meta = stretch * reach + alpha * a * f * d.sqrt();
        let lam_max = self.quad.eig_max;
        let meta_value_bound = 0.5 * lam_max * reach_meta * reach_meta
            + a * d
            + self.quad.offset.abs()
            + self.quad.noise_correction(alpha);
        // Outer-sample variance: value noise, plus the quadratic part's
        // exact Gaussian variance at the adapted point, plus the trig
        // part bounded by the Gaussian Poincare inequality
        // (Var sin(f Y) <= f^2 Var Y per coordinate).
        let s_sq = if self.quad.noise.grad_std > 0.0 {
            self.quad.noise.grad_std.powi(2) / d
        } else {
            0.0
        };
        let frob = self.quad.matrix.frobenius_norm();
        let var_quad = alpha * alpha * s_sq * lam_max * lam_max * reach_meta * reach_meta
            + 0.5 * alpha.powi(4) * s_sq * s_sq * frob * frob;
        let var_trig = a * a * d * (f * f * alpha * alpha * s_sq).min(1.0);
        let combined = (var_quad.sqrt() + var_trig.sqrt()).powi(2);
        Ok(MetaTaskBounds {
            meta_value_bound,
            outer_value_var: self.quad.noise.value_std.powi(2) + combined,
        })
    }
}

/// An ordered collection of tasks sharing a dimension, together with the
/// feasible set of the outer minimization.
pub struct TaskSet {
    tasks: Vec<Box<dyn TaskOracle>>,
    domain: FeasibleSet,
}

impl std::fmt::Debug for TaskSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TaskSet")
            .field("tasks", &self.tasks.len())
            .field("dim", &self.dim())
            .field("domain", &self.domain)
            .finish()
    }
}

impl TaskSet {
    pub fn new(tasks: Vec<Box<dyn TaskOracle>>, domain: FeasibleSet) -> Result<Self, TaskError> {
        if tasks.is_empty() {
            return Err(TaskError::EmptyTaskSet);
        }
        let dim = tasks[0].dim();
        for t in &tasks {
            if t.dim() != dim {
                return Err(TaskError::DimensionMismatch {
                    expected: dim,
                    got: t.dim(),
                });
            }
        }
        if domain.dim() != dim {
            return Err(TaskError::DimensionMismatch {
                expected: dim,
                got: domain.dim(),
            });
        }
        Ok(Self { tasks, domain })
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tasks[0].dim()
    }

    pub fn domain(&self) -> &FeasibleSet {
        &self.domain
    }

    pub fn task(&self, i: usize) -> &dyn TaskOracle {
        self.tasks[i].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn TaskOracle> {
        self.tasks.iter().map(|t| t.as_ref())
    }

    /// True when every task's meta-loss is convex at this step size.
    pub fn meta_convex(&self, alpha: f64) -> bool {
        self.iter().all(|t| t.meta_convex(alpha))
    }
}

/// Draws an independent (inner, outer) data pair for one task.
pub fn sample_pair(task: &dyn TaskOracle, rng: &mut dyn RngCore) -> (Datum, Datum) {
    let inner = task.sample_datum(rng);
    let outer = task.sample_datum(rng);
    (inner, outer)
}

/// Uniform bounds of the standing assumptions for a whole suite: the
/// worst case over tasks of each per-task constant plus the noise levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteBounds {
    pub value_bound: f64,
    pub lipschitz: f64,
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub value_noise: f64,
    pub grad_noise: f64,
    pub hess_noise: f64,
    pub hess_lipschitz: f64,
}

/// Suite constants over the task set's own (bounded) domain.
pub fn suite_constants(set: &TaskSet) -> Result<SuiteBounds, TaskError> {
    match set.domain() {
        FeasibleSet::Ball { center, radius } => {
            let (center, radius) = (center.clone(), *radius);
            suite_constants_over(set, &center, radius)
        }
        FeasibleSet::AllSpace { .. } => Err(TaskError::UnboundedDomain),
    }
}

/// Worst-case post-adaptation bounds over a suite at a fixed inner step:
/// `sup_i sup_W |F~_i|` and `sup_i sup_W Var(f^(w_ij, theta_out))`.
pub fn suite_meta_bounds(
    set: &TaskSet,
    center: &[f64],
    radius: f64,
    alpha: f64,
) -> Result<MetaTaskBounds, TaskError> {
    let mut out = MetaTaskBounds {
        meta_value_bound: 0.0,
        outer_value_var: 0.0,
    };
    for task in set.iter() {
        let b = task.meta_bounds_over(center, radius, alpha)?;
        out.meta_value_bound = out.meta_value_bound.max(b.meta_value_bound);
        out.outer_value_var = out.outer_value_var.max(b.outer_value_var);
    }
    Ok(out)
}

/// Suite constants over an explicit reference ball. For unconstrained
/// runs the assumptions are scoped to this ball; the caller picks one
/// large enough to contain the trajectory of interest.
pub fn suite_constants_over(
    set: &TaskSet,
    center: &[f64],
    radius: f64,
) -> Result<SuiteBounds, TaskError> {
    let mut out = SuiteBounds {
        value_bound: 0.0,
        lipschitz: 0.0,
        smoothness: 0.0,
        strong_convexity: f64::INFINITY,
        value_noise: 0.0,
        grad_noise: 0.0,
        hess_noise: 0.0,
        hess_lipschitz: 0.0,
    };
    for task in set.iter() {
        let b = task.bounds_over(center, radius)?;
        out.value_bound = out.value_bound.max(b.value_bound);
        out.lipschitz = out.lipschitz.max(b.lipschitz);
        out.smoothness = out.smoothness.max(b.smoothness);
        out.strong_convexity = out.strong_convexity.min(b.strong_convexity);
        out.hess_lipschitz = out.hess_lipschitz.max(b.hess_lipschitz);
        let n = task.noise();
        out.value_noise = out.value_noise.max(n.value_std);
        out.grad_noise = out.grad_noise.max(n.grad_std);
        out.hess_noise = out.hess_noise.max(n.hessian_std);
    }
    Ok(out)
}
