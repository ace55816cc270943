//! Exact Euclidean projections onto the probability simplex and onto a
//! ball, and the prox-step form of the constrained update.

use crate::linalg::{self, all_finite};
use thiserror::Error;

/// Feasible sets for the parameter vector `w`. Only the whole space and a
/// Euclidean ball are supported; any other convex set would need its own
/// projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// All of `R^d`; projection is the identity.
    AllSpace { dim: usize },
    /// Closed ball of the given center and radius (radius > 0).
    Ball { center: Vec<f64>, radius: f64 },
}

impl FeasibleSet {
    pub fn all_space(dim: usize) -> Self {
        FeasibleSet::AllSpace { dim }
    }

    /// A ball with the given center and positive radius.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self, GeometryError> {
        if !all_finite(&center) || !radius.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(GeometryError::NonPositiveRadius { radius });
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::AllSpace { dim } => *dim,
            FeasibleSet::Ball { center, .. } => center.len(),
        }
    }

    /// Center of the set; the origin for the unconstrained case.
    pub fn center(&self) -> Vec<f64> {
        match self {
            FeasibleSet::AllSpace { dim } => vec![0.0; *dim],
            FeasibleSet::Ball { center, .. } => center.clone(),
        }
    }

    /// Radius bound `R_W`, when the set is bounded.
    pub fn radius(&self) -> Option<f64> {
        match self {
            FeasibleSet::AllSpace { .. } => None,
            FeasibleSet::Ball { radius, .. } => Some(*radius),
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, FeasibleSet::Ball { .. })
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        match self {
            FeasibleSet::AllSpace { dim } => u.len() == *dim,
            FeasibleSet::Ball { center, radius } => {
                u.len() == center.len() && linalg::distance(u, center) <= radius + tol
            }
        }
    }
}

/// A point on the probability simplex: nonnegative weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

/// Allowed deviation of the weight sum from 1.
const SIMPLEX_SUM_TOL: f64 = 1e-12;

impl SimplexPoint {
    /// Wraps a weight vector, validating the simplex invariants.
    pub fn new(weights: Vec<f64>) -> Result<Self, GeometryError> {
        if weights.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        if !all_finite(&weights) {
            return Err(GeometryError::NonFinite);
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(GeometryError::NegativeWeight);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(GeometryError::WeightSum { sum });
        }
        Ok(Self { weights })
    }

    /// The uniform distribution over `m` tasks.
    pub fn uniform(m: usize) -> Result<Self, GeometryError> {
        if m == 0 {
            return Err(GeometryError::EmptyInput);
        }
        Ok(Self {
            weights: vec![1.0 / m as f64; m],
        })
    }

    /// Point mass on coordinate `k`.
    pub fn vertex(m: usize, k: usize) -> Result<Self, GeometryError> {
        if m == 0 || k >= m {
            return Err(GeometryError::EmptyInput);
        }
        let mut weights = vec![0.0; m];
        weights[k] = 1.0;
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("input vector must be nonempty")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ball radius must be positive, got {radius}")]
    NonPositiveRadius { radius: f64 },
    #[error("simplex weight is negative")]
    NegativeWeight,
    #[error("simplex weights sum to {sum}, expected 1")]
    WeightSum { sum: f64 },
    #[error("step size must be positive, got {eta}")]
    NonPositiveStep { eta: f64 },
    #[error("brute-force simplex QP supports at most {max} coordinates, got {got}")]
    UnsupportedSize { max: usize, got: usize },
}

/// Exact Euclidean projection onto the probability simplex.
///
/// Sort-then-threshold: sort descending, find the largest `k` with
/// `u_k - (sum_{j<=k} u_j - 1)/k > 0`, subtract that threshold and clamp
/// at zero. The result is renormalized so the weights sum to 1 to machine
/// precision.
pub fn project_simplex(q: &[f64]) -> Result<SimplexPoint, GeometryError> {
    if q.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if !all_finite(q) {
        return Err(GeometryError::NonFinite);
    }
    let m = q.len();
    let mut sorted = q.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // Largest k keeps the maximal support on floating-point ties.
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }

    let mut weights: Vec<f64> = q.iter().map(|&u| (u - threshold).max(0.0)).collect();
    let sum: f64 = weights.iter().sum();
    debug_assert!(sum > 0.0, "thresholding left an all-zero vector");
    for w in &mut weights {
        *w /= sum;
    }
    debug_assert_eq!(weights.len(), m);
    SimplexPoint::new(weights)
}

/// Exact Euclidean projection onto a feasible set.
///
/// Identity for the whole space and for interior points; otherwise the
/// radial clamp `center + R * (u - center)/|u - center|`.
pub fn project_ball(u: &[f64], set: &FeasibleSet) -> Result<Vec<f64>, GeometryError> {
    if !all_finite(u) {
        return Err(GeometryError::NonFinite);
    }
    if u.len() != set.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: set.dim(),
            got: u.len(),
        });
    }
    match set {
        FeasibleSet::AllSpace { .. } => Ok(u.to_vec()),
        FeasibleSet::Ball { center, radius } => {
            let dist = linalg::distance(u, center);
            if dist <= *radius {
                return Ok(u.to_vec());
            }
            // dist > radius > 0, so the direction is well defined.
            // Multiply before dividing: one rounding step per component.
            Ok(center
                .iter()
                .zip(u)
                .map(|(c, x)| c + (x - c) * radius / dist)
                .collect())
        }
    }
}

/// One projected gradient step: `project_ball(w - eta * g, set)`.
///
/// With the indicator function of the feasible set this is exactly the
/// prox operation of the constrained update.
pub fn prox_step(
    w: &[f64],
    g: &[f64],
    eta: f64,
    set: &FeasibleSet,
) -> Result<Vec<f64>, GeometryError> {
    if w.len() != g.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: w.len(),
            got: g.len(),
        });
    }
    if !eta.is_finite() || eta <= 0.0 {
        return Err(GeometryError::NonPositiveStep { eta });
    }
    let stepped = linalg::add_scaled(w, -eta, g);
    project_ball(&stepped, set)
}

/// Maximum length accepted by [`brute_force_simplex_qp`]; the support
/// enumeration is exponential.
pub const BRUTE_FORCE_MAX_LEN: usize = 12;

/// Independent reference for [`project_simplex`], used by the test
/// suites: enumerates every nonempty support set, solves the
/// equality-constrained restriction in closed form, and keeps the
/// feasible candidate closest to `q`.
pub fn brute_force_simplex_qp(q: &[f64]) -> Result<SimplexPoint, GeometryError> {
    if q.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if !all_finite(q) {
        return Err(GeometryError::NonFinite);
    }
    let m = q.len();
    if m > BRUTE_FORCE_MAX_LEN {
        return Err(GeometryError::UnsupportedSize {
            max: BRUTE_FORCE_MAX_LEN,
            got: m,
        });
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for support in 1u32..(1u32 << m) {
        let size = support.count_ones() as f64;
        let support_sum: f64 = (0..m)
            .filter(|&i| support & (1 << i) != 0)
            .map(|i| q[i])
            .sum();
        // On a fixed support the minimizer shifts every supported entry by
        // the same amount to restore unit mass.
        let shift = (1.0 - support_sum) / size;
        let mut candidate = vec![0.0; m];
        let mut feasible = true;
        for (i, slot) in candidate.iter_mut().enumerate() {
            if support & (1 << i) != 0 {
                let v = q[i] + shift;
                if v < 0.0 {
                    feasible = false;
                    break;
                }
                *slot = v;
            }
        }
        if !feasible {
            continue;
        }
        let dist_sq: f64 = candidate
            .iter()
            .zip(q)
            .map(|(p, u)| (p - u) * (p - u))
            .sum();
        match &best {
            Some((best_dist, _)) if *best_dist <= dist_sq => {}
            _ => best = Some((dist_sq, candidate)),
        }
    }
    let (_, mut weights) = best.expect("full support is always feasible after shifting");
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    SimplexPoint::new(weights)
}
