//! Small dense linear algebra for the analytic task suites.
//!
//! The suites work with symmetric matrices of dimension at most a few
//! dozen, so a compact Jacobi eigensolver and a pivoted Gaussian solve
//! cover everything the crate needs.

use rand::Rng;

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance between two points.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `a + s * b`, elementwise.
pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// `a - b`, elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    add_scaled(a, -1.0, b)
}

/// True when every entry is finite.
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// A dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

/// Asymmetry above this (relative to the Frobenius norm) is rejected.
const SYMMETRY_TOL: f64 = 1e-12;

impl SymMatrix {
    /// Builds from row-major data, verifying symmetry to `1e-12` relative
    /// to the matrix scale. The stored matrix is symmetrized exactly.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, String> {
        if data.len() != dim * dim {
            return Err(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            ));
        }
        if !all_finite(&data) {
            return Err("matrix entries must be finite".to_string());
        }
        let scale = data.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        let mut sym = data.clone();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(format!(
                        "matrix is not symmetric: entry ({i},{j}) = {a} vs ({j},{i}) = {b}"
                    ));
                }
                let avg = 0.5 * (a + b);
                sym[i * dim + j] = avg;
                sym[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, data: sym })
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            data[i * dim + i] = e;
        }
        Self { dim, data }
    }

    /// Random symmetric matrix with exactly the given spectrum, produced
    /// by conjugating `diag(spectrum)` with random Givens rotations.
    pub fn from_spectrum<R: Rng>(spectrum: &[f64], rng: &mut R) -> Self {
        let dim = spectrum.len();
        let mut m = Self::diagonal(spectrum);
        if dim < 2 {
            return m;
        }
        // 3*d^2 sweeps of random plane rotations mix the eigenbasis well.
        for _ in 0..(3 * dim * dim) {
            let i = rng.gen_range(0..dim);
            let mut j = rng.gen_range(0..dim - 1);
            if j >= i {
                j += 1;
            }
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            m.rotate(i, j, angle.cos(), angle.sin());
        }
        m
    }

    /// Applies the congruence `G^T A G` for the Givens rotation in the
    /// `(p, q)` plane. Preserves symmetry and the spectrum exactly.
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64) {
        let d = self.dim;
        for k in 0..d {
            let akp = self.data[k * d + p];
            let akq = self.data[k * d + q];
            self.data[k * d + p] = c * akp - s * akq;
            self.data[k * d + q] = s * akp + c * akq;
        }
        for k in 0..d {
            let apk = self.data[p * d + k];
            let aqk = self.data[q * d + k];
            self.data[p * d + k] = c * apk - s * aqk;
            self.data[q * d + k] = s * apk + c * aqk;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product `A v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| dot(&self.data[i * self.dim..(i + 1) * self.dim], v))
            .collect()
    }

    /// Quadratic form `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `A + s * B`.
    pub fn add_scaled(&self, s: f64, other: &SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + s * b)
            .collect();
        SymMatrix {
            dim: self.dim,
            data,
        }
    }

    /// Eigenvalues in ascending order, by the cyclic Jacobi method.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        if d == 0 {
            return Vec::new();
        }
        if d == 1 {
            return vec![self.data[0]];
        }
        let mut a = self.clone();
        let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a.entry(i, j).powi(2);
                }
            }
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a.entry(p, q);
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (a.entry(q, q) - a.entry(p, p)) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    a.rotate(p, q, c, s);
                }
            }
        }
        let mut eigs: Vec<f64> = (0..d).map(|i| a.entry(i, i)).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }

    /// Largest eigenvalue magnitude (the spectral norm for symmetric `A`).
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular. `a` is given
/// row-major and both inputs are copied.
pub fn solve_dense(dim: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), dim * dim);
    debug_assert_eq!(b.len(), dim);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&i, &j| {
                m[i * dim + col]
                    .abs()
                    .partial_cmp(&m[j * dim + col].abs())
                    .unwrap()
            })
            .unwrap();
        if m[pivot_row * dim + col].abs() < 1e-13 * scale {
            return None;
        }
        if pivot_row != col {
            for k in 0..dim {
                m.swap(col * dim + k, pivot_row * dim + k);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m[col * dim + col];
        for row in (col + 1)..dim {
            let factor = m[row * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                m[row * dim + k] -= factor * m[col * dim + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..dim {
            acc -= m[row * dim + k] * x[k];
        }
        x[row] = acc / m[row * dim + row];
    }
    Some(x)
}
