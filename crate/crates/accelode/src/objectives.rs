//! Objective-function abstraction and the builtin test functions.
//!
//! Objectives are normalized so that the minimizer sits at the origin with
//! `f(0) = 0`. Each carries its gradient Lipschitz constant `L` and a
//! condition number `kappa` (an upper bound on `L / strong-convexity modulus`).

use std::sync::Arc;

use crate::error::{AccelError, Result};
use crate::vecmath;

/// Finite-difference step used whenever a Hessian is approximated from the
/// gradient. Central differences with this step stay well-defined across the
/// measure-zero kinks of the piecewise builtin.
pub const HESSIAN_FD_STEP: f64 = 1e-5;

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A smooth (strongly) convex objective with value and gradient oracles.
///
/// Instances are immutable after construction and cheap to clone; they can be
/// shared freely across concurrent trajectory runs.
#[derive(Clone)]
pub struct Objective {
    dim: usize,
    lipschitz: f64,
    kappa: f64,
    value: Arc<ValueFn>,
    gradient: Arc<GradientFn>,
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective")
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl Objective {
    /// Wraps user-supplied oracles. `kappa` is declared-trusted: it is
    /// validated only by sampling in tests, never recomputed.
    pub fn new(
        dim: usize,
        lipschitz: f64,
        kappa: f64,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(AccelError::invalid("objective dimension must be positive"));
        }
        if !(lipschitz > 0.0) {
            return Err(AccelError::invalid("Lipschitz constant must be positive"));
        }
        if !(kappa >= 1.0) {
            return Err(AccelError::invalid("condition number must be >= 1"));
        }
        Ok(Self {
            dim,
            lipschitz,
            kappa,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        })
    }

    /// Diagonal quadratic `f(x) = 1/2 x^T Q x` with `Q = diag(entries)`.
    ///
    /// `L` is the largest entry and `kappa` the exact eigenvalue ratio.
    pub fn quadratic(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(AccelError::invalid("quadratic needs at least one diagonal entry"));
        }
        if diag.iter().any(|&d| !(d > 0.0)) {
            return Err(AccelError::invalid("quadratic diagonal entries must be positive"));
        }
        let max = diag.iter().cloned().fold(f64::MIN, f64::max);
        let min = diag.iter().cloned().fold(f64::MAX, f64::min);
        let d1: Vec<f64> = diag.to_vec();
        let d2: Vec<f64> = diag.to_vec();
        Self::new(
            diag.len(),
            max,
            max / min,
            move |x| 0.5 * x.iter().zip(&d1).map(|(xi, qi)| qi * xi * xi).sum::<f64>(),
            move |x| x.iter().zip(&d2).map(|(xi, qi)| qi * xi).collect(),
        )
    }

    /// One-dimensional objective with a piecewise-linear gradient whose slope
    /// drops from `kappa` to 1 on the band `[1, 2)`:
    ///
    /// ```text
    /// f'(x) = kappa*x            for x < 1
    ///       = kappa - 1 + x      for 1 <= x < 2
    ///       = 1 - kappa + kappa*x for x >= 2
    /// ```
    ///
    /// `f` is recovered by exact piecewise integration with `f(0) = 0`, so
    /// `L = kappa` and the condition number is exactly `kappa`.
    pub fn piecewise(kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0) {
            return Err(AccelError::invalid("condition number must be >= 1"));
        }
        let k = kappa;
        let value = move |x: &[f64]| {
            let x = x[0];
            if x < 1.0 {
                0.5 * k * x * x
            } else if x < 2.0 {
                0.5 * k + (k - 1.0) * (x - 1.0) + 0.5 * (x * x - 1.0)
            } else {
                1.5 * k + 0.5 + (1.0 - k) * (x - 2.0) + 0.5 * k * (x * x - 4.0)
            }
        };
        let gradient = move |x: &[f64]| {
            let x = x[0];
            let g = if x < 1.0 {
                k * x
            } else if x < 2.0 {
                k - 1.0 + x
            } else {
                1.0 - k + k * x
            };
            vec![g]
        };
        Self::new(1, kappa, kappa, value, gradient)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gradient Lipschitz constant `L`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Condition number `kappa` (may be `f64::INFINITY` for objectives used
    /// only in non-strongly-convex mode).
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.gradient)(x)
    }

    /// Hessian approximated by central differences of the gradient,
    /// symmetrized. Row-major `dim x dim`.
    pub fn hessian_fd(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim;
        let h = HESSIAN_FD_STEP;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut xp = x.to_vec();
        for j in 0..n {
            xp[j] = x[j] + h;
            let gp = self.gradient(&xp);
            xp[j] = x[j] - h;
            let gm = self.gradient(&xp);
            xp[j] = x[j];
            cols.push(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
        }
        // Symmetrize: H[i][j] = (col_j[i] + col_i[j]) / 2.
        (0..n)
            .map(|i| (0..n).map(|j| 0.5 * (cols[j][i] + cols[i][j])).collect())
            .collect()
    }
}

/// Curvature averaged along the look-ahead segment from `q` to `q + beta*p`:
/// the matrix `D = (1/L) * integral_0^beta hessian(q + tau p) d tau`,
/// approximated with a composite midpoint rule over `nodes` subintervals and
/// finite-difference Hessians.
///
/// For an objective with constant Hessian `L*I` this is exactly `beta * I`;
/// in general the spectrum lies in `[beta/kappa, beta]` up to quadrature and
/// finite-difference error. `beta = 0` yields the zero matrix, and a negative
/// `beta` integrates the oriented interval.
pub fn curvature_average(
    obj: &Objective,
    q: &[f64],
    p: &[f64],
    beta: f64,
    nodes: usize,
) -> Result<Vec<Vec<f64>>> {
    if nodes == 0 {
        return Err(AccelError::invalid("quadrature needs at least one node"));
    }
    if q.len() != obj.dim() || p.len() != obj.dim() {
        return Err(AccelError::invalid("point dimension does not match objective"));
    }
    let n = obj.dim();
    let width = beta / nodes as f64;
    let mut acc = vec![vec![0.0; n]; n];
    for m in 0..nodes {
        let tau = (m as f64 + 0.5) * width;
        let x = vecmath::add_scaled(q, tau, p);
        let hess = obj.hessian_fd(&x);
        for i in 0..n {
            for j in 0..n {
                acc[i][j] += hess[i][j] * width;
            }
        }
    }
    let inv_l = 1.0 / obj.lipschitz();
    for row in &mut acc {
        for v in row {
            *v *= inv_l;
        }
    }
    Ok(acc)
}
