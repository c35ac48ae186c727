//! Continuous-time system: first-order form of the damped flow, coefficient
//! schedules, non-potential forces, total energy, and dissipation identities.
//!
//! Positions are identified with the optimization iterate and momenta with its
//! velocity, so the flow lives in phase space `(q, p)`.

use crate::error::{AccelError, Result};
use crate::objectives::Objective;
use crate::vecmath;

/// A position-momentum pair. Both components share the objective dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() || q.is_empty() {
            return Err(AccelError::invalid(
                "position and momentum must have equal, positive dimension",
            ));
        }
        Ok(Self { q, p })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            q: vec![0.0; dim],
            p: vec![0.0; dim],
        }
    }

    /// One-dimensional point.
    pub fn scalar(q: f64, p: f64) -> Self {
        Self {
            q: vec![q],
            p: vec![p],
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Euclidean norm of the stacked state `(q, p)`.
    pub fn norm(&self) -> f64 {
        (vecmath::dot(&self.q, &self.q) + vecmath::dot(&self.p, &self.p)).sqrt()
    }

    /// `|q| + |p|`, the quantity the convergence threshold is applied to.
    pub fn norm_sum(&self) -> f64 {
        vecmath::norm(&self.q) + vecmath::norm(&self.p)
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }
}

/// Damping coefficient schedule `(d, beta)`.
///
/// Both paper modes satisfy `2d + beta = 1` (at `gamma = 1`); the extra
/// `Undamped` mode zeroes all damping so the conservative part of the flow
/// can be exercised on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingSchedule {
    /// Constant coefficients `d = 1/((sqrt(kappa)+1) gamma)`,
    /// `beta = gamma (sqrt(kappa)-1)/(sqrt(kappa)+1)`.
    StronglyConvex { kappa: f64, gamma: f64 },
    /// Time-varying coefficients `d(t) = 3/(2(t+2))`, `beta(t) = (t-1)/(t+2)`.
    /// Note `beta(t) < 0` for `t < 1`; all formulas apply verbatim there.
    NonStronglyConvex,
    /// `d = beta = 0`: pure conservative dynamics.
    Undamped,
}

impl DampingSchedule {
    /// Strongly convex mode with the time scale fixed to `gamma = 1`.
    pub fn strongly_convex(kappa: f64) -> Result<Self> {
        Self::strongly_convex_with_gamma(kappa, 1.0)
    }

    /// Changing `gamma` rescales solutions of the flow in time.
    pub fn strongly_convex_with_gamma(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa >= 1.0) {
            return Err(AccelError::invalid("condition number must be >= 1"));
        }
        if !(gamma > 0.0) {
            return Err(AccelError::invalid("gamma must be positive"));
        }
        Ok(Self::StronglyConvex { kappa, gamma })
    }

    pub fn non_strongly_convex() -> Self {
        Self::NonStronglyConvex
    }

    pub fn undamped() -> Self {
        Self::Undamped
    }

    /// Condition number backing the schedule, if it has one.
    pub fn kappa(&self) -> Option<f64> {
        match self {
            Self::StronglyConvex { kappa, .. } => Some(*kappa),
            _ => None,
        }
    }

    /// Coefficients `(d, beta)` at time `t >= 0`.
    ///
    /// `beta` is evaluated from its closed form and `d` as `(1 - beta)/2`
    /// (scaled by `gamma` in the constant mode), which keeps `2d + beta = 1`
    /// within one ulp.
    pub fn coefficients(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(AccelError::invalid(format!("time must be nonnegative, got {t}")));
        }
        Ok(match self {
            Self::StronglyConvex { kappa, gamma } => {
                let s = kappa.sqrt();
                let beta_unit = (s - 1.0) / (s + 1.0);
                (0.5 * (1.0 - beta_unit) / gamma, gamma * beta_unit)
            }
            Self::NonStronglyConvex => {
                let beta = (t - 1.0) / (t + 2.0);
                (0.5 * (1.0 - beta), beta)
            }
            Self::Undamped => (0.0, 0.0),
        })
    }

    pub(crate) fn coefficients_at(&self, t: f64) -> (f64, f64) {
        self.coefficients(t)
            .expect("schedule evaluated at negative time")
    }
}

/// Kinetic, potential, and total energy of a phase point, plus the
/// instantaneous dissipation rate of the damped flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `1/2 |p|^2`
    pub kinetic: f64,
    /// `f(q) / L`
    pub potential: f64,
    /// `kinetic + potential`
    pub total: f64,
    /// `<f_np(q, p), p>`, the exact rate of change of `total` along the flow.
    pub dissipation_rate: f64,
}

/// Non-potential forces of the damped flow:
/// `f_np(q, p) = -2 d p - (grad f(q + beta p) - grad f(q)) / L`
/// with `(d, beta)` taken from the schedule at time `t`.
pub fn non_potential_force(
    obj: &Objective,
    sched: &DampingSchedule,
    z: &PhasePoint,
    t: f64,
) -> Vec<f64> {
    let (d, beta) = sched.coefficients_at(t);
    let inv_l = 1.0 / obj.lipschitz();
    let ahead = vecmath::add_scaled(&z.q, beta, &z.p);
    let g_ahead = obj.gradient(&ahead);
    let g_here = obj.gradient(&z.q);
    z.p
        .iter()
        .zip(g_ahead.iter().zip(&g_here))
        .map(|(pi, (ga, gh))| -2.0 * d * pi - inv_l * (ga - gh))
        .collect()
}

/// Right-hand side of the flow in first-order form:
/// `dq = p`, `dp = -grad f(q)/L + f_np(q, p)`.
pub fn vector_field(
    obj: &Objective,
    sched: &DampingSchedule,
    z: &PhasePoint,
    t: f64,
) -> (Vec<f64>, Vec<f64>) {
    let inv_l = 1.0 / obj.lipschitz();
    let fnp = non_potential_force(obj, sched, z, t);
    let g = obj.gradient(&z.q);
    let dp = fnp
        .iter()
        .zip(&g)
        .map(|(f, gi)| -inv_l * gi + f)
        .collect();
    (z.p.clone(), dp)
}

/// Total energy `H = 1/2 |p|^2 + f(q)/L` and its dissipation rate.
///
/// The rate comes from the analytic identity `<f_np, p>` rather than
/// numerical differentiation of `H`.
pub fn energy(obj: &Objective, sched: &DampingSchedule, z: &PhasePoint, t: f64) -> EnergyReport {
    let kinetic = 0.5 * vecmath::dot(&z.p, &z.p);
    let potential = obj.value(&z.q) / obj.lipschitz();
    let fnp = non_potential_force(obj, sched, z, t);
    EnergyReport {
        kinetic,
        potential,
        total: kinetic + potential,
        dissipation_rate: vecmath::dot(&fnp, &z.p),
    }
}
