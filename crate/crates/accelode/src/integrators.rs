//! Discrete stepping: the semi-implicit Euler scheme, its two-part splitting
//! into a damping step and a symplectic Euler step, the inverse map, and a
//! fixed-step RK4 reference integrator for the continuous flow.

use crate::dynamics::{self, DampingSchedule, EnergyReport, PhasePoint};
use crate::error::{AccelError, Result};
use crate::objectives::Objective;
use crate::vecmath;

/// State-sum threshold `|q| + |p|` below which a trajectory counts as
/// converged to the origin.
pub const CONVERGENCE_EPS: f64 = 1e-12;

/// Stepper parameters. `step_size` is the only mandatory choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub step_size: f64,
    /// State norm beyond which a trajectory is reported as diverged.
    pub divergence_threshold: f64,
    /// Successive-iterate tolerance for the fixed-point inversion.
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
}

impl StepperConfig {
    pub fn new(step_size: f64) -> Result<Self> {
        if !(step_size > 0.0) {
            return Err(AccelError::invalid("step size must be positive"));
        }
        Ok(Self {
            step_size,
            divergence_threshold: 1e6,
            fixed_point_tol: 1e-12,
            fixed_point_max_iter: 200,
        })
    }

    pub fn with_fixed_point(mut self, tol: f64, max_iter: usize) -> Self {
        self.fixed_point_tol = tol;
        self.fixed_point_max_iter = max_iter;
        self
    }
}

/// How a trajectory run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    /// State sum `|q| + |p|` fell below [`CONVERGENCE_EPS`].
    Converged,
    /// Ran the requested number of steps.
    MaxSteps,
    /// State norm exceeded the divergence threshold (or became non-finite).
    Diverged,
}

/// Time-stamped trajectory with per-point energy reports.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub points: Vec<PhasePoint>,
    pub times: Vec<f64>,
    pub energies: Vec<EnergyReport>,
    pub status: TrajectoryStatus,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("records hold at least one point")
    }

    /// Index of the step at which the convergence threshold was first met,
    /// when the run converged.
    pub fn steps_to_convergence(&self) -> Option<usize> {
        match self.status {
            TrajectoryStatus::Converged => Some(self.points.len() - 1),
            _ => None,
        }
    }
}

/// One step of the semi-implicit Euler scheme:
/// momentum is updated from the full force, then the position update uses the
/// fresh momentum. Coefficients are evaluated at the step's start time `t`.
///
/// Implemented as the composition in [`split_step`]; the two agree exactly.
pub fn semi_implicit_step(
    obj: &Objective,
    sched: &DampingSchedule,
    z: &PhasePoint,
    t: f64,
    cfg: &StepperConfig,
) -> PhasePoint {
    split_step(obj, sched, z, t, cfg).1
}

/// The same step split into its two parts: a damping update of the momentum
/// driven by the non-potential forces, followed by a symplectic Euler step of
/// the conservative system. Returns `(intermediate, next)`.
pub fn split_step(
    obj: &Objective,
    sched: &DampingSchedule,
    z: &PhasePoint,
    t: f64,
    cfg: &StepperConfig,
) -> (PhasePoint, PhasePoint) {
    let ts = cfg.step_size;
    let fnp = dynamics::non_potential_force(obj, sched, z, t);
    let intermediate = PhasePoint {
        q: z.q.clone(),
        p: vecmath::add_scaled(&z.p, ts, &fnp),
    };
    let inv_l = 1.0 / obj.lipschitz();
    let g = obj.gradient(&intermediate.q);
    let p_next = intermediate
        .p
        .iter()
        .zip(&g)
        .map(|(pi, gi)| pi - ts * inv_l * gi)
        .collect::<Vec<_>>();
    let q_next = vecmath::add_scaled(&intermediate.q, ts, &p_next);
    (
        intermediate,
        PhasePoint {
            q: q_next,
            p: p_next,
        },
    )
}

/// Result of inverting one discrete step.
#[derive(Debug, Clone)]
pub struct InverseOutcome {
    pub point: PhasePoint,
    /// Fixed-point iterations spent inverting the damping part.
    pub iterations: usize,
}

/// Inverts [`semi_implicit_step`]: the symplectic part in closed form, the
/// damping part by fixed-point iteration started at zero momentum.
///
/// The iteration map contracts with factor `step_size * (2d + beta)`, so a
/// step size in `(0, 1)` guarantees convergence. `t` is the start time of the
/// forward step being undone.
pub fn inverse_step(
    obj: &Objective,
    sched: &DampingSchedule,
    z_next: &PhasePoint,
    t: f64,
    cfg: &StepperConfig,
) -> Result<InverseOutcome> {
    let ts = cfg.step_size;
    let inv_l = 1.0 / obj.lipschitz();
    let (d, beta) = sched.coefficients(t)?;

    // Symplectic part, closed form.
    let q_bar = vecmath::add_scaled(&z_next.q, -ts, &z_next.p);
    let g_bar = obj.gradient(&q_bar);
    let p_bar = vecmath::add_scaled(&z_next.p, ts * inv_l, &g_bar);

    // Damping part: solve p from p_bar = p + ts * f_np(q_bar, p).
    let g_here = obj.gradient(&q_bar);
    let mut p = vec![0.0; z_next.dim()];
    for iter in 1..=cfg.fixed_point_max_iter {
        let ahead = vecmath::add_scaled(&q_bar, beta, &p);
        let g_ahead = obj.gradient(&ahead);
        let p_new: Vec<f64> = (0..p.len())
            .map(|i| p_bar[i] + ts * (2.0 * d * p[i] + inv_l * (g_ahead[i] - g_here[i])))
            .collect();
        let residual = vecmath::norm(&vecmath::sub(&p_new, &p));
        p = p_new;
        if residual <= cfg.fixed_point_tol {
            return Ok(InverseOutcome {
                point: PhasePoint { q: q_bar, p },
                iterations: iter,
            });
        }
    }
    let ahead = vecmath::add_scaled(&q_bar, beta, &p);
    let g_ahead = obj.gradient(&ahead);
    let p_new: Vec<f64> = (0..p.len())
        .map(|i| p_bar[i] + ts * (2.0 * d * p[i] + inv_l * (g_ahead[i] - g_here[i])))
        .collect();
    Err(AccelError::NonConvergence {
        max_iter: cfg.fixed_point_max_iter,
        residual: vecmath::norm(&vecmath::sub(&p_new, &p)),
    })
}

const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Classical fixed-step RK4 on the continuous flow, used as a high-accuracy
/// proxy for exact solutions. Records every node with its energy report.
pub fn reference_integrate(
    obj: &Objective,
    sched: &DampingSchedule,
    z0: &PhasePoint,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<TrajectoryRecord> {
    if !(t1 > t0) {
        return Err(AccelError::invalid("integration interval must have t1 > t0"));
    }
    if substeps == 0 {
        return Err(AccelError::invalid("substeps must be positive"));
    }
    let h = (t1 - t0) / substeps as f64;
    let mut points = Vec::with_capacity(substeps + 1);
    let mut times = Vec::with_capacity(substeps + 1);
    let mut energies = Vec::with_capacity(substeps + 1);
    let mut z = z0.clone();
    let mut status = TrajectoryStatus::MaxSteps;
    points.push(z.clone());
    times.push(t0);
    energies.push(dynamics::energy(obj, sched, &z, t0));
    for k in 0..substeps {
        let t = t0 + k as f64 * h;
        z = rk4_step(obj, sched, &z, t, h);
        let t_next = t0 + (k + 1) as f64 * h;
        points.push(z.clone());
        times.push(t_next);
        energies.push(dynamics::energy(obj, sched, &z, t_next));
        if !z.is_finite() || z.norm() > DEFAULT_DIVERGENCE_THRESHOLD {
            status = TrajectoryStatus::Diverged;
            break;
        }
    }
    Ok(TrajectoryRecord {
        points,
        times,
        energies,
        status,
    })
}

fn rk4_step(
    obj: &Objective,
    sched: &DampingSchedule,
    z: &PhasePoint,
    t: f64,
    h: f64,
) -> PhasePoint {
    let eval = |zq: &[f64], zp: &[f64], at: f64| {
        let point = PhasePoint {
            q: zq.to_vec(),
            p: zp.to_vec(),
        };
        dynamics::vector_field(obj, sched, &point, at)
    };
    let (k1q, k1p) = eval(&z.q, &z.p, t);
    let (k2q, k2p) = eval(
        &vecmath::add_scaled(&z.q, 0.5 * h, &k1q),
        &vecmath::add_scaled(&z.p, 0.5 * h, &k1p),
        t + 0.5 * h,
    );
    let (k3q, k3p) = eval(
        &vecmath::add_scaled(&z.q, 0.5 * h, &k2q),
        &vecmath::add_scaled(&z.p, 0.5 * h, &k2p),
        t + 0.5 * h,
    );
    let (k4q, k4p) = eval(
        &vecmath::add_scaled(&z.q, h, &k3q),
        &vecmath::add_scaled(&z.p, h, &k3p),
        t + h,
    );
    let combine = |z: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| {
        (0..z.len())
            .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect::<Vec<_>>()
    };
    PhasePoint {
        q: combine(&z.q, &k1q, &k2q, &k3q, &k4q),
        p: combine(&z.p, &k1p, &k2p, &k3p, &k4p),
    }
}

/// Iterates the discrete step from `z0`, sampling time-varying coefficients
/// at `t_k = k * step_size`. Stops early once the state sum drops below
/// [`CONVERGENCE_EPS`] (converged) or the norm exceeds the divergence
/// threshold.
pub fn simulate(
    obj: &Objective,
    sched: &DampingSchedule,
    z0: &PhasePoint,
    steps: usize,
    cfg: &StepperConfig,
) -> TrajectoryRecord {
    let mut points = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    let mut energies = Vec::with_capacity(steps + 1);
    let mut z = z0.clone();
    points.push(z.clone());
    times.push(0.0);
    energies.push(dynamics::energy(obj, sched, &z, 0.0));
    if z.norm_sum() < CONVERGENCE_EPS {
        return TrajectoryRecord {
            points,
            times,
            energies,
            status: TrajectoryStatus::Converged,
        };
    }
    let mut status = TrajectoryStatus::MaxSteps;
    for k in 0..steps {
        let t = k as f64 * cfg.step_size;
        z = semi_implicit_step(obj, sched, &z, t, cfg);
        let t_next = (k + 1) as f64 * cfg.step_size;
        points.push(z.clone());
        times.push(t_next);
        energies.push(dynamics::energy(obj, sched, &z, t_next));
        if !z.is_finite() || z.norm() > cfg.divergence_threshold {
            status = TrajectoryStatus::Diverged;
            break;
        }
        if z.norm_sum() < CONVERGENCE_EPS {
            status = TrajectoryStatus::Converged;
            break;
        }
    }
    TrajectoryRecord {
        points,
        times,
        energies,
        status,
    }
}
