//! Lyapunov monitors and convergence-rate estimators.
//!
//! Three energy-like functions certify rates numerically: a constant-damping
//! function for the strongly convex flow, a time-varying variant for the
//! non-strongly-convex flow, and a discrete-time function in sheared
//! coordinates for the stepped dynamics. Each check integrates or iterates
//! the system and compares the monitor against its certified envelope.

use crate::dynamics::{DampingSchedule, PhasePoint};
use crate::error::{AccelError, Result};
use crate::integrators::{self, StepperConfig, TrajectoryRecord};
use crate::objectives::Objective;
use crate::vecmath;

/// One monitor evaluation: time (or step index), monitor value, the decay
/// rate certified at that point, and the resulting envelope value.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovSample {
    pub t_or_k: f64,
    pub value: f64,
    pub certified_rate: f64,
    pub certified_bound: f64,
}

/// Writes monitor samples as CSV rows
/// `t_or_k,value,certified_rate,certified_bound`.
pub fn write_samples_csv<W: std::io::Write>(
    samples: &[LyapunovSample],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "t_or_k,value,certified_rate,certified_bound")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{}",
            s.t_or_k, s.value, s.certified_rate, s.certified_bound
        )?;
    }
    Ok(())
}

/// Damping-weighted distance for the strongly convex flow:
/// `V = 1/2 |a q + p|^2 + f(q)/L` with `a = 1/sqrt(kappa) - 1/(2 kappa)`.
pub fn lyapunov_strongly_convex(obj: &Objective, kappa: f64, z: &PhasePoint) -> f64 {
    let a = decay_rate(kappa);
    let shifted = vecmath::add_scaled(&z.p, a, &z.q);
    0.5 * vecmath::dot(&shifted, &shifted) + obj.value(&z.q) / obj.lipschitz()
}

/// Certified exponential decay rate of the strongly convex monitor.
pub fn decay_rate(kappa: f64) -> f64 {
    1.0 / kappa.sqrt() - 1.0 / (2.0 * kappa)
}

/// Outcome of a continuous-time decay check.
#[derive(Debug, Clone)]
pub struct DecayCheck {
    pub pass: bool,
    /// Least-squares exponential rate fitted to the monitor, `inf` when the
    /// monitor starts at zero.
    pub measured_rate: f64,
    pub samples: Vec<LyapunovSample>,
}

const ENVELOPE_REL_TOL: f64 = 1e-3;

/// Integrates the strongly convex flow and asserts
/// `V(t) <= V(0) exp(-a t)` pointwise, up to a relative tolerance of 1e-3.
pub fn check_exponential_decay(
    obj: &Objective,
    kappa: f64,
    z0: &PhasePoint,
    horizon: f64,
    substeps: usize,
) -> Result<DecayCheck> {
    let sched = DampingSchedule::strongly_convex(kappa)?;
    let rec = integrators::reference_integrate(obj, &sched, z0, 0.0, horizon, substeps)?;
    let a = decay_rate(kappa);
    let v0 = lyapunov_strongly_convex(obj, kappa, &rec.points[0]);
    let mut pass = true;
    let mut samples = Vec::with_capacity(rec.len());
    let mut fit_t = Vec::new();
    let mut fit_lnv = Vec::new();
    for (z, &t) in rec.points.iter().zip(&rec.times) {
        let v = lyapunov_strongly_convex(obj, kappa, z);
        let bound = v0 * (-a * t).exp();
        if v > bound * (1.0 + ENVELOPE_REL_TOL) {
            pass = false;
        }
        if v > v0 * 1e-13 && v > 0.0 {
            fit_t.push(t);
            fit_lnv.push(v.ln());
        }
        samples.push(LyapunovSample {
            t_or_k: t,
            value: v,
            certified_rate: a,
            certified_bound: bound,
        });
    }
    let measured_rate = if v0 == 0.0 {
        f64::INFINITY
    } else {
        -least_squares_slope(&fit_t, &fit_lnv)
    };
    Ok(DecayCheck {
        pass,
        measured_rate,
        samples,
    })
}

/// Time-varying monitor for the non-strongly-convex flow:
/// `V = 1/2 |a(t) q + p|^2 + f(q)/L` with `a(t) = 2/(t+2)`.
pub fn lyapunov_time_varying(obj: &Objective, z: &PhasePoint, t: f64) -> f64 {
    let a = 2.0 / (t + 2.0);
    let shifted = vecmath::add_scaled(&z.p, a, &z.q);
    0.5 * vecmath::dot(&shifted, &shifted) + obj.value(&z.q) / obj.lipschitz()
}

/// Growth constant in the non-strongly-convex envelope
/// `f(q(t))/L <= 9 C / (t+2)^2 (|q0|^2 + |p0|^2)`.
pub const SUBLINEAR_GROWTH_CONSTANT: f64 = 5.0 / 6.0;

/// Outcome of the non-strongly-convex decay check.
#[derive(Debug, Clone)]
pub struct InverseSquareCheck {
    pub pass: bool,
    /// Monitor envelope `V(t) <= (t_ref+2)^2 V(t_ref) / (t+2)^2` held
    /// pointwise past `t_ref ~ 1`.
    pub lyapunov_bound_pass: bool,
    /// Function-value envelope with [`SUBLINEAR_GROWTH_CONSTANT`] held
    /// pointwise past `t_ref`.
    pub value_bound_pass: bool,
    /// Log-log slope of the function value fitted over `t in [10, horizon]`,
    /// when enough usable samples exist. At least -2 up to fit noise.
    pub loglog_slope: Option<f64>,
    pub samples: Vec<LyapunovSample>,
}

/// Integrates the time-varying flow and asserts the inverse-square envelopes
/// on the monitor and on the function value for `t >= 1`.
pub fn check_inverse_square_decay(
    obj: &Objective,
    z0: &PhasePoint,
    horizon: f64,
    substeps: usize,
) -> Result<InverseSquareCheck> {
    if !(horizon > 1.0) {
        return Err(AccelError::invalid("horizon must exceed the reference time 1"));
    }
    let sched = DampingSchedule::non_strongly_convex();
    let rec = integrators::reference_integrate(obj, &sched, z0, 0.0, horizon, substeps)?;
    let state_sq = vecmath::dot(&z0.q, &z0.q) + vecmath::dot(&z0.p, &z0.p);

    // Reference node: first grid time at or past 1.
    let ref_idx = rec
        .times
        .iter()
        .position(|&t| t >= 1.0)
        .expect("horizon > 1 puts a node past t = 1");
    let t_ref = rec.times[ref_idx];
    let v_ref = lyapunov_time_varying(obj, &rec.points[ref_idx], t_ref);

    let mut lyapunov_bound_pass = true;
    let mut value_bound_pass = true;
    let mut samples = Vec::with_capacity(rec.len());
    let mut fit_lnt = Vec::new();
    let mut fit_lnf = Vec::new();
    let value_floor = 1e-13 * (1.0 + state_sq);
    for (z, &t) in rec.points.iter().zip(&rec.times) {
        let v = lyapunov_time_varying(obj, z, t);
        let rate = 2.0 / (t + 2.0);
        let bound = (t_ref + 2.0).powi(2) * v_ref / (t + 2.0).powi(2);
        if t >= t_ref {
            if v > bound * (1.0 + ENVELOPE_REL_TOL) {
                lyapunov_bound_pass = false;
            }
            let f_norm = obj.value(&z.q) / obj.lipschitz();
            let f_bound = 9.0 * SUBLINEAR_GROWTH_CONSTANT / (t + 2.0).powi(2) * state_sq;
            if f_norm > f_bound * (1.0 + ENVELOPE_REL_TOL) {
                value_bound_pass = false;
            }
            if t >= 10.0 && f_norm > value_floor {
                fit_lnt.push(t.ln());
                fit_lnf.push(f_norm.ln());
            }
        }
        samples.push(LyapunovSample {
            t_or_k: t,
            value: v,
            certified_rate: rate,
            certified_bound: bound,
        });
    }
    let loglog_slope = if fit_lnt.len() >= 10 {
        Some(least_squares_slope(&fit_lnt, &fit_lnf))
    } else {
        None
    };
    Ok(InverseSquareCheck {
        pass: lyapunov_bound_pass && value_bound_pass,
        lyapunov_bound_pass,
        value_bound_pass,
        loglog_slope,
        samples,
    })
}

/// Discrete-time monitor in sheared coordinates
/// `qh = q + (tau - T_s) p`, `ph = p` with `tau = beta/(1 - 2 d T_s)`:
/// `V = 1/2 |d qh + (1 - d tau) ph|^2 + f(qh)/L`.
///
/// At `kappa = 1` the shear coefficient degenerates to `0/0` at unit step;
/// `beta = 0` makes `tau = 0` the consistent value there.
pub fn lyapunov_discrete(obj: &Objective, kappa: f64, step_size: f64, z: &PhasePoint) -> f64 {
    let sched = DampingSchedule::strongly_convex(kappa).expect("kappa >= 1");
    let (d, beta) = sched.coefficients_at(0.0);
    let tau = if beta == 0.0 {
        0.0
    } else {
        beta / (1.0 - 2.0 * d * step_size)
    };
    let qh = vecmath::add_scaled(&z.q, tau - step_size, &z.p);
    let shifted: Vec<f64> = qh
        .iter()
        .zip(&z.p)
        .map(|(qi, pi)| d * qi + (1.0 - d * tau) * pi)
        .collect();
    0.5 * vecmath::dot(&shifted, &shifted) + obj.value(&qh) / obj.lipschitz()
}

/// Outcome of the discrete decay check.
#[derive(Debug, Clone)]
pub struct DiscreteDecayCheck {
    /// Steps at which the monitor failed to contract by `1 - d T_s`.
    pub violations: usize,
    pub pass: bool,
    pub samples: Vec<LyapunovSample>,
}

/// Iterates the discrete scheme and counts violations of the per-step
/// contraction `V_{k+1} <= (1 - d T_s) V_k`.
///
/// The contraction is certified for `kappa >= 3` and `T_s in (0, 1]`; smaller
/// condition numbers run report-only.
pub fn check_discrete_decay(
    obj: &Objective,
    kappa: f64,
    step_size: f64,
    z0: &PhasePoint,
    steps: usize,
) -> Result<DiscreteDecayCheck> {
    if !(step_size > 0.0 && step_size <= 1.0) {
        return Err(AccelError::invalid("step size must lie in (0, 1]"));
    }
    let sched = DampingSchedule::strongly_convex(kappa)?;
    let (d, _) = sched.coefficients(0.0)?;
    let cfg = StepperConfig::new(step_size)?;
    let rec = integrators::simulate(obj, &sched, z0, steps, &cfg);
    let factor = 1.0 - d * step_size;
    let values: Vec<f64> = rec
        .points
        .iter()
        .map(|z| lyapunov_discrete(obj, kappa, step_size, z))
        .collect();
    let mut violations = 0;
    let mut samples = Vec::with_capacity(values.len());
    for (k, &v) in values.iter().enumerate() {
        let bound = if k == 0 {
            v
        } else {
            values[k - 1] * factor
        };
        if k > 0 && v > bound * (1.0 + 1e-12) {
            violations += 1;
        }
        samples.push(LyapunovSample {
            t_or_k: k as f64,
            value: v,
            certified_rate: factor,
            certified_bound: bound,
        });
    }
    Ok(DiscreteDecayCheck {
        violations,
        pass: violations == 0,
        samples,
    })
}

/// Trajectory observable to fit a geometric rate to.
pub enum Observable<'a> {
    /// `sqrt(|q|^2 + |p|^2)`
    DistanceToOrigin,
    /// Normalized function value `f(q)/L` from the energy reports.
    FunctionValue,
    /// The discrete Lyapunov monitor, which needs its context.
    LyapunovDiscrete {
        obj: &'a Objective,
        kappa: f64,
        step_size: f64,
    },
}

/// Least-squares geometric per-step rate of an observable along a recorded
/// trajectory: the slope of the log observable against the step index,
/// exponentiated.
///
/// The first tenth of the samples (transient) and values below the 1e-13
/// floating-point floor are discarded; at least 10 usable samples must
/// remain.
pub fn fit_linear_rate(record: &TrajectoryRecord, observable: Observable) -> Result<f64> {
    let values: Vec<f64> = match observable {
        Observable::DistanceToOrigin => record.points.iter().map(|z| z.norm()).collect(),
        Observable::FunctionValue => record.energies.iter().map(|e| e.potential).collect(),
        Observable::LyapunovDiscrete {
            obj,
            kappa,
            step_size,
        } => record
            .points
            .iter()
            .map(|z| lyapunov_discrete(obj, kappa, step_size, z))
            .collect(),
    };
    if values.iter().all(|&v| v == 0.0) {
        return Err(AccelError::UndefinedRate("observable is identically zero".into()));
    }
    let skip = values.len() / 10;
    let mut ks = Vec::new();
    let mut lnv = Vec::new();
    for (k, &v) in values.iter().enumerate().skip(skip) {
        if v >= 1e-13 {
            ks.push(k as f64);
            lnv.push(v.ln());
        }
    }
    if ks.len() < 10 {
        return Err(AccelError::InsufficientData(format!(
            "only {} usable samples after transient and floor filtering",
            ks.len()
        )));
    }
    Ok(least_squares_slope(&ks, &lnv).exp())
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return 0.0;
    }
    sxy / sxx
}
