//! Browser-facing wrappers around the core laboratory.
//!
//! Each export takes plain numbers, runs the corresponding experiment on the
//! piecewise builtin objective, and returns a JSON payload the static page
//! renders onto canvases. The payload builders are ordinary Rust functions,
//! so the crate tests them natively; `wasm-bindgen` only adds the JS surface
//! when compiled for the `wasm32` target.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use accelode::analysis::{check_discrete_decay, decay_rate};
use accelode::geometry::{circle_contour, evolve_contour, level_set_contour, Contour};
use accelode::integrators::{simulate, StepperConfig, TrajectoryStatus};
use accelode::{DampingSchedule, Objective, PhasePoint};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Serialize)]
struct TrajectoryJson {
    q0: f64,
    status: String,
    steps_to_convergence: Option<usize>,
    q: Vec<f64>,
    p: Vec<f64>,
    in_band: Vec<bool>,
}

#[derive(Serialize)]
struct PortraitJson {
    kappa: f64,
    step_size: f64,
    beta: f64,
    trajectories: Vec<TrajectoryJson>,
}

#[derive(Serialize)]
struct ContourStepJson {
    area: f64,
    max_radius: f64,
    q: Vec<f64>,
    p: Vec<f64>,
}

#[derive(Serialize)]
struct ContourFlowJson {
    kappa: f64,
    step_size: f64,
    /// Certified per-step area-ratio window `[1 - T_s, 1 - T_s(2d + beta/kappa)]`.
    ratio_low: f64,
    ratio_high: f64,
    steps: Vec<ContourStepJson>,
}

#[derive(Serialize)]
struct DecayJson {
    kappa: f64,
    step_size: f64,
    /// Per-step certified contraction factor of the discrete monitor.
    factor: f64,
    /// Continuous-time certified exponential rate, for reference.
    continuous_rate: f64,
    violations: usize,
    monitor: Vec<f64>,
    envelope: Vec<f64>,
}

fn status_name(s: TrajectoryStatus) -> &'static str {
    match s {
        TrajectoryStatus::Converged => "converged",
        TrajectoryStatus::MaxSteps => "running",
        TrajectoryStatus::Diverged => "diverged",
    }
}

fn objective(kappa: f64) -> Result<Objective, String> {
    Objective::piecewise(kappa).map_err(|e| e.to_string())
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

/// Phase portrait of the piecewise objective: a grid of starts `(q0, p0)`
/// stepped `steps` times at `step_size`, with the extrapolation band
/// `q + beta p in [1, 2)` flagged per point.
pub fn phase_portrait_json(
    kappa: f64,
    step_size: f64,
    q_min: f64,
    q_max: f64,
    q_step: f64,
    p0: f64,
    steps: usize,
) -> String {
    match phase_portrait_impl(kappa, step_size, q_min, q_max, q_step, p0, steps) {
        Ok(json) => json,
        Err(e) => error_json(&e),
    }
}

fn phase_portrait_impl(
    kappa: f64,
    step_size: f64,
    q_min: f64,
    q_max: f64,
    q_step: f64,
    p0: f64,
    steps: usize,
) -> Result<String, String> {
    if !(q_step > 0.0) || !(q_min < q_max) {
        return Err("start grid needs q_min < q_max and a positive q_step".into());
    }
    let obj = objective(kappa)?;
    let sched = DampingSchedule::strongly_convex(kappa).map_err(|e| e.to_string())?;
    let (_, beta) = sched.coefficients(0.0).map_err(|e| e.to_string())?;
    let cfg = StepperConfig::new(step_size).map_err(|e| e.to_string())?;
    let count = ((q_max - q_min) / q_step).round() as usize;
    let mut trajectories = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let q0 = q_min + q_step * i as f64;
        let rec = simulate(&obj, &sched, &PhasePoint::scalar(q0, p0), steps, &cfg);
        let q: Vec<f64> = rec.points.iter().map(|z| z.q[0]).collect();
        let p: Vec<f64> = rec.points.iter().map(|z| z.p[0]).collect();
        let in_band = q
            .iter()
            .zip(&p)
            .map(|(qi, pi)| (1.0..2.0).contains(&(qi + beta * pi)))
            .collect();
        trajectories.push(TrajectoryJson {
            q0,
            status: status_name(rec.status).to_string(),
            steps_to_convergence: rec.steps_to_convergence(),
            q,
            p,
            in_band,
        });
    }
    serde_json::to_string(&PortraitJson {
        kappa,
        step_size,
        beta,
        trajectories,
    })
    .map_err(|e| e.to_string())
}

/// Evolves a contour of the piecewise objective step by step, recording the
/// polygon, its signed area, and its max radius. `use_level_set` picks an
/// energy level set of height `size` instead of an origin circle of radius
/// `size`.
pub fn contour_flow_json(
    kappa: f64,
    step_size: f64,
    size: f64,
    use_level_set: bool,
    vertices: usize,
    steps: usize,
) -> String {
    match contour_flow_impl(kappa, step_size, size, use_level_set, vertices, steps) {
        Ok(json) => json,
        Err(e) => error_json(&e),
    }
}

fn contour_flow_impl(
    kappa: f64,
    step_size: f64,
    size: f64,
    use_level_set: bool,
    vertices: usize,
    steps: usize,
) -> Result<String, String> {
    let obj = objective(kappa)?;
    let sched = DampingSchedule::strongly_convex(kappa).map_err(|e| e.to_string())?;
    let (d, beta) = sched.coefficients(0.0).map_err(|e| e.to_string())?;
    let cfg = StepperConfig::new(step_size).map_err(|e| e.to_string())?;
    let mut contour = if use_level_set {
        level_set_contour(&obj, size, vertices).map_err(|e| e.to_string())?
    } else {
        circle_contour([0.0, 0.0], size, vertices).map_err(|e| e.to_string())?
    };
    let snapshot = |c: &Contour| {
        // Decimate long polygons so payloads stay small.
        let v = c.vertices();
        let stride = (v.len() / 512).max(1);
        let pts: Vec<&[f64; 2]> = v.iter().step_by(stride).collect();
        ContourStepJson {
            area: c.signed_area(),
            max_radius: c.max_radius(),
            q: pts.iter().map(|x| x[0]).collect(),
            p: pts.iter().map(|x| x[1]).collect(),
        }
    };
    let mut snapshots = vec![snapshot(&contour)];
    for k in 0..steps {
        let threshold = 0.01 * contour.bbox_diagonal();
        contour = evolve_contour(&obj, &sched, &contour, k as f64 * step_size, &cfg, threshold);
        snapshots.push(snapshot(&contour));
        if contour.is_degenerate() {
            break;
        }
    }
    serde_json::to_string(&ContourFlowJson {
        kappa,
        step_size,
        ratio_low: 1.0 - step_size,
        ratio_high: 1.0 - step_size * (2.0 * d + beta / kappa),
        steps: snapshots,
    })
    .map_err(|e| e.to_string())
}

/// Runs the discrete scheme from `(q0, p0)` and reports the discrete
/// Lyapunov monitor against its certified geometric envelope.
pub fn lyapunov_decay_json(kappa: f64, step_size: f64, q0: f64, p0: f64, steps: usize) -> String {
    match lyapunov_decay_impl(kappa, step_size, q0, p0, steps) {
        Ok(json) => json,
        Err(e) => error_json(&e),
    }
}

fn lyapunov_decay_impl(
    kappa: f64,
    step_size: f64,
    q0: f64,
    p0: f64,
    steps: usize,
) -> Result<String, String> {
    let obj = objective(kappa)?;
    let check = check_discrete_decay(&obj, kappa, step_size, &PhasePoint::scalar(q0, p0), steps)
        .map_err(|e| e.to_string())?;
    let factor = check
        .samples
        .first()
        .map(|s| s.certified_rate)
        .unwrap_or(1.0);
    let monitor: Vec<f64> = check.samples.iter().map(|s| s.value).collect();
    let v0 = monitor.first().copied().unwrap_or(0.0);
    let envelope = (0..monitor.len())
        .map(|k| v0 * factor.powi(k as i32))
        .collect();
    serde_json::to_string(&DecayJson {
        kappa,
        step_size,
        factor,
        continuous_rate: decay_rate(kappa),
        violations: check.violations,
        monitor,
        envelope,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn phase_portrait(
    kappa: f64,
    step_size: f64,
    q_min: f64,
    q_max: f64,
    q_step: f64,
    p0: f64,
    steps: usize,
) -> String {
    phase_portrait_json(kappa, step_size, q_min, q_max, q_step, p0, steps)
}

#[wasm_bindgen]
pub fn contour_flow(
    kappa: f64,
    step_size: f64,
    size: f64,
    use_level_set: bool,
    vertices: usize,
    steps: usize,
) -> String {
    contour_flow_json(kappa, step_size, size, use_level_set, vertices, steps)
}

#[wasm_bindgen]
pub fn lyapunov_decay(kappa: f64, step_size: f64, q0: f64, p0: f64, steps: usize) -> String {
    lyapunov_decay_json(kappa, step_size, q0, p0, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn portrait_payload_has_expected_shape() {
        let json = phase_portrait_json(5.0, 1.0, -2.0, 5.0, 0.2, 0.0, 100);
        let v: Value = serde_json::from_str(&json).unwrap();
        let trajectories = v["trajectories"].as_array().unwrap();
        assert_eq!(trajectories.len(), 36);
        // Unit step: starts below one converge in two steps.
        for t in trajectories {
            let q0 = t["q0"].as_f64().unwrap();
            if q0 < 1.0 && q0 != 0.0 {
                assert_eq!(t["status"], "converged", "q0={q0}");
                assert_eq!(t["steps_to_convergence"], 2, "q0={q0}");
            }
        }
    }

    #[test]
    fn portrait_reports_divergence_above_threshold_step() {
        let json = phase_portrait_json(5.0, 1.3, 4.4, 5.0, 0.2, 0.0, 500);
        let v: Value = serde_json::from_str(&json).unwrap();
        for t in v["trajectories"].as_array().unwrap() {
            assert_eq!(t["status"], "diverged");
        }
    }

    #[test]
    fn portrait_rejects_bad_grid() {
        let json = phase_portrait_json(5.0, 1.0, 2.0, -2.0, 0.2, 0.0, 10);
        let v: Value = serde_json::from_str(&json).unwrap();
        assert!(v["error"].is_string());
    }

    #[test]
    fn contour_areas_respect_the_ratio_window() {
        let json = contour_flow_json(5.0, 0.5, 1.0, false, 512, 6);
        let v: Value = serde_json::from_str(&json).unwrap();
        let lo = v["ratio_low"].as_f64().unwrap();
        let hi = v["ratio_high"].as_f64().unwrap();
        let steps = v["steps"].as_array().unwrap();
        assert_eq!(steps.len(), 7);
        for w in steps.windows(2) {
            let a0 = w[0]["area"].as_f64().unwrap();
            let a1 = w[1]["area"].as_f64().unwrap();
            let ratio = a1 / a0;
            assert!(
                ratio >= lo - 1e-6 && ratio <= hi + 1e-6,
                "ratio {ratio} outside [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn level_set_flow_also_works() {
        let json = contour_flow_json(5.0, 0.25, 1.0, true, 256, 3);
        let v: Value = serde_json::from_str(&json).unwrap();
        assert!(v["steps"].as_array().unwrap().len() >= 2);
        let first = &v["steps"][0];
        assert!(first["area"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn decay_monitor_never_violates_envelope() {
        let json = lyapunov_decay_json(5.0, 1.0, 3.0, 0.0, 120);
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["violations"], 0);
        let monitor = v["monitor"].as_array().unwrap();
        let envelope = v["envelope"].as_array().unwrap();
        assert_eq!(monitor.len(), envelope.len());
        for (m, e) in monitor.iter().zip(envelope) {
            let (m, e) = (m.as_f64().unwrap(), e.as_f64().unwrap());
            assert!(m <= e * (1.0 + 1e-9), "monitor {m} above envelope {e}");
        }
    }
}
