//! The four subcommands: constants, phase-portrait, contour, verify.

use std::fs;
use std::path::{Path, PathBuf};

use accelode::analysis::{
    check_discrete_decay, check_exponential_decay, check_inverse_square_decay, decay_rate,
    fit_linear_rate, Observable,
};
use accelode::geometry::{
    area_contraction_report, circle_contour, compare_level_set_contraction,
    default_refine_threshold, evolve_contour, level_set_contour, slowest_trajectory_bound,
    Contour, DEGENERATE_AREA_EPS,
};
use accelode::integrators::{
    inverse_step, semi_implicit_step, simulate, split_step, StepperConfig, TrajectoryStatus,
};
use accelode::schemes::equivalence_check;
use accelode::{DampingSchedule, Objective, PhasePoint};
use serde::Serialize;

use crate::config::{ExperimentConfig, ObjectiveSpec, ScheduleSpec};
use crate::svg::SvgPlot;
use crate::CliError;

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents)
            .map_err(|e| CliError::io(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// `constants`: tabulate `(kappa, 2d, beta, 2d + beta)`.
pub fn cmd_constants(kappas: &[f64], out: Option<&Path>) -> Result<(), CliError> {
    let mut csv = String::from("kappa,two_d,beta,sum\n");
    for &kappa in kappas {
        let sched = DampingSchedule::strongly_convex(kappa)?;
        let (d, beta) = sched.coefficients(0.0)?;
        csv.push_str(&format!("{kappa},{},{beta},{}\n", 2.0 * d, 2.0 * d + beta));
    }
    write_output(out, &csv)
}

/// `phase-portrait`: simulate the start grid at each step size, emitting a
/// trajectory CSV, a summary CSV, and an SVG per step size.
pub fn cmd_phase_portrait(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let obj = cfg.objective.build()?;
    if obj.dim() != 1 {
        return Err(CliError::usage("phase portraits need a 1-d objective"));
    }
    let sched = cfg.schedule.build(&obj)?;
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::io(format!("creating {}: {e}", cfg.output_dir.display())))?;

    let grid = cfg.initial_grid();
    for &ts in &cfg.step_sizes {
        let stepper = StepperConfig::new(ts)?;
        let mut traj_csv = String::from("trajectory_id,k,q,p,in_middle_band\n");
        let mut summary_csv = String::from("trajectory_id,q0,status,steps_to_convergence\n");
        let mut plot = SvgPlot::new(format!("phase portrait, step size {ts}"));
        for (id, &q0) in grid.iter().enumerate() {
            let rec = simulate(&obj, &sched, &PhasePoint::scalar(q0, cfg.p0), cfg.steps, &stepper);
            let mut line = Vec::with_capacity(rec.len());
            for (k, z) in rec.points.iter().enumerate() {
                let (q, p) = (z.q[0], z.p[0]);
                let (_, beta) = sched.coefficients(rec.times[k])?;
                let ahead = q + beta * p;
                let in_band = (1.0..2.0).contains(&ahead);
                traj_csv.push_str(&format!("{id},{k},{q},{p},{in_band}\n"));
                line.push((q, p));
                if in_band {
                    plot.add_cross(q, p);
                }
            }
            plot.add_polyline(line);
            let status = status_name(rec.status);
            let steps_col = rec
                .steps_to_convergence()
                .map(|s| s.to_string())
                .unwrap_or_default();
            summary_csv.push_str(&format!("{id},{q0},{status},{steps_col}\n"));
        }
        write_file(
            &cfg.output_dir.join(format!("phase_portrait_ts{ts}.csv")),
            &traj_csv,
        )?;
        write_file(
            &cfg.output_dir.join(format!("summary_ts{ts}.csv")),
            &summary_csv,
        )?;
        write_file(
            &cfg.output_dir.join(format!("phase_portrait_ts{ts}.svg")),
            &plot.render(),
        )?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

fn status_name(s: TrajectoryStatus) -> &'static str {
    match s {
        TrajectoryStatus::Converged => "Converged",
        TrajectoryStatus::MaxSteps => "MaxSteps",
        TrajectoryStatus::Diverged => "Diverged",
    }
}

/// Initial contour shape for `contour`.
pub enum ContourShape {
    Circle { center: [f64; 2], radius: f64 },
    LevelSet { energy: f64 },
    Csv { path: PathBuf },
}

pub struct ContourRun {
    pub objective: ObjectiveSpec,
    pub schedule: ScheduleSpec,
    pub shape: ContourShape,
    pub vertices: usize,
    pub step_size: f64,
    pub steps: usize,
    pub out: Option<PathBuf>,
    pub save_contours: Option<PathBuf>,
}

/// `contour`: evolve a contour step by step, reporting per-step area, both
/// contraction integrals, the max radius, and the schedule's radius column.
/// Exits nonzero if the area identity or the certified radius floor fails.
pub fn cmd_contour(run: &ContourRun) -> Result<(), CliError> {
    let obj = run.objective.build()?;
    if obj.dim() != 1 {
        return Err(CliError::usage("contour runs need a 1-d objective"));
    }
    let sched = run.schedule.build(&obj)?;
    let stepper = StepperConfig::new(run.step_size)?;
    let mut contour = match &run.shape {
        ContourShape::Circle { center, radius } => circle_contour(*center, *radius, run.vertices)?,
        ContourShape::LevelSet { energy } => level_set_contour(&obj, *energy, run.vertices)?,
        ContourShape::Csv { path } => {
            let file = fs::File::open(path)
                .map_err(|e| CliError::io(format!("opening {}: {e}", path.display())))?;
            Contour::from_csv(file)?
        }
    };
    if let Some(dir) = &run.save_contours {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    }

    let a0 = contour.signed_area();
    let r0 = contour.max_radius();
    let ts = run.step_size;
    let kappa = sched.kappa();
    let spec_rate = kappa
        .map(|k| {
            let (d, beta) = sched.coefficients(0.0)?;
            Ok::<f64, CliError>(1.0 - ts * (2.0 * d + beta / k))
        })
        .transpose()?;
    // The enforceable floor comes from smoothness alone: rate 1 - T_s.
    let sampling_slack = (std::f64::consts::PI / run.vertices as f64).powi(2) + 1e-9;

    let mut csv = String::from("k,area,line_integral,region_integral,max_radius,r_k_bound\n");
    let mut failures: Vec<String> = Vec::new();
    for k in 0..=run.steps {
        let t = k as f64 * ts;
        let area = contour.signed_area();
        let radius = contour.max_radius();
        let bound_col = spec_rate
            .map(|r| (r0 * r.powf(k as f64 / 2.0)).to_string())
            .unwrap_or_default();
        if let Some(dir) = &run.save_contours {
            let path = dir.join(format!("contour_{k}.csv"));
            let mut buf = Vec::new();
            contour
                .to_csv(&mut buf)
                .map_err(|e| CliError::io(e.to_string()))?;
            fs::write(&path, buf)
                .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
        }
        if kappa.is_some() && ts <= 1.0 {
            let floor = r0 * (1.0 - ts).powf(k as f64 / 2.0);
            if radius < floor * (1.0 - sampling_slack) {
                failures.push(format!("step {k}: max radius {radius} below floor {floor}"));
            }
        }
        if k == run.steps {
            csv.push_str(&format!("{k},{area},,,{radius},{bound_col}\n"));
            break;
        }
        let report = area_contraction_report(&obj, &sched, &contour, t, &stepper)?;
        csv.push_str(&format!(
            "{k},{area},{},{},{radius},{bound_col}\n",
            report.line_integral, report.region_integral
        ));
        let next = evolve_contour(&obj, &sched, &contour, t, &stepper, default_refine_threshold(&contour));
        let change = next.signed_area() - area;
        let tol = 1e-3 * a0.abs();
        if (change - report.line_integral).abs() > tol {
            failures.push(format!(
                "step {k}: area change {change} vs line integral {} beyond {tol}",
                report.line_integral
            ));
        }
        if (change - report.region_integral).abs() > tol {
            failures.push(format!(
                "step {k}: area change {change} vs region integral {} beyond {tol}",
                report.region_integral
            ));
        }
        if next.is_degenerate() {
            // Fully collapsed; nothing further to account for.
            contour = next;
            let final_area = contour.signed_area();
            let final_radius = contour.max_radius();
            csv.push_str(&format!("{},{final_area},,,{final_radius},\n", k + 1));
            break;
        }
        contour = next;
    }
    write_output(run.out.as_deref(), &csv)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::verification(failures.join("; ")))
    }
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub total: usize,
    pub all_pass: bool,
}

fn push(checks: &mut Vec<CheckResult>, name: impl Into<String>, pass: bool, detail: String) {
    let name = name.into();
    eprintln!("[{}] {name}: {detail}", if pass { "ok" } else { "FAIL" });
    checks.push(CheckResult { name, pass, detail });
}

/// Deterministic start grid for the verify suites.
fn starts(dim: usize, count: usize) -> Vec<PhasePoint> {
    (0..count)
        .map(|i| {
            let a = -2.0 + 4.0 * (i as f64 + 0.5) / count as f64;
            let b = 1.5 - 3.0 * ((i * 7 % count) as f64 + 0.5) / count as f64;
            PhasePoint::new(vec![a; dim], vec![b; dim]).unwrap()
        })
        .collect()
}

fn verify_equivalence(checks: &mut Vec<CheckResult>) {
    let quads = [
        (Objective::quadratic(&[1.0]).unwrap(), 1e-12),
        (Objective::quadratic(&[5.0, 1.0]).unwrap(), 1e-12),
        (Objective::quadratic(&[100.0, 1.0]).unwrap(), 1e-12),
        (Objective::piecewise(5.0).unwrap(), 1e-10),
    ];
    for (obj, tol) in &quads {
        let mut worst: f64 = 0.0;
        for z0 in starts(obj.dim(), 20) {
            worst = worst.max(equivalence_check(obj, obj.kappa(), &z0, 100));
        }
        push(
            checks,
            format!("equivalence kappa={} dim={}", obj.kappa(), obj.dim()),
            worst < *tol,
            format!("max deviation {worst:.3e} (tolerance {tol:.0e})"),
        );
    }
}

fn verify_continuous(checks: &mut Vec<CheckResult>) {
    let cases: [(Objective, f64); 4] = [
        (Objective::quadratic(&[4.0, 1.0]).unwrap(), 4.0),
        (Objective::quadratic(&[25.0, 1.0]).unwrap(), 25.0),
        (Objective::quadratic(&[100.0, 1.0]).unwrap(), 100.0),
        (Objective::piecewise(5.0).unwrap(), 5.0),
    ];
    for (obj, kappa) in &cases {
        let horizon = 20.0 * kappa.sqrt();
        let substeps = (horizon / 0.01).ceil() as usize;
        let mut all = true;
        let mut measured = f64::INFINITY;
        for z0 in starts(obj.dim(), 2) {
            let check = check_exponential_decay(obj, *kappa, &z0, horizon, substeps).unwrap();
            all &= check.pass;
            measured = measured.min(check.measured_rate);
        }
        push(
            checks,
            format!("exponential envelope kappa={kappa} dim={}", obj.dim()),
            all,
            format!("measured rate {measured:.4} vs certified {:.4}", decay_rate(*kappa)),
        );
    }
    let nsc = [
        Objective::quadratic(&[1.0]).unwrap(),
        Objective::quadratic(&[25.0, 1.0]).unwrap(),
        Objective::piecewise(5.0).unwrap(),
    ];
    for obj in &nsc {
        let mut all = true;
        let mut slope = 0.0_f64;
        for z0 in starts(obj.dim(), 2) {
            let check = check_inverse_square_decay(obj, &z0, 100.0, 10_000).unwrap();
            all &= check.pass;
            if let Some(s) = check.loglog_slope {
                slope = slope.min(s);
            }
        }
        push(
            checks,
            format!("inverse-square envelope dim={} L={}", obj.dim(), obj.lipschitz()),
            all,
            format!("steepest log-log slope {slope:.2}"),
        );
    }
    // Informational cross-check, never enforced: discrete per-step rate vs
    // the continuous exponential.
    let obj = Objective::quadratic(&[25.0, 1.0]).unwrap();
    let sched = DampingSchedule::strongly_convex(25.0).unwrap();
    let z0 = PhasePoint::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
    let cfg = StepperConfig::new(1.0).unwrap();
    let rec = simulate(&obj, &sched, &z0, 120, &cfg);
    if let Ok(discrete) = fit_linear_rate(&rec, Observable::DistanceToOrigin) {
        let cont = check_exponential_decay(&obj, 25.0, &z0, 60.0, 6_000)
            .unwrap()
            .measured_rate;
        eprintln!(
            "[info] discrete per-step rate {discrete:.4} vs continuous e^(-a/2) = {:.4} (informational)",
            (-0.5 * cont).exp()
        );
    }
}

fn verify_discrete(checks: &mut Vec<CheckResult>) {
    for kappa in [3.0, 5.0, 100.0] {
        let objectives = [
            Objective::quadratic(&[kappa, 1.0]).unwrap(),
            Objective::piecewise(kappa).unwrap(),
        ];
        for ts in [0.5, 1.0] {
            let mut violations = 0;
            for obj in &objectives {
                for z0 in starts(obj.dim(), 5) {
                    violations += check_discrete_decay(obj, kappa, ts, &z0, 200)
                        .unwrap()
                        .violations;
                }
            }
            push(
                checks,
                format!("discrete monitor kappa={kappa} ts={ts}"),
                violations == 0,
                format!("{violations} contraction violations"),
            );
        }
    }
    let piecewise = Objective::piecewise(5.0).unwrap();
    let quad = Objective::quadratic(&[5.0, 1.0]).unwrap();
    let sched = DampingSchedule::strongly_convex(5.0).unwrap();
    for ts in [0.25, 0.5, 0.9] {
        let cfg = StepperConfig::new(ts).unwrap().with_fixed_point(1e-12, 1000);
        let mut worst: f64 = 0.0;
        for (i, z) in starts(1, 100).iter().enumerate() {
            let obj: &Objective = if i % 2 == 0 { &piecewise } else { &quad };
            let z = if obj.dim() == 2 {
                PhasePoint::new(vec![z.q[0]; 2], vec![z.p[0]; 2]).unwrap()
            } else {
                z.clone()
            };
            let fwd = semi_implicit_step(obj, &sched, &z, 0.0, &cfg);
            let back = inverse_step(obj, &sched, &fwd, 0.0, &cfg).unwrap();
            let err: f64 = back
                .point
                .q
                .iter()
                .zip(&z.q)
                .chain(back.point.p.iter().zip(&z.p))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(err);
        }
        push(
            checks,
            format!("round trip ts={ts}"),
            worst < 1e-10,
            format!("max round-trip error {worst:.3e}"),
        );
    }
    let cfg = StepperConfig::new(0.7).unwrap();
    let mut exact = true;
    for z in starts(1, 50) {
        let (_, composed) = split_step(&piecewise, &sched, &z, 0.0, &cfg);
        exact &= composed == semi_implicit_step(&piecewise, &sched, &z, 0.0, &cfg);
    }
    push(
        checks,
        "split composition identity",
        exact,
        "damping + symplectic sub-steps reproduce the step exactly".into(),
    );
}

fn verify_geometry(checks: &mut Vec<CheckResult>) {
    let piecewise = Objective::piecewise(5.0).unwrap();
    let quad = Objective::quadratic(&[3.0]).unwrap();
    let sched = DampingSchedule::strongly_convex(5.0).unwrap();
    let circle = circle_contour([0.0, 0.0], 1.0, 2000).unwrap();
    let a0 = circle.signed_area();
    for ts in [0.5, 1.0] {
        let cfg = StepperConfig::new(ts).unwrap();
        let rep = area_contraction_report(&piecewise, &sched, &circle, 0.0, &cfg).unwrap();
        let image = evolve_contour(&piecewise, &sched, &circle, 0.0, &cfg, default_refine_threshold(&circle));
        let change = image.signed_area() - a0;
        let line_err = (change - rep.line_integral).abs();
        let region_err = (change - rep.region_integral).abs();
        push(
            checks,
            format!("area identity (piecewise) ts={ts}"),
            line_err < 1e-3 * a0 && region_err < 1e-3 * a0,
            format!("line gap {line_err:.2e}, region gap {region_err:.2e} vs {:.2e}", 1e-3 * a0),
        );
    }
    {
        let cfg = StepperConfig::new(0.5).unwrap();
        let rep = area_contraction_report(&quad, &sched, &circle, 0.0, &cfg).unwrap();
        let expect = -0.5 * a0;
        let worst = (rep.area_change - expect)
            .abs()
            .max((rep.line_integral - expect).abs())
            .max((rep.region_integral - expect).abs());
        push(
            checks,
            "area identity (quadratic, closed form)",
            worst < 1e-6 * expect.abs(),
            format!("worst route gap {worst:.2e} against -T_s A0"),
        );
    }
    for kappa in [1.0, 5.0] {
        let s = DampingSchedule::strongly_convex(kappa).unwrap();
        let (d, beta) = s.coefficients(0.0).unwrap();
        let ts = 0.5;
        let cfg = StepperConfig::new(ts).unwrap();
        let (lo, hi) = (1.0 - ts, 1.0 - ts * (2.0 * d + beta / kappa));
        let mut c = circle_contour([0.0, 0.0], 1.0, 512).unwrap();
        let mut ok = true;
        for k in 0..10 {
            let prev = c.signed_area();
            c = evolve_contour(&quad, &s, &c, k as f64 * ts, &cfg, f64::INFINITY);
            let ratio = c.signed_area() / prev;
            ok &= ratio >= lo - 1e-9 && ratio <= hi + 1e-9;
        }
        push(
            checks,
            format!("area ratio sandwich kappa={kappa}"),
            ok,
            format!("per-step ratio within [{lo:.4}, {hi:.4}]"),
        );
    }
    {
        let sched1 = DampingSchedule::strongly_convex(1.0).unwrap();
        let mut ok = true;
        for ts in [0.5, 0.9] {
            ok &= slowest_trajectory_bound(&quad, &sched1, 1.0, ts, 20, 512).unwrap();
        }
        push(
            checks,
            "slow-trajectory radius floor (kappa=1)",
            ok,
            "max radius stays above R (1 - T_s)^(k/2)".into(),
        );
    }
    for energy in [0.5, 1.0] {
        for ts in [0.25, 0.9] {
            let (cont, disc) =
                compare_level_set_contraction(&piecewise, &sched, energy, ts, 1024).unwrap();
            let ls_area = level_set_contour(&piecewise, energy, 1024).unwrap().signed_area();
            push(
                checks,
                format!("level-set contraction E={energy} ts={ts}"),
                cont >= disc - 1e-4 * ls_area,
                format!("continuous {cont:.5} >= discrete {disc:.5}"),
            );
        }
    }
    {
        let cfg = StepperConfig::new(1.0).unwrap();
        let mut c = circle_contour([0.0, 0.0], 1.0, 512).unwrap();
        let mut ok = true;
        for _ in 0..8 {
            c = evolve_contour(&piecewise, &sched, &c, 0.0, &cfg, default_refine_threshold(&c));
            let a = c.signed_area();
            ok &= a > 0.0 || a.abs() < DEGENERATE_AREA_EPS;
            if c.is_degenerate() {
                break;
            }
        }
        push(
            checks,
            "orientation preserved at unit step",
            ok,
            "signed area never flips sign".into(),
        );
    }
    {
        let cfg = StepperConfig::new(1e-6).unwrap();
        let image = evolve_contour(&piecewise, &sched, &circle, 0.0, &cfg, default_refine_threshold(&circle));
        let rel = (image.signed_area() - a0).abs() / a0;
        push(
            checks,
            "near-identity map preserves area",
            rel < 1e-5,
            format!("relative change {rel:.2e} at step 1e-6"),
        );
    }
}

/// `verify`: run a named suite, print one line per check, emit the JSON
/// report, and fail (exit 1) unless everything passed.
pub fn cmd_verify(suite: &str, json_out: Option<&Path>) -> Result<(), CliError> {
    let mut checks = Vec::new();
    match suite {
        "equivalence" => verify_equivalence(&mut checks),
        "continuous" => verify_continuous(&mut checks),
        "discrete" => verify_discrete(&mut checks),
        "geometry" => verify_geometry(&mut checks),
        "all" => {
            verify_equivalence(&mut checks);
            verify_continuous(&mut checks);
            verify_discrete(&mut checks);
            verify_geometry(&mut checks);
        }
        other => return Err(CliError::usage(format!("unknown suite '{other}'"))),
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let total = checks.len();
    let report = VerifyReport {
        suite: suite.to_string(),
        all_pass: passed == total,
        passed,
        total,
        checks,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match json_out {
        Some(p) => {
            fs::write(p, &json).map_err(|e| CliError::io(format!("writing {}: {e}", p.display())))?
        }
        None => println!("{json}"),
    }
    eprintln!("suite {suite}: {passed}/{total} checks passed");
    if report.all_pass {
        Ok(())
    } else {
        Err(CliError::verification(format!(
            "{} of {total} checks failed",
            total - passed
        )))
    }
}
