//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with its runtime. Run with `--nocapture` to see every line:
//!
//! ```text
//! cargo test -p accelode --test acceptance -- --nocapture
//! ```

use std::time::Instant;

use accelode::analysis::{
    check_discrete_decay, check_exponential_decay, check_inverse_square_decay,
    lyapunov_strongly_convex,
};
use accelode::geometry::{
    area_contraction_report, circle_contour, compare_level_set_contraction,
    default_refine_threshold, evolve_contour, level_set_contour, slowest_trajectory_bound,
    Contour, DEGENERATE_AREA_EPS,
};
use accelode::integrators::{
    inverse_step, reference_integrate, semi_implicit_step, simulate, StepperConfig,
};
use accelode::schemes::equivalence_check;
use accelode::{DampingSchedule, Objective, PhasePoint, TrajectoryStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: usize, what: &str, start: Instant, budget_s: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("[acceptance] criterion {criterion} PASS: {what} ({elapsed:.2}s)");
    assert!(
        elapsed < budget_s,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2}s > {budget_s}s"
    );
}

fn random_point(rng: &mut impl Rng, dim: usize, span: f64) -> PhasePoint {
    PhasePoint::new(
        (0..dim).map(|_| rng.random_range(-span..span)).collect(),
        (0..dim).map(|_| rng.random_range(-span..span)).collect(),
    )
    .unwrap()
}

#[test]
fn acceptance_01_nesterov_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let quadratics = [
        Objective::quadratic(&[1.0]).unwrap(),
        Objective::quadratic(&[5.0, 1.0]).unwrap(),
        Objective::quadratic(&[100.0, 1.0]).unwrap(),
    ];
    for obj in &quadratics {
        for _ in 0..50 {
            let z0 = random_point(&mut rng, obj.dim(), 3.0);
            let dev = equivalence_check(obj, obj.kappa(), &z0, 100);
            assert!(
                dev < 1e-12,
                "quadratic deviation {dev} at kappa={}",
                obj.kappa()
            );
        }
    }
    let piecewise = Objective::piecewise(5.0).unwrap();
    for _ in 0..50 {
        let z0 = random_point(&mut rng, 1, 3.0);
        let dev = equivalence_check(&piecewise, 5.0, &z0, 100);
        assert!(dev < 1e-10, "piecewise deviation {dev}");
    }
    report(1, "unit-step scheme matches the accelerated iteration", start, 1.0);
}

#[test]
fn acceptance_02_coefficient_identity() {
    let start = Instant::now();
    for i in 0..=12 {
        let kappa = 10f64.powf(i as f64 / 2.0);
        let sched = DampingSchedule::strongly_convex(kappa).unwrap();
        let (d, beta) = sched.coefficients(0.0).unwrap();
        assert!(
            (2.0 * d + beta - 1.0).abs() <= 5e-16,
            "identity off at kappa={kappa}: {}",
            2.0 * d + beta - 1.0
        );
    }
    let sched = DampingSchedule::non_strongly_convex();
    for j in 0..=400 {
        let t = j as f64 * 0.25;
        let (d, beta) = sched.coefficients(t).unwrap();
        assert!(
            (2.0 * d + beta - 1.0).abs() <= 5e-16,
            "identity off at t={t}: {}",
            2.0 * d + beta - 1.0
        );
    }
    report(2, "2d + beta = 1 across both schedules", start, 30.0);
}

#[test]
fn acceptance_03_continuous_exponential_rate() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let cases: Vec<(Objective, f64)> = vec![
        (Objective::quadratic(&[4.0, 1.0]).unwrap(), 4.0),
        (Objective::quadratic(&[25.0, 1.0]).unwrap(), 25.0),
        (Objective::quadratic(&[100.0, 1.0]).unwrap(), 100.0),
        (Objective::piecewise(5.0).unwrap(), 5.0),
    ];
    for (obj, kappa) in &cases {
        let horizon = 20.0 * kappa.sqrt();
        let substeps = (horizon / 0.005).ceil() as usize;
        for _ in 0..3 {
            let z0 = random_point(&mut rng, obj.dim(), 2.0);
            let check = check_exponential_decay(obj, *kappa, &z0, horizon, substeps).unwrap();
            assert!(
                check.pass,
                "monitor envelope violated for kappa={kappa}, z0={z0:?}"
            );
        }
    }
    report(3, "monitor stays under its exponential envelope", start, 30.0);
}

#[test]
fn acceptance_04_inverse_square_rate() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let objectives = [
        Objective::quadratic(&[1.0]).unwrap(),
        Objective::quadratic(&[25.0, 1.0]).unwrap(),
        Objective::piecewise(5.0).unwrap(),
    ];
    for obj in &objectives {
        for _ in 0..3 {
            let z0 = random_point(&mut rng, obj.dim(), 2.0);
            let check = check_inverse_square_decay(obj, &z0, 100.0, 20_000).unwrap();
            assert!(check.lyapunov_bound_pass, "monitor envelope failed for {obj:?}");
            assert!(check.value_bound_pass, "value envelope failed for {obj:?}");
            if let Some(slope) = check.loglog_slope {
                assert!(
                    slope <= -1.9,
                    "log-log slope {slope} shallower than -1.9 for {obj:?}"
                );
            }
        }
    }
    report(4, "inverse-square envelopes and log-log slope", start, 30.0);
}

#[test]
fn acceptance_05_piecewise_step_size_study() {
    let start = Instant::now();
    let obj = Objective::piecewise(5.0).unwrap();
    let sched = DampingSchedule::strongly_convex(5.0).unwrap();

    // (a) unit step: the whole q0 < 1 grid converges in exactly two steps
    // (the origin itself is already converged).
    let cfg = StepperConfig::new(1.0).unwrap();
    for i in 0..=35 {
        let q0 = -2.0 + 0.2 * i as f64;
        if q0 >= 1.0 {
            continue;
        }
        let rec = simulate(&obj, &sched, &PhasePoint::scalar(q0, 0.0), 500, &cfg);
        assert_eq!(
            rec.status,
            TrajectoryStatus::Converged,
            "q0={q0} did not converge"
        );
        let expected = if q0 == 0.0 { 0 } else { 2 };
        assert_eq!(
            rec.steps_to_convergence(),
            Some(expected),
            "q0={q0} took the wrong number of steps"
        );
    }

    // (b) step 1.3: the q0 >= 4.4 tail of the grid diverges within 500 steps.
    let cfg_big = StepperConfig::new(1.3).unwrap();
    for i in 0..=35 {
        let q0 = -2.0 + 0.2 * i as f64;
        if q0 < 4.4 {
            continue;
        }
        let rec = simulate(&obj, &sched, &PhasePoint::scalar(q0, 0.0), 500, &cfg_big);
        assert_eq!(rec.status, TrajectoryStatus::Diverged, "q0={q0} did not diverge");
    }

    // (c) step sizes up to one preserve contour orientation.
    let quad = Objective::quadratic(&[2.0]).unwrap();
    let contours: Vec<(Objective, Contour)> = vec![
        (obj.clone(), circle_contour([0.0, 0.0], 1.0, 512).unwrap()),
        (obj.clone(), level_set_contour(&obj, 1.0, 512).unwrap()),
        (quad.clone(), level_set_contour(&quad, 1.0, 512).unwrap()),
    ];
    for ts in [0.25, 0.5, 1.0] {
        let cfg = StepperConfig::new(ts).unwrap();
        for (o, c0) in &contours {
            let mut c = c0.clone();
            for _ in 0..8 {
                c = evolve_contour(o, &sched, &c, 0.0, &cfg, default_refine_threshold(&c));
                let a = c.signed_area();
                assert!(
                    a > 0.0 || a.abs() < DEGENERATE_AREA_EPS,
                    "orientation flipped at ts={ts}: area {a}"
                );
                if c.is_degenerate() {
                    break;
                }
            }
        }
    }
    report(5, "two-step convergence, divergence tail, orientation", start, 10.0);
}

#[test]
fn acceptance_06_area_change_identity() {
    let start = Instant::now();
    let circle = circle_contour([0.0, 0.0], 1.0, 10_000).unwrap();
    let a0 = circle.signed_area();

    let piecewise = Objective::piecewise(5.0).unwrap();
    let sched = DampingSchedule::strongly_convex(5.0).unwrap();
    for ts in [0.25, 0.5, 1.0] {
        let cfg = StepperConfig::new(ts).unwrap();
        let rep = area_contraction_report(&piecewise, &sched, &circle, 0.0, &cfg).unwrap();
        assert!(
            (rep.area_change - rep.line_integral).abs() < 1e-3 * a0,
            "line route off at ts={ts}: {} vs {}",
            rep.area_change,
            rep.line_integral
        );
        assert!(
            (rep.area_change - rep.region_integral).abs() < 1e-3 * a0,
            "region route off at ts={ts}: {} vs {}",
            rep.area_change,
            rep.region_integral
        );
    }

    // Unit-ratio curvature: every route equals -T_s A0 to 1e-6 relative.
    let quad = Objective::quadratic(&[3.0]).unwrap();
    for ts in [0.25, 0.5, 1.0] {
        let cfg = StepperConfig::new(ts).unwrap();
        let rep = area_contraction_report(&quad, &sched, &circle, 0.0, &cfg).unwrap();
        let expect = -ts * a0;
        for (label, v) in [
            ("area", rep.area_change),
            ("line", rep.line_integral),
            ("region", rep.region_integral),
        ] {
            assert!(
                (v - expect).abs() < 1e-6 * expect.abs(),
                "{label} route {v} vs {expect} at ts={ts}"
            );
        }
    }
    report(6, "area change equals both integral routes", start, 30.0);
}

#[test]
fn acceptance_07_sandwich_and_radius_floor() {
    let start = Instant::now();
    let quad = Objective::quadratic(&[2.0]).unwrap();
    // Per-step area ratio within the damping sandwich on quadratics.
    for kappa in [1.0, 5.0] {
        let sched = DampingSchedule::strongly_convex(kappa).unwrap();
        let (d, beta) = sched.coefficients(0.0).unwrap();
        for ts in [0.5, 0.9] {
            let cfg = StepperConfig::new(ts).unwrap();
            let lo = 1.0 - ts;
            let hi = 1.0 - ts * (2.0 * d + beta / kappa);
            let mut c = circle_contour([0.0, 0.0], 1.0, 512).unwrap();
            for k in 0..20 {
                let prev = c.signed_area();
                c = evolve_contour(&quad, &sched, &c, k as f64 * ts, &cfg, f64::INFINITY);
                let ratio = c.signed_area() / prev;
                assert!(
                    ratio >= lo - 1e-9 && ratio <= hi + 1e-9,
                    "ratio {ratio} outside [{lo}, {hi}] at ts={ts}, kappa={kappa}, k={k}"
                );
            }
        }
    }
    // Radius floor at the smoothness-certified instance of the bound.
    let sched1 = DampingSchedule::strongly_convex(1.0).unwrap();
    for ts in [0.5, 0.9] {
        let pass = slowest_trajectory_bound(&quad, &sched1, 1.0, ts, 20, 512).unwrap();
        assert!(pass, "radius floor violated at ts={ts}");
    }
    report(7, "area-ratio sandwich and slow-trajectory radius floor", start, 30.0);
}

#[test]
fn acceptance_08_level_set_contraction_order() {
    let start = Instant::now();
    let cases: Vec<(Objective, DampingSchedule)> = vec![
        (
            Objective::piecewise(5.0).unwrap(),
            DampingSchedule::strongly_convex(5.0).unwrap(),
        ),
        (
            Objective::quadratic(&[2.0]).unwrap(),
            DampingSchedule::strongly_convex(1.0).unwrap(),
        ),
    ];
    for (obj, sched) in &cases {
        for energy in [0.5, 1.0, 2.0] {
            let a0 = level_set_contour(obj, energy, 1024).unwrap().signed_area();
            for ts in [0.25, 0.5, 0.9] {
                let (cont, disc) =
                    compare_level_set_contraction(obj, sched, energy, ts, 1024).unwrap();
                let margin = cont - disc;
                println!(
                    "[acceptance]   level set E={energy} ts={ts} {obj:?}: continuous {cont:.6} >= discrete {disc:.6} (margin {margin:.3e})"
                );
                assert!(
                    cont >= disc - 1e-4 * a0,
                    "discrete contracted less at E={energy}, ts={ts}"
                );
            }
        }
    }
    report(8, "discrete step contracts level sets at least as much", start, 60.0);
}

#[test]
fn acceptance_09_round_trip_homeomorphism() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let piecewise = Objective::piecewise(5.0).unwrap();
    let quad = Objective::quadratic(&[5.0, 1.0]).unwrap();
    let sched = DampingSchedule::strongly_convex(5.0).unwrap();
    for ts in [0.25, 0.5, 0.9] {
        let cfg = StepperConfig::new(ts).unwrap().with_fixed_point(1e-12, 1000);
        let budget = (1e-12f64.ln() / ts.ln()).ceil() as usize + 15;
        for i in 0..1000 {
            let (obj, dim): (&Objective, usize) =
                if i % 2 == 0 { (&piecewise, 1) } else { (&quad, 2) };
            let z = random_point(&mut rng, dim, 2.0);

            // forward then inverse
            let fwd = semi_implicit_step(obj, &sched, &z, 0.0, &cfg);
            let back = inverse_step(obj, &sched, &fwd, 0.0, &cfg).unwrap();
            let err_fi = diff_norm(&back.point, &z);
            assert!(err_fi < 1e-10, "inverse(forward) error {err_fi} at ts={ts}");
            assert!(
                back.iterations <= budget,
                "iteration count {} above contraction budget {budget} at ts={ts}",
                back.iterations
            );

            // inverse then forward
            let pre = inverse_step(obj, &sched, &z, 0.0, &cfg).unwrap();
            let again = semi_implicit_step(obj, &sched, &pre.point, 0.0, &cfg);
            let err_if = diff_norm(&again, &z);
            assert!(err_if < 1e-10, "forward(inverse) error {err_if} at ts={ts}");
        }
    }
    report(9, "forward/inverse round trips and iteration budget", start, 5.0);
}

fn diff_norm(a: &PhasePoint, b: &PhasePoint) -> f64 {
    let dq: f64 = a.q.iter().zip(&b.q).map(|(x, y)| (x - y) * (x - y)).sum();
    let dp: f64 = a.p.iter().zip(&b.p).map(|(x, y)| (x - y) * (x - y)).sum();
    dq.sqrt() + dp.sqrt()
}

#[test]
fn acceptance_10_discrete_monitor_decay() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    for kappa in [3.0, 5.0, 100.0] {
        let objectives = [
            Objective::quadratic(&[kappa, 1.0]).unwrap(),
            Objective::piecewise(kappa).unwrap(),
        ];
        for obj in &objectives {
            for ts in [0.5, 1.0] {
                for _ in 0..20 {
                    let z0 = random_point(&mut rng, obj.dim(), 3.0);
                    let check = check_discrete_decay(obj, kappa, ts, &z0, 200).unwrap();
                    assert_eq!(
                        check.violations, 0,
                        "monitor contraction violated for kappa={kappa}, ts={ts}, z0={z0:?}"
                    );
                }
            }
        }
    }
    report(10, "discrete monitor contracts by 1 - d*T_s every step", start, 10.0);
}

#[test]
fn acceptance_11_integrator_hygiene() {
    let start = Instant::now();

    // Reference integrator: fourth-order self-convergence.
    let obj = Objective::quadratic(&[5.0, 1.0]).unwrap();
    let sched = DampingSchedule::strongly_convex(5.0).unwrap();
    let z0 = PhasePoint::new(vec![1.0, -0.5], vec![0.0, 0.5]).unwrap();
    let endpoint = |n: usize| {
        reference_integrate(&obj, &sched, &z0, 0.0, 5.0, n)
            .unwrap()
            .last()
            .clone()
    };
    let e1 = diff_norm(&endpoint(50), &endpoint(100));
    let e2 = diff_norm(&endpoint(100), &endpoint(200));
    let order = (e1 / e2).log2();
    assert!(
        (order - 4.0).abs() <= 0.2,
        "reference order {order} outside 4 +/- 0.2"
    );

    // Discrete scheme: first-order convergence to the reference flow.
    let reference = reference_integrate(&obj, &sched, &z0, 0.0, 1.0, 100_000)
        .unwrap()
        .last()
        .clone();
    let discrete_error = |ts: f64| {
        let cfg = StepperConfig::new(ts).unwrap();
        let rec = simulate(&obj, &sched, &z0, (1.0 / ts).round() as usize, &cfg);
        diff_norm(rec.last(), &reference)
    };
    let d1 = discrete_error(0.1);
    let d2 = discrete_error(0.01);
    let d3 = discrete_error(0.001);
    for (num, den) in [(d1, d2), (d2, d3)] {
        let order = (num / den).log10();
        assert!(
            (order - 1.0).abs() < 0.25,
            "discrete order {order} not first order ({num:.2e}/{den:.2e})"
        );
    }

    // Zero damping conserves total energy along the reference flow.
    let cons = Objective::quadratic(&[3.0, 1.0]).unwrap();
    let rec = reference_integrate(
        &cons,
        &DampingSchedule::undamped(),
        &PhasePoint::new(vec![1.0, 0.3], vec![0.0, -0.2]).unwrap(),
        0.0,
        10.0,
        10_000,
    )
    .unwrap();
    let e0 = rec.energies[0].total;
    for e in &rec.energies {
        assert!(
            (e.total - e0).abs() / e0 < 1e-6,
            "energy drift {} at zero damping",
            (e.total - e0).abs() / e0
        );
    }

    // The monitor still certifies the piecewise objective's rate here, which
    // exercises RK4 across the gradient kinks.
    let pw = Objective::piecewise(5.0).unwrap();
    let z = PhasePoint::scalar(1.5, 0.0);
    let check = check_exponential_decay(&pw, 5.0, &z, 40.0, 20_000).unwrap();
    assert!(check.pass);
    assert!(lyapunov_strongly_convex(&pw, 5.0, &z) > 0.0);

    report(11, "integrator order, consistency, conservation", start, 60.0);
}
