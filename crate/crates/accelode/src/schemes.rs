//! The textbook accelerated-gradient iteration and the exact change of
//! variables connecting it to the discretized flow at unit step size.

use crate::dynamics::{DampingSchedule, PhasePoint};
use crate::error::{AccelError, Result};
use crate::integrators::{semi_implicit_step, StepperConfig};
use crate::objectives::Objective;
use crate::vecmath;

/// Iterate pair of the accelerated gradient method: the point `x` and the
/// extrapolated point `y` the gradient is evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct NesterovState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// One accelerated-gradient update with constant step `1/L`:
/// `x' = y - grad f(y)/L`, then `y' = x' + beta (x' - x)`.
pub fn nesterov_step(obj: &Objective, beta: f64, s: &NesterovState) -> NesterovState {
    let g = obj.gradient(&s.y);
    let x_next = vecmath::add_scaled(&s.y, -1.0 / obj.lipschitz(), &g);
    let y_next = (0..x_next.len())
        .map(|i| x_next[i] + beta * (x_next[i] - s.x[i]))
        .collect();
    NesterovState {
        x: x_next,
        y: y_next,
    }
}

/// Change of variables from phase space: `x = q`, `y = q + beta p`.
pub fn to_nesterov(z: &PhasePoint, beta: f64) -> NesterovState {
    NesterovState {
        x: z.q.clone(),
        y: vecmath::add_scaled(&z.q, beta, &z.p),
    }
}

/// Inverse change of variables: `q = x`, `p = (y - x)/beta`. Requires a
/// nonzero `beta`.
pub fn from_nesterov(s: &NesterovState, beta: f64) -> Result<PhasePoint> {
    if beta == 0.0 {
        return Err(AccelError::invalid(
            "the change of variables is singular at beta = 0",
        ));
    }
    let p = s
        .y
        .iter()
        .zip(&s.x)
        .map(|(yi, xi)| (yi - xi) / beta)
        .collect();
    PhasePoint::new(s.x.clone(), p)
}

/// Runs the discretized flow at unit step size alongside the accelerated
/// gradient recursion started from the transformed state, and returns the
/// largest deviation `|x_k - q_k|` over the run, normalized by
/// `1 + max_k |q_k|`.
///
/// The two recursions are algebraically identical, so the result is pure
/// floating-point roundoff: below 1e-12 for quadratics and 1e-10 for the
/// piecewise builtin.
pub fn equivalence_check(obj: &Objective, kappa: f64, z0: &PhasePoint, steps: usize) -> f64 {
    let sched = DampingSchedule::strongly_convex(kappa).expect("kappa >= 1");
    let (_, beta) = sched.coefficients_at(0.0);
    let cfg = StepperConfig::new(1.0).expect("unit step");
    let mut z = z0.clone();
    let mut s = to_nesterov(z0, beta);
    let mut max_dev: f64 = 0.0;
    let mut max_mag: f64 = vecmath::norm(&z.q);
    for k in 0..=steps {
        let dev = vecmath::norm(&vecmath::sub(&s.x, &z.q));
        max_dev = max_dev.max(dev);
        max_mag = max_mag.max(vecmath::norm(&z.q));
        if k < steps {
            z = semi_implicit_step(obj, &sched, &z, k as f64, &cfg);
            s = nesterov_step(obj, beta, &s);
        }
    }
    max_dev / (1.0 + max_mag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_is_fixed() {
        let obj = Objective::quadratic(&[2.0]).unwrap();
        let s = NesterovState {
            x: vec![0.0],
            y: vec![0.0],
        };
        let next = nesterov_step(&obj, 0.5, &s);
        assert_eq!(next.x, vec![0.0]);
        assert_eq!(next.y, vec![0.0]);
    }

    #[test]
    fn zero_beta_is_gradient_descent() {
        let obj = Objective::quadratic(&[1.0]).unwrap();
        let s = NesterovState {
            x: vec![1.0],
            y: vec![1.0],
        };
        let next = nesterov_step(&obj, 0.0, &s);
        assert_eq!(next.x, vec![0.0]);
        assert_eq!(next.y, vec![0.0]);
    }

    #[test]
    fn accelerated_rate_on_conditioned_quadratic() {
        // 50 steps on the kappa = 5 quadratic reduce f by roughly the
        // accelerated factor per step.
        let obj = Objective::quadratic(&[5.0, 1.0]).unwrap();
        let sched = DampingSchedule::strongly_convex(5.0).unwrap();
        let (_, beta) = sched.coefficients(0.0).unwrap();
        let mut s = NesterovState {
            x: vec![1.0, 1.0],
            y: vec![1.0, 1.0],
        };
        let f0 = obj.value(&s.x);
        for _ in 0..50 {
            s = nesterov_step(&obj, beta, &s);
        }
        let rate = 1.0 - 1.0 / 5f64.sqrt();
        let bound = f0 * rate.powi(50) * 10.0;
        assert!(
            obj.value(&s.x) < bound,
            "f after 50 steps {} above rate bound {bound}",
            obj.value(&s.x)
        );
    }

    #[test]
    fn change_of_variables_round_trip() {
        let z = PhasePoint::scalar(1.0, 2.0);
        let s = to_nesterov(&z, 0.5);
        assert_eq!(s.x, vec![1.0]);
        assert_eq!(s.y, vec![2.0]);
        let back = from_nesterov(&s, 0.5).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn zero_beta_collapses_and_rejects_inverse() {
        let z = PhasePoint::scalar(1.5, -2.0);
        let s = to_nesterov(&z, 0.0);
        assert_eq!(s.x, s.y);
        assert!(from_nesterov(&s, 0.0).is_err());
    }

    #[test]
    fn equivalence_on_quadratic() {
        let obj = Objective::quadratic(&[5.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let z0 = PhasePoint::new(
                (0..2).map(|_| rng.random_range(-3.0..3.0)).collect(),
                (0..2).map(|_| rng.random_range(-3.0..3.0)).collect(),
            )
            .unwrap();
            let dev = equivalence_check(&obj, 5.0, &z0, 100);
            assert!(dev < 1e-12, "deviation {dev}");
        }
    }

    #[test]
    fn equivalence_trivial_at_origin() {
        let obj = Objective::quadratic(&[5.0, 1.0]).unwrap();
        let dev = equivalence_check(&obj, 5.0, &PhasePoint::zeros(2), 20);
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn equivalence_on_piecewise() {
        let obj = Objective::piecewise(5.0).unwrap();
        let dev = equivalence_check(&obj, 5.0, &PhasePoint::scalar(3.0, 0.0), 50);
        assert!(dev < 1e-10, "deviation {dev}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn change_of_variables_inverts(
                q in -10.0f64..10.0,
                p in -10.0f64..10.0,
                beta in 0.01f64..1.0,
            ) {
                let z = PhasePoint::scalar(q, p);
                let back = from_nesterov(&to_nesterov(&z, beta), beta).unwrap();
                prop_assert!((back.q[0] - q).abs() <= 1e-12 * (1.0 + q.abs()));
                prop_assert!((back.p[0] - p).abs() <= 1e-9 * (1.0 + p.abs()));
            }
        }
    }

    #[test]
    fn both_schemes_degenerate_to_gradient_descent() {
        // kappa = 1 gives beta = 0; both recursions must match the plain
        // gradient-descent reference x <- x - grad f(x)/L.
        let obj = Objective::quadratic(&[2.0, 2.0]).unwrap();
        let sched = DampingSchedule::strongly_convex(1.0).unwrap();
        let cfg = StepperConfig::new(1.0).unwrap();
        let mut z = PhasePoint::new(vec![1.0, -2.0], vec![0.0, 0.0]).unwrap();
        let mut s = to_nesterov(&z, 0.0);
        let mut x = z.q.clone();
        for k in 0..20 {
            z = semi_implicit_step(&obj, &sched, &z, k as f64, &cfg);
            s = nesterov_step(&obj, 0.0, &s);
            let g = obj.gradient(&x);
            x = vecmath::add_scaled(&x, -1.0 / obj.lipschitz(), &g);
            for (i, xi) in x.iter().enumerate() {
                assert!((z.q[i] - xi).abs() < 1e-12);
                assert!((s.x[i] - xi).abs() < 1e-12);
            }
        }
    }
}
