//! Numerical laboratory for a mass-spring-damper view of accelerated
//! gradient descent.
//!
//! The crate models the damped second-order flow whose semi-implicit Euler
//! discretization at unit step size is exactly the accelerated gradient
//! method, and packages the diagnostics that make that correspondence
//! quantitative: energy dissipation, phase-space area contraction for plane
//! contours, time reversibility of the discrete map, and Lyapunov monitors
//! certifying the continuous and discrete convergence rates.
//!
//! Modules mirror the moving parts:
//!
//! - [`objectives`]: objective oracles and curvature averaging,
//! - [`dynamics`]: the continuous flow, coefficient schedules, energy,
//! - [`integrators`]: discrete stepping, inversion, RK4 reference,
//! - [`schemes`]: the textbook iteration and the change of variables,
//! - [`geometry`]: plane contours and area-contraction accounting,
//! - [`analysis`]: Lyapunov monitors and rate fitting.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod integrators;
pub mod objectives;
pub mod schemes;
mod vecmath;

pub use dynamics::{DampingSchedule, EnergyReport, PhasePoint};
pub use error::{AccelError, Result};
pub use integrators::{StepperConfig, TrajectoryRecord, TrajectoryStatus};
pub use objectives::Objective;
