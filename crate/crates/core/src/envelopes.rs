//! Pulse envelopes and the integral functionals used by the calibration
//! conditions.

use crate::model::{Envelope, Shape};
use crate::numeric::adaptive_simpson;

/// Relative quadrature tolerance; the absolute tolerance is this times `T`.
pub const QUADRATURE_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Envelope amplitude `d(t)`; zero outside `[0, T]`.
pub fn eval(env: &Envelope, t: f64) -> f64 {
    if !(0.0..=env.duration).contains(&t) {
        return 0.0;
    }
    match env.shape {
        Shape::Square => 1.0,
        Shape::Gaussian => gaussian(env, t),
        Shape::ShiftedGaussian => {
            let edge = gaussian(env, 0.0);
            ((gaussian(env, t) - edge) / (1.0 - edge)).max(0.0)
        }
    }
}

fn gaussian(env: &Envelope, t: f64) -> f64 {
    let x = (t - 0.5 * env.duration) / env.sigma;
    (-0.5 * x * x).exp()
}

/// Integrates `f(d(t))` over the pulse at the module's default tolerance.
pub(crate) fn integrate<F: Fn(f64) -> f64>(env: &Envelope, f: F) -> f64 {
    integrate_with_tolerance(env, f, QUADRATURE_RELATIVE_TOLERANCE)
}

pub(crate) fn integrate_with_tolerance<F: Fn(f64) -> f64>(env: &Envelope, f: F, rel_tol: f64) -> f64 {
    if env.shape == Shape::Square {
        return f(1.0) * env.duration;
    }
    adaptive_simpson(|t| f(eval(env, t)), 0.0, env.duration, rel_tol * env.duration)
}

/// Pulse area `int_0^T d(t) dt`.
pub fn area(env: &Envelope) -> f64 {
    integrate(env, |d| d)
}

/// Rotation angle including the drive-dependent Rabi correction,
/// `int_0^T Omega_d d (1 + 3 (Omega_d d)^2 / 8) dt`.
pub fn corrected_area(env: &Envelope, drive_scale: f64) -> f64 {
    integrate(env, |d| {
        let rabi = drive_scale * d;
        rabi * (1.0 + 0.375 * rabi * rabi)
    })
}

/// Mean-square envelope `c1 = (1/T) int_0^T d^2 dt`.
pub fn mean_square_fraction(env: &Envelope) -> f64 {
    integrate(env, |d| d * d) / env.duration
}
