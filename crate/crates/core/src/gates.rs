//! Y rotations, virtual-Z state preparation and the coherent-error metrics.

use std::f64::consts::PI;

use crate::calibration::{calibrate, optimize_c_eff, CalibratedPulse, Scheme};
use crate::dynamics::{propagate, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::{BlochState, PulseSchedule, QubitParams, Shape, StateVector};

/// Default number of points in the state-preparation angle sweep.
pub const THETA_GRID_POINTS: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    YPi,
    YHalfPi,
}

impl Gate {
    pub fn angle(self) -> f64 {
        match self {
            Gate::YPi => PI,
            Gate::YHalfPi => PI / 2.0,
        }
    }

    /// Name of the metric reported by [`coherent_error`].
    pub fn metric(self) -> &'static str {
        match self {
            Gate::YPi => "c_xy",
            Gate::YHalfPi => "r_z",
        }
    }
}

/// A calibrated single-pulse gate.
#[derive(Debug, Clone, PartialEq)]
pub struct YGate {
    pub gate: Gate,
    pub pulse: CalibratedPulse,
    pub schedule: PulseSchedule,
}

/// Calibrates `scheme` for `gate`. The carrier starts at phase zero, which
/// makes the rotating-frame drive `+Omega_d d sigma_y / 2`.
pub fn build_y_gate(
    gate: Gate,
    shape: Shape,
    scheme: Scheme,
    params: &QubitParams,
    c_eff: Option<f64>,
) -> Result<YGate> {
    let pulse = calibrate(gate.angle(), shape, scheme, params.drive_scale(), c_eff)?;
    Ok(YGate {
        gate,
        pulse,
        schedule: PulseSchedule::new().drive(pulse.segment()),
    })
}

/// Deviation from the gate target starting from the ground state: `c_xy`
/// for `Y_pi`, `|r_z|` for `Y_pi/2`.
pub fn coherent_error(state: &BlochState, gate: Gate) -> f64 {
    match gate {
        Gate::YPi => state.c_xy(),
        Gate::YHalfPi => state.r_z.abs(),
    }
}

/// Outcome of running a gate from the ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRun {
    pub gate: YGate,
    pub trajectory: Trajectory,
    pub error: f64,
}

pub fn run_gate(
    gate: Gate,
    shape: Shape,
    scheme: Scheme,
    params: &QubitParams,
    c_eff: Option<f64>,
    cfg: &IntegratorConfig,
) -> Result<GateRun> {
    let gate = build_y_gate(gate, shape, scheme, params, c_eff)?;
    let trajectory = propagate(&gate.schedule, &StateVector::GROUND, cfg)?;
    let error = coherent_error(&trajectory.final_bloch(), gate.gate);
    Ok(GateRun {
        gate,
        trajectory,
        error,
    })
}

/// Optimized carrier-shift factor and the run it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedRun {
    pub run: GateRun,
    pub c_eff: f64,
    /// The objective looked multimodal or the optimum sat on a bracket edge.
    pub suspect: bool,
}

/// Tunes `c_eff` of a shift scheme to minimize the gate's coherent error.
pub fn tune_gate(
    gate: Gate,
    shape: Shape,
    scheme: Scheme,
    params: &QubitParams,
    bracket: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<TunedRun> {
    if !scheme.needs_c_eff() {
        return Err(Error::Config(format!("scheme {scheme} has no c_eff to tune")));
    }
    let quiet = cfg.with_sample_stride(0).with_richardson_check(false);
    let best = optimize_c_eff(
        |c| run_gate(gate, shape, scheme, params, Some(c), &quiet).map(|r| r.error),
        bracket,
    )?;
    let run = run_gate(gate, shape, scheme, params, Some(best.x), cfg)?;
    Ok(TunedRun {
        run,
        c_eff: best.x,
        suspect: best.suspect,
    })
}

/// Final-state metrics of the `Y_pi/2 Z_(pi - theta) Y_pi/2` sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePrep {
    pub theta: f64,
    pub c_xy: f64,
    pub r_z: f64,
    /// Distance from `(sin theta, cos theta)` in the `(c_xy, r_z)` plane.
    pub delta: f64,
    pub norm: f64,
}

/// The `Y_pi/2 Z_(pi - theta) Y_pi/2` schedule built from one `pi/2` pulse.
pub fn state_prep_schedule(theta: f64, half_pi: &CalibratedPulse) -> PulseSchedule {
    PulseSchedule::new()
        .drive(half_pi.segment())
        .virtual_z(PI - theta)
        .drive(half_pi.segment())
}

/// Runs `Y_pi/2 Z_(pi - theta) Y_pi/2` from the ground state, reusing one
/// calibrated `pi/2` pulse for both halves.
pub fn state_prep_with(
    theta: f64,
    half_pi: &CalibratedPulse,
    cfg: &IntegratorConfig,
) -> Result<StatePrep> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, pi], got {theta}"
        )));
    }
    let traj = propagate(&state_prep_schedule(theta, half_pi), &StateVector::GROUND, cfg)?;
    let b = traj.final_bloch();
    let c_xy = b.c_xy();
    let delta = (c_xy - theta.sin()).hypot(b.r_z - theta.cos());
    Ok(StatePrep {
        theta,
        c_xy,
        r_z: b.r_z,
        delta,
        norm: b.norm(),
    })
}

pub fn state_prep(
    theta: f64,
    shape: Shape,
    scheme: Scheme,
    params: &QubitParams,
    c_eff: Option<f64>,
    cfg: &IntegratorConfig,
) -> Result<StatePrep> {
    let pulse = calibrate(PI / 2.0, shape, scheme, params.drive_scale(), c_eff)?;
    state_prep_with(theta, &pulse, cfg)
}

/// One point of a `c_eff(theta)` profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub prep: StatePrep,
    pub c_eff: f64,
    pub suspect: bool,
    pub pulse: CalibratedPulse,
}

/// Tunes `c_eff` to minimize the state-preparation error at `theta`.
pub fn tune_state_prep(
    theta: f64,
    shape: Shape,
    scheme: Scheme,
    params: &QubitParams,
    bracket: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<ProfilePoint> {
    if !scheme.needs_c_eff() {
        return Err(Error::Config(format!("scheme {scheme} has no c_eff to tune")));
    }
    let quiet = cfg.with_sample_stride(0).with_richardson_check(false);
    let best = optimize_c_eff(
        |c| state_prep(theta, shape, scheme, params, Some(c), &quiet).map(|p| p.delta),
        bracket,
    )?;
    let pulse = calibrate(PI / 2.0, shape, scheme, params.drive_scale(), Some(best.x))?;
    let prep = state_prep_with(theta, &pulse, cfg)?;
    Ok(ProfilePoint {
        prep,
        c_eff: best.x,
        suspect: best.suspect,
        pulse,
    })
}

/// `n` evenly spaced angles covering `[0, pi]`.
pub fn theta_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "theta grid needs at least 2 points, got {n}"
        )));
    }
    Ok((0..n).map(|k| PI * k as f64 / (n - 1) as f64).collect())
}

/// Optimal `c_eff` at each angle of `thetas`.
pub fn c_eff_profile(
    thetas: &[f64],
    shape: Shape,
    scheme: Scheme,
    params: &QubitParams,
    bracket: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Vec<ProfilePoint>> {
    thetas
        .iter()
        .map(|&theta| tune_state_prep(theta, shape, scheme, params, bracket, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(frac: f64) -> QubitParams {
        QubitParams::reference(frac).unwrap()
    }

    #[test]
    fn coherent_error_examples() {
        let south = BlochState {
            r_x: 0.0,
            r_y: 0.0,
            r_z: -1.0,
        };
        assert_eq!(coherent_error(&south, Gate::YPi), 0.0);
        let tilted = BlochState {
            r_x: 0.6,
            r_y: 0.0,
            r_z: -0.8,
        };
        assert!((coherent_error(&tilted, Gate::YPi) - 0.6).abs() < 1e-15);
        assert!((coherent_error(&tilted, Gate::YHalfPi) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn build_examples() {
        let g = build_y_gate(Gate::YPi, Shape::Square, Scheme::Rwa, &params(0.1), None).unwrap();
        assert_eq!(g.schedule.entries.len(), 1);
        assert!((g.pulse.envelope.duration - 953.008).abs() < 1e-3);
        assert_eq!(g.pulse.carrier.omega_lo(), Some(1.0));
        assert_eq!(g.pulse.carrier.phi_lo, 0.0);

        let h = build_y_gate(
            Gate::YHalfPi,
            Shape::Square,
            Scheme::RwaFullPeriods,
            &params(0.1),
            None,
        )
        .unwrap();
        assert!((h.pulse.envelope.duration - 477.522).abs() < 1e-3);
        assert!(h.pulse.drive_scale < params(0.1).drive_scale());

        let bad = build_y_gate(
            Gate::YPi,
            Shape::Square,
            Scheme::RwaTimeDepCorrZeroCross,
            &params(0.1),
            None,
        );
        assert!(matches!(bad, Err(Error::Config(_))));
    }

    #[test]
    fn half_pi_gate_lands_on_plus_x() {
        let run = run_gate(
            Gate::YHalfPi,
            Shape::Square,
            Scheme::RwaFullPeriods,
            &params(0.2),
            None,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let b = run.trajectory.final_bloch();
        assert!(b.r_x > 0.999, "{b:?}");
        assert!(run.error < 1e-4);
    }

    #[test]
    fn state_prep_rejects_out_of_range_theta() {
        let p = calibrate(PI / 2.0, Shape::Square, Scheme::Rwa, 0.0066, None).unwrap();
        let cfg = IntegratorConfig::default();
        assert!(state_prep_with(-0.1, &p, &cfg).is_err());
        assert!(state_prep_with(3.5, &p, &cfg).is_err());
    }

    #[test]
    fn theta_grid_examples() {
        let g = theta_grid(THETA_GRID_POINTS).unwrap();
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[32], PI);
        assert!((g[16] - PI / 2.0).abs() < 1e-15);
        assert!(theta_grid(1).is_err());
    }

    #[test]
    fn tuning_needs_a_shift_scheme() {
        let r = tune_gate(
            Gate::YPi,
            Shape::Square,
            Scheme::Rwa,
            &params(0.1),
            (0.0, 1.0),
            &IntegratorConfig::default(),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
