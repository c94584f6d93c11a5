//! Lab-frame propagation of a driven two-level system,
//!
//! `H(t) = -sigma_z / 2 + Omega_d d(t) sin(phi(t)) sigma_x`
//!
//! with a fixed-step fourth-order Runge-Kutta integrator. This is the ground
//! truth every calibration scheme is scored against.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::envelopes;
use crate::error::{Error, Result};
use crate::model::{
    bloch_unchecked, BlochState, CarrierMode, CarrierSpec, DriveSegment, Envelope, PulseSchedule,
    ScheduleEntry, StateVector,
};

/// Default resolution of the carrier period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;
/// Coarsest step accepted for production runs.
pub const MIN_STEPS_PER_PERIOD: usize = 200;
/// Step-halving deviation accepted for production results.
pub const STEP_ACCURACY_TARGET: f64 = 5e-9;
/// Norm drift at which propagation aborts.
pub const NORM_ABORT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Nominal RK4 step in units of `tau_q`. Each segment uses the largest
    /// step not exceeding this that divides its duration evenly.
    pub step: f64,
    /// Re-run at half the step and report the deviation in the trajectory.
    pub richardson_check: bool,
    /// Record a trajectory sample every `sample_stride` steps; 0 keeps only
    /// the endpoints.
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::with_steps_per_period(DEFAULT_STEPS_PER_PERIOD)
    }
}

impl IntegratorConfig {
    /// Step resolving a carrier period `2 pi / omega_q` into `n` steps.
    pub fn with_steps_per_period(n: usize) -> Self {
        IntegratorConfig {
            step: 2.0 * PI / n as f64,
            richardson_check: false,
            sample_stride: 0,
        }
    }

    pub fn with_sample_stride(self, sample_stride: usize) -> Self {
        IntegratorConfig {
            sample_stride,
            ..self
        }
    }

    pub fn with_richardson_check(self, on: bool) -> Self {
        IntegratorConfig {
            richardson_check: on,
            ..self
        }
    }

    /// At least [`MIN_STEPS_PER_PERIOD`] steps per period of the fastest
    /// carrier `omega`.
    pub fn is_compliant(&self, omega: f64) -> bool {
        self.step > 0.0 && self.step <= 2.0 * PI / omega / MIN_STEPS_PER_PERIOD as f64
    }

    fn halved(&self) -> Self {
        IntegratorConfig {
            step: 0.5 * self.step,
            richardson_check: false,
            sample_stride: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub bloch: BlochState,
    /// Envelope drive `Omega_d d(t)` of the active segment.
    pub drive: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub final_state: StateVector,
    pub final_time: f64,
    /// Step-halving deviation, when the config requested it.
    pub step_error: Option<f64>,
}

impl Trajectory {
    pub fn final_bloch(&self) -> BlochState {
        bloch_unchecked(&self.final_state)
    }

    /// CSV dump with columns `t,r_x,r_y,r_z,c_xy,drive_amplitude`; the drive
    /// column is multiplied by `drive_scale_factor`.
    pub fn to_csv(&self, drive_scale_factor: f64) -> String {
        let mut out = String::from("t,r_x,r_y,r_z,c_xy,drive_amplitude\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_sci(s.t),
                fmt_sci(s.bloch.r_x),
                fmt_sci(s.bloch.r_y),
                fmt_sci(s.bloch.r_z),
                fmt_sci(s.bloch.c_xy()),
                fmt_sci(s.drive * drive_scale_factor)
            );
        }
        out
    }
}

/// Scientific notation with six significant digits.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// Chirp offset `c_eff * 0.75 * (Omega_d d)^2` of the instantaneous
/// frequency above `omega_q = 1`.
fn chirp_shift(c_eff: f64, drive_scale: f64, d: f64) -> f64 {
    let rabi = drive_scale * d;
    0.75 * c_eff * rabi * rabi
}

/// Carrier phase at local time `t` of a segment, including `phi_LO`.
pub fn carrier_phase(carrier: &CarrierSpec, env: &Envelope, drive_scale: f64, t: f64) -> f64 {
    match carrier.mode {
        CarrierMode::Constant { omega_lo } => omega_lo * t + carrier.phi_lo,
        CarrierMode::Chirped { c_eff } => {
            let upto = t.clamp(0.0, env.duration);
            let shift = if upto > 0.0 {
                crate::numeric::adaptive_simpson(
                    |s| chirp_shift(c_eff, drive_scale, envelopes::eval(env, s)),
                    0.0,
                    upto,
                    envelopes::QUADRATURE_RELATIVE_TOLERANCE * env.duration,
                )
            } else {
                0.0
            };
            t + shift + carrier.phi_lo
        }
    }
}

/// Integrates the lab-frame Schrodinger equation over `schedule`.
pub fn propagate(
    schedule: &PulseSchedule,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !psi0.is_finite() {
        return Err(Error::NonFinite("initial state".into()));
    }
    if (psi0.norm_sqr() - 1.0).abs() > crate::model::NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "initial state is not normalized: |psi|^2 = {}",
            psi0.norm_sqr()
        )));
    }
    if !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "integrator step must be positive, got {}",
            cfg.step
        )));
    }
    let mut traj = run(schedule, psi0, cfg, true)?;
    if cfg.richardson_check {
        let fine = run(schedule, psi0, &cfg.halved(), false)?;
        traj.step_error = Some(state_deviation(&traj.final_state, &fine.final_state));
    }
    Ok(traj)
}

/// Outcome of a step-halving check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    /// Largest amplitude deviation between runs at `h` and `h/2`.
    pub deviation: f64,
    /// True when `deviation` exceeds [`STEP_ACCURACY_TARGET`].
    pub flagged: bool,
}

/// Runs the schedule at `h` and `h/2` and compares the final amplitudes.
/// Never aborts on norm drift, so deliberately coarse steps can be probed.
pub fn verify_step(
    schedule: &PulseSchedule,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
) -> Result<StepCheck> {
    let coarse = run(schedule, psi0, &cfg.bare(), false)?;
    let fine = run(schedule, psi0, &cfg.halved(), false)?;
    let deviation = state_deviation(&coarse.final_state, &fine.final_state);
    Ok(StepCheck {
        deviation,
        flagged: !(deviation <= STEP_ACCURACY_TARGET),
    })
}

impl IntegratorConfig {
    fn bare(&self) -> Self {
        IntegratorConfig {
            step: self.step,
            richardson_check: false,
            sample_stride: 0,
        }
    }
}

fn state_deviation(a: &StateVector, b: &StateVector) -> f64 {
    (a.a0 - b.a0).norm().max((a.a1 - b.a1).norm())
}

/// Per-segment drive evaluator: envelope, carrier and accumulated phase.
struct SegmentDrive<'a> {
    seg: &'a DriveSegment,
    /// LO phase at segment start, including virtual-Z offsets and `phi_LO`.
    phase0: f64,
}

impl SegmentDrive<'_> {
    fn envelope(&self, t: f64) -> f64 {
        envelopes::eval(&self.seg.envelope, t)
    }

    fn chirp_rate(&self, c_eff: f64, t: f64) -> f64 {
        chirp_shift(c_eff, self.seg.drive_scale, self.envelope(t))
    }
}

fn run(
    schedule: &PulseSchedule,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    abort_on_drift: bool,
) -> Result<Trajectory> {
    let mut psi = *psi0;
    let mut t_global = 0.0;
    // running LO phase, excluding each segment's own phi_LO
    let mut lo_phase = 0.0;
    let mut samples = Vec::new();
    let record = cfg.sample_stride > 0;
    if record {
        samples.push(TrajectorySample {
            t: 0.0,
            bloch: bloch_unchecked(&psi),
            drive: 0.0,
        });
    }

    for entry in &schedule.entries {
        let seg = match entry {
            ScheduleEntry::VirtualZ(phase) => {
                lo_phase += phase;
                continue;
            }
            ScheduleEntry::Drive(seg) => seg,
        };
        let duration = seg.envelope.duration;
        let n_steps = (duration / cfg.step).ceil().max(1.0) as usize;
        let h = duration / n_steps as f64;
        let drive = SegmentDrive {
            seg,
            phase0: lo_phase + seg.carrier.phi_lo,
        };
        let omega = seg.drive_scale;

        // carrier phase relative to phase0 at the three RK4 nodes
        let mut chirp_acc = 0.0;
        let phase_at = |t: f64, chirp: f64| -> f64 {
            match seg.carrier.mode {
                CarrierMode::Constant { omega_lo } => drive.phase0 + omega_lo * t,
                CarrierMode::Chirped { .. } => drive.phase0 + t + chirp,
            }
        };
        let field = |t: f64, phase: f64| -> (f64, f64) {
            let d = drive.envelope(t);
            (omega * d * phase.sin(), omega * d)
        };

        let (mut f_start, _) = field(0.0, phase_at(0.0, 0.0));
        for k in 0..n_steps {
            let t0 = k as f64 * h;
            let t_half = t0 + 0.5 * h;
            let t1 = (k + 1) as f64 * h;
            let (chirp_half, chirp_end) = match seg.carrier.mode {
                CarrierMode::Chirped { c_eff } => {
                    let quarter = |a: f64, b: f64| {
                        let m = 0.5 * (a + b);
                        (b - a) / 6.0
                            * (drive.chirp_rate(c_eff, a)
                                + 4.0 * drive.chirp_rate(c_eff, m)
                                + drive.chirp_rate(c_eff, b))
                    };
                    let half = chirp_acc + quarter(t0, t_half);
                    (half, half + quarter(t_half, t1))
                }
                CarrierMode::Constant { .. } => (0.0, 0.0),
            };
            let (f_half, _) = field(t_half, phase_at(t_half, chirp_half));
            let (f_end, d_end) = field(t1, phase_at(t1, chirp_end));
            psi = rk4_step(&psi, h, f_start, f_half, f_end);
            f_start = f_end;
            chirp_acc = chirp_end;

            let last = k + 1 == n_steps;
            if record && ((k + 1) % cfg.sample_stride == 0 || last) {
                samples.push(TrajectorySample {
                    t: t_global + t1,
                    bloch: bloch_unchecked(&psi),
                    drive: d_end,
                });
            }
            if abort_on_drift && (last || (k + 1) % 4096 == 0) {
                let drift = (psi.norm_sqr() - 1.0).abs();
                if !(drift <= NORM_ABORT_TOLERANCE) {
                    return Err(Error::NormDrift {
                        drift,
                        time: t_global + t1,
                        step: h,
                    });
                }
            }
        }
        lo_phase += match seg.carrier.mode {
            CarrierMode::Constant { omega_lo } => omega_lo * duration,
            CarrierMode::Chirped { .. } => duration + chirp_acc,
        };
        t_global += duration;
    }

    if !psi.is_finite() {
        return Err(Error::NonFinite("propagated state".into()));
    }
    Ok(Trajectory {
        samples,
        final_state: psi,
        final_time: t_global,
        step_error: None,
    })
}

/// `d psi / dt = -i H psi` with `H = -sigma_z/2 + f sigma_x`.
#[inline]
fn derivative(psi: &StateVector, f: f64) -> StateVector {
    let i = Complex64::i();
    StateVector {
        a0: i * (0.5 * psi.a0 - f * psi.a1),
        a1: -i * (f * psi.a0 + 0.5 * psi.a1),
    }
}

#[inline]
fn axpy(psi: &StateVector, h: f64, k: &StateVector) -> StateVector {
    StateVector {
        a0: psi.a0 + k.a0 * h,
        a1: psi.a1 + k.a1 * h,
    }
}

#[inline]
fn rk4_step(psi: &StateVector, h: f64, f0: f64, f_half: f64, f1: f64) -> StateVector {
    let k1 = derivative(psi, f0);
    let k2 = derivative(&axpy(psi, 0.5 * h, &k1), f_half);
    let k3 = derivative(&axpy(psi, 0.5 * h, &k2), f_half);
    let k4 = derivative(&axpy(psi, h, &k3), f1);
    StateVector {
        a0: psi.a0 + (k1.a0 + 2.0 * k2.a0 + 2.0 * k3.a0 + k4.a0) * (h / 6.0),
        a1: psi.a1 + (k1.a1 + 2.0 * k2.a1 + 2.0 * k3.a1 + k4.a1) * (h / 6.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{QubitParams, Shape};

    fn square_pulse(duration: f64, drive_scale: f64, omega_lo: f64) -> PulseSchedule {
        PulseSchedule::new().drive(DriveSegment {
            envelope: Envelope::square(duration).unwrap(),
            carrier: CarrierSpec::constant(omega_lo).unwrap(),
            drive_scale,
        })
    }

    #[test]
    fn carrier_phase_constant() {
        let env = Envelope::square(10.0).unwrap();
        let c = CarrierSpec::constant(1.0).unwrap();
        assert_eq!(carrier_phase(&c, &env, 0.01, 2.0 * PI), 2.0 * PI);
        let c = c.with_phase(0.3);
        assert!((carrier_phase(&c, &env, 0.01, 1.0) - 1.3).abs() < 1e-15);
    }

    #[test]
    fn carrier_phase_chirp_without_drive_is_free() {
        let env = Envelope::gaussian(Shape::Gaussian, 50.0, 10.0).unwrap();
        let c = CarrierSpec::chirped(1.0).with_phase(0.25);
        assert!((carrier_phase(&c, &env, 0.0, 20.0) - 20.25).abs() < 1e-14);
    }

    #[test]
    fn carrier_phase_chirp_square() {
        let omega = 0.0032966;
        let t = PI / omega;
        let env = Envelope::square(t).unwrap();
        let c = CarrierSpec::chirped(1.0);
        let phase = carrier_phase(&c, &env, omega, t);
        let expected = t * (1.0 + 0.75 * omega * omega);
        assert!((phase - expected).abs() < 1e-10);
        assert!((phase / t - 1.0 - 8.1506e-6).abs() < 1e-9);
    }

    #[test]
    fn free_evolution_keeps_poles_and_coherence() {
        let sched = square_pulse(10.0, 0.0, 1.0);
        let cfg = IntegratorConfig::default().with_sample_stride(50);
        let traj = propagate(&sched, &StateVector::GROUND, &cfg).unwrap();
        assert!((traj.final_bloch().r_z - 1.0).abs() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(Complex64::new(s, 0.0), Complex64::new(s, 0.0));
        let traj = propagate(&sched, &plus, &cfg).unwrap();
        for sample in &traj.samples {
            assert!(sample.bloch.r_z.abs() < 1e-12);
            assert!((sample.bloch.c_xy() - 1.0).abs() < 1e-10);
        }
        // H = -sigma_z/2 precesses r_x + i r_y as exp(-i t)
        let b = traj.final_bloch();
        let angle = b.r_y.atan2(b.r_x);
        let expected = (-10.0f64 + PI).rem_euclid(2.0 * PI) - PI;
        assert!((angle - expected).abs() < 1e-9, "{angle} vs {expected}");
    }

    #[test]
    fn square_pi_pulse_inverts_population() {
        let omega = QubitParams::reference(0.1).unwrap().drive_scale();
        let t = PI / omega;
        assert!((t - 953.008).abs() < 1e-3);
        let traj = propagate(
            &square_pulse(t, omega, 1.0),
            &StateVector::GROUND,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let b = traj.final_bloch();
        assert!(b.r_z < -0.9999);
        assert!((b.c_xy() - 2.7e-3).abs() < 2e-3, "c_xy = {}", b.c_xy());
        assert!((b.norm() - 1.0).abs() < 1e-7);
        assert!((traj.final_time - t).abs() < 1e-9);

        let half = propagate(
            &square_pulse(0.5 * t, omega, 1.0),
            &StateVector::GROUND,
            &IntegratorConfig::default(),
        )
        .unwrap()
        .final_bloch();
        assert!(half.r_z.abs() < 5e-3);
        assert!(half.c_xy() > 0.999);
    }

    #[test]
    fn verify_step_examples() {
        let cfg = IntegratorConfig::default();
        let free = square_pulse(100.0, 0.0, 1.0);
        let check = verify_step(&free, &StateVector::GROUND, &cfg).unwrap();
        // only the RK4 phase error of free precession remains
        assert!(check.deviation < 1e-10);
        assert!(!check.flagged);

        let omega = QubitParams::reference(0.1).unwrap().drive_scale();
        let pi_pulse = square_pulse(PI / omega, omega, 1.0);
        let check = verify_step(&pi_pulse, &StateVector::GROUND, &cfg).unwrap();
        assert!(!check.flagged, "deviation {}", check.deviation);

        let coarse = IntegratorConfig::with_steps_per_period(10);
        assert!(!coarse.is_compliant(1.0));
        let check = verify_step(&pi_pulse, &StateVector::GROUND, &coarse).unwrap();
        assert!(check.flagged);
        // and the production entry point refuses it outright
        assert!(matches!(
            propagate(&pi_pulse, &StateVector::GROUND, &coarse),
            Err(Error::NormDrift { .. })
        ));
    }

    #[test]
    fn rk4_convergence_order() {
        let omega = QubitParams::reference(0.2).unwrap().drive_scale();
        let sched = square_pulse(PI / omega, omega, 1.0);
        let coarse = IntegratorConfig::with_steps_per_period(100);
        let fine = IntegratorConfig::with_steps_per_period(200);
        let e1 = verify_step(&sched, &StateVector::GROUND, &coarse).unwrap().deviation;
        let e2 = verify_step(&sched, &StateVector::GROUND, &fine).unwrap().deviation;
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn virtual_z_shifts_later_carriers_only() {
        let omega = 0.01;
        let t = 2.0 * PI * 20.0;
        let seg = DriveSegment {
            envelope: Envelope::square(t).unwrap(),
            carrier: CarrierSpec::constant(1.0).unwrap(),
            drive_scale: omega,
        };
        let shifted = DriveSegment {
            carrier: seg.carrier.with_phase(0.7),
            ..seg
        };
        let cfg = IntegratorConfig::default();
        let a = propagate(
            &PulseSchedule::new().drive(seg).virtual_z(0.7).drive(seg),
            &StateVector::GROUND,
            &cfg,
        )
        .unwrap();
        let b = propagate(
            &PulseSchedule::new().drive(seg).drive(shifted),
            &StateVector::GROUND,
            &cfg,
        )
        .unwrap();
        assert!(state_deviation(&a.final_state, &b.final_state) < 1e-12);
        assert_eq!(a.final_time, 2.0 * t);
    }

    #[test]
    fn propagate_rejects_bad_input() {
        let sched = square_pulse(1.0, 0.0, 1.0);
        let bad = StateVector::new(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0));
        assert!(propagate(&sched, &bad, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let cfg = IntegratorConfig::default().with_sample_stride(1000);
        let traj = propagate(&square_pulse(10.0, 0.001, 1.0), &StateVector::GROUND, &cfg).unwrap();
        let csv = traj.to_csv(100.0);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,r_x,r_y,r_z,c_xy,drive_amplitude"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0.00000e0");
        assert_eq!(first[3], "1.00000e0");
        let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
        assert_eq!(last[5], "1.00000e-1");
    }
}
