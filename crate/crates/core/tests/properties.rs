use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use pulsecal::calibration::{calibrate, Alignment, Scheme, ALIGNMENT_FREQUENCY, DURATION_BRACKET};
use pulsecal::dynamics::{propagate, IntegratorConfig};
use pulsecal::envelopes::{area, eval};
use pulsecal::model::{
    bloch_of, BlochState, CarrierSpec, DriveSegment, Envelope, PulseSchedule, QubitParams, Shape,
    StateVector,
};

fn coarse() -> IntegratorConfig {
    IntegratorConfig::with_steps_per_period(400)
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        Just(Shape::Square),
        Just(Shape::Gaussian),
        Just(Shape::ShiftedGaussian)
    ]
}

fn envelope(shape: Shape, duration: f64) -> Envelope {
    match shape {
        Shape::Square => Envelope::square(duration).unwrap(),
        _ => Envelope::gaussian(shape, duration, duration / 6.0).unwrap(),
    }
}

fn segment(shape: Shape, duration: f64, drive_scale: f64, phi: f64) -> DriveSegment {
    DriveSegment {
        envelope: envelope(shape, duration),
        carrier: CarrierSpec::constant(1.0).unwrap().with_phase(phi),
        drive_scale,
    }
}

fn final_bloch(schedule: &PulseSchedule) -> BlochState {
    propagate(schedule, &StateVector::GROUND, &coarse())
        .unwrap()
        .final_bloch()
}

fn distance(a: &BlochState, b: &BlochState) -> f64 {
    (a.r_x - b.r_x).hypot(a.r_y - b.r_y).hypot(a.r_z - b.r_z)
}

/// Product of exact 2x2 exponentials of the midpoint Hamiltonian
/// `-sigma_z / 2 + f sigma_x`, an independent second-order propagator.
fn midpoint_exponential(
    duration: f64,
    drive_scale: f64,
    omega_lo: f64,
    phi: f64,
    steps: usize,
) -> StateVector {
    let h = duration / steps as f64;
    let (mut a0, mut a1) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for k in 0..steps {
        let t = (k as f64 + 0.5) * h;
        let f = drive_scale * (omega_lo * t + phi).sin();
        // H = n . sigma with n = (f, 0, -1/2)
        let w = f.hypot(0.5);
        let (c, s) = ((w * h).cos(), (w * h).sin());
        let (nx, nz) = (f / w, -0.5 / w);
        let i = Complex64::i();
        let m00 = c - i * s * nz;
        let m11 = c + i * s * nz;
        let m01 = -i * s * nx;
        (a0, a1) = (m00 * a0 + m01 * a1, m01 * a0 + m11 * a1);
    }
    StateVector::new(a0, a1)
}

#[test]
fn rk4_matches_independent_exponential_propagator() {
    let (duration, drive_scale, phi) = (60.0, 0.05, 0.4);
    let schedule = PulseSchedule::new().drive(DriveSegment {
        envelope: Envelope::square(duration).unwrap(),
        carrier: CarrierSpec::constant(1.0).unwrap().with_phase(phi),
        drive_scale,
    });
    let rk4 = propagate(&schedule, &StateVector::GROUND, &IntegratorConfig::default())
        .unwrap()
        .final_state;
    let reference = midpoint_exponential(duration, drive_scale, 1.0, phi, 400_000);
    let dev = (rk4.a0 - reference.a0).norm().max((rk4.a1 - reference.a1).norm());
    assert!(dev < 1e-7, "deviation {dev:e}");
}

#[test]
fn square_rwa_pi_pulse_inverts_to_first_order() {
    for frac in [0.05, 0.1, 0.2] {
        let p = QubitParams::reference(frac).unwrap();
        let pulse = calibrate(PI, Shape::Square, Scheme::Rwa, p.drive_scale(), None).unwrap();
        let b = final_bloch(&PulseSchedule::new().drive(pulse.segment()));
        // the residual is first order in the drive scale
        assert!(b.c_xy() < 2.0 * p.drive_scale(), "frac {frac}: {b:?}");
        assert!(b.r_z < -0.9999);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_preserves_norm(
        shape in shape(),
        duration in 50.0..400.0f64,
        frac in 0.05..0.2f64,
        phi in -PI..PI,
    ) {
        let drive_scale = QubitParams::reference(frac).unwrap().drive_scale();
        let schedule = PulseSchedule::new().drive(segment(shape, duration, drive_scale, phi));
        let traj = propagate(&schedule, &StateVector::GROUND, &coarse()).unwrap();
        prop_assert!((traj.final_state.norm_sqr() - 1.0).abs() < 1e-9);
        prop_assert!(bloch_of(&traj.final_state).is_ok());
    }

    #[test]
    fn trailing_virtual_z_changes_nothing(
        duration in 50.0..200.0f64,
        phase in -PI..PI,
    ) {
        let seg = segment(Shape::Square, duration, 0.01, 0.0);
        let plain = final_bloch(&PulseSchedule::new().drive(seg));
        let shifted = final_bloch(&PulseSchedule::new().drive(seg).virtual_z(phase));
        prop_assert_eq!(plain, shifted);
    }

    #[test]
    fn virtual_z_phases_add(
        a in -PI..PI,
        b in -PI..PI,
        duration in 50.0..200.0f64,
    ) {
        let seg = segment(Shape::Gaussian, duration, 0.01, 0.0);
        let split = final_bloch(&PulseSchedule::new().drive(seg).virtual_z(a).virtual_z(b).drive(seg));
        let joined = final_bloch(&PulseSchedule::new().drive(seg).virtual_z(a + b).drive(seg));
        prop_assert!(distance(&split, &joined) < 1e-12);
    }

    #[test]
    fn virtual_z_equals_carrier_phase(
        a in -PI..PI,
        duration in 50.0..200.0f64,
    ) {
        // the second pulse starts where the first ends, so its own phase
        // counts from the running LO phase
        let first = segment(Shape::Square, duration, 0.01, 0.0);
        let second = segment(Shape::Square, duration, 0.01, a);
        let via_z = final_bloch(&PulseSchedule::new().drive(first).virtual_z(a).drive(first));
        let via_phase = final_bloch(&PulseSchedule::new().drive(first).drive(second));
        prop_assert!(distance(&via_z, &via_phase) < 1e-12);
    }

    #[test]
    fn envelopes_are_bounded_and_symmetric(
        shape in shape(),
        duration in 10.0..1000.0f64,
        u in 0.0..1.0f64,
    ) {
        let env = envelope(shape, duration);
        let t = u * duration;
        let d = eval(&env, t);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - eval(&env, duration - t)).abs() < 1e-12);
        prop_assert!((eval(&env, duration / 2.0) - 1.0).abs() < 1e-12);
        prop_assert_eq!(eval(&env, -1.0), 0.0);
        prop_assert_eq!(eval(&env, duration + 1.0), 0.0);
        prop_assert!(area(&env) <= duration * (1.0 + 1e-12));
    }

    #[test]
    fn calibration_meets_every_condition(
        scheme_index in 0..Scheme::ALL.len(),
        shape in shape(),
        frac in 0.05..0.2f64,
        c in 0.0..1.0f64,
        half in any::<bool>(),
    ) {
        let scheme = Scheme::ALL[scheme_index];
        prop_assume!(scheme.supports(shape));
        let angle = if half { PI / 2.0 } else { PI };
        let drive_scale = QubitParams::reference(frac).unwrap().drive_scale();
        let c_eff = scheme.needs_c_eff().then_some(c);
        let pulse = calibrate(angle, shape, scheme, drive_scale, c_eff).unwrap();

        prop_assert!(pulse.angle_residual().abs() < 1e-9, "{:?}", pulse);
        // rounding to whole periods moves a square pulse by at most half a period
        let shift = (pulse.drive_scale / drive_scale - 1.0).abs();
        prop_assert!(shift <= PI / pulse.envelope.duration + 1e-12, "{:?}", pulse);
        if shape.is_gaussian() {
            prop_assert_eq!(pulse.drive_scale, drive_scale);
        }
        if shape.is_gaussian() {
            let ratio = pulse.envelope.duration / pulse.envelope.sigma;
            prop_assert!(ratio >= DURATION_BRACKET.0 - 1e-9 && ratio <= DURATION_BRACKET.1 + 1e-9);
        }
        if scheme.recipe().alignment == Alignment::FullPeriods {
            let n = pulse.n_periods.unwrap() as f64;
            let period = 2.0 * PI / ALIGNMENT_FREQUENCY;
            prop_assert!((pulse.envelope.duration - n * period).abs() < 1e-9 * pulse.envelope.duration);
        }
        if scheme.needs_c_eff() {
            prop_assert_eq!(pulse.c_eff, Some(c));
        }
    }
}
