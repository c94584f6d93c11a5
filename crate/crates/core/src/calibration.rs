//! Pulse calibration for each rung of the correction ladder.
//!
//! A scheme fixes three things: the carrier program (resonant, shifted by a
//! Bloch-Siegert term, or chirped), the rotation-angle condition the envelope
//! must satisfy, and how the pulse end is aligned with the carrier.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::dynamics::carrier_phase;
use crate::envelopes;
use crate::error::{Error, Result};
use crate::model::{CarrierMode, CarrierSpec, DriveSegment, Envelope, Shape};
use crate::numeric::{bisect, golden_section, Minimum};

/// Width inflation over the infinite-duration Gaussian width.
pub const WIDTH_INFLATION: f64 = 1.01;
/// Residual allowed on a calibrated rotation angle.
pub const ANGLE_TOLERANCE: f64 = 1e-10;
/// Duration bracket for Gaussian fits, in units of sigma.
pub const DURATION_BRACKET: (f64, f64) = (4.0, 10.0);
/// Frequency whose periods full-period schemes align to: the bare qubit
/// frequency, whatever the carrier shift.
pub const ALIGNMENT_FREQUENCY: f64 = 1.0;
/// Golden-section bracket width at which `optimize_c_eff` stops.
pub const C_EFF_TOLERANCE: f64 = 1e-4;

/// Correction schemes, one per row label of the coherent-error tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Rwa,
    RwaFullPeriods,
    RwaCorr,
    RwaCorrFullPeriods,
    RwaEffCorrFullPeriods,
    RwaTimeDepCorrZeroCross,
    RwaEffMeanCorr,
    RwaEffOptCorr,
    RwaEffOptCorrFullPeriods,
}

/// How the carrier frequency is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierRule {
    /// `omega_LO = omega_q`.
    Resonant,
    /// `omega_LO = 1 + 0.75 Omega_d^2`.
    BlochSiegert,
    /// `omega_LO = 1 + 0.75 Omega_d^2 c1` with the envelope's mean square.
    MeanShift,
    /// `omega_LO = 1 + 0.75 Omega_d^2 c_eff` with a tuned `c_eff`.
    TunedShift,
    /// Instantaneous frequency follows `1 + 0.75 (Omega_d d(t))^2`.
    Chirp,
}

/// Rotation-angle condition on the calibrated envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AreaCondition {
    /// `Omega_d int d = angle`.
    Plain,
    /// `int Omega_d d (1 + 3 (Omega_d d)^2 / 8) = angle`.
    Corrected,
    /// `(1 + 3 Omega_d^2 c / 8) Omega_d int d = angle`, matching a constant
    /// carrier shifted by `0.75 Omega_d^2 c`.
    Scaled(f64),
}

impl AreaCondition {
    /// Rotation angle produced by `env` at drive scale `drive_scale`.
    pub fn angle(&self, env: &Envelope, drive_scale: f64) -> f64 {
        match *self {
            AreaCondition::Plain => drive_scale * envelopes::area(env),
            AreaCondition::Corrected => envelopes::corrected_area(env, drive_scale),
            AreaCondition::Scaled(c) => {
                (1.0 + 0.375 * drive_scale * drive_scale * c) * drive_scale * envelopes::area(env)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    None,
    FullPeriods,
    ZeroCrossing,
}

/// Carrier rule, area condition and alignment of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recipe {
    pub carrier: CarrierRule,
    pub condition: ConditionRule,
    pub alignment: Alignment,
}

/// Area condition as a function of the carrier choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionRule {
    Plain,
    Corrected,
    /// Scaled by the same factor that shifts the carrier.
    MatchCarrier,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::Rwa,
        Scheme::RwaFullPeriods,
        Scheme::RwaCorr,
        Scheme::RwaCorrFullPeriods,
        Scheme::RwaEffCorrFullPeriods,
        Scheme::RwaTimeDepCorrZeroCross,
        Scheme::RwaEffMeanCorr,
        Scheme::RwaEffOptCorr,
        Scheme::RwaEffOptCorrFullPeriods,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Rwa => "rwa",
            Scheme::RwaFullPeriods => "rwa_full_periods",
            Scheme::RwaCorr => "rwa_corr",
            Scheme::RwaCorrFullPeriods => "rwa_corr_full_periods",
            Scheme::RwaEffCorrFullPeriods => "rwa_eff_corr_full_periods",
            Scheme::RwaTimeDepCorrZeroCross => "rwa_tdep_corr_zero_cross",
            Scheme::RwaEffMeanCorr => "rwa_eff_mean_corr",
            Scheme::RwaEffOptCorr => "rwa_eff_opt_corr",
            Scheme::RwaEffOptCorrFullPeriods => "rwa_eff_opt_corr_full_periods",
        }
    }

    pub fn recipe(self) -> Recipe {
        use Alignment as A;
        use CarrierRule as C;
        use ConditionRule as R;
        let (carrier, condition, alignment) = match self {
            Scheme::Rwa => (C::Resonant, R::Plain, A::None),
            Scheme::RwaFullPeriods => (C::Resonant, R::Plain, A::FullPeriods),
            Scheme::RwaCorr => (C::BlochSiegert, R::Corrected, A::None),
            Scheme::RwaCorrFullPeriods => (C::BlochSiegert, R::Corrected, A::FullPeriods),
            Scheme::RwaEffCorrFullPeriods => (C::TunedShift, R::MatchCarrier, A::FullPeriods),
            Scheme::RwaTimeDepCorrZeroCross => (C::Chirp, R::Corrected, A::ZeroCrossing),
            Scheme::RwaEffMeanCorr => (C::MeanShift, R::Plain, A::None),
            Scheme::RwaEffOptCorr => (C::TunedShift, R::MatchCarrier, A::None),
            Scheme::RwaEffOptCorrFullPeriods => (C::TunedShift, R::MatchCarrier, A::FullPeriods),
        };
        Recipe {
            carrier,
            condition,
            alignment,
        }
    }

    /// Schemes whose carrier shift is a free parameter to be tuned.
    pub fn needs_c_eff(self) -> bool {
        self.recipe().carrier == CarrierRule::TunedShift
    }

    pub fn supports(self, shape: Shape) -> bool {
        !(shape == Shape::Square && self.recipe().carrier == CarrierRule::Chirp)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.label() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = Scheme::ALL.iter().map(|s| s.label()).collect();
                Error::Config(format!(
                    "unknown scheme '{s}', valid labels: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// A fully specified drive pulse plus the bookkeeping that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedPulse {
    pub envelope: Envelope,
    pub carrier: CarrierSpec,
    pub drive_scale: f64,
    pub target_angle: f64,
    pub condition: AreaCondition,
    /// Carrier periods spanned, when aligned.
    pub n_periods: Option<u64>,
    /// Carrier shift factor, when the scheme has one.
    pub c_eff: Option<f64>,
}

impl CalibratedPulse {
    pub fn segment(&self) -> DriveSegment {
        DriveSegment {
            envelope: self.envelope,
            carrier: self.carrier,
            drive_scale: self.drive_scale,
        }
    }

    /// Signed residual of the area condition.
    pub fn angle_residual(&self) -> f64 {
        self.condition.angle(&self.envelope, self.drive_scale) - self.target_angle
    }
}

fn check_target(angle: f64, drive_scale: f64) -> Result<()> {
    if !(angle.is_finite() && angle > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target angle must be positive, got {angle}"
        )));
    }
    if !(drive_scale.is_finite() && drive_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drive scale must be positive, got {drive_scale}"
        )));
    }
    Ok(())
}

/// Square-pulse duration for `angle`: `angle / Omega_d`, shortened by
/// `1 - 3 Omega_d^2 / 8` when `corrected`.
pub fn square_duration(angle: f64, drive_scale: f64, corrected: bool) -> Result<f64> {
    check_target(angle, drive_scale)?;
    let plain = angle / drive_scale;
    Ok(if corrected {
        plain * (1.0 - 0.375 * drive_scale * drive_scale)
    } else {
        plain
    })
}

/// Infinite-duration Gaussian width giving `angle`, inflated by
/// [`WIDTH_INFLATION`].
pub fn inflated_width(angle: f64, drive_scale: f64) -> f64 {
    WIDTH_INFLATION * angle / (drive_scale * (2.0 * PI).sqrt())
}

/// Gaussian-family envelope with inflated width and the duration that
/// satisfies `condition`.
pub fn gaussian_fit(
    angle: f64,
    drive_scale: f64,
    shape: Shape,
    condition: AreaCondition,
) -> Result<Envelope> {
    check_target(angle, drive_scale)?;
    if !shape.is_gaussian() {
        return Err(Error::Config("gaussian_fit needs a Gaussian-family shape".into()));
    }
    let sigma = inflated_width(angle, drive_scale);
    let residual = |duration: f64| {
        let env = Envelope {
            shape,
            duration,
            sigma,
        };
        condition.angle(&env, drive_scale) - angle
    };
    let (lo, hi) = DURATION_BRACKET;
    let duration = bisect(residual, lo * sigma, hi * sigma, ANGLE_TOLERANCE).map_err(|e| {
        Error::Infeasible(format!(
            "no duration in [{lo}, {hi}] sigma reaches angle {angle}: {e}"
        ))
    })?;
    Envelope::gaussian(shape, duration, sigma)
}

/// Re-solves the Gaussian width so that an envelope of fixed `duration`
/// satisfies `condition`.
pub fn solve_width(
    angle: f64,
    drive_scale: f64,
    shape: Shape,
    duration: f64,
    condition: AreaCondition,
) -> Result<Envelope> {
    check_target(angle, drive_scale)?;
    let residual = |sigma: f64| {
        let env = Envelope {
            shape,
            duration,
            sigma,
        };
        condition.angle(&env, drive_scale) - angle
    };
    let (lo, hi) = DURATION_BRACKET;
    let sigma = bisect(residual, duration / hi, duration / lo, ANGLE_TOLERANCE)?;
    Envelope::gaussian(shape, duration, sigma)
}

/// Drive scale at which `env` satisfies `condition`; the angle is monotone
/// in the drive scale, so bisection on a generous bracket is safe.
pub fn solve_drive_scale(angle: f64, env: &Envelope, condition: AreaCondition) -> Result<f64> {
    let plain = angle / envelopes::area(env);
    if condition == AreaCondition::Plain {
        return Ok(plain);
    }
    bisect(
        |scale| condition.angle(env, scale) - angle,
        0.5 * plain,
        2.0 * plain,
        ANGLE_TOLERANCE,
    )
}

/// Restores the area condition after the envelope duration changed.
fn reclose(pulse: &CalibratedPulse, duration: f64) -> Result<CalibratedPulse> {
    let mut out = *pulse;
    match pulse.envelope.shape {
        Shape::Square => {
            out.envelope = Envelope::square(duration)?;
            out.drive_scale = solve_drive_scale(pulse.target_angle, &out.envelope, pulse.condition)?;
        }
        shape => {
            out.envelope = solve_width(
                pulse.target_angle,
                pulse.drive_scale,
                shape,
                duration,
                pulse.condition,
            )?;
        }
    }
    Ok(out)
}

/// Stretches or shrinks the pulse to the nearest whole number of carrier
/// periods and re-closes the area condition (drive scale for square pulses,
/// width for Gaussians).
pub fn align_full_periods(pulse: &CalibratedPulse, omega_carrier: f64) -> Result<CalibratedPulse> {
    if pulse.carrier.omega_lo().is_none() {
        return Err(Error::Config(
            "full-period alignment needs a constant carrier".into(),
        ));
    }
    let period = 2.0 * PI / omega_carrier;
    let n = (pulse.envelope.duration / period).round();
    if n < 1.0 {
        return Err(Error::Infeasible(format!(
            "pulse of duration {} is shorter than one carrier period",
            pulse.envelope.duration
        )));
    }
    let duration = n * period;
    let mut out = if duration == pulse.envelope.duration {
        *pulse
    } else {
        reclose(pulse, duration)?
    };
    out.n_periods = Some(n as u64);
    Ok(out)
}

const MAX_ALIGN_ITERATIONS: usize = 50;

/// Moves the pulse end of a chirped pulse to the nearest upward zero of the
/// carrier, `phi(T) = 0 mod 2 pi`, re-closing the area condition each time
/// the duration moves.
pub fn align_zero_crossing(pulse: &CalibratedPulse) -> Result<CalibratedPulse> {
    let CarrierMode::Chirped { c_eff } = pulse.carrier.mode else {
        return Err(Error::Config("zero-crossing alignment needs a chirped carrier".into()));
    };
    let phase_end = |p: &CalibratedPulse| {
        carrier_phase(&p.carrier, &p.envelope, p.drive_scale, p.envelope.duration)
    };
    let cycles = (phase_end(pulse) / (2.0 * PI)).round();
    if cycles < 1.0 {
        return Err(Error::Infeasible("pulse shorter than one carrier period".into()));
    }
    let target = 2.0 * PI * cycles;
    let mut out = *pulse;
    for _ in 0..MAX_ALIGN_ITERATIONS {
        let miss = phase_end(&out) - target;
        if miss.abs() <= 1e-11 * target {
            out.n_periods = Some(cycles as u64);
            return Ok(out);
        }
        let rate = 1.0
            + 0.75
                * c_eff
                * (out.drive_scale * envelopes::eval(&out.envelope, out.envelope.duration)).powi(2);
        out = reclose(&out, out.envelope.duration - miss / rate)?;
    }
    Err(Error::Infeasible(
        "zero-crossing alignment did not converge".into(),
    ))
}

/// Constant carrier at the envelope-averaged shifted resonance,
/// `1 + 0.75 Omega_d^2 c1`.
pub fn mean_chirp_to_constant(env: &Envelope, drive_scale: f64) -> f64 {
    1.0 + 0.75 * drive_scale * drive_scale * envelopes::mean_square_fraction(env)
}

/// Golden-section search for the carrier-shift factor minimizing `error`.
pub fn optimize_c_eff<F>(error: F, bracket: (f64, f64)) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    golden_section(error, bracket.0, bracket.1, C_EFF_TOLERANCE)
}

/// Builds the calibrated pulse of `scheme` for a rotation by `angle`.
/// `c_eff` is required by the tuned-shift schemes and ignored otherwise.
pub fn calibrate(
    angle: f64,
    shape: Shape,
    scheme: Scheme,
    drive_scale: f64,
    c_eff: Option<f64>,
) -> Result<CalibratedPulse> {
    check_target(angle, drive_scale)?;
    if !scheme.supports(shape) {
        return Err(Error::Config(format!(
            "scheme {scheme} needs a Gaussian-family envelope, got {}",
            shape.label()
        )));
    }
    let recipe = scheme.recipe();
    let tuned = match (recipe.carrier, c_eff) {
        (CarrierRule::TunedShift, Some(c)) if c.is_finite() => Some(c),
        (CarrierRule::TunedShift, _) => {
            return Err(Error::Config(format!("scheme {scheme} needs a finite c_eff")))
        }
        _ => None,
    };
    let omega2 = drive_scale * drive_scale;

    let condition = match (recipe.condition, recipe.carrier) {
        (ConditionRule::Plain, _) => AreaCondition::Plain,
        (ConditionRule::Corrected, _) => AreaCondition::Corrected,
        (ConditionRule::MatchCarrier, CarrierRule::TunedShift) => {
            AreaCondition::Scaled(tuned.unwrap_or(0.0))
        }
        (ConditionRule::MatchCarrier, _) => AreaCondition::Corrected,
    };

    let envelope = match shape {
        Shape::Square => {
            let duration = match condition {
                AreaCondition::Plain => square_duration(angle, drive_scale, false)?,
                AreaCondition::Corrected => square_duration(angle, drive_scale, true)?,
                AreaCondition::Scaled(c) => angle / (drive_scale * (1.0 + 0.375 * omega2 * c)),
            };
            Envelope::square(duration)?
        }
        _ => gaussian_fit(angle, drive_scale, shape, condition)?,
    };

    let (carrier, c_used) = match recipe.carrier {
        CarrierRule::Resonant => (CarrierSpec::constant(1.0)?, None),
        CarrierRule::BlochSiegert => (CarrierSpec::constant(1.0 + 0.75 * omega2)?, Some(1.0)),
        CarrierRule::MeanShift => {
            let c1 = envelopes::mean_square_fraction(&envelope);
            (CarrierSpec::constant(1.0 + 0.75 * omega2 * c1)?, Some(c1))
        }
        CarrierRule::TunedShift => {
            let c = tuned.unwrap_or(0.0);
            (CarrierSpec::constant(1.0 + 0.75 * omega2 * c)?, Some(c))
        }
        CarrierRule::Chirp => (CarrierSpec::chirped(1.0), Some(1.0)),
    };

    let pulse = CalibratedPulse {
        envelope,
        carrier,
        drive_scale,
        target_angle: angle,
        condition,
        n_periods: None,
        c_eff: c_used,
    };
    match recipe.alignment {
        Alignment::None => Ok(pulse),
        Alignment::FullPeriods => align_full_periods(&pulse, ALIGNMENT_FREQUENCY),
        Alignment::ZeroCrossing => align_zero_crossing(&pulse),
    }
}
