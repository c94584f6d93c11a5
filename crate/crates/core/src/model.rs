//! Core value types shared by every other module.
//!
//! All computation happens in units where the qubit angular frequency is 1,
//! so times are measured in `tau_q = 1/omega_q` and drive scales are plain
//! ratios `Omega_d / omega_q`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Qubit 0 angular frequency of the reference backend, rad/s.
pub const REFERENCE_OMEGA_Q: f64 = 29_806_862_687.393_623;
/// Maximum drive scale of the reference backend, rad/s.
pub const REFERENCE_OMEGA_D_MAX: f64 = 982_583_670.175_613;

/// Drive strengths at or above this fraction of `omega_q` leave the
/// weak-driving regime.
pub const WEAK_DRIVE_LIMIT: f64 = 0.1;

/// Dimensionless qubit and drive parameters (`omega_q = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    /// Always 1 after nondimensionalization; kept for readability.
    pub omega_q: f64,
    /// Maximum drive scale in units of `omega_q`.
    pub omega_d_max: f64,
    /// Fraction of `omega_d_max` actually applied.
    pub amp_fraction: f64,
}

impl QubitParams {
    /// Builds parameters from the reference backend constants.
    pub fn reference(amp_fraction: f64) -> Result<Self> {
        nondimensionalize(REFERENCE_OMEGA_Q, REFERENCE_OMEGA_D_MAX, amp_fraction)
    }

    /// Effective drive scale `Omega_d = amp_fraction * omega_d_max`.
    pub fn drive_scale(&self) -> f64 {
        self.amp_fraction * self.omega_d_max
    }

    /// Same qubit with another amplitude fraction.
    pub fn with_amp_fraction(&self, amp_fraction: f64) -> Result<Self> {
        let p = QubitParams {
            amp_fraction,
            ..*self
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_q > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega_q must be positive, got {}",
                self.omega_q
            )));
        }
        if !(self.amp_fraction > 0.0 && self.amp_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "amp_fraction must lie in (0, 1], got {}",
                self.amp_fraction
            )));
        }
        let ratio = self.drive_scale() / self.omega_q;
        if !(ratio > 0.0 && ratio < WEAK_DRIVE_LIMIT) {
            return Err(Error::InvalidParameter(format!(
                "Omega_d/omega_q = {ratio} is outside the weak-driving regime (0, {WEAK_DRIVE_LIMIT})"
            )));
        }
        Ok(())
    }
}

/// Converts raw angular frequencies (any common unit) into `omega_q = 1` units.
pub fn nondimensionalize(omega_q: f64, omega_d_max: f64, amp_fraction: f64) -> Result<QubitParams> {
    if !(omega_q.is_finite() && omega_q > 0.0) || !(omega_d_max.is_finite() && omega_d_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "raw frequencies must be positive and finite, got omega_q = {omega_q}, omega_d_max = {omega_d_max}"
        )));
    }
    let params = QubitParams {
        omega_q: 1.0,
        omega_d_max: omega_d_max / omega_q,
        amp_fraction,
    };
    params.validate()?;
    Ok(params)
}

/// Pulse envelope family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Square,
    Gaussian,
    ShiftedGaussian,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Square, Shape::Gaussian, Shape::ShiftedGaussian];

    pub fn label(self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Gaussian => "gaussian",
            Shape::ShiftedGaussian => "shifted_gaussian",
        }
    }

    pub fn is_gaussian(self) -> bool {
        !matches!(self, Shape::Square)
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.label() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown shape '{s}', expected one of: square, gaussian, shifted_gaussian"
                ))
            })
    }
}

/// Shape, duration and width of one drive pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub shape: Shape,
    pub duration: f64,
    /// Gaussian width; ignored for `Square`.
    pub sigma: f64,
}

impl Envelope {
    pub fn square(duration: f64) -> Result<Self> {
        let env = Envelope {
            shape: Shape::Square,
            duration,
            sigma: 0.0,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn gaussian(shape: Shape, duration: f64, sigma: f64) -> Result<Self> {
        let env = Envelope {
            shape,
            duration,
            sigma,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "envelope duration must be positive, got {}",
                self.duration
            )));
        }
        if self.shape.is_gaussian() {
            if !(self.sigma.is_finite() && self.sigma > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gaussian width must be positive, got {}",
                    self.sigma
                )));
            }
            // edge amplitude must stay below e^-2
            if self.duration < 4.0 * self.sigma * (1.0 - 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "gaussian duration {} is shorter than 4 sigma = {}",
                    self.duration,
                    4.0 * self.sigma
                )));
            }
        }
        Ok(())
    }
}

/// Carrier frequency program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarrierMode {
    /// Fixed local-oscillator angular frequency.
    Constant { omega_lo: f64 },
    /// Instantaneous frequency tracks the drive-shifted resonance,
    /// `omega(t) = 1 + c_eff * 0.75 * (Omega_d d(t))^2`.
    Chirped { c_eff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierSpec {
    pub mode: CarrierMode,
    pub phi_lo: f64,
}

/// Largest relative detuning accepted for a constant carrier.
pub const MAX_RELATIVE_DETUNING: f64 = 0.05;

impl CarrierSpec {
    pub fn constant(omega_lo: f64) -> Result<Self> {
        if !(omega_lo.is_finite() && (omega_lo - 1.0).abs() < MAX_RELATIVE_DETUNING) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency {omega_lo} is not near resonance"
            )));
        }
        Ok(CarrierSpec {
            mode: CarrierMode::Constant { omega_lo },
            phi_lo: 0.0,
        })
    }

    pub fn chirped(c_eff: f64) -> Self {
        CarrierSpec {
            mode: CarrierMode::Chirped { c_eff },
            phi_lo: 0.0,
        }
    }

    pub fn with_phase(self, phi_lo: f64) -> Self {
        CarrierSpec { phi_lo, ..self }
    }

    /// Constant carrier frequency, if any.
    pub fn omega_lo(&self) -> Option<f64> {
        match self.mode {
            CarrierMode::Constant { omega_lo } => Some(omega_lo),
            CarrierMode::Chirped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSegment {
    pub envelope: Envelope,
    pub carrier: CarrierSpec,
    pub drive_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleEntry {
    Drive(DriveSegment),
    /// Zero-duration phase shift added to every later carrier.
    VirtualZ(f64),
}

/// Time-ordered list of drive pulses and virtual-Z shifts. Drive segments
/// follow each other without gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl PulseSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn drive(mut self, segment: DriveSegment) -> Self {
        self.entries.push(ScheduleEntry::Drive(segment));
        self
    }

    pub fn virtual_z(mut self, phase: f64) -> Self {
        self.entries.push(ScheduleEntry::VirtualZ(phase));
        self
    }

    pub fn duration(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| match e {
                ScheduleEntry::Drive(seg) => seg.envelope.duration,
                ScheduleEntry::VirtualZ(_) => 0.0,
            })
            .sum()
    }

    pub fn drive_segments(&self) -> impl Iterator<Item = &DriveSegment> {
        self.entries.iter().filter_map(|e| match e {
            ScheduleEntry::Drive(seg) => Some(seg),
            ScheduleEntry::VirtualZ(_) => None,
        })
    }
}

/// Expectation values `<sigma_i>` of a single qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub r_x: f64,
    pub r_y: f64,
    pub r_z: f64,
}

impl BlochState {
    pub const NORTH: BlochState = BlochState {
        r_x: 0.0,
        r_y: 0.0,
        r_z: 1.0,
    };

    /// In-plane coherence `sqrt(r_x^2 + r_y^2)`.
    pub fn c_xy(&self) -> f64 {
        self.r_x.hypot(self.r_y)
    }

    pub fn norm(&self) -> f64 {
        (self.r_x * self.r_x + self.r_y * self.r_y + self.r_z * self.r_z).sqrt()
    }
}

/// Pure state in the `{|0>, |1>}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl StateVector {
    pub const GROUND: StateVector = StateVector {
        a0: Complex64::new(1.0, 0.0),
        a1: Complex64::new(0.0, 0.0),
    };

    pub fn new(a0: Complex64, a1: Complex64) -> Self {
        StateVector { a0, a1 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.a1.is_finite()
    }
}

/// Tolerance on `|a0|^2 + |a1|^2 - 1` accepted by [`bloch_of`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Bloch vector of a normalized state.
pub fn bloch_of(psi: &StateVector) -> Result<BlochState> {
    if !psi.is_finite() {
        return Err(Error::NonFinite("state amplitudes".into()));
    }
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "state is not normalized: |psi|^2 = {norm}"
        )));
    }
    Ok(bloch_unchecked(psi))
}

pub(crate) fn bloch_unchecked(psi: &StateVector) -> BlochState {
    // <sigma_x> + i <sigma_y> = 2 conj(a0) a1
    let coh = psi.a0.conj() * psi.a1 * 2.0;
    BlochState {
        r_x: coh.re,
        r_y: coh.im,
        r_z: psi.a0.norm_sqr() - psi.a1.norm_sqr(),
    }
}
