//! Trajectory dumps of a square pi and pi/2 pulse.

use std::str::FromStr;

use pulsecal::calibration::Scheme;
use pulsecal::dynamics::{propagate, Trajectory};
use pulsecal::gates::{build_y_gate, Gate};
use pulsecal::model::{Shape, StateVector};
use pulsecal::{Error, Result};

use crate::config::Config;

/// Amplitude fraction used for both figures.
pub const FIGURE_AMP_FRACTION: f64 = 0.1;
/// Factor applied to the drive column so it is visible next to the Bloch
/// components.
pub const DRIVE_DISPLAY_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Square pi pulse: population inversion.
    Fig1,
    /// Square pi/2 pulse: ground state to the equator.
    Fig2,
}

impl FigureId {
    pub fn label(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
        }
    }

    pub fn gate(self) -> Gate {
        match self {
            FigureId::Fig1 => Gate::YPi,
            FigureId::Fig2 => Gate::YHalfPi,
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            _ => Err(Error::Config(format!(
                "unknown figure '{s}', expected fig1 or fig2"
            ))),
        }
    }
}

/// Propagates the figure's RWA square pulse, sampling every
/// `cfg.figure_stride` steps.
pub fn run_figure(figure: FigureId, cfg: &Config) -> Result<Trajectory> {
    let params = cfg.params(FIGURE_AMP_FRACTION)?;
    let gate = build_y_gate(figure.gate(), Shape::Square, Scheme::Rwa, &params, None)?;
    let integ = cfg.integrator().with_sample_stride(cfg.figure_stride.max(1));
    propagate(&gate.schedule, &StateVector::GROUND, &integ)
}

pub fn figure_csv(trajectory: &Trajectory) -> String {
    trajectory.to_csv(DRIVE_DISPLAY_SCALE)
}
