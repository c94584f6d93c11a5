//! Run configuration: `key = value` files with command-line overrides.

use std::fs;
use std::path::Path;

use pulsecal::calibration::Scheme;
use pulsecal::dynamics::{IntegratorConfig, DEFAULT_STEPS_PER_PERIOD};
use pulsecal::gates::{Gate, THETA_GRID_POINTS};
use pulsecal::model::{
    nondimensionalize, QubitParams, Shape, REFERENCE_OMEGA_D_MAX, REFERENCE_OMEGA_Q,
};
use pulsecal::{Error, Result};

pub type Bracket = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Qubit angular frequency, rad/s.
    pub omega_q: f64,
    /// Maximum drive scale, rad/s.
    pub omega_d_max: f64,
    pub amp_fractions: Vec<f64>,
    pub steps_per_period: usize,
    /// `None` selects the per-table defaults.
    pub shapes: Option<Vec<Shape>>,
    pub schemes: Option<Vec<Scheme>>,
    pub theta_points: usize,
    /// Integration steps between recorded figure samples.
    pub figure_stride: usize,
    pub bracket_square_pi: Bracket,
    pub bracket_gaussian_pi: Bracket,
    pub bracket_square_half_pi: Bracket,
    pub bracket_gaussian_half_pi: Bracket,
    pub bracket_state_prep: Bracket,
    /// Step-halving check on every production run.
    pub verify_step: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            omega_q: REFERENCE_OMEGA_Q,
            omega_d_max: REFERENCE_OMEGA_D_MAX,
            amp_fractions: vec![0.2, 0.1, 0.05],
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            shapes: None,
            schemes: None,
            theta_points: THETA_GRID_POINTS,
            figure_stride: 20,
            bracket_square_pi: (0.9, 1.1),
            bracket_gaussian_pi: (0.0, 1.0),
            bracket_square_half_pi: (-1.0, 1.5),
            bracket_gaussian_half_pi: (-0.5, 0.5),
            bracket_state_prep: (-0.5, 1.5),
            verify_step: false,
        }
    }
}

impl Config {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Config::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "omega_q" => self.omega_q = parse_f64(key, value)?,
            "omega_d_max" => self.omega_d_max = parse_f64(key, value)?,
            "amp_fractions" => self.amp_fractions = parse_amp_fractions(value)?,
            "steps_per_period" => self.steps_per_period = parse_usize(key, value)?,
            "shapes" => self.shapes = Some(parse_shapes(value)?),
            "schemes" => self.schemes = Some(parse_schemes(value)?),
            "theta_points" => self.theta_points = parse_usize(key, value)?,
            "figure_stride" => self.figure_stride = parse_usize(key, value)?,
            "bracket_square_pi" => self.bracket_square_pi = parse_bracket(key, value)?,
            "bracket_gaussian_pi" => self.bracket_gaussian_pi = parse_bracket(key, value)?,
            "bracket_square_half_pi" => self.bracket_square_half_pi = parse_bracket(key, value)?,
            "bracket_gaussian_half_pi" => {
                self.bracket_gaussian_half_pi = parse_bracket(key, value)?
            }
            "bracket_state_prep" => self.bracket_state_prep = parse_bracket(key, value)?,
            "verify_step" => {
                self.verify_step = value
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: expected true or false")))?
            }
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for &f in &self.amp_fractions {
            self.params(f)?;
        }
        if self.steps_per_period == 0 {
            return Err(Error::Config("steps_per_period must be positive".into()));
        }
        if self.theta_points < 2 {
            return Err(Error::Config("theta_points must be at least 2".into()));
        }
        Ok(())
    }

    pub fn params(&self, amp_fraction: f64) -> Result<QubitParams> {
        nondimensionalize(self.omega_q, self.omega_d_max, amp_fraction)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::with_steps_per_period(self.steps_per_period)
    }

    /// Optimizer bracket for tuning `c_eff` on a single gate.
    pub fn gate_bracket(&self, gate: Gate, shape: Shape) -> Bracket {
        match (gate, shape) {
            (Gate::YPi, Shape::Square) => self.bracket_square_pi,
            (Gate::YPi, _) => self.bracket_gaussian_pi,
            (Gate::YHalfPi, Shape::Square) => self.bracket_square_half_pi,
            (Gate::YHalfPi, _) => self.bracket_gaussian_half_pi,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: '{value}' is not a finite number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a non-negative integer")))
}

fn parse_bracket(key: &str, value: &str) -> Result<Bracket> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [lo, hi] => {
            let (lo, hi) = (parse_f64(key, lo)?, parse_f64(key, hi)?);
            if lo < hi {
                Ok((lo, hi))
            } else {
                Err(Error::Config(format!("{key}: empty bracket [{lo}, {hi}]")))
            }
        }
        _ => Err(Error::Config(format!("{key}: expected 'lo, hi'"))),
    }
}

fn list_items(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_amp_fractions(value: &str) -> Result<Vec<f64>> {
    list_items(value)
        .map(|v| parse_f64("amp_fractions", v))
        .collect()
}

pub fn parse_shapes(value: &str) -> Result<Vec<Shape>> {
    list_items(value).map(str::parse).collect()
}

/// Comma-separated scheme labels; an empty list is allowed.
pub fn parse_schemes(value: &str) -> Result<Vec<Scheme>> {
    list_items(value).map(str::parse).collect()
}
