//! State-preparation sweeps over the target polar angle.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use pulsecal::calibration::{calibrate, CalibratedPulse, Scheme};
use pulsecal::dynamics::{fmt_sci, verify_step, StepCheck};
use pulsecal::gates::{state_prep_schedule, state_prep_with, theta_grid, tune_state_prep, StatePrep};
use pulsecal::model::{Shape, StateVector};
use pulsecal::Result;

use crate::config::Config;

pub const SWEEP_HEADER: &str = "shape,scheme,amp_fraction,theta,c_xy,r_z,delta,c_eff";
pub const PROFILE_HEADER: &str = "shape,scheme,amp_fraction,theta,c_eff";

/// Scheme used for sweeps when the configuration names none.
pub const DEFAULT_SWEEP_SCHEME: Scheme = Scheme::RwaEffCorrFullPeriods;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub shape: Shape,
    pub scheme: Scheme,
    pub amp_fraction: f64,
    pub prep: StatePrep,
    /// Carrier-shift factor, tuned per angle for shift schemes.
    pub c_eff: Option<f64>,
    pub pulse: CalibratedPulse,
}

impl SweepPoint {
    pub fn is_pi(&self) -> bool {
        self.prep.theta == PI
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub max_norm_deviation: f64,
    pub step_checks: Vec<(String, StepCheck)>,
}

fn sweep_point(
    theta: f64,
    shape: Shape,
    scheme: Scheme,
    amp_fraction: f64,
    cfg: &Config,
) -> Result<(SweepPoint, Option<(String, StepCheck)>)> {
    let params = cfg.params(amp_fraction)?;
    let integ = cfg.integrator();
    let (prep, pulse, c_eff) = if scheme.needs_c_eff() {
        let p = tune_state_prep(theta, shape, scheme, &params, cfg.bracket_state_prep, &integ)?;
        (p.prep, p.pulse, Some(p.c_eff))
    } else {
        let pulse = calibrate(PI / 2.0, shape, scheme, params.drive_scale(), None)?;
        (state_prep_with(theta, &pulse, &integ)?, pulse, pulse.c_eff)
    };
    let check = if cfg.verify_step {
        let c = verify_step(&state_prep_schedule(theta, &pulse), &StateVector::GROUND, &integ)?;
        let label = format!("stateprep {} {} {} theta={theta:.4}", shape.label(), scheme, amp_fraction);
        Some((label, c))
    } else {
        None
    };
    Ok((
        SweepPoint {
            shape,
            scheme,
            amp_fraction,
            prep,
            c_eff,
            pulse,
        },
        check,
    ))
}

/// Runs the state-preparation sequence over `n` angles in `[0, pi]` for
/// every shape, scheme and amplitude; points come back sorted.
pub fn run_sweep(n: usize, shapes: &[Shape], cfg: &Config) -> Result<SweepReport> {
    cfg.validate()?;
    let grid = theta_grid(n)?;
    let schemes = cfg
        .schemes
        .clone()
        .unwrap_or_else(|| vec![DEFAULT_SWEEP_SCHEME]);
    let mut tasks = Vec::new();
    for &shape in shapes {
        for &scheme in schemes.iter().filter(|s| s.supports(shape)) {
            for &f in &cfg.amp_fractions {
                for &theta in &grid {
                    tasks.push((theta, shape, scheme, f));
                }
            }
        }
    }
    let results: Vec<_> = tasks
        .into_par_iter()
        .map(|(theta, shape, scheme, f)| sweep_point(theta, shape, scheme, f, cfg))
        .collect::<Result<_>>()?;

    let mut report = SweepReport::default();
    for (point, check) in results {
        report.max_norm_deviation = report
            .max_norm_deviation
            .max((point.prep.norm - 1.0).abs());
        report.step_checks.extend(check);
        report.points.push(point);
    }
    report.points.sort_by(|a, b| {
        (a.shape, a.scheme)
            .cmp(&(b.shape, b.scheme))
            .then(a.amp_fraction.total_cmp(&b.amp_fraction))
            .then(a.prep.theta.total_cmp(&b.prep.theta))
    });
    report.step_checks.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(report)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.shape.label(),
            p.scheme.label(),
            p.amp_fraction,
            fmt_sci(p.prep.theta),
            fmt_sci(p.prep.c_xy),
            fmt_sci(p.prep.r_z),
            fmt_sci(p.prep.delta),
            p.c_eff.map(fmt_sci).unwrap_or_default()
        );
    }
    out
}

pub fn profile_csv(points: &[SweepPoint]) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.shape.label(),
            p.scheme.label(),
            p.amp_fraction,
            fmt_sci(p.prep.theta),
            p.c_eff.map(fmt_sci).unwrap_or_default()
        );
    }
    out
}

/// Per shape, scheme and amplitude: the `delta` range below `theta = pi`,
/// `delta` at `pi`, and the mean tuned `c_eff`.
pub fn summary(points: &[SweepPoint]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<28} {:>6} {:>11} {:>11} {:>11} {:>8}",
        "shape", "scheme", "amp", "delta_min", "delta_max", "delta_pi", "c_eff"
    );
    let mut i = 0;
    while i < points.len() {
        let head = &points[i];
        let j = points[i..]
            .iter()
            .position(|p| (p.shape, p.scheme) != (head.shape, head.scheme) || p.amp_fraction != head.amp_fraction)
            .map_or(points.len(), |k| i + k);
        let group = &points[i..j];
        let interior: Vec<f64> = group.iter().filter(|p| !p.is_pi()).map(|p| p.prep.delta).collect();
        let lo = interior.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = interior.iter().copied().fold(0.0, f64::max);
        let at_pi = group.iter().find(|p| p.is_pi()).map(|p| p.prep.delta);
        let cs: Vec<f64> = group.iter().filter_map(|p| p.c_eff).collect();
        let mean_c = (!cs.is_empty()).then(|| cs.iter().sum::<f64>() / cs.len() as f64);
        let _ = writeln!(
            out,
            "{:<18} {:<28} {:>6} {:>11.3e} {:>11.3e} {:>11} {:>8}",
            head.shape.label(),
            head.scheme.label(),
            head.amp_fraction,
            lo,
            hi,
            at_pi.map(|d| format!("{d:.3e}")).unwrap_or_default(),
            mean_c.map(|c| format!("{c:.4}")).unwrap_or_default()
        );
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grid() {
        let cfg = Config::default();
        assert!(run_sweep(1, &[Shape::Square], &cfg).is_err());
        assert!(run_sweep(0, &[Shape::Square], &cfg).is_err());
    }

    #[test]
    fn three_point_square_sweep() {
        let cfg = Config {
            amp_fractions: vec![0.2],
            schemes: Some(vec![Scheme::RwaFullPeriods]),
            ..Config::default()
        };
        let report = run_sweep(3, &[Shape::Square], &cfg).unwrap();
        assert_eq!(report.points.len(), 3);
        let deltas: Vec<f64> = report.points.iter().map(|p| p.prep.delta).collect();
        assert!(deltas[2] > deltas[0] && deltas[2] > deltas[1], "{deltas:?}");
        assert!(report.max_norm_deviation < 1e-7);
        let csv = sweep_csv(&report.points);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with(SWEEP_HEADER));
    }
}
