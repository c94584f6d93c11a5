//! Coherent-error tables: one row per (shape, scheme, amplitude) cell.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use pulsecal::calibration::{CalibratedPulse, Scheme};
use pulsecal::dynamics::{fmt_sci, verify_step, StepCheck};
use pulsecal::gates::{run_gate, tune_gate, Gate, GateRun};
use pulsecal::model::{Shape, StateVector};
use pulsecal::{Error, Result};

use crate::config::Config;
use crate::sweep::{run_sweep, SweepPoint};

pub const CSV_HEADER: &str =
    "table,shape,scheme,amp_fraction,metric,value,duration,width,c_eff,n_periods";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableId {
    YPi,
    YHalfPi,
    StatePrep,
}

impl TableId {
    pub const ALL: [TableId; 3] = [TableId::YPi, TableId::YHalfPi, TableId::StatePrep];

    pub fn label(self) -> &'static str {
        match self {
            TableId::YPi => "ypi",
            TableId::YHalfPi => "ypihalf",
            TableId::StatePrep => "stateprep",
        }
    }

    pub fn gate(self) -> Option<Gate> {
        match self {
            TableId::YPi => Some(Gate::YPi),
            TableId::YHalfPi => Some(Gate::YHalfPi),
            TableId::StatePrep => None,
        }
    }

    pub fn default_shapes(self) -> Vec<Shape> {
        match self {
            TableId::YPi | TableId::YHalfPi => vec![Shape::Square, Shape::Gaussian],
            TableId::StatePrep => vec![Shape::Square, Shape::ShiftedGaussian],
        }
    }

    /// Rows of the reference tables for each shape.
    pub fn default_schemes(self, shape: Shape) -> Vec<Scheme> {
        use Scheme::*;
        match (self, shape) {
            (TableId::StatePrep, _) => vec![RwaEffCorrFullPeriods],
            (_, Shape::Square) => vec![
                Rwa,
                RwaFullPeriods,
                RwaCorr,
                RwaCorrFullPeriods,
                RwaEffCorrFullPeriods,
            ],
            (TableId::YPi, _) => vec![
                Rwa,
                RwaFullPeriods,
                RwaTimeDepCorrZeroCross,
                RwaEffMeanCorr,
                RwaEffOptCorr,
                RwaEffOptCorrFullPeriods,
            ],
            (TableId::YHalfPi, _) => vec![Rwa, RwaFullPeriods, RwaEffCorrFullPeriods],
        }
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown table '{s}', expected one of: ypi, ypihalf, stateprep"
                ))
            })
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub table: TableId,
    pub shape: Shape,
    pub scheme: Scheme,
    pub amp_fraction: f64,
    pub metric: &'static str,
    pub value: f64,
    pub duration: f64,
    pub width: Option<f64>,
    pub c_eff: Option<f64>,
    pub n_periods: Option<u64>,
}

impl Row {
    pub fn from_pulse(
        table: TableId,
        scheme: Scheme,
        amp_fraction: f64,
        metric: &'static str,
        value: f64,
        pulse: &CalibratedPulse,
    ) -> Self {
        let env = &pulse.envelope;
        Row {
            table,
            shape: env.shape,
            scheme,
            amp_fraction,
            metric,
            value,
            duration: env.duration,
            width: env.shape.is_gaussian().then_some(env.sigma),
            c_eff: pulse.c_eff,
            n_periods: pulse.n_periods,
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_sci).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.table.label(),
            self.shape.label(),
            self.scheme.label(),
            self.amp_fraction,
            self.metric,
            fmt_sci(self.value),
            fmt_sci(self.duration),
            opt(self.width),
            opt(self.c_eff),
            self.n_periods.map(|n| n.to_string()).unwrap_or_default()
        )
    }

    fn sort_key_cmp(&self, other: &Row) -> Ordering {
        (self.shape, self.scheme)
            .cmp(&(other.shape, other.scheme))
            .then(self.amp_fraction.total_cmp(&other.amp_fraction))
            .then(self.metric.cmp(other.metric))
    }
}

/// Rows plus the integrator diagnostics gathered while producing them.
#[derive(Debug, Clone, Default)]
pub struct TableReport {
    pub rows: Vec<Row>,
    /// Largest `| |r| - 1 |` over all final states.
    pub max_norm_deviation: f64,
    /// Step-halving results when requested, labelled by cell.
    pub step_checks: Vec<(String, StepCheck)>,
}

impl TableReport {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// Shapes and schemes a table covers under `cfg`.
pub fn cells(table: TableId, cfg: &Config) -> Vec<(Shape, Scheme, f64)> {
    let shapes = cfg.shapes.clone().unwrap_or_else(|| table.default_shapes());
    let mut out = Vec::new();
    for shape in shapes {
        let schemes = cfg
            .schemes
            .clone()
            .unwrap_or_else(|| table.default_schemes(shape));
        for scheme in schemes.into_iter().filter(|s| s.supports(shape)) {
            for &f in &cfg.amp_fractions {
                out.push((shape, scheme, f));
            }
        }
    }
    out
}

struct CellResult {
    rows: Vec<Row>,
    norm_deviation: f64,
    step_check: Option<(String, StepCheck)>,
}

fn gate_cell(
    table: TableId,
    gate: Gate,
    shape: Shape,
    scheme: Scheme,
    amp_fraction: f64,
    cfg: &Config,
) -> Result<CellResult> {
    let params = cfg.params(amp_fraction)?;
    let integ = cfg.integrator();
    let run: GateRun = if scheme.needs_c_eff() {
        let bracket = cfg.gate_bracket(gate, shape);
        tune_gate(gate, shape, scheme, &params, bracket, &integ)?.run
    } else {
        run_gate(gate, shape, scheme, &params, None, &integ)?
    };
    let step_check = if cfg.verify_step {
        let check = verify_step(&run.gate.schedule, &StateVector::GROUND, &integ)?;
        let label = format!("{} {} {} {}", table.label(), shape.label(), scheme, amp_fraction);
        Some((label, check))
    } else {
        None
    };
    Ok(CellResult {
        rows: vec![Row::from_pulse(
            table,
            scheme,
            amp_fraction,
            gate.metric(),
            run.error,
            &run.gate.pulse,
        )],
        norm_deviation: (run.trajectory.final_bloch().norm() - 1.0).abs(),
        step_check,
    })
}

/// Summary rows of a state-preparation sweep: smallest and largest `delta`
/// for `theta < pi`, and `delta` at `theta = pi`.
pub fn state_prep_rows(points: &[SweepPoint]) -> Vec<Row> {
    let mut groups: Vec<(Shape, Scheme, f64)> = points
        .iter()
        .map(|p| (p.shape, p.scheme, p.amp_fraction))
        .collect();
    groups.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    groups.dedup();

    let mut rows = Vec::new();
    for (shape, scheme, f) in groups {
        let group: Vec<&SweepPoint> = points
            .iter()
            .filter(|p| p.shape == shape && p.scheme == scheme && p.amp_fraction == f)
            .collect();
        let row = |metric, p: &SweepPoint| {
            let mut r = Row::from_pulse(TableId::StatePrep, scheme, f, metric, p.prep.delta, &p.pulse);
            r.c_eff = p.c_eff;
            r
        };
        let interior = group.iter().filter(|p| !p.is_pi());
        if let Some(lo) = interior.clone().min_by(|a, b| a.prep.delta.total_cmp(&b.prep.delta)) {
            rows.push(row("delta_min", lo));
        }
        if let Some(hi) = interior.max_by(|a, b| a.prep.delta.total_cmp(&b.prep.delta)) {
            rows.push(row("delta_max", hi));
        }
        if let Some(pi) = group.iter().find(|p| p.is_pi()) {
            rows.push(row("delta_pi", pi));
        }
    }
    rows
}

/// Evaluates every cell of `table` in parallel and returns rows sorted by
/// (shape, scheme, amplitude, metric).
pub fn run_table(table: TableId, cfg: &Config) -> Result<TableReport> {
    cfg.validate()?;
    let mut report = match table.gate() {
        Some(gate) => {
            let results: Vec<CellResult> = cells(table, cfg)
                .into_par_iter()
                .map(|(shape, scheme, f)| gate_cell(table, gate, shape, scheme, f, cfg))
                .collect::<Result<_>>()?;
            let mut report = TableReport::default();
            for r in results {
                report.rows.extend(r.rows);
                report.max_norm_deviation = report.max_norm_deviation.max(r.norm_deviation);
                report.step_checks.extend(r.step_check);
            }
            report
        }
        None => {
            let shapes = cfg.shapes.clone().unwrap_or_else(|| table.default_shapes());
            let sweep = run_sweep(cfg.theta_points, &shapes, cfg)?;
            TableReport {
                rows: state_prep_rows(&sweep.points),
                max_norm_deviation: sweep.max_norm_deviation,
                step_checks: sweep.step_checks,
            }
        }
    };
    report.rows.sort_by(Row::sort_key_cmp);
    report
        .step_checks
        .sort_by(|a, b| a.0.cmp(&b.0));
    Ok(report)
}

/// Fixed-width text rendering of table rows.
pub fn summary(rows: &[Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<30} {:>6} {:>10} {:>12} {:>9}",
        "shape", "scheme", "amp", "metric", "value", "c_eff"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} {:<30} {:>6} {:>10} {:>12.3e} {:>9}",
            r.shape.label(),
            r.scheme.label(),
            r.amp_fraction,
            r.metric,
            r.value,
            r.c_eff.map(|c| format!("{c:.4}")).unwrap_or_default()
        );
    }
    out
}
