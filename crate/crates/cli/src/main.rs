use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use pulsecal::dynamics::StepCheck;
use pulsecal::model::Shape;
use pulsecal::{Error, Result};
use pulsecal_cli::config::{parse_amp_fractions, parse_schemes, parse_shapes};
use pulsecal_cli::figures::figure_csv;
use pulsecal_cli::sweep::{profile_csv, summary as sweep_summary, sweep_csv};
use pulsecal_cli::tables::summary as table_summary;
use pulsecal_cli::{run_figure, run_sweep, run_table, Config, FigureId, TableId};

/// Reproduces coherent-error tables, state-preparation sweeps and pulse
/// trajectories for a driven two-level system.
#[derive(Debug, Parser)]
#[command(name = "pulsecal", version)]
struct Args {
    /// Table to compute: ypi, ypihalf or stateprep (repeatable).
    #[arg(long = "table", value_name = "ID")]
    tables: Vec<String>,
    /// Trajectory to dump: fig1 or fig2 (repeatable).
    #[arg(long = "figure", value_name = "ID")]
    figures: Vec<String>,
    /// State-preparation sweep over N angles in [0, pi]; N defaults to the
    /// configured theta_points.
    #[arg(long, value_name = "N", num_args = 0..=1)]
    sweep: Option<Option<usize>>,
    /// Comma-separated envelope shapes.
    #[arg(long)]
    shapes: Option<String>,
    /// Comma-separated scheme labels; an empty list yields header-only CSVs.
    #[arg(long)]
    schemes: Option<String>,
    /// Comma-separated fractions of the maximum drive scale.
    #[arg(long = "amp-fractions")]
    amp_fractions: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "./results")]
    out: PathBuf,
    /// key = value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run every pulse at half the step and report the deviation.
    #[arg(long = "verify-step")]
    verify_step: bool,
}

fn build_config(args: &Args) -> Result<Config> {
    let mut cfg = match &args.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    if let Some(s) = &args.shapes {
        cfg.shapes = Some(parse_shapes(s)?);
    }
    if let Some(s) = &args.schemes {
        cfg.schemes = Some(parse_schemes(s)?);
    }
    if let Some(s) = &args.amp_fractions {
        cfg.amp_fractions = parse_amp_fractions(s)?;
    }
    cfg.verify_step |= args.verify_step;
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn report_checks(checks: &[(String, StepCheck)], norm_deviation: f64) {
    println!("max Bloch-norm deviation: {norm_deviation:.2e}");
    if checks.is_empty() {
        return;
    }
    let worst = checks
        .iter()
        .map(|(_, c)| c.deviation)
        .fold(0.0, f64::max);
    let flagged: Vec<&String> = checks.iter().filter(|(_, c)| c.flagged).map(|(l, _)| l).collect();
    println!(
        "step check: {} runs, max deviation {worst:.2e}, {} flagged",
        checks.len(),
        flagged.len()
    );
    for label in flagged {
        println!("  flagged: {label}");
    }
}

fn run(args: &Args) -> Result<()> {
    let cfg = build_config(args)?;
    let tables: Vec<TableId> = args.tables.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    let figures: Vec<FigureId> = args.figures.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    if tables.is_empty() && figures.is_empty() && args.sweep.is_none() {
        return Err(Error::Config(
            "nothing to do: pass --table, --figure or --sweep".into(),
        ));
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", args.out.display())))?;

    for table in tables {
        let report = run_table(table, &cfg)?;
        let path = write(&args.out, &format!("{}.csv", table.label()), &report.to_csv())?;
        println!("== {} -> {}", table.label(), path.display());
        print!("{}", table_summary(&report.rows));
        report_checks(&report.step_checks, report.max_norm_deviation);
    }

    for figure in figures {
        let traj = run_figure(figure, &cfg)?;
        let path = write(&args.out, &format!("{}.csv", figure.label()), &figure_csv(&traj))?;
        let b = traj.final_bloch();
        println!(
            "== {} -> {} (t = {:.3}, r_z = {:.6}, c_xy = {:.6})",
            figure.label(),
            path.display(),
            traj.final_time,
            b.r_z,
            b.c_xy()
        );
    }

    if let Some(n) = args.sweep {
        let n = n.unwrap_or(cfg.theta_points);
        let shapes = cfg
            .shapes
            .clone()
            .unwrap_or_else(|| vec![Shape::Square, Shape::ShiftedGaussian]);
        let report = run_sweep(n, &shapes, &cfg)?;
        let sweep_path = write(&args.out, "sweep.csv", &sweep_csv(&report.points))?;
        let profile_path = write(&args.out, "ceff_profile.csv", &profile_csv(&report.points))?;
        println!(
            "== sweep -> {}, {}",
            sweep_path.display(),
            profile_path.display()
        );
        print!("{}", sweep_summary(&report.points));
        report_checks(&report.step_checks, report.max_norm_deviation);
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
