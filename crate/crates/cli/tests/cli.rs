use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pulsecal_cli::tables::CSV_HEADER;

fn pulsecal(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulsecal"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

const QUICK: [&str; 8] = [
    "--table",
    "ypi",
    "--shapes",
    "square",
    "--schemes",
    "rwa,rwa_full_periods",
    "--amp-fractions",
    "0.2",
];

#[test]
fn table_csv_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(pulsecal(a.path(), &QUICK).status.success());
    assert!(pulsecal(b.path(), &QUICK).status.success());
    let first = fs::read(a.path().join("ypi.csv")).unwrap();
    let second = fs::read(b.path().join("ypi.csv")).unwrap();
    assert_eq!(first, second);

    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ypi,square,rwa,0.2,c_xy,"));
    assert!(lines[2].starts_with("ypi,square,rwa_full_periods,0.2,c_xy,"));
}

#[test]
fn unknown_scheme_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = pulsecal(dir.path(), &["--table", "ypi", "--schemes", "rwa,bogus"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus"), "{err}");
    assert!(err.contains("rwa_full_periods"), "valid labels listed: {err}");
    assert!(!dir.path().join("ypi.csv").exists());
}

#[test]
fn empty_scheme_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = pulsecal(dir.path(), &["--table", "ypihalf", "--schemes", ""]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ypihalf.csv")).unwrap();
    assert_eq!(csv, format!("{CSV_HEADER}\n"));
}

#[test]
fn nothing_to_do_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pulsecal(dir.path(), &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn figure_trajectory_starts_in_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = pulsecal(dir.path(), &["--figure", "fig2"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let col = |name: &str| first[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("t"), 0.0);
    assert_eq!(col("r_z"), 1.0);
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let t_end = last[header.iter().position(|h| *h == "t").unwrap()];
    assert!((t_end - 476.504).abs() < 1e-2, "{t_end}");
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# quick run\namp_fractions = 0.2, 0.1\nshapes = square\nschemes = rwa\n",
    )
    .unwrap();
    let cfg_arg = cfg.to_str().unwrap();

    let out = pulsecal(dir.path(), &["--table", "ypi", "--config", cfg_arg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ypi.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let out = pulsecal(
        dir.path(),
        &["--table", "ypi", "--config", cfg_arg, "--amp-fractions", "0.2"],
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("ypi.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    fs::write(&cfg, "steps_per_period = 2000\nno_such_key = 1\n").unwrap();
    let out = pulsecal(dir.path(), &["--table", "ypi", "--config", cfg_arg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn sweep_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = pulsecal(
        dir.path(),
        &[
            "--sweep",
            "3",
            "--shapes",
            "square",
            "--schemes",
            "rwa_full_periods",
            "--amp-fractions",
            "0.2",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let profile = fs::read_to_string(dir.path().join("ceff_profile.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
    assert_eq!(profile.lines().count(), 4);
}
