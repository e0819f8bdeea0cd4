use std::path::Path;
use std::process::{Command, Output};

use jcipa::cli::{BASE_HEADER, DEFORMED_HEADER, SWEEP_HEADER};

fn jcipa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcipa"))
        .args(args)
        .output()
        .expect("spawn jcipa")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Header line and numeric rows of a written CSV.
fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn run_to(dir: &Path, scenario: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let out = dir.join(format!("{scenario}.csv"));
    let mut args = vec!["--scenario", scenario, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (jcipa(&args), out)
}

#[test]
fn unknown_scenario_exits_one() {
    let out = jcipa(&["--scenario", "fig9_nothing", "--validate-only"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("fig9_nothing"));
}

#[test]
fn validate_only_echoes_defaults() {
    let out = jcipa(&["--scenario", "fig2_vacuum_ipa_coherent", "--validate-only"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in [
        "lambda0 = 1.0",
        "mean_n = 5.0",
        "epsilon = 0.0005",
        "t_end = 25.0",
        "samples = 2001",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line:?} in\n{text}");
    }
}

#[test]
fn large_epsilon_is_rejected() {
    let out = jcipa(&["--epsilon", "0.1", "--validate-only"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("epsilon"));
}

#[test]
fn config_file_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "# comment\nlambda0 = 1.0\nzeta = not-a-number\n").unwrap();
    let out = jcipa(&["--config", path.to_str().unwrap(), "--validate-only"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "scenario = fig1_sqrt_coupling\nlambda0 = 2.0\nsamples = 11\n").unwrap();
    let out = jcipa(&[
        "--config",
        path.to_str().unwrap(),
        "--lambda0",
        "0.5",
        "--validate-only",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("scenario = fig1_sqrt_coupling"));
    assert!(text.contains("lambda0 = 0.5"));
    assert!(text.contains("samples = 11"));
}

#[test]
fn fig1_target_is_sqrt_coupling_inversion() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = run_to(dir.path(), "fig1_sqrt_coupling", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, BASE_HEADER);
    assert_eq!(rows.len(), 1201);
    for r in &rows {
        let t = r[0];
        assert!((r[1] - (4.0 / 3.0 * t.powf(1.5)).cos()).abs() < 1e-12);
        assert!((r[3] - r[1]).abs() < 1e-8);
    }
}

#[test]
fn fig3_has_delta_columns() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = run_to(dir.path(), "fig3_deformed_deltas", &["--samples", "401"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, DEFORMED_HEADER);
    assert_eq!(rows.len(), 401);
    assert!(rows.iter().all(|r| r.len() == 7));
}

#[test]
fn fig6_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = run_to(dir.path(), "fig6_thermal", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, BASE_HEADER);
    assert!(rows.iter().all(|r| r[3] >= -1e-9));
    let meta = std::fs::read_to_string(&path).unwrap();
    assert!(meta.contains("# companion = fig6_thermal_constant.csv"));

    let (header, rows) = read_csv(&dir.path().join("fig6_thermal_constant.csv"));
    assert_eq!(header, BASE_HEADER);
    assert_eq!(rows.len(), 2001);
}

#[test]
fn sweep_rows_scale_with_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = run_to(dir.path(), "sweep", &["--t-end", "10", "--samples", "401"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, SWEEP_HEADER);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][1], 0.0);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn tiny_residual_limit_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (out, path) = run_to(
        dir.path(),
        "fig2_vacuum_ipa_coherent",
        &["--max-residual", "1e-300"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(path.exists());
}
