//! End-to-end checks of the `adlab` binary: exit-code contract, byte-level
//! determinism, report round-trips, and the bundled scenario files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adlab_cli::report::ReportDoc;

fn adlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adlab"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .canonicalize()
        .expect("bundled scenarios directory")
}

fn run_ok(args: &[&str]) -> Output {
    let output = adlab().args(args).output().expect("spawn adlab");
    assert!(
        output.status.success(),
        "adlab {args:?} failed:\n{}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let output = adlab().args(args).output().expect("spawn adlab");
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    (output.status.code().expect("exit code"), stderr)
}

fn read_report(path: &Path) -> ReportDoc {
    let text = std::fs::read_to_string(path).expect("report file");
    ReportDoc::parse(&text).expect("report parses")
}

#[test]
fn list_models_names_the_whole_zoo() {
    let output = run_ok(&["list-models"]);
    let text = String::from_utf8_lossy(&output.stdout).into_owned();
    for name in [
        "driven_two_level",
        "rotating_field",
        "linear_interpolation",
        "grover_adiabatic",
        "dual_of",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
    assert!(text.contains("n_qubits in 1..=6"));
    assert!(text.contains("[model.base]"));
}

#[test]
fn missing_and_malformed_configs_exit_2() {
    let (code, _) = exit_code(&["run", "/nonexistent/nowhere.toml"]);
    assert_eq!(code, 2);

    let dir = tempfile::tempdir().unwrap();
    let bad_model = dir.path().join("bad_model.toml");
    std::fs::write(
        &bad_model,
        "total_time = 1.0\nsteps = 10\n[model]\nname = \"mystery\"\n",
    )
    .unwrap();
    let (code, stderr) = exit_code(&["run", bad_model.to_str().unwrap()]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("mystery"));

    let bad_level = dir.path().join("bad_level.toml");
    std::fs::write(
        &bad_level,
        "total_time = 1.0\nsteps = 100\n[model]\nname = \"rotating_field\"\neps = 1.0\n[initial_state]\nlevel = 7\n",
    )
    .unwrap();
    let (code, stderr) = exit_code(&["run", bad_level.to_str().unwrap()]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("level 7"));
}

#[test]
fn coarse_grid_exits_3_and_names_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("coarse.toml");
    std::fs::write(
        &config,
        "total_time = 200.0\nsteps = 20\n[model]\nname = \"rotating_field\"\neps = 1.0\n",
    )
    .unwrap();
    let (code, stderr) = exit_code(&[
        "run",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(
        stderr.contains("per-step phase"),
        "guard not named: {stderr}"
    );
    assert!(stderr.contains("steps"), "no suggestion: {stderr}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(
        &config,
        r#"
label = "tiny"
total_time = 20.0
steps = 2000

[model]
name = "driven_two_level"
eps = 1.0
v = 0.1
omega0 = 1.0
"#,
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&[
            "run",
            config.to_str().unwrap(),
            "--output-dir",
            out.to_str().unwrap(),
        ]);
    }
    for name in ["tiny.report.txt", "tiny.timeseries.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // The report document round-trips losslessly.
    let report = read_report(&out_a.join("tiny.report.txt"));
    let rendered = report.to_text();
    let reparsed = ReportDoc::parse(&rendered).unwrap();
    assert_eq!(reparsed, report);
    assert_eq!(
        std::fs::read_to_string(out_a.join("tiny.report.txt")).unwrap(),
        rendered
    );
}

#[test]
fn bundled_resonance_scenario_reports_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios_dir().join("s1_rabi_resonance.toml");
    run_ok(&[
        "run",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    let report = read_report(&dir.path().join("s1_rabi_resonance.report.txt"));

    let metric = report.get_f64("diag.metric.0_1").unwrap();
    assert!(metric <= 0.025, "metric {metric}");
    let final_p1 = report.get_f64("diag.prob.final.1").unwrap();
    assert!(final_p1 >= 0.95, "final P_1 {final_p1}");
    assert_eq!(report.get_bool("invariants.norm_defect.pass"), Some(true));
    assert_eq!(
        report.get_bool("invariants.quadrature_consistency.pass"),
        Some(true)
    );
    assert_eq!(report.get_bool("invariants.bound_validity.pass"), Some(true));

    let timeseries =
        std::fs::read_to_string(dir.path().join("s1_rabi_resonance.timeseries.csv")).unwrap();
    let header = timeseries.lines().next().unwrap();
    assert_eq!(
        header,
        "t,p_0,p_1,abs_a_0,abs_a_1,drift_0,drift_1,re_a_0_1,im_a_0_1,re_a_1_0,im_a_1_0"
    );
}

#[test]
fn bundled_dual_scenario_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios_dir().join("s2_dual_rotating.toml");
    run_ok(&[
        "run",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);

    let base = read_report(&dir.path().join("s2_dual_rotating.base.report.txt"));
    let dual = read_report(&dir.path().join("s2_dual_rotating.report.txt"));

    let base_min_p0 = base.get_f64("diag.prob.min.0").unwrap();
    let dual_min_p0 = dual.get_f64("diag.prob.min.0").unwrap();
    assert!(base_min_p0 >= 0.99, "base stayed at {base_min_p0}");
    assert!(dual_min_p0 <= 0.9, "dual only dropped to {dual_min_p0}");

    let base_metric = base.get_f64("diag.metric.0_1").unwrap();
    let dual_metric = dual.get_f64("diag.metric.0_1").unwrap();
    assert!(dual_metric <= 2.0 * base_metric);

    let base_drift = base.get_f64("diag.drift.min.0").unwrap();
    assert!(base_drift <= 0.01);
}

#[test]
fn bundled_search_scenarios_report_schedule_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["s5_grover3.toml", "s5_grover4.toml"] {
        let config = scenarios_dir().join(name);
        run_ok(&[
            "run",
            config.to_str().unwrap(),
            "--output-dir",
            dir.path().to_str().unwrap(),
        ]);
    }
    let three = read_report(&dir.path().join("s5_grover3.report.txt"));
    let residual = three.get_f64("diag.selection_rule.max_residual").unwrap();
    assert!(residual <= 1e-8);
    let gap = three.get_f64("diag.min_gap.value").unwrap();
    assert!((gap - 1.0 / 8f64.sqrt()).abs() <= 1e-6);

    let four = read_report(&dir.path().join("s5_grover4.report.txt"));
    assert!(four.get_f64("diag.selection_rule.max_residual").unwrap() <= 1e-8);
    // Schedule-only run: no evolution artifacts.
    assert!(four.get_f64("diag.prob.final.0").is_none());
    assert!(!dir.path().join("s5_grover4.timeseries.csv").exists());
}

#[test]
fn sweep_emits_rows_and_slope_footer() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios_dir().join("s3_lz_sweep.toml");
    run_ok(&[
        "sweep",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    let table = std::fs::read_to_string(dir.path().join("s3_lz_sweep.sweep.csv")).unwrap();
    let data_rows: Vec<&str> = table
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .collect();
    assert_eq!(data_rows.len(), 4);

    let slope_line = table
        .lines()
        .find(|l| l.starts_with("# slope max_a_0_1"))
        .expect("slope footer present");
    let slope: f64 = slope_line.rsplit('=').next().unwrap().trim().parse().unwrap();
    assert!((slope + 1.0).abs() <= 0.01, "slope {slope}");
}

#[test]
fn driven_sweep_zero_counts_double_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenarios_dir().join("s4_resonant_sweep.toml");
    run_ok(&[
        "sweep",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    let table = std::fs::read_to_string(dir.path().join("s4_resonant_sweep.sweep.csv")).unwrap();
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let zeros_col = header.iter().position(|h| *h == "zeros_0_1").unwrap();
    let max_a_col = header.iter().position(|h| *h == "max_a_0_1").unwrap();
    let counts: Vec<f64> = lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(zeros_col).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 4);
    for pair in counts.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!(
            (1.0..=3.0).contains(&ratio),
            "zero counts {counts:?} should roughly double per row"
        );
    }
    // The oscillation amplitude itself is pinned by the drive, not by T.
    let amplitudes: Vec<f64> = table
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(max_a_col).unwrap().parse().unwrap())
        .collect();
    for a in amplitudes {
        assert!((a - 0.02).abs() <= 0.002, "max_a {a}");
    }
}

#[test]
fn explicit_initial_amplitudes_are_accepted_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("amps.toml");
    std::fs::write(
        &config,
        r#"
total_time = 20.0
steps = 2000

[model]
name = "driven_two_level"
eps = 1.0
v = 0.1
omega0 = 1.0

[initial_state]
amplitudes = [[0.6, 0.0], [0.0, 0.8]]
"#,
    )
    .unwrap();
    run_ok(&[
        "run",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    let report = read_report(&dir.path().join("amps.report.txt"));
    let p0 = report.get_f64("diag.prob.final.0").unwrap();
    let p1 = report.get_f64("diag.prob.final.1").unwrap();
    assert!((p0 + p1 - 1.0).abs() <= 1e-8);

    let unnormalized = dir.path().join("unnorm.toml");
    std::fs::write(
        &unnormalized,
        r#"
total_time = 20.0
steps = 2000

[model]
name = "driven_two_level"
eps = 1.0
v = 0.1
omega0 = 1.0

[initial_state]
amplitudes = [[0.6, 0.0], [0.0, 0.9]]
"#,
    )
    .unwrap();
    let (code, stderr) = exit_code(&["run", unnormalized.to_str().unwrap()]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("not normalized"));
}

#[test]
fn single_entry_sweep_has_no_footer() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("single.toml");
    std::fs::write(
        &config,
        r#"
total_time = 20.0
steps = 2000

[model]
name = "driven_two_level"
eps = 1.0
v = 0.1
omega0 = 1.0

[sweep]
total_times = [20.0]
"#,
    )
    .unwrap();
    run_ok(&[
        "sweep",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    let table = std::fs::read_to_string(dir.path().join("single.sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2, "header plus one row:\n{table}");
    assert!(!table.contains("# slope"));
}

#[test]
fn sweep_requires_ascending_times() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("desc.toml");
    std::fs::write(
        &config,
        r#"
total_time = 20.0
steps = 2000

[model]
name = "driven_two_level"
eps = 1.0
v = 0.1
omega0 = 1.0

[sweep]
total_times = [40.0, 20.0]
"#,
    )
    .unwrap();
    let (code, stderr) = exit_code(&["sweep", config.to_str().unwrap()]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("ascending"));
}
