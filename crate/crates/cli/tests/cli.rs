use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn conewave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(args)
        .arg("--output.directory")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn unknown_keys_fail_before_any_write() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"solver": {"tolerance": 1e-6}, "colour": "red"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(["solve", "--config"])
        .arg(&cfg)
        .args(["--grid.spacing", "2", "--output.directory"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    for key in ["solver.tolerance", "colour", "grid.spacing"] {
        assert!(err.contains(key), "{err}");
    }
    assert!(!out_dir.exists());
}

#[test]
fn bounds_prints_both_thresholds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(&["bounds", "--p", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("wellposed_s_min=0, s_sob=0.1666"), "{}", text(&out.stdout));
    assert!(tmp.path().join("bounds.csv").exists());
}

#[test]
fn first_spectrum_row_is_the_closed_form_cell_average() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(&["pseudofn", "--lambda", "-2", "--grid", "256:65536"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("xi,re,im"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // (2π)^2 e^{-iπ} / Γ(2) times the mean of ξ over [0, Δξ]
    let dxi = 256.0 / 65536.0;
    let want = -4.0 * PI * PI * dxi / 2.0;
    assert!((row[0] - dxi / 2.0).abs() < 1e-18);
    assert!((row[1] - want).abs() <= 1e-13 * want.abs(), "{} vs {want}", row[1]);
    assert!(row[2].abs() <= 1e-13 * want.abs());
}

#[test]
fn stationary_solve_meets_the_residual_target() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(
        &["solve", "--solver.kappa", "-6", "--solver.T", "0.5", "--data.kind", "stationary", "--lambda", "-2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("residual.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,absolute,relative"));
    let worst = lines.map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn blow_up_exits_with_the_numerical_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(
        &[
            "solve", "--solver.kappa", "1e6", "--solver.T", "5", "--grid", "8:64",
            "--data.kind", "indicator", "--data.band", "[0, 4]",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stderr).contains("wave"), "{}", text(&out.stderr));
}

#[test]
fn infeasible_dimension_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(&["radial-nd", "--p", "2", "--radial.n", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("n = 5"));
}

#[test]
fn radial_report_prints_both_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(&["radial-nd"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let s = text(&out.stdout);
    assert!(s.contains("kappa = -λ(λ+n-2)") && s.contains("-λ(λ-1)"), "{s}");
}

#[test]
fn plot_rejects_empty_and_mislabelled_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(["plot", "--kind", "spectrum", "--input"])
        .arg(&empty)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let wrong = tmp.path().join("wrong.csv");
    fs::write(&wrong, "x,y\n1,2\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(["plot", "--kind", "exponent-profile", "--input"])
        .arg(&wrong)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("x0,s_est,fit_quality"));
}

#[test]
fn plots_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = conewave(&["pseudofn", "--grid", "16:512", "--output.formats", r#"["csv","svg"]"#], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let first = fs::read(tmp.path().join("spectrum.svg")).unwrap();
    let csv = tmp.path().join("spectrum.csv");
    for target in ["a.svg", "b.svg"] {
        let status = Command::new(env!("CARGO_BIN_EXE_conewave"))
            .args(["plot", "--kind", "spectrum", "--input"])
            .arg(&csv)
            .arg("--output")
            .arg(tmp.path().join(target))
            .output()
            .unwrap();
        assert!(status.status.success());
    }
    let a = fs::read(tmp.path().join("a.svg")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b.svg")).unwrap());
    let head = text(&first);
    assert!(head.contains("viewBox=\"0 0 960 540\"") && head.contains("config-sha256="));
    assert!(head.contains("fitted slope 1.0"), "slope annotation missing");
}

#[test]
fn bad_thread_counts_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(["bounds", "--output.directory"])
        .arg(tmp.path())
        .env("CONEWAVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
