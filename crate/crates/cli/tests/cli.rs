//! End-to-end checks of the binary: flags, files, exit codes.

use std::path::Path;
use std::process::Command;

fn focklab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_focklab"))
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("read {file}: {e}"))
}

#[test]
fn ml_eval_writes_report_with_expected_value() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["ml-eval", "--m", "1", "--z", "2"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let body = read(tmp.path(), "ml-eval.report.json");
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["schema"], 1);
    let re = v["result"]["value"][0].as_f64().unwrap();
    assert!((re - 2.0f64.exp()).abs() < 1e-10);
}

#[test]
fn kernel_command_reports_hermitian_residual() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["kernel", "--m", "2", "--z", "1+1i", "--w", "0.5-0.25i"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "kernel.report.json")).unwrap();
    assert!(v["result"]["hermitian_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn compress_norm_matches_weyl_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["compress-norm", "--m", "1", "--g", "0,1", "--N", "64"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "compress-norm.report.json")).unwrap();
    let sigma = v["result"]["sigma"].as_f64().unwrap();
    assert!((sigma - 1.6487212707001282).abs() / 1.6487212707 < 0.02);
    let ratio = v["result"]["sigma_over_exact"].as_f64().unwrap();
    assert!(ratio <= 1.0 + 1e-9 && ratio >= 0.98);
    // curve file exists with the fixed header
    let curve = read(tmp.path(), "compress-norm.curve.csv");
    assert!(curve.starts_with("parameter,value,est_err"));
}

#[test]
fn classify_dichotomy_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["classify", "--m", "2", "--g", "0,0,0,1"])
        .args(["--out", tmp.path().to_str().unwrap(), "--name", "z3"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&read(tmp.path(), "z3.report.json")).unwrap();
    assert_eq!(v["result"]["theorem_verdict"], "unbounded");
    assert_eq!(v["result"]["consistent"], true);

    let st = focklab()
        .args(["classify", "--m", "2", "--g", "0,0,1"])
        .args(["--out", tmp.path().to_str().unwrap(), "--name", "z2"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&read(tmp.path(), "z2.report.json")).unwrap();
    assert_eq!(v["result"]["theorem_verdict"], "bounded");
    assert_eq!(v["result"]["consistent"], true);
}

#[test]
fn thread_cap_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: Option<&str>| {
        let mut cmd = focklab();
        if let Some(t) = threads {
            cmd.env("FOCKLAB_THREADS", t);
        }
        let st = cmd
            .args(["berezin", "--m", "1", "--g", "0,1", "--points", "5"])
            .args(["--out", tmp.path().to_str().unwrap(), "--name", name])
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read(tmp.path().join(format!("{name}.report.json"))).unwrap()
    };
    let a = run("par", None);
    let b = run("seq", Some("1"));
    assert_eq!(a, b, "thread cap changed report contents");
}

#[test]
fn contradicting_thresholds_exit_2() {
    // An unbounded symbol with an unreachable growth cutoff: the evidence
    // bundle contradicts nothing physically, but the calibrated rule fails,
    // which is exactly what exit code 2 reports.
    let tmp = tempfile::tempdir().unwrap();
    let th = tmp.path().join("strict.toml");
    std::fs::write(
        &th,
        "plateau_ratio = 1.05\nblowup_ratio = 5.0\nproduct_flat_log = 0.5\n\
         product_growth_log = 1.0e9\nf_stress_growth_log = 0.3\n\
         rate_ratio_lo = 0.8\nrate_ratio_hi = 1.25\n",
    )
    .unwrap();
    let st = focklab()
        .args(["classify", "--m", "2", "--g", "0,0,0,1"])
        .args(["--thresholds", th.to_str().unwrap()])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    let v: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "classify.report.json")).unwrap();
    assert_eq!(v["result"]["consistent"], false);
}

#[test]
fn bad_flags_exit_64() {
    let st = focklab().args(["classify", "--bogus"]).status().unwrap();
    assert_eq!(st.code(), Some(64));
    let st = focklab().args(["no-such-command"]).status().unwrap();
    assert_eq!(st.code(), Some(64));
}

#[test]
fn numeric_failure_exits_1_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    // m < 1 is outside the weight family
    let out = focklab()
        .args(["ml-eval", "--m", "0.5", "--z", "1"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let diag: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(diag["error"].as_str().unwrap().contains("m"));
}

#[test]
fn envelope_command_runs_eq8() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["envelope", "--lemma", "eq8", "--m", "1"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "envelope.report.json")).unwrap();
    assert_eq!(v["result"]["pass"], true);
}

#[test]
fn laplace_check_command_reports_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["laplace-check", "--m", "1", "--d", "2", "--a", "0.5"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "laplace-check.report.json")).unwrap();
    assert_eq!(v["result"]["rate"]["pass_h"], true);
    assert!(v["result"]["laplace_rel_gap"].as_f64().unwrap() < 0.05);
}

#[test]
fn berezin_ray_sweep_writes_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let st = focklab()
        .args(["berezin", "--m", "1", "--g", "0,1", "--points", "5"])
        .args(["--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let curve = read(tmp.path(), "berezin.curve.csv");
    let lines: Vec<&str> = curve.lines().collect();
    assert_eq!(lines[0], "parameter,value,est_err");
    assert!(lines.len() >= 5);
    // u = e^z, v = e^{-z} at m = 1: log product ≡ 2
    for line in &lines[1..] {
        let cols: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!((cols[1] - 2.0).abs() < 1e-5, "log product {}", cols[1]);
    }
}
