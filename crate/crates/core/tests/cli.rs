use std::path::Path;
use std::process::Command;

fn run(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_backscatter"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

#[test]
fn missing_beta_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(dir.path(), &["counterexample", "--n", "2"]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("beta"));
}

#[test]
fn unsupported_order_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), &["born", "--n", "2", "--beta", "1", "--order", "4"]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), &["counterexample", "--n", "2", "--beta", "1", "--set", "pv.bogus=1"]);
    assert_eq!(code, 1);
}

#[test]
fn starved_fit_window_is_a_numerical_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(dir.path(), &["counterexample", "--n", "2", "--beta", "1", "--points", "4"]);
    assert_eq!(code, 2, "{text}");
}

#[test]
fn corrupted_weights_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(
        dir.path(),
        &["verify", "--suite", "sphere", "--set", "verify.corrupt_weights=true"],
    );
    assert_eq!(code, 3, "{text}");
    let (code, _) = run(dir.path(), &["verify", "--suite", "sphere"]);
    assert_eq!(code, 0);
}

#[test]
fn single_suite_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(dir.path(), &["verify", "--suite", "pv", "--seed", "3"]);
    assert_eq!(code, 0, "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    let suites = report["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["name"], "pv");
    assert_eq!(report["seed"], 3);
}

#[test]
fn serial_counterexample_is_reproducible_and_refittable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["counterexample", "--n", "2", "--beta", "1", "--points", "12", "--serial"];
    assert_eq!(run(a.path(), &args).0, 0);
    assert_eq!(run(b.path(), &args).0, 0);
    for name in ["counterexample_n2_beta1.csv", "counterexample_n2_beta1.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between serial runs");
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("counterexample_n2_beta1.json")).unwrap()).unwrap();
    let fitted = report["entries"][0]["fitted"].as_f64().unwrap();

    let (code, text) = run(
        a.path(),
        &["decay-fit", "--input", "counterexample_n2_beta1.csv", "--column", "s1", "--fit-min", "8", "--fit-max", "512"],
    );
    assert_eq!(code, 0, "{text}");
    let refit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("decay_fit.json")).unwrap()).unwrap();
    let e = refit["fit"]["exponent"].as_f64().unwrap();
    assert!((e - fitted).abs() < 1e-12, "{e} vs {fitted}");
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "n = 2\nbeta = 1\npoints = 12\n").unwrap();
    let (code, text) = run(dir.path(), &["counterexample", "--config", "run.conf", "--points", "4"]);
    assert_eq!(code, 2, "flag should override the file: {text}");
}
