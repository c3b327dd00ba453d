//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn needlets(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_needlets"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn window_check_passes_for_valid_scale() {
    let out = needlets(&["window-check", "--B", "2.0", "--ell-max", "128"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("partition-of-unity defect"));
    assert!(text.contains("ok"));
}

#[test]
fn window_check_rejects_invalid_scale() {
    let out = needlets(&["window-check", "--B", "0.9", "--ell-max", "64"]);
    assert!(!out.status.success());
}

fn write_tiny_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
            "test_function": "f2",
            "b_scale": 2.0,
            "n_values": [64],
            "p": 2,
            "sigma_fracs": [0.25],
            "replicates": 3,
            "base_seed": 11,
            "grid_size": 512
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn simulate_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let json1 = dir.path().join("report1.json");
    let json2 = dir.path().join("report2.json");
    let csv1 = dir.path().join("report1.csv");
    let csv2 = dir.path().join("report2.csv");

    for (json, csv) in [(&json1, &csv1), (&json2, &csv2)] {
        let out = needlets(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
            "--quiet",
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }

    // Identical config + seed means byte-identical CSV.
    assert_eq!(fs::read(&csv1).unwrap(), fs::read(&csv2).unwrap());
    let csv = fs::read_to_string(&csv1).unwrap();
    assert!(csv.starts_with(
        "test_fn,n,J_n,sigma_frac,p,R,global_mean,global_se,linear_mean,linear_se,levels_selected_mode"
    ));
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("f2,64,6,0.25,2,3,"));
}

#[test]
fn report_converts_json_to_the_same_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let json = dir.path().join("report.json");
    let csv_direct = dir.path().join("direct.csv");
    let out = needlets(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv_direct.to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success());

    let out = needlets(&["report", "--in", json.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), fs::read_to_string(&csv_direct).unwrap());

    // JSON passthrough parses back.
    let out = needlets(&["report", "--in", json.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"cells\""));
}

#[test]
fn seed_override_changes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let run = |seed: &str| {
        let csv = dir.path().join(format!("s{seed}.csv"));
        let out = needlets(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            seed,
            "--csv",
            csv.to_str().unwrap(),
            "--out",
            dir.path().join(format!("s{seed}.json")).to_str().unwrap(),
            "--quiet",
        ]);
        assert!(out.status.success());
        fs::read_to_string(&csv).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn fit_reads_xy_csv_and_emits_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fit.json");
    fs::write(&config, r#"{ "b_scale": 2.0, "p": 2, "j_upper": 4 }"#).unwrap();

    // Noiseless cos(4x) samples, with a header row.
    let data = dir.path().join("data.csv");
    let mut rows = String::from("x,y\n");
    for i in 0..64 {
        let x = 2.0 * std::f64::consts::PI * (i as f64 + 0.21) / 64.0;
        rows.push_str(&format!("{},{}\n", x, (4.0 * x).cos()));
    }
    fs::write(&data, rows).unwrap();

    let coeffs = dir.path().join("coeffs.csv");
    let report = dir.path().join("report.json");
    let out = needlets(&[
        "fit",
        "--config",
        config.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        coeffs.to_str().unwrap(),
        "--report-out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&coeffs).unwrap();
    assert!(text.starts_with("j,k,beta_hat,tau"));
    // Level 2 fires on a clean frequency-4 signal.
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kept levels"), "stderr: {stderr}");

    let report_text = fs::read_to_string(&report).unwrap();
    assert!(report_text.contains("\"levels\""));
    let parsed: serde_json::Value = serde_json::from_str(&report_text).unwrap();
    let kept: Vec<u64> = parsed["levels"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|l| l["keep"].as_bool().unwrap())
        .map(|l| l["j"].as_u64().unwrap())
        .collect();
    assert!(kept.contains(&2), "level 2 not kept: {kept:?}");
}

#[test]
fn fit_rejects_malformed_data() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fit.json");
    fs::write(&config, r#"{ "b_scale": 2.0, "p": 2 }"#).unwrap();
    let data = dir.path().join("data.csv");
    fs::write(&data, "x,y\n1.0,2.0\nnot,numeric\n").unwrap();
    let out = needlets(&[
        "fit",
        "--config",
        config.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}
