use std::process::{Command, Output};

use qdefcs::harness::csvio::{read_csv, to_csv_string, SCHEMA_LINE};

fn qdefcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdefcs")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let base = ["scan-t", "--q", "0.96", "--q", "0.94", "--t-count", "40", "--t-stop", "5"];
    let one = qdefcs(&[&base[..], &["--threads", "1"]].concat());
    let many = qdefcs(&[&base[..], &["--threads", "4"]].concat());
    let default = qdefcs(&base);
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stdout, default.stdout);
    let text = stdout(&one);
    assert!(text.starts_with(&format!("{SCHEMA_LINE}\nq,t,value,bound,error_bound\n")));
    // t = 0 is dropped from Mandel scans
    assert_eq!(text.lines().count(), 2 + 2 * 39);
}

#[test]
fn emitted_csv_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let o = qdefcs(&["scan-z", "--q", "0.94", "--nr", "6", "--nphi", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 31);
    assert_eq!(to_csv_string(&rows).unwrap(), text);
    assert!(rows[1..].iter().all(|r| r.value < r.bound.unwrap()));
}

#[test]
fn error_bounds_stay_below_tolerance() {
    let o = qdefcs(&["scan-t", "--observable", "variance-ratio", "--phase", "imag", "--t-stop", "1", "--t-count", "25", "--tol", "1e-11"]);
    let rows = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 75);
    assert!(rows.iter().all(|r| r.error_bound <= 1e-11));
}

#[test]
fn json_output() {
    let o = qdefcs(&["scan-t", "--q", "0.98", "--t-count", "3", "--observable", "metric-factor", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["t"], 0.0);
    assert_eq!(v[0]["value"], 1.0);
}

#[test]
fn gup_prints_the_mapping() {
    let o = qdefcs(&["gup", "--alpha", "-1", "--beta", "-0.1111111111111111", "--omega", "0.3333333333333333"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["q"], 0.5);
    assert!((v["effective_frequency"].as_f64().unwrap() - 0.25).abs() < 1e-15);
    assert_eq!(v["minimal_uncertainty"], false);

    let o = qdefcs(&["gup", "--alpha", "-1e-12", "--beta", "-1e-12"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["q"].as_f64().unwrap() - 1.0).abs() < 1e-11);
}

#[test]
fn exit_codes() {
    let mixed = qdefcs(&["gup", "--alpha", "-1", "--beta", "1"]);
    assert_eq!(mixed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mixed.stderr).contains("mixed signs"));

    assert_eq!(qdefcs(&["scan-t", "--t-count", "1"]).status.code(), Some(2));
    assert_eq!(qdefcs(&["scan-t", "--bogus"]).status.code(), Some(2));
    assert_eq!(qdefcs(&["report", "--q", "-0.5"]).status.code(), Some(2));

    let outside = qdefcs(&["scan-t", "--q", "0.5"]);
    assert_eq!(outside.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&outside.stderr).contains("outside the disc"));
    assert_eq!(qdefcs(&["report", "--q", "0.5", "--re", "1.5"]).status.code(), Some(3));
    assert_eq!(qdefcs(&["scan-z", "--q", "1.5"]).status.code(), Some(2));
}

#[test]
fn report_is_json() {
    let o = qdefcs(&["report", "--q", "0.96", "--re", "0.4", "--im", "0.3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["snr_sigma"].as_f64().unwrap() - 0.6423442133191548).abs() < 1e-13);
    let vacuum = qdefcs(&["report", "--q", "0.96"]);
    let v: serde_json::Value = serde_json::from_slice(&vacuum.stdout).unwrap();
    assert!(v["mandel_q"].is_null());
}

#[test]
fn verify_fast_passes() {
    let o = qdefcs(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count() >= 10);
}

#[test]
fn figures_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = qdefcs(&["figures", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let fig1 = read_csv(std::fs::File::open(dir.path().join("fig1_mandel.csv")).unwrap()).unwrap();
    let fig2 = read_csv(std::fs::File::open(dir.path().join("fig2_variance_ratio.csv")).unwrap()).unwrap();
    assert_eq!(fig1.len(), 3 * 199);
    assert_eq!(fig2.len(), 3 * 200);
    assert!(fig1.iter().all(|r| r.value > 0.0));
    assert!(fig2.iter().all(|r| r.value <= 1.0));
}
