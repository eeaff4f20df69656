use std::process::{Command, Output};

use rfk_core::{DomainSpec, Point};

fn rfk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfk-lab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn radial_prints_a_csv_line() {
    let o = rfk(&["radial", "--r", "1", "--R", "2", "--hin", "1", "--hout", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("r,R,h_in,h_out,lambda1,sigma"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields.len(), 6);
    let lambda: f64 = fields[4].parse().unwrap();
    let sigma: f64 = fields[5].parse().unwrap();
    assert!(lambda > 0.0 && sigma > 1.0 && sigma < 2.0);
}

#[test]
fn radial_accepts_negative_and_infinite_parameters() {
    let o = rfk(&["radial", "--r", "1", "--R", "2", "--hin", "-1", "--hout", "inf"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fem_and_flow_on_a_domain_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ecc.txt");
    std::fs::write(&path, DomainSpec::eccentric_annulus(1.0, 2.0, Point::new(0.3, 0.0)).unwrap().to_text()).unwrap();
    let p = path.to_str().unwrap();
    let o = rfk(&["fem", "--domain", p, "--hin", "inf", "--hout", "inf", "--mesh", "32x8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("lambda1 = "));

    let csv = dir.path().join("labels.csv");
    let svg = dir.path().join("flow.svg");
    let o = rfk(&[
        "flow", "--domain", p, "--hin", "1", "--hout", "1", "--mesh", "64x16", "--grid", "32",
        "--csv", csv.to_str().unwrap(), "--plot-flow", svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 10);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));

    let prof = dir.path().join("profile.csv");
    let o = rfk(&["profile", "--domain", p, "--side", "outer", "--grid", "128", "--out", prof.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&prof).unwrap().lines().count() > 10);
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "inner_center 0 0\ninner_coeffs 3\nouter_center 0 0\nouter_coeffs 2\n").unwrap();
    let o = rfk(&["fem", "--domain", path.to_str().unwrap(), "--hin", "1", "--hout", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rfk(&["radial", "--r", "2", "--R", "1", "--hin", "1", "--hout", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rfk(&["radial", "--r", "1", "--R", "2", "--hin", "nan", "--hout", "1"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn verify_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(
        &cfg,
        r#"
seed = 1
[resolution]
mesh = [32, 8]
profile_grid = 128
flow_grid = 32
[[family]]
name = "ecc"
kind = "eccentric"
r = 1.0
big_r = 2.0
max_offset = 0.3
regimes = [["inf", 0]]
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = rfk(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 2);
    assert!(out.join("lemmas.csv").exists());

    std::fs::write(&cfg, "seed = 1\nbogus = 3\n").unwrap();
    assert_eq!(rfk(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
