use std::path::Path;
use std::process::{Command, Output};

use rodshape::{response, Profile};
use rodshape_cli::commands::Metrics;
use rodshape_cli::io::{read_dataset, write_json};
use rodshape_cli::scenarios::{example1, example2};
use rodshape_cli::RunConfig;

fn rodshape(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rodshape"));
    cmd.args(args).arg("--quiet").arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("run rodshape")
}

fn write_config(dir: &Path, config: &RunConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    write_json(&path, config).unwrap();
    path
}

fn rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn forward_writes_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let c1 = write_config(dir.path(), &example1(0.0));
    assert!(rodshape(&["forward"], Some(&c1), &dir.path().join("ex1")).status.success());
    assert_eq!(rows(&dir.path().join("ex1/dataset.csv")), 12);

    let c2 = write_config(dir.path(), &example2(2, 0.0));
    assert!(rodshape(&["forward"], Some(&c2), &dir.path().join("omega2")).status.success());
    assert_eq!(rows(&dir.path().join("omega2/dataset.csv")), 81);
}

#[test]
fn noiseless_dataset_equals_the_forward_response() {
    let dir = tempfile::tempdir().unwrap();
    let config = example1(0.0);
    let path = write_config(dir.path(), &config);
    assert!(rodshape(&["forward"], Some(&path), dir.path()).status.success());
    let data = read_dataset(&dir.path().join("dataset.csv")).unwrap();
    let profile = Profile::new(config.profile.clone().unwrap()).unwrap();
    for sample in data {
        assert_eq!(sample, response(&profile, &config.params, sample.omega).unwrap());
    }
}

#[test]
fn invert_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &example1(0.0));
    for cmd in ["forward", "invert", "compare"] {
        let out = rodshape(&[cmd], Some(&path), dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["n_star"], 1);
    assert_eq!(report["eigen"]["count"], 1000);
    assert_eq!(report["eigen"]["mu_first"].as_array().unwrap().len(), 10);
    assert_eq!(report["config"]["inversion"]["alpha"], 1e-3);
    assert_eq!(rows(&dir.path().join("profile.csv")), 201);
    let metrics: Metrics = serde_json::from_slice(&std::fs::read(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert!(metrics.sup < 1e-8);
    assert_eq!(metrics.points, 201);
}

#[test]
fn identical_profiles_compare_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = example2(1, 0.0);
    let profile = Profile::new(config.profile.clone().unwrap()).unwrap();
    let mut csv = String::from("x,F\n");
    for i in 0..=50 {
        let x = std::f64::consts::PI * i as f64 / 50.0;
        csv.push_str(&format!("{x},{}\n", profile.area(x)));
    }
    std::fs::write(dir.path().join("profile.csv"), csv).unwrap();
    let path = write_config(dir.path(), &config);
    assert!(rodshape(&["compare"], Some(&path), dir.path()).status.success());
    let metrics: Metrics = serde_json::from_slice(&std::fs::read(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics, Metrics { sup: 0.0, l2_mean: 0.0, points: 51 });
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // malformed dataset
    std::fs::write(d.join("dataset.csv"), "omega,f_tilde,resonant\n1.0,oops,0\n").unwrap();
    let path = write_config(d, &example1(0.0));
    let out = rodshape(&["invert"], Some(&path), d);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");

    // no regular samples left for the endpoint fit
    std::fs::write(d.join("dataset.csv"), "omega,f_tilde,resonant\n1.0,,1\n2.0,,1\n").unwrap();
    let out = rodshape(&["invert"], Some(&path), d);
    assert_eq!(out.status.code(), Some(4));

    // missing config, unknown example, F0 mismatch
    assert_eq!(rodshape(&["forward"], None, d).status.code(), Some(2));
    assert_eq!(rodshape(&["example", "5"], None, d).status.code(), Some(2));
    let mut bad = example1(0.0);
    bad.params.f0 = 2.0;
    let path = write_config(d, &bad);
    assert_eq!(rodshape(&["forward"], Some(&path), d).status.code(), Some(2));

    // recovered grid outside [0, pi]
    std::fs::write(d.join("profile.csv"), "x,F\n0,1\n4,1\n").unwrap();
    let path = write_config(d, &example1(0.0));
    assert_eq!(rodshape(&["compare"], Some(&path), d).status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &example1(1e-6));
    let read = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        assert!(rodshape(&["forward", "--seed", seed], Some(&path), &out).status.success());
        std::fs::read(out.join("dataset.csv")).unwrap()
    };
    assert_eq!(read("9", "a"), read("9", "b"));
    assert_ne!(read("9", "a"), read("10", "c"));
}
