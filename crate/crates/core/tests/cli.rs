use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bandwagon::experiments::{read_summaries, read_thresholds, read_traces};
use bandwagon::EstimatorKind;

fn bandwagon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandwagon")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = bandwagon(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

fn first_line(file: &Path) -> String {
    fs::read_to_string(file).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        ok(&["figure4", "--runs", "30", "--samples", "300", "--traces", "--out", &path(dir.path(), run)]);
        ok(&["figure3", "--runs", "30", "--samples", "2000", "--out", &path(dir.path(), &format!("f3{run}"))]);
    }
    for file in ["summary.csv", "traces.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file}");
    }
    for preset in ["none", "weak", "strong"] {
        for file in ["summary.csv", "thresholds.csv"] {
            let a = fs::read(dir.path().join("f3a").join(preset).join(file)).unwrap();
            let b = fs::read(dir.path().join("f3b").join(preset).join(file)).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn output_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "sim");
    ok(&["simulate", "--runs", "5", "--samples", "50", "--estimators", "sample-mean,mle", "--out", &out]);
    let sim = dir.path().join("sim");
    assert_eq!(first_line(&sim.join("traces.csv")), "run_id,estimator,n,value");
    assert_eq!(first_line(&sim.join("summary.csv")), "estimator,n,mean,q05,q95");
    let traces = read_traces(fs::File::open(sim.join("traces.csv")).unwrap()).unwrap();
    assert_eq!(traces.len(), 10);
    assert_eq!(traces[1].estimator, EstimatorKind::Mle);

    let f3 = path(dir.path(), "f3");
    ok(&["figure3", "--schedule", "none", "--runs", "50", "--samples", "20000", "--out", &f3]);
    let f3 = dir.path().join("f3");
    assert_eq!(first_line(&f3.join("thresholds.csv")), "estimator,threshold,n_cross");
    let reports = read_thresholds(fs::File::open(f3.join("thresholds.csv")).unwrap()).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0].n_cross.unwrap() <= reports[1].n_cross.unwrap());
    let summaries = read_summaries(fs::File::open(f3.join("summary.csv")).unwrap()).unwrap();
    assert_eq!(summaries[0].points.last().unwrap().n, 20_000);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"runs": 4, "samples": 10, "schedule": "strong", "estimators": "affine-weighted"}"#).unwrap();
    let out = path(dir.path(), "out");
    ok(&["simulate", "--config", cfg.to_str().unwrap(), "--runs", "3", "--out", &out]);
    let traces = read_traces(fs::File::open(dir.path().join("out/traces.csv")).unwrap()).unwrap();
    assert_eq!(traces.len(), 3);
    assert!(traces.iter().all(|t| t.estimator == EstimatorKind::AffineWeighted));
    assert_eq!(traces[0].points.last().unwrap().0, 10);

    fs::write(&cfg, r#"{"runz": 4}"#).unwrap();
    assert!(!bandwagon(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out]).status.success());
}

#[test]
fn lambda_estimation_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = path(dir.path(), "data");
    ok(&["simulate", "--bins", "40", "--samples", "60", "--schedule", "strong", "--out", &data]);
    let csv = dir.path().join("data/bins.csv");
    assert_eq!(first_line(&csv), "item,bin,index,rating");
    let fit = path(dir.path(), "fit");
    ok(&["estimate-lambda", "--input", csv.to_str().unwrap(), "--samples", "200", "--out", &fit]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit/fit.json")).unwrap()).unwrap();
    let a = report["curve"]["a"].as_f64().unwrap();
    let b = report["curve"]["b"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&a) && (0.5..=0.999).contains(&b));
    assert!(report["log_likelihood"].as_f64().unwrap().is_finite());
    let table = fs::read_to_string(dir.path().join("fit/lambda.csv")).unwrap();
    assert_eq!(table.lines().count(), 201);

    ok(&["estimate-lambda", "--input", csv.to_str().unwrap(), "--two-stage", "--mode", "plugin", "--out", &fit]);
    let table = fs::read_to_string(dir.path().join("fit/lambda.csv")).unwrap();
    assert_eq!(table.lines().count(), 61);
    assert!(table.lines().nth(1).unwrap().starts_with("1,1.0,1.0"));
}

#[test]
fn theory_and_oracle_commands() {
    let dir = tempfile::tempdir().unwrap();
    let th = path(dir.path(), "th");
    ok(&["theory", "--schedule", "none", "--samples", "1000", "--out", &th]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("th/theory.json")).unwrap()).unwrap();
    assert_eq!(report["azuma_uniform"], 600);
    assert_eq!(report["consistency"]["verdict"], "Consistent");
    assert_eq!(
        first_line(&dir.path().join("th/theory.csv")),
        "n,sample_mean_mse,asymptotic_partial,affine_uniform_var,affine_weighted_var"
    );

    ok(&["theory", "--schedule", "none", "--samples", "100", "--runs", "2000", "--overlay", "--out", &th]);
    let overlay = fs::read_to_string(dir.path().join("th/overlay.csv")).unwrap();
    assert_eq!(overlay.lines().next().unwrap(), "n,empirical,theory,z");
    for line in overlay.lines().skip(1) {
        let z: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(z.abs() <= 4.0, "{line}");
    }

    let or = path(dir.path(), "or");
    ok(&["oracle", "--schedule", "explicit:1,0.5", "--samples", "2", "--out", &or]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("or/oracle.json")).unwrap()).unwrap();
    assert!((report["enumerated_mse"].as_f64().unwrap() - 0.18).abs() < 1e-15);
    assert!(!bandwagon(&["oracle", "--samples", "17", "--out", &or]).status.success());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x");
    for args in [
        vec!["simulate", "--p", "1.5", "--out", &out],
        vec!["simulate", "--schedule", "geom:1.5", "--out", &out],
        vec!["figure4", "--estimators", "median", "--out", &out],
        vec!["figure4", "--clip", "0", "--out", &out],
        vec!["estimate-lambda", "--input", "/nonexistent.csv", "--out", &out],
    ] {
        let res = bandwagon(&args);
        assert!(!res.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&res.stderr).starts_with("error"));
    }
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "item,bin,index,rating\n0,0,1,1\n0,0,3,0\n").unwrap();
    assert!(!bandwagon(&["estimate-lambda", "--input", bad.to_str().unwrap(), "--out", &out]).status.success());
}
