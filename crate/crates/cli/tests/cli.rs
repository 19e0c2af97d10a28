use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use vdl_core::barenblatt::BarenblattProfile;
use vdl_core::solver::{write_binary, FieldState, Grid1D, RunMetadata};
use vdl_core::GasModel;

fn vdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL: &str = r#"
gamma = 2.0
mass = 1.0

[grid]
n_cells = 200

[solver]
t_end = 0.5

[schedule]
count = 4
"#;

fn simulate(dir: &Path, config: &str) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("run");
    vdl(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn simulate_writes_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), SMALL);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("run");
    let snaps: Vec<_> = fs::read_dir(run.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 4);
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(run.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["gamma"], 2.0);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert!(meta["steps"].as_u64().unwrap() > 0);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    let m0 = summary["initial_mass"].as_f64().unwrap();
    let m1 = summary["final_mass"].as_f64().unwrap();
    assert!((m1 - m0).abs() < 1e-10 * m0, "{m0} {m1}");
    assert_eq!(summary["final_time"], 0.5);
}

#[test]
fn minimal_run_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "gamma = 2.0\nmass = 1.0\n[grid]\nn_cells = 800\n[solver]\nt_end = 100.0\n";
    let o = simulate(dir.path(), cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("run");
    assert_eq!(fs::read_dir(run.join("snapshots")).unwrap().count(), 40);
    assert_eq!(fs::read_to_string(run.join("config.toml")).unwrap(), cfg);

    let o = vdl(&["rates", "--run", run.to_str().unwrap(), "--norms", "l1"]);
    assert!(
        matches!(code(&o), 0 | 1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value =
        serde_json::from_str(&fs::read_to_string(run.join("verdicts.json")).unwrap()).unwrap();
    assert_eq!(v[0]["norm"], "l1");
    assert!((v[0]["predicted"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn simulate_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&simulate(a.path(), SMALL)), 0);
    assert_eq!(code(&simulate(b.path(), SMALL)), 0);
    for name in ["snap_0000.vdl", "snap_0003.vdl"] {
        let x = fs::read(a.path().join("run/snapshots").join(name)).unwrap();
        let y = fs::read(b.path().join("run/snapshots").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn simulate_rejects_bad_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &SMALL.replace("gamma = 2.0", "gamma = 0.9"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma"));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn simulate_rejects_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(
        dir.path(),
        &SMALL.replace("t_end = 0.5", "t_end = 0.5\ncfl_typo = 0.3"),
    );
    assert_eq!(code(&o), 2);
}

/// Run directory whose grid lies far outside the profile support, so the
/// distances reduce to norms of the constant density `(1 + t)^(-0.2)`.
fn synthetic_run(dir: &Path, gamma: f64) {
    let gas = GasModel::new(gamma).unwrap();
    let grid = Grid1D::new(1.0e4, 1.0e4 + 10.0, 10).unwrap();
    let config = json!({
        "gamma": gamma,
        "mass": 1.0,
        "grid": { "n_cells": 10, "half_width": 1.0e4 + 10.0 },
    });
    let profile = BarenblattProfile::new(gas, 1.0).unwrap();
    assert!(profile.support_radius(1.0e4) < grid.x_min());
    let mut meta = RunMetadata::new(&gas, grid, &config).unwrap();
    meta.steps = Some(0);
    fs::create_dir_all(dir.join("snapshots")).unwrap();
    fs::write(
        dir.join("metadata.json"),
        serde_json::to_string(&meta).unwrap(),
    )
    .unwrap();
    for i in 0..20 {
        let t = 10f64.powf(1.0 + 3.0 * i as f64 / 19.0);
        let a = (1.0 + t).powf(-0.2);
        let s = FieldState::new(grid, vec![a; 10], vec![0.0; 10], t).unwrap();
        let f = fs::File::create(dir.join(format!("snapshots/snap_{i:04}.vdl"))).unwrap();
        write_binary(&s, f).unwrap();
    }
}

#[test]
fn rates_on_synthetic_run() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_run(dir.path(), 2.0);
    let run = dir.path().to_str().unwrap();

    // L1 decays like (1+t)^-0.2, faster than the predicted 1/9
    let o = vdl(&["rates", "--run", run, "--norms", "l1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rates_l1.json")).unwrap())
            .unwrap();
    let sigma = r["fit"]["exponent"].as_f64().unwrap();
    assert!((sigma - 0.2).abs() < 1e-9, "{sigma}");
    assert!(dir.path().join("rates_l1.csv").exists());

    // the powered L^gamma norm decays like (1+t)^-0.4, slower than 5/9
    let o = vdl(&["rates", "--run", run, "--norms", "l1,lgamma"]);
    assert_eq!(code(&o), 1);
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verdicts.json")).unwrap())
            .unwrap();
    assert_eq!(v[0]["pass"], true);
    assert_eq!(v[1]["pass"], false);
    assert!((v[1]["fitted"].as_f64().unwrap() - 0.4).abs() < 1e-9);
}

#[test]
fn rates_prediction_below_threshold_exponent() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_run(dir.path(), 1.2);
    let o = vdl(&[
        "rates",
        "--run",
        dir.path().to_str().unwrap(),
        "--norms",
        "lgamma_plus_1",
    ]);
    assert!(matches!(code(&o), 0 | 1));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verdicts.json")).unwrap())
            .unwrap();
    let g: f64 = 1.2;
    let want = (g * g + 2.0 * g) / ((g + 1.0) * (g + 1.0));
    assert!((v[0]["predicted"].as_f64().unwrap() - want).abs() < 1e-15);
    // the density is (1+t)^-0.2, so the powered norm decays like (1+t)^-0.44
    assert!((v[0]["fitted"].as_f64().unwrap() - 0.44).abs() < 1e-9);
}

#[test]
fn rates_without_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_run(dir.path(), 2.0);
    fs::remove_dir_all(dir.path().join("snapshots")).unwrap();
    fs::create_dir(dir.path().join("snapshots")).unwrap();
    let o = vdl(&["rates", "--run", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

fn verify_json(args: &[&str]) -> (i32, Value) {
    let o = vdl(args);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
    (code(&o), v)
}

#[test]
fn verify_selectors() {
    let (c, v) = verify_json(&["verify", "A.2", "--gamma", "1.5"]);
    assert_eq!(c, 0);
    assert_eq!(v[0]["report"]["lemma"], "A.2");
    assert_eq!(v[0]["pass"], true);

    let (c, v) = verify_json(&["verify", "5.2", "--gamma", "1.2"]);
    assert_eq!(c, 0);
    assert_eq!(v[0]["report"]["function"], "A");
    assert!(v[0]["report"]["min_scaled_eigenvalue"].as_f64().unwrap() >= -1e-9);

    let (c, v) = verify_json(&["verify", "A.5", "--k", "4", "--n", "8"]);
    assert_eq!(c, 0);
    assert_eq!(v[0]["pass"], true);

    let (c, v) = verify_json(&["verify", "5.1", "--samples", "20", "--seed", "7"]);
    assert_eq!(c, 0);
    assert_eq!(v[0]["report"]["seed"], 7);
}

#[test]
fn verify_errors() {
    assert_eq!(code(&vdl(&["verify", "9.9"])), 2);
    // the convexity bridge only holds below 9/7
    assert_eq!(code(&vdl(&["verify", "bridge", "--gamma", "1.5"])), 2);
}

#[test]
fn barenblatt_table() {
    let o = vdl(&[
        "barenblatt",
        "--gamma",
        "2",
        "--x-min",
        "-3",
        "--x-max",
        "3",
        "--points",
        "601",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 601);
    let center = &rows[300];
    assert!(center[1].abs() < 1e-12);
    assert!((center[2] - 3f64.cbrt() / 4.0).abs() < 1e-12);
    let mass: f64 = rows.iter().map(|r| r[2]).sum::<f64>() * 0.01;
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}
