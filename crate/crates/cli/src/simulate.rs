use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vdl_core::solver::{
    init_from_profile, run_with, write_binary, write_csv, EnergyMonitor, FieldState,
    InvariantRegionMonitor, RunMetadata, Solver,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const METADATA_FILE: &str = "metadata.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const CONFIG_COPY: &str = "config.toml";

/// Monitor readings written next to the metadata.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub snapshots: Vec<String>,
    pub final_time: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub clip_mass: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_max_relative_increase: f64,
    pub max_speed_ratio_initial: f64,
    pub max_speed_ratio: f64,
    pub max_rho_initial: f64,
    pub max_rho: f64,
}

pub fn snapshot_name(i: usize) -> String {
    format!("snap_{i:04}.vdl")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn write_snapshot(dir: &Path, i: usize, s: &FieldState, csv: bool) -> CliResult<String> {
    let name = snapshot_name(i);
    let path = dir.join(&name);
    let f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    write_binary(s, BufWriter::new(f))?;
    if csv {
        let cpath = path.with_extension("csv");
        let f = fs::File::create(&cpath).map_err(|e| CliError::io(&cpath, e))?;
        write_csv(s, BufWriter::new(f))?;
    }
    Ok(name)
}

/// Runs the configured simulation and writes snapshots, metadata and a summary.
pub fn cmd_simulate(config_path: &Path, out: Option<PathBuf>, csv: bool) -> CliResult<RunSummary> {
    let cfg = RunConfig::load(config_path)?;
    let out = out
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Usage("no output directory: pass --out or set `out`".into()))?;
    let gas = cfg.gas()?;
    let profile = cfg.profile()?;
    let grid = cfg.grid()?;
    let solver_cfg = cfg.solver_config();
    let state = init_from_profile(&profile, &grid, &cfg.perturbation)?;

    let snap_dir = out.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snap_dir).map_err(|e| CliError::io(&snap_dir, e))?;
    let copy = out.join(CONFIG_COPY);
    fs::copy(config_path, &copy).map_err(|e| CliError::io(&copy, e))?;

    let solver = Solver::new(gas, solver_cfg.clone(), state.max_rho())?;
    let mut energy = EnergyMonitor::new(gas, solver.floor());
    let mut region = InvariantRegionMonitor::new(solver.floor());
    let mut steps = 0u64;
    let mut counter = |_: &FieldState, _: f64| {
        steps += 1;
        Ok(())
    };
    let initial_mass = state.mass();
    let snaps = run_with(
        &solver,
        state,
        &mut [&mut energy, &mut region, &mut counter],
    )?;

    let names = snaps
        .iter()
        .enumerate()
        .map(|(i, s)| write_snapshot(&snap_dir, i, s, csv))
        .collect::<CliResult<Vec<_>>>()?;

    let mut resolved = cfg.clone();
    resolved.solver = solver_cfg;
    resolved.out = None;
    let mut meta = RunMetadata::new(&gas, grid, &resolved)?;
    let last = snaps.last().expect("run yields at least one snapshot");
    meta.steps = Some(steps);
    meta.clip_mass = Some(last.clip_mass);
    write_json(&out.join(METADATA_FILE), &meta)?;

    let summary = RunSummary {
        steps,
        snapshots: names,
        final_time: last.t,
        initial_mass,
        final_mass: last.mass(),
        clip_mass: last.clip_mass,
        energy_initial: energy.initial,
        energy_final: energy.last,
        energy_max_relative_increase: energy.max_relative_increase,
        max_speed_ratio_initial: region.initial_ratio,
        max_speed_ratio: region.max_ratio,
        max_rho_initial: region.initial_max_rho,
        max_rho: region.max_rho,
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}
