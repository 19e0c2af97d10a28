use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::Serialize;
use vdl_core::rates::{measure, theorem_comparison, FitWindow, NormKind, RateReport, Verdict};
use vdl_core::solver::{read_binary, FieldState, RunMetadata};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::simulate::{METADATA_FILE, SNAPSHOT_DIR};

pub fn parse_norm(s: &str) -> Result<NormKind, String> {
    match s.trim() {
        "l1" | "L1" => Ok(NormKind::L1),
        "lgamma" => Ok(NormKind::Lgamma),
        "lgamma_plus_1" | "lgamma+1" => Ok(NormKind::LgammaPlus1),
        "l2_of_y" | "y" => Ok(NormKind::L2OfY),
        other => Err(format!(
            "unknown norm `{other}` (expected l1, lgamma, lgamma_plus_1, l2_of_y)"
        )),
    }
}

/// Snapshots of a run directory, in file-name order.
pub fn load_snapshots(run_dir: &Path) -> CliResult<Vec<FieldState>> {
    let dir = run_dir.join(SNAPSHOT_DIR);
    let entries = fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "vdl"))
        .collect();
    if paths.is_empty() {
        return Err(CliError::Usage(format!(
            "no snapshots in {}",
            dir.display()
        )));
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let f = fs::File::open(p).map_err(|e| CliError::io(p, e))?;
            Ok(read_binary(BufReader::new(f))?)
        })
        .collect()
}

pub fn load_metadata(run_dir: &Path) -> CliResult<(RunMetadata, RunConfig)> {
    let path = run_dir.join(METADATA_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let meta: RunMetadata = serde_json::from_str(&text)?;
    let cfg: RunConfig =
        serde_json::from_value(meta.config.clone()).map_err(|e| CliError::Config {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    Ok((meta, cfg))
}

#[derive(Debug, Serialize)]
pub struct RatesOutput {
    pub reports: Vec<RateReport>,
    pub verdicts: Vec<Verdict>,
}

/// Measures every norm over the snapshots and compares with the predicted exponents.
pub fn cmd_rates(
    run_dir: &Path,
    norms: &[NormKind],
    epsilon: f64,
    fit_margin: f64,
    window: FitWindow,
) -> CliResult<RatesOutput> {
    let (_, cfg) = load_metadata(run_dir)?;
    let profile = cfg.profile()?;
    let snaps = load_snapshots(run_dir)?;
    let reports = measure(&snaps, &profile, norms, window)?;
    let verdicts: Vec<Verdict> = reports
        .iter()
        .map(|r| theorem_comparison(r, epsilon, fit_margin))
        .collect();
    for r in &reports {
        let base = run_dir.join(format!("rates_{}", r.norm.label()));
        let jp = base.with_extension("json");
        fs::write(&jp, r.to_json()? + "\n").map_err(|e| CliError::io(&jp, e))?;
        let cp = base.with_extension("csv");
        let f = fs::File::create(&cp).map_err(|e| CliError::io(&cp, e))?;
        r.write_csv(std::io::BufWriter::new(f))?;
    }
    let vp = run_dir.join("verdicts.json");
    fs::write(&vp, serde_json::to_string_pretty(&verdicts)? + "\n")
        .map_err(|e| CliError::io(&vp, e))?;
    Ok(RatesOutput { reports, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_names() {
        assert_eq!(parse_norm("l1").unwrap(), NormKind::L1);
        assert_eq!(parse_norm(" lgamma_plus_1").unwrap(), NormKind::LgammaPlus1);
        assert_eq!(parse_norm("y").unwrap(), NormKind::L2OfY);
        assert!(parse_norm("linf").is_err());
    }
}
