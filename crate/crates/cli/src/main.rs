//! `vdl`: simulate damped isentropic flow, measure decay rates against the
//! Barenblatt profile, and run the inequality checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod barenblatt;
mod config;
mod error;
mod rates;
mod simulate;
mod verify;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vdl_core::rates::{FitWindow, NormKind};

use crate::error::{CliError, CliResult};
use crate::verify::LemmaParams;

#[derive(Debug, Parser)]
#[command(name = "vdl", version, about)]
struct Cli {
    /// Worker threads for the parallel loops (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation from a TOML config and write snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write each snapshot as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Measure decay rates of a finished run and compare with predictions.
    Rates {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "l1,lgamma,lgamma_plus_1,l2_of_y", value_parser = rates::parse_norm)]
        norms: Vec<NormKind>,
        #[arg(long, default_value_t = 0.02)]
        epsilon: f64,
        /// Extra allowance for the fit itself.
        #[arg(long, default_value_t = 0.0)]
        fit_margin: f64,
        /// Trailing fraction of the log-time range used in the fit.
        #[arg(long, default_value_t = 0.5)]
        window: f64,
        #[arg(long, default_value_t = 10.0)]
        t_min: f64,
    },
    /// Check one lemma or formula numerically (`all` runs the battery).
    Verify {
        selector: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        rho_max: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 20_240_917)]
        seed: u64,
        /// Write the JSON reports here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the Barenblatt profile as CSV.
    Barenblatt {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        times: Vec<f64>,
        #[arg(long, requires = "x_max", allow_negative_numbers = true)]
        x_min: Option<f64>,
        #[arg(long, requires = "x_min", allow_negative_numbers = true)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_out(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate { config, out, csv } => {
            let s = simulate::cmd_simulate(&config, out, csv)?;
            eprintln!(
                "{} steps, {} snapshots, t = {}, mass {} -> {}",
                s.steps,
                s.snapshots.len(),
                s.final_time,
                s.initial_mass,
                s.final_mass
            );
            Ok(())
        }
        Command::Rates {
            run,
            norms,
            epsilon,
            fit_margin,
            window,
            t_min,
        } => {
            let window = FitWindow {
                fraction: window,
                t_min,
            };
            let out = rates::cmd_rates(&run, &norms, epsilon, fit_margin, window)?;
            let mut failed = Vec::new();
            for v in &out.verdicts {
                let fmt = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
                println!(
                    "{:<14} fitted {:>8} predicted {:>8} {}",
                    v.norm.label(),
                    fmt(v.fitted),
                    fmt(v.predicted),
                    if v.pass { "PASS" } else { "FAIL" }
                );
                if !v.pass {
                    failed.push(v.norm.label());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "rate check failed: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::Verify {
            selector,
            gamma,
            k,
            n,
            b,
            nu,
            order,
            c,
            rho_max,
            grid,
            samples,
            seed,
            out,
        } => {
            let params = LemmaParams {
                gamma,
                k,
                n,
                b,
                nu,
                order,
                c,
                rho_max,
                grid,
                samples,
                seed,
            };
            let outcomes = verify::cmd_verify(&selector, &params)?;
            for o in &outcomes {
                eprintln!("{} {}", if o.pass { "PASS" } else { "FAIL" }, o.label);
            }
            let mut w = open_out(out.as_ref())?;
            let target = out.clone().unwrap_or_else(|| "<stdout>".into());
            writeln!(w, "{}", serde_json::to_string_pretty(&outcomes)?)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&target, e))?;
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "{failed} of {} checks failed",
                    outcomes.len()
                )))
            }
        }
        Command::Barenblatt {
            gamma,
            mass,
            times,
            x_min,
            x_max,
            points,
            out,
        } => {
            let range = x_min.zip(x_max);
            let mut w = open_out(out.as_ref())?;
            barenblatt::cmd_barenblatt(gamma, mass, &times, range, points, &mut w)?;
            w.flush().map_err(|e| CliError::io("<output>", e))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
