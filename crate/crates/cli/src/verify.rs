use serde::Serialize;
use serde_json::Value;
use vdl_core::entropy::{
    convexity_scan, hessian_formula_check, DFunctional, EFunctional, EntropyFunctional,
    EntropyGenerator, EntropyModel, Functional, QOneFunctional, ScanGrid,
};
use vdl_core::lemmas::{
    a2_default_grid, bridge_default_grid, hessian_bridge_check, lemma31_check, lemma32_check,
    lemma_a1_check_seeded, lemma_a2_check, lemma_a4_check_seeded, lemma_a5_check, LemmaJob,
    PairGrid, ValueGrid,
};
use vdl_core::quadrature::QuadPolicy;
use vdl_core::GasModel;

use crate::error::{CliError, CliResult};

pub const SELECTORS: &[&str] = &[
    "3.1", "3.2", "4.1", "5.1", "5.2", "5.3", "5.4", "A.1", "A.2", "A.4", "A.5", "bridge", "all",
];

/// Parameters shared by the lemma selectors; unset ones take per-lemma defaults.
#[derive(Debug, Clone, Default)]
pub struct LemmaParams {
    pub gamma: Option<f64>,
    pub k: Option<u32>,
    pub n: Option<f64>,
    pub b: Option<f64>,
    pub nu: Option<f64>,
    pub order: Option<u32>,
    pub c: Option<f64>,
    pub rho_max: Option<f64>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
}

/// One verification outcome with its full report.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub selector: String,
    pub label: String,
    pub pass: bool,
    pub report: Value,
}

fn outcome<T: Serialize>(
    selector: &str,
    label: String,
    pass: bool,
    report: &T,
) -> CliResult<Outcome> {
    Ok(Outcome {
        selector: selector.into(),
        label,
        pass,
        report: serde_json::to_value(report)?,
    })
}

fn scan(selector: &str, gamma: f64) -> CliResult<Outcome> {
    let gas = GasModel::new(gamma)?;
    let policy = QuadPolicy::Fixed(64);
    let f: Box<dyn Functional> = match selector {
        "4.1" => Box::new(EntropyFunctional(EntropyModel::new(
            gas,
            EntropyGenerator::power_law(&gas),
            policy,
        ))),
        "5.2" => Box::new(QOneFunctional(EntropyModel::new(
            gas,
            EntropyGenerator::power_law(&gas),
            policy,
        ))),
        "5.3" => Box::new(DFunctional::new(&gas, policy)?),
        "5.4" => Box::new(EFunctional::new(&gas, policy)?),
        _ => unreachable!("scan selector"),
    };
    let r = convexity_scan(f.as_ref(), &ScanGrid::default(), Some(gamma))?;
    outcome(
        selector,
        format!("{} gamma={gamma}", r.function),
        r.pass,
        &r,
    )
}

fn lemma(selector: &str, r: vdl_core::lemmas::LemmaReport) -> CliResult<Outcome> {
    let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    outcome(
        selector,
        format!("{} {}", r.lemma, params.join(" ")),
        r.pass,
        &r,
    )
}

/// Runs one selector. `all` runs the default lemma battery and the scans.
pub fn cmd_verify(selector: &str, p: &LemmaParams) -> CliResult<Vec<Outcome>> {
    let gamma = |d: f64| p.gamma.unwrap_or(d);
    let one = |o: CliResult<Outcome>| o.map(|o| vec![o]);
    match selector {
        "3.1" => {
            let gas = GasModel::new(gamma(2.0))?;
            let r = lemma31_check(
                &gas,
                p.rho_max.unwrap_or(2.0),
                p.grid.unwrap_or(PairGrid::DEFAULT_N),
            )?;
            one(lemma(selector, r))
        }
        "3.2" => {
            let gas = GasModel::new(gamma(2.0))?;
            let r = lemma32_check(
                &gas,
                p.c.unwrap_or(2.0),
                p.grid.unwrap_or(PairGrid::DEFAULT_N),
            )?;
            one(lemma(selector, r))
        }
        "4.1" | "5.2" | "5.3" | "5.4" => one(scan(selector, gamma(1.2))),
        "5.1" => {
            let r = hessian_formula_check(p.samples.unwrap_or(100), p.seed)?;
            one(outcome(
                selector,
                format!("hessian formula samples={}", r.samples),
                r.pass,
                &r,
            ))
        }
        "A.1" => one(lemma(
            selector,
            lemma_a1_check_seeded(p.b.unwrap_or(0.5), p.samples.unwrap_or(10_000), p.seed)?,
        )),
        "A.2" => {
            let gas = GasModel::new(gamma(1.5))?;
            one(lemma(selector, lemma_a2_check(&gas, &a2_default_grid())?))
        }
        "A.4" => one(lemma(
            selector,
            lemma_a4_check_seeded(
                p.nu.unwrap_or(4.0),
                p.order.unwrap_or(2),
                p.samples.unwrap_or(2000),
                p.seed,
            )?,
        )),
        "A.5" => {
            let k = p.k.unwrap_or(4);
            let n = p.n.unwrap_or(2.0 * k as f64);
            one(lemma(
                selector,
                lemma_a5_check(n, k, &ValueGrid::unit_interval(200))?,
            ))
        }
        "bridge" => {
            let gas = GasModel::new(gamma(1.2))?;
            one(lemma(
                selector,
                hessian_bridge_check(&gas, p.k, &bridge_default_grid())?,
            ))
        }
        "all" => {
            let mut out = Vec::new();
            for job in vdl_core::lemmas::default_jobs() {
                out.push(lemma(job_selector(&job), job.run()?)?);
            }
            for s in ["4.1", "5.2", "5.3", "5.4"] {
                for g in [1.1, 1.2, 1.25] {
                    out.push(scan(s, g)?);
                }
            }
            let r = hessian_formula_check(100, p.seed)?;
            out.push(outcome(
                "5.1",
                format!("hessian formula samples={}", r.samples),
                r.pass,
                &r,
            )?);
            Ok(out)
        }
        other => Err(CliError::Usage(format!(
            "unknown selector `{other}`; expected one of {}",
            SELECTORS.join(", ")
        ))),
    }
}

fn job_selector(job: &LemmaJob) -> &'static str {
    match job {
        LemmaJob::L31 { .. } => "3.1",
        LemmaJob::L32 { .. } => "3.2",
        LemmaJob::A1 { .. } => "A.1",
        LemmaJob::A2 { .. } => "A.2",
        LemmaJob::A4 { .. } => "A.4",
        LemmaJob::A5 { .. } => "A.5",
        LemmaJob::Bridge { .. } => "bridge",
    }
}
