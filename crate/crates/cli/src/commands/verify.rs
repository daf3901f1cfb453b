use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};
use spider_bm::acceptance::{run_suite, suite_criteria, CriterionReport, SuiteConfig, DEFAULT_SEED, N_CRITERIA, SUITES};

use crate::args::Format;
use crate::config::{resolve, Common, GraphKeys};
use crate::error::{CliError, CliResult};
use crate::table::{destination, write_json, SCHEMA_VERSION};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    /// all, kernels, exit, limits, spectral or lattice.
    #[arg(long)]
    pub suite: Option<String>,
    /// Explicit criterion numbers, comma separated; overrides --suite.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    /// Tenfold fewer replicas with correspondingly wider tolerances.
    #[arg(long)]
    pub quick: bool,
    /// Master seed; replica i uses stream i.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyCmd {
    #[command(flatten)]
    pub params: VerifyParams,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfigEcho {
    pub suite: String,
    pub criteria: Vec<u8>,
    pub quick: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub command: &'static str,
    pub config: VerifyConfigEcho,
    pub criteria: Vec<CriterionReport>,
    pub failed: Vec<u8>,
    pub pass: bool,
    pub wall_clock_seconds: f64,
}

pub fn run(cmd: &VerifyCmd) -> CliResult<bool> {
    let started = Instant::now();
    let r = resolve("verify", &cmd.params, &cmd.common, GraphKeys::None, &[])?;
    let p = &r.params;
    let suite = p.suite.clone().unwrap_or_else(|| "all".into());
    let ids = if p.criteria.is_empty() {
        suite_criteria(&suite)
            .ok_or_else(|| CliError::Usage(format!("unknown suite `{suite}` (one of {})", SUITES.join(", "))))?
    } else {
        if let Some(bad) = p.criteria.iter().find(|&&c| c == 0 || c > N_CRITERIA) {
            return Err(CliError::Usage(format!("criterion {bad} is not in 1..={N_CRITERIA}")));
        }
        p.criteria.clone()
    };
    let cfg = SuiteConfig {
        seed: p.seed.unwrap_or(DEFAULT_SEED),
        quick: p.quick,
    };
    let reports = run_suite(&ids, &cfg);
    let failed: Vec<u8> = reports.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    let report = ExperimentReport {
        schema: SCHEMA_VERSION,
        command: "verify",
        config: VerifyConfigEcho {
            suite,
            criteria: ids,
            quick: cfg.quick,
            seed: cfg.seed,
        },
        pass: failed.is_empty(),
        failed,
        criteria: reports,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let dest = destination(r.output.as_deref(), "verify", Format::Json);
    if dest.is_some() || r.format != Format::Json {
        for c in &report.criteria {
            print!("{c}");
        }
        println!(
            "verify: {} of {} criteria passed",
            report.criteria.len() - report.failed.len(),
            report.criteria.len()
        );
    }
    if dest.is_some() || r.format == Format::Json {
        write_json(&report, dest.as_deref())?;
    }
    Ok(report.pass)
}
