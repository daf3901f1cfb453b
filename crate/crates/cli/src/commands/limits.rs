use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spider_bm::acceptance::DEFAULT_SEED;
use spider_bm::exit::CycleKind;
use spider_bm::limits::{ks_critical_value, ks_test_with_threshold, LimitTarget, CYCLE_MEAN};
use spider_bm::sampler::{
    run_replicas, sample_coupon_count, sample_cover_time, sample_cycle_count, sample_occupation_fraction,
    CycleCountVariant, Resolution,
};
use spider_bm::Result as CoreResult;

use crate::config::{required, resolve, Common, GraphKeys};
use crate::error::{CliError, CliResult};
use crate::table::{destination, emit, write_json, Table, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// Cycles before level L, divided by L, against Exp(1).
    CycleCount,
    /// Cycles before level L on one of N legs, divided by LN, against Exp(1).
    CycleCountOneLeg,
    /// Cycles to visit N legs, `ν/N − ln N`, against Gumbel.
    Gumbel,
    /// Cover time `(T/L² − 2N ln N)/(2N)` against Gumbel.
    CoverTime,
    /// Reflected cover time over squared cycle count against the stable-1/2 law.
    StableCover,
    /// Fraction of time on `n0` of N legs against the arcsine law.
    Arcsine,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsParams {
    #[arg(long, value_enum)]
    pub law: Option<Law>,
    /// Number of legs N.
    #[arg(long)]
    pub n_legs: Option<usize>,
    /// Leg length or level L.
    #[arg(long = "length", visible_alias = "L")]
    pub length: Option<f64>,
    /// Number of independent replicas.
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Master seed; replica i uses stream i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time step for path-based laws.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Legs counted by the occupation fraction.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Also write the normalized samples to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LimitsCmd {
    #[command(flatten)]
    pub params: LimitsParams,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub n_legs: usize,
    pub length: f64,
    pub replicas: usize,
    pub seed: u64,
    pub dt: Option<f64>,
    pub n0: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsReport {
    pub schema: u32,
    pub law: Law,
    pub target: String,
    pub parameters: Parameters,
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
    pub provenance: &'static str,
    pub samples_file: Option<PathBuf>,
    pub wall_clock_seconds: f64,
}

fn collect(v: Vec<CoreResult<f64>>) -> CliResult<Vec<f64>> {
    v.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

pub fn run(cmd: &LimitsCmd) -> CliResult<bool> {
    let started = Instant::now();
    let r = resolve("limits", &cmd.params, &cmd.common, GraphKeys::NLegs, &["ks"])?;
    let p = &r.params;
    let law = required(&p.law, "law")?;
    let seed = p.seed.unwrap_or(DEFAULT_SEED);
    let (default_n, default_legs, default_l) = match law {
        Law::CycleCount => (10_000, 1, 100.0),
        Law::CycleCountOneLeg => (10_000, 3, 100.0),
        Law::Gumbel => (10_000, 500, 1.0),
        Law::CoverTime => (1000, 1000, 1.0),
        Law::StableCover => (10_000, 300, 1.0),
        Law::Arcsine => (10_000, 2, 1.0),
    };
    let n = p.replicas.unwrap_or(default_n);
    let n_legs = p.n_legs.unwrap_or(default_legs);
    let l = p.length.unwrap_or(default_l);
    let (dt, n0) = if law == Law::Arcsine {
        (Some(p.dt.unwrap_or(1e-3)), Some(p.n0.unwrap_or(1)))
    } else {
        (None, None)
    };
    let (samples, target) = match law {
        Law::CycleCount => (
            collect(run_replicas(seed, 0, n, |s| {
                sample_cycle_count(l, 1, CycleCountVariant::AllLegs, &mut s.rng()).map(|v| v as f64 / l)
            }))?,
            LimitTarget::Exp { rate: 1.0 },
        ),
        Law::CycleCountOneLeg => {
            let scale = l * n_legs as f64;
            (
                collect(run_replicas(seed, 0, n, |s| {
                    sample_cycle_count(l, n_legs, CycleCountVariant::OneLeg, &mut s.rng()).map(|v| v as f64 / scale)
                }))?,
                LimitTarget::Exp { rate: 1.0 },
            )
        }
        Law::Gumbel => {
            let ln = (n_legs as f64).ln();
            (
                collect(run_replicas(seed, 0, n, |s| {
                    sample_coupon_count(n_legs, &mut s.rng()).map(|v| v as f64 / n_legs as f64 - ln)
                }))?,
                LimitTarget::Gumbel,
            )
        }
        Law::CoverTime => {
            let nf = n_legs as f64;
            let a = CYCLE_MEAN * nf;
            (
                collect(run_replicas(seed, 0, n, |s| {
                    sample_cover_time(n_legs, l, CycleKind::RoundTrip, Resolution::ExactCycles, s)
                        .map(|c| (c.total_time / (l * l) - a * nf.ln()) / a)
                }))?,
                LimitTarget::Gumbel,
            )
        }
        Law::StableCover => (
            collect(run_replicas(seed, 0, n, |s| {
                sample_cover_time(n_legs, l, CycleKind::ReflectedCover, Resolution::ExactCycles, s)
                    .map(|c| c.total_time / (l * l * (c.n_cycles as f64).powi(2)))
            }))?,
            LimitTarget::StableHalf,
        ),
        Law::Arcsine => {
            let (dt, n0) = (dt.unwrap_or(1e-3), n0.unwrap_or(1));
            let target = if n_legs == 2 && n0 == 1 {
                LimitTarget::ArcSine
            } else {
                LimitTarget::GeneralizedArcSine { n_legs, n0 }
            };
            (
                collect(run_replicas(seed, 0, n, |s| sample_occupation_fraction(n_legs, n0, 1.0, dt, s)))?,
                target,
            )
        }
    };
    let threshold = r.tol.get("ks", ks_critical_value(n));
    let gof = ks_test_with_threshold(&samples, &target, threshold)?;
    if let Some(path) = &p.samples {
        let mut t = Table::new(["stream_id", "value"]);
        for (i, v) in samples.iter().enumerate() {
            t.push(vec![i.into(), (*v).into()]);
        }
        emit(&t.to_csv()?, Some(path))?;
    }
    let report = LimitsReport {
        schema: SCHEMA_VERSION,
        law,
        target: target.name(),
        parameters: Parameters {
            n_legs,
            length: l,
            replicas: n,
            seed,
            dt,
            n0,
        },
        ks: gof.ks_statistic,
        threshold,
        pass: gof.pass,
        provenance: "monte_carlo",
        samples_file: p.samples.clone(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let dest = destination(r.output.as_deref(), "limits", crate::args::Format::Json);
    write_json(&report, dest.as_deref())?;
    Ok(report.pass)
}
