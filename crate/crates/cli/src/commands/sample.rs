use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spider_bm::acceptance::DEFAULT_SEED;
use spider_bm::exit::CycleKind;
use spider_bm::sampler::{
    run_replicas, sample_bm_path_from, sample_cover_time, sample_first_exit_from, sample_first_exit_within,
    sample_occupation_fraction, sample_position, Resolution,
};
use spider_bm::{Result as CoreResult, SpiderGraph, SpiderPoint};

use super::{finish, leg_cell};
use crate::args::{Lengths, PointArg};
use crate::config::{required, resolve, Common, GraphKeys};
use crate::error::{CliError, CliResult};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Position at `--t-max`.
    Path,
    /// First arrival at the end of a leg.
    Exit,
    /// Time and cycle count to visit every leg.
    Cover,
    /// Fraction of `[0, t-max]` spent on the first `--n0` legs.
    Occupation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleArg {
    /// Out to the leg end and back by the same law.
    RoundTrip,
    /// Out to the leg end, back by reflected passage.
    ReflectedCover,
}

impl From<CycleArg> for CycleKind {
    fn from(c: CycleArg) -> Self {
        match c {
            CycleArg::RoundTrip => CycleKind::RoundTrip,
            CycleArg::ReflectedCover => CycleKind::ReflectedCover,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Number of legs N.
    #[arg(long)]
    pub n_legs: Option<usize>,
    /// Leg lengths, `inf` for half-lines.
    #[arg(long)]
    pub lengths: Option<Lengths>,
    /// Time step of the path discretization.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Horizon: final time for `path` and `occupation`, cap for `exit`.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of independent replicas.
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Master seed; replica i uses stream i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draw cover cycles from their exact law instead of simulating paths.
    #[arg(long)]
    pub exact_cycles: bool,
    /// Starting point for `path` and `exit`.
    #[arg(long)]
    pub start: Option<PointArg>,
    /// Legs counted by `occupation`.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Cycle level for `cover`.
    #[arg(long = "length", visible_alias = "L")]
    pub length: Option<f64>,
    #[arg(long, value_enum)]
    pub cycle: Option<CycleArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleCmd {
    #[command(flatten)]
    pub params: SampleParams,
    #[command(flatten)]
    pub common: Common,
}

fn collect<T>(rows: Vec<CoreResult<T>>) -> CliResult<Vec<T>> {
    rows.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

pub fn run(cmd: &SampleCmd) -> CliResult<bool> {
    let r = resolve("sample", &cmd.params, &cmd.common, GraphKeys::Both, &[])?;
    let p = &r.params;
    let experiment = required(&p.experiment, "experiment")?;
    let seed = p.seed.unwrap_or(DEFAULT_SEED);
    let n = p.replicas.unwrap_or(1000);
    let dt = p.dt.unwrap_or(1e-3);
    let start = p.start.map_or(SpiderPoint::origin(), |a| a.0);
    let graph = match &p.lengths {
        Some(l) => Some(SpiderGraph::new(l.0.len(), l.0.clone())?),
        None => None,
    };
    let n_legs = match (&graph, p.n_legs) {
        (Some(g), Some(n)) if g.n_legs() != n => {
            return Err(CliError::Usage(format!("--n-legs {n} disagrees with {} lengths", g.n_legs())));
        }
        (Some(g), _) => Some(g.n_legs()),
        (None, n) => n,
    };
    let mut table;
    match experiment {
        Experiment::Path => {
            let n_legs = n_legs.ok_or_else(|| CliError::Usage("path needs --n-legs or --lengths".into()))?;
            let t = p.t_max.unwrap_or(1.0);
            let points = run_replicas(seed, 0, n, |s| {
                let id = s.stream_id;
                match &graph {
                    Some(g) if !g.all_infinite() => sample_bm_path_from(g, start, t, dt, s)
                        .map(|path| (id, *path.points.last().expect("paths are nonempty"))),
                    _ => sample_position(n_legs, start, t, dt, s).map(|q| (id, q)),
                }
            });
            table = Table::new(["stream_id", "t", "leg", "x"]);
            for (id, q) in collect(points)? {
                table.push(vec![id.into(), t.into(), leg_cell(&q), q.x().into()]);
            }
        }
        Experiment::Exit => {
            let g = graph.ok_or_else(|| CliError::Usage("exit needs --lengths".into()))?;
            if !g.all_finite() && p.t_max.is_none() {
                return Err(CliError::Usage("exit with infinite legs needs --t-max".into()));
            }
            let hits = run_replicas(seed, 0, n, |s| {
                let id = s.stream_id;
                match p.t_max {
                    None => sample_first_exit_from(&g, start, dt, s).map(|h| (id, Some(h))),
                    Some(t) => sample_first_exit_within(&g, start, dt, t, s).map(|h| (id, h)),
                }
            });
            table = Table::new(["stream_id", "exit_time", "exit_leg", "n_steps"]);
            for (id, h) in collect(hits)? {
                table.push(vec![
                    id.into(),
                    h.map(|h| h.value.0).into(),
                    h.map(|h| h.value.1).into(),
                    h.map(|h| h.n_steps).into(),
                ]);
            }
        }
        Experiment::Cover => {
            let n_legs = n_legs.ok_or_else(|| CliError::Usage("cover needs --n-legs".into()))?;
            let l = p.length.unwrap_or(1.0);
            let kind: CycleKind = p.cycle.unwrap_or(CycleArg::RoundTrip).into();
            let resolution = if p.exact_cycles { Resolution::ExactCycles } else { Resolution::Path { dt } };
            let covers = run_replicas(seed, 0, n, |s| {
                let id = s.stream_id;
                sample_cover_time(n_legs, l, kind, resolution, s).map(|c| (id, c))
            });
            table = Table::new(["stream_id", "cover_time", "n_cycles"]);
            for (id, c) in collect(covers)? {
                table.push(vec![id.into(), c.total_time.into(), c.n_cycles.into()]);
            }
        }
        Experiment::Occupation => {
            let n_legs = n_legs.ok_or_else(|| CliError::Usage("occupation needs --n-legs".into()))?;
            let n0 = p.n0.unwrap_or(1);
            let t = p.t_max.unwrap_or(1.0);
            let fractions = run_replicas(seed, 0, n, |s| {
                let id = s.stream_id;
                sample_occupation_fraction(n_legs, n0, t, dt, s).map(|f| (id, f))
            });
            table = Table::new(["stream_id", "fraction"]);
            for (id, f) in collect(fractions)? {
                table.push(vec![id.into(), f.into()]);
            }
        }
    }
    finish(&table, "sample", &r)
}
