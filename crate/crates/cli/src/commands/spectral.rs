use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spider_bm::kernels::{transition_density, KernelQuery};
use spider_bm::spectral::{
    eigenbasis, gram_matrix, inverse_transform, parseval_gap, spectral_heat_kernel, spider_transform, KGrid, Parity,
    TestFunction,
};
use spider_bm::{SpiderGraph, SpiderPoint};

use super::{finish, leg_cell};
use crate::args::PointArg;
use crate::config::{required, resolve, Common, GraphKeys};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    /// Eigenmodes of the spider with absorbing leg ends.
    Basis,
    /// Gram matrix of those modes.
    Gram,
    /// Transform and inverse transform of a test function.
    Roundtrip,
    /// Energy of a test function against the energy of its transform.
    Parseval,
    /// Heat kernel from the mode sum.
    Heatkernel,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralParams {
    #[arg(long, value_enum)]
    pub action: Option<Action>,
    /// Number of legs N.
    #[arg(long)]
    pub n_legs: Option<usize>,
    /// Leg length L of the finite spider.
    #[arg(long = "length", visible_alias = "L")]
    pub length: Option<f64>,
    /// Largest mode index.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Test function: zero, gauss, exp:LEG, xgauss:LEG, x2gauss:LEG,
    /// oddpair:A:B or bump:LEG:A:B.
    #[arg(long)]
    pub function: Option<String>,
    /// Coordinates for the round trip, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Vec<f64>,
    /// Time for the heat kernel.
    #[arg(long)]
    pub t: Option<f64>,
    /// Starting point `leg:x` or `origin`.
    #[arg(long)]
    pub from: Option<PointArg>,
    /// End points `leg:y`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub to: Vec<PointArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralCmd {
    #[command(flatten)]
    pub params: SpectralParams,
    #[command(flatten)]
    pub common: Common,
}

fn test_function(p: &SpectralParams, n_legs: usize) -> CliResult<spider_bm::spectral::SpiderFunction> {
    let name = p.function.as_deref().unwrap_or("xgauss:1");
    let f: TestFunction = name.parse().map_err(|e: spider_bm::Error| CliError::Usage(e.to_string()))?;
    Ok(f.build(n_legs)?)
}

pub fn run(cmd: &SpectralCmd) -> CliResult<bool> {
    let r = resolve("spectral", &cmd.params, &cmd.common, GraphKeys::NLegs, &["residual"])?;
    let p = &r.params;
    let action = required(&p.action, "action")?;
    let n_legs = required(&p.n_legs, "n-legs")?;
    let l = p.length.unwrap_or(1.0);
    let n_max = p.n_max.unwrap_or(20);
    let grid = KGrid {
        residual_tol: r.tol.get("residual", KGrid::default().residual_tol),
        ..KGrid::default()
    };
    let table = match action {
        Action::Basis => {
            let modes = eigenbasis(n_legs, l, n_max)?;
            let mut cols: Vec<String> = ["index", "n", "parity", "k", "eigenvalue", "kirchhoff_residual", "continuity_residual"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            cols.extend((1..=n_legs).map(|i| format!("coeff_{i}")));
            let mut t = Table::new(cols);
            for (i, m) in modes.iter().enumerate() {
                let parity = match m.parity {
                    Parity::Sine => "sine",
                    Parity::Cosine => "cosine",
                };
                let mut row: Vec<Cell> = vec![
                    i.into(),
                    m.n.into(),
                    parity.into(),
                    m.k.into(),
                    m.eigenvalue().into(),
                    m.kirchhoff_residual().into(),
                    m.continuity_residual().into(),
                ];
                row.extend(m.coeffs.iter().map(|&c| Cell::from(c)));
                t.push(row);
            }
            t
        }
        Action::Gram => {
            let g = gram_matrix(&eigenbasis(n_legs, l, n_max)?)?;
            let mut t = Table::new(["i", "j", "value"]);
            for (i, row) in g.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    t.push(vec![i.into(), j.into(), v.into()]);
                }
            }
            t
        }
        Action::Roundtrip => {
            let f = test_function(p, n_legs)?;
            let data = spider_transform(&f, &grid)?;
            let xs = if p.x_grid.is_empty() {
                (0..=16).map(|i| 0.25 * i as f64).collect()
            } else {
                p.x_grid.clone()
            };
            let mut t = Table::new(["function", "leg", "x", "value", "reconstructed", "abs_error"]);
            for leg in 1..=n_legs {
                for &x in &xs {
                    let pt = SpiderPoint::new(leg, x)?;
                    let v = f.at(&pt);
                    let back = inverse_transform(&data, &pt)?;
                    t.push(vec![f.name().into(), leg.into(), x.into(), v.into(), back.into(), (v - back).abs().into()]);
                }
            }
            t
        }
        Action::Parseval => {
            let f = test_function(p, n_legs)?;
            let rep = parseval_gap(&f, &grid)?;
            let mut t = Table::new(["function", "lhs", "rhs", "gap"]);
            t.push(vec![f.name().into(), rep.lhs.into(), rep.rhs.into(), rep.gap().into()]);
            t
        }
        Action::Heatkernel => {
            let time = p.t.unwrap_or(0.5);
            let from = p.from.map_or(SpiderPoint::origin(), |a| a.0);
            let to: Vec<SpiderPoint> = if p.to.is_empty() {
                vec![SpiderPoint::new(1, 0.5 * l)?]
            } else {
                p.to.iter().map(|a| a.0).collect()
            };
            let infinite = SpiderGraph::infinite(n_legs)?;
            let mut t = Table::new([
                "t",
                "from_leg",
                "from_x",
                "to_leg",
                "to_x",
                "spectral",
                "tail_bound",
                "infinite_spider",
            ]);
            for q in &to {
                let h = spectral_heat_kernel(n_legs, l, time, &from, q, n_max)?;
                let free = transition_density(&infinite, &KernelQuery::new(time, from, *q)?)?;
                t.push(vec![
                    time.into(),
                    leg_cell(&from),
                    from.x().into(),
                    leg_cell(q),
                    q.x().into(),
                    h.value.into(),
                    h.tail_bound.into(),
                    free.into(),
                ]);
            }
            t
        }
    };
    finish(&table, "spectral", &r)
}
