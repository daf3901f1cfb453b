use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spider_bm::kernels::{transition_density, transition_density_convolution, KernelQuery};
use spider_bm::{SpiderGraph, SpiderPoint};

use super::{finish, leg_cell};
use crate::args::PointArg;
use crate::config::{required, resolve, Common, GraphKeys};
use crate::error::{CliError, CliResult};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelForm {
    /// Closed form.
    Closed,
    /// First-passage convolution by quadrature.
    Convolution,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityParams {
    /// Number of legs N.
    #[arg(long)]
    pub n_legs: Option<usize>,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',', required = false)]
    pub t: Vec<f64>,
    /// Starting point `leg:x` or `origin`.
    #[arg(long)]
    pub from: Option<PointArg>,
    /// End points `leg:y`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub to: Vec<PointArg>,
    #[arg(long, value_enum)]
    pub form: Option<KernelForm>,
}

#[derive(Debug, Clone, Args)]
pub struct DensityCmd {
    #[command(flatten)]
    pub params: DensityParams,
    #[command(flatten)]
    pub common: Common,
}

pub const COLUMNS: [&str; 6] = ["t", "from_leg", "from_x", "to_leg", "to_x", "density"];

pub fn run(cmd: &DensityCmd) -> CliResult<bool> {
    let r = resolve("density", &cmd.params, &cmd.common, GraphKeys::NLegs, &["quad"])?;
    let p = &r.params;
    let n_legs = required(&p.n_legs, "n-legs")?;
    if p.t.is_empty() {
        return Err(CliError::Usage("missing required --t".into()));
    }
    if p.to.is_empty() {
        return Err(CliError::Usage("missing required --to".into()));
    }
    let g = SpiderGraph::infinite(n_legs)?;
    let from = p.from.map_or(SpiderPoint::origin(), |a| a.0);
    let form = p.form.unwrap_or(KernelForm::Closed);
    let quad_tol = r.tol.get("quad", 1e-10);
    let mut table = Table::new(COLUMNS);
    for &t in &p.t {
        for to in &p.to {
            let q = KernelQuery::new(t, from, to.0)?;
            let v = match form {
                KernelForm::Closed => transition_density(&g, &q)?,
                KernelForm::Convolution => transition_density_convolution(&g, &q, quad_tol)?,
            };
            table.push(vec![t.into(), leg_cell(&from), from.x().into(), leg_cell(&to.0), to.0.x().into(), v.into()]);
        }
    }
    finish(&table, "density", &r)
}
