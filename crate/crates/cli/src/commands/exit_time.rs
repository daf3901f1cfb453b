use clap::Args;
use serde::{Deserialize, Serialize};
use spider_bm::exit::{
    general_exit_density, general_exit_laplace, general_exit_moments, general_exit_moments_contour, LaplaceFunction,
};
use spider_bm::numerics::laplace::{laplace_invert_checked, DEFAULT_ORDER};
use spider_bm::numerics::quad::{integrate_with_breaks, QuadratureSpec};

use super::finish;
use crate::args::Lengths;
use crate::config::{required, resolve, Common, GraphKeys};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExitTimeParams {
    /// Finite leg lengths, e.g. `1,2,2`.
    #[arg(long)]
    pub lengths: Option<Lengths>,
    /// Transform arguments λ, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Vec<f64>,
    /// Times at which to evaluate the density, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub density_grid: Vec<f64>,
    /// Emit the moments of order 1 to k.
    #[arg(long, value_name = "K")]
    pub moments: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ExitTimeCmd {
    #[command(flatten)]
    pub params: ExitTimeParams,
    #[command(flatten)]
    pub common: Common,
}

pub const COLUMNS: [&str; 5] = ["quantity", "argument", "analytic_value", "oracle_value", "abs_error"];

fn row(table: &mut Table, quantity: &str, argument: Cell, analytic: f64, oracle: f64) {
    table.push(vec![
        quantity.into(),
        argument,
        analytic.into(),
        oracle.into(),
        (analytic - oracle).abs().into(),
    ]);
}

/// `∫ e^{−λs} f(s) ds` over the eigenfunction density. Below `L_min²/100`
/// the density is under `e^{−50}` and is dropped.
fn laplace_by_quadrature(lambda: f64, lengths: &[f64], quad_tol: f64) -> CliResult<f64> {
    let l_min = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let l_max = lengths.iter().copied().fold(0.0, f64::max);
    let l2 = l_max * l_max;
    let start = 0.01 * l_min * l_min;
    let mut breaks = vec![start];
    breaks.extend([0.1, 0.5, 2.0, 10.0, 100.0].iter().map(|b| b * l2).filter(|&b| b > start));
    let spec = QuadratureSpec::default().with_abs_tol(quad_tol);
    let f = |s: f64| (-lambda * s).exp() * general_exit_density(s, lengths).map_or(f64::NAN, |r| r.value);
    Ok(integrate_with_breaks(f, &breaks, &spec)?.value)
}

pub fn run(cmd: &ExitTimeCmd) -> CliResult<bool> {
    let r = resolve("exit-time", &cmd.params, &cmd.common, GraphKeys::Lengths, &["quad", "order"])?;
    let p = &r.params;
    let lengths = required(&p.lengths, "lengths")?
        .finite()
        .ok_or_else(|| CliError::Usage("exit-time needs finite leg lengths".into()))?;
    let order = r.tol.get("order", DEFAULT_ORDER as f64) as usize;
    let quad_tol = r.tol.get("quad", 1e-12);
    let mut table = Table::new(COLUMNS);
    let (moments, lambdas) = if p.moments.is_none() && p.lambda_grid.is_empty() && p.density_grid.is_empty() {
        (Some(2), vec![1.0])
    } else {
        (p.moments, p.lambda_grid.clone())
    };
    if let Some(k) = moments {
        let series = general_exit_moments(&lengths, k)?;
        let contour = general_exit_moments_contour(&lengths, k)?;
        for j in 1..=k {
            row(&mut table, "moment", j.into(), series[j], contour[j]);
        }
    }
    for &lambda in &lambdas {
        let closed = general_exit_laplace(lambda, &lengths)?;
        row(&mut table, "laplace", lambda.into(), closed, laplace_by_quadrature(lambda, &lengths, quad_tol)?);
    }
    let transform = LaplaceFunction::GeneralExit { lengths: lengths.clone() };
    for &s in &p.density_grid {
        let series = general_exit_density(s, &lengths)?.value;
        let inverted = laplace_invert_checked(&transform, s, order, 1e-6)?.value;
        row(&mut table, "density", s.into(), series, inverted);
    }
    finish(&table, "exit-time", &r)
}
