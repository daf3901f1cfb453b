//! The release gate: twelve numbered criteria with pinned tolerances, shared
//! by the `acceptance` test target and `spiderbm verify`.
//!
//! Randomized checks use a pinned master seed and disjoint stream ranges per
//! criterion; their tolerances are stated as z-scores or KS distances, so a
//! different seed should give the same verdicts.
//!
//! Quick mode divides every replica count by ten. KS thresholds become the
//! 1% critical value for the reduced sample size, the relative cover-time
//! tolerances grow by `√10` and the occupation paths use `dt = 1e-3`.
//! Deterministic checks are unchanged.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exit::{
    exit_point_probability, general_exit_mean, one_leg_exit_density, partial_boundary_exit_laplace,
    tau1_density, tau1_moment, CycleKind, LaplaceFunction, TAU1_SWITCH,
};
use crate::kernels::{
    halfline_kernel, spider_integral, transition_density, transition_density_convolution, Boundary, KernelQuery,
};
use crate::limits::{
    coupon_moments, cover_time_prediction, ks_critical_value, ks_test_with_threshold, LimitTarget,
};
use crate::numerics::laplace::{laplace_invert, DEFAULT_ORDER};
use crate::numerics::quad::{integrate_with_breaks, QuadratureSpec};
use crate::numerics::rng::RngStream;
use crate::numerics::special::erfc;
use crate::sampler::{
    lattice_distribution_by_enumeration, lattice_transition_probability_exact, run_replicas, sample_coupon_count,
    sample_cover_time, sample_cycle_count, sample_first_exit, sample_lattice_hitting_time, sample_occupation_fraction,
    richardson, CycleCountVariant, LatticePoint, Resolution,
};
use crate::spectral::{
    channel_constants, eigenbasis, gram_defect, gram_matrix, inverse_transform, parseval_gap, spectral_heat_kernel,
    spider_transform, KGrid, TestFunction,
};
use crate::spider::{SpiderGraph, SpiderPoint};

pub const DEFAULT_SEED: u64 = 0x5EED_2718;
pub const Z_LIMIT: f64 = 3.0;
pub const N_CRITERIA: u8 = 12;

/// Stream ids of criterion `id` start at `id * STREAM_BLOCK`.
const STREAM_BLOCK: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub quick: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: DEFAULT_SEED,
            quick: false,
        }
    }
}

impl SuiteConfig {
    fn replicas(&self, full: usize) -> usize {
        if self.quick {
            full / 10
        } else {
            full
        }
    }

    fn ks_limit(&self, full: f64, n: usize) -> f64 {
        if self.quick {
            ks_critical_value(n).max(full)
        } else {
            full
        }
    }

    fn rel_limit(&self, full: f64) -> f64 {
        if self.quick {
            full * 10f64.sqrt()
        } else {
            full
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    MonteCarlo,
    Oracle,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "monte_carlo",
            Provenance::Oracle => "oracle",
        })
    }
}

/// How `error` is measured against `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `|observed − expected|`.
    Absolute,
    /// `|observed − expected| / |expected|`.
    Relative,
    /// `|observed − expected| / standard error`.
    ZScore,
    /// KS distance of a sample to a limit law.
    Ks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub observed: f64,
    pub expected: f64,
    pub error: f64,
    pub limit: f64,
    pub measure: Measure,
    pub provenance: Provenance,
    pub pass: bool,
}

impl Check {
    fn new(label: impl Into<String>, observed: f64, expected: f64, error: f64, limit: f64, measure: Measure, provenance: Provenance) -> Self {
        Check {
            label: label.into(),
            observed,
            expected,
            error,
            limit,
            measure,
            provenance,
            pass: error.is_finite() && error < limit,
        }
    }

    pub fn absolute(label: impl Into<String>, observed: f64, expected: f64, limit: f64, provenance: Provenance) -> Self {
        Self::new(label, observed, expected, (observed - expected).abs(), limit, Measure::Absolute, provenance)
    }

    pub fn relative(label: impl Into<String>, observed: f64, expected: f64, limit: f64, provenance: Provenance) -> Self {
        let e = (observed - expected).abs() / expected.abs();
        Self::new(label, observed, expected, e, limit, Measure::Relative, provenance)
    }

    pub fn z_score(label: impl Into<String>, observed: f64, expected: f64, std_error: f64) -> Self {
        let e = (observed - expected).abs() / std_error;
        Self::new(label, observed, expected, e, Z_LIMIT, Measure::ZScore, Provenance::MonteCarlo)
    }

    pub fn ks(label: impl Into<String>, samples: &[f64], target: &LimitTarget, limit: f64) -> Result<Self> {
        let r = ks_test_with_threshold(samples, target, limit)?;
        Ok(Self::new(label, r.ks_statistic, 0.0, r.ks_statistic, limit, Measure::Ks, Provenance::MonteCarlo))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "ok  " } else { "FAIL" };
        let what = match self.measure {
            Measure::Absolute => "abs err",
            Measure::Relative => "rel err",
            Measure::ZScore => "|z|",
            Measure::Ks => "KS",
        };
        write!(
            f,
            "  {tag} {}: observed {:.10e}, expected {:.10e}, {what} {:.3e} < {:.3e} [{}]",
            self.label, self.observed, self.expected, self.error, self.limit, self.provenance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub seconds: f64,
}

impl CriterionReport {
    /// The one-line verdict.
    pub fn summary(&self) -> String {
        let worst = self
            .checks
            .iter()
            .map(|c| c.error / c.limit)
            .fold(0.0, f64::max);
        format!(
            "criterion {:>2} {:<34} {}  ({} checks, worst error/limit {:.3}, {:.1}s)",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            worst,
            self.seconds
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn criterion_name(id: u8) -> Option<&'static str> {
    Some(match id {
        1 => "kernel identity",
        2 => "normalization and Chapman-Kolmogorov",
        3 => "exit-point law",
        4 => "tau_1 law",
        5 => "stable-mixture exit density",
        6 => "cycle-count limits",
        7 => "coupon collector / Gumbel",
        8 => "cover time",
        9 => "stable cover limit",
        10 => "occupation arcsine law",
        11 => "spectral suite",
        12 => "lattice layer",
        _ => return None,
    })
}

/// Criteria grouped by the module they exercise.
pub fn suite_criteria(suite: &str) -> Option<Vec<u8>> {
    Some(match suite {
        "all" => (1..=N_CRITERIA).collect(),
        "kernels" => vec![1, 2],
        "exit" => vec![3, 4, 5],
        "limits" => vec![6, 7, 8, 9, 10],
        "spectral" => vec![11],
        "lattice" => vec![12],
        _ => return None,
    })
}

pub const SUITES: [&str; 6] = ["all", "kernels", "exit", "limits", "spectral", "lattice"];

pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> Result<CriterionReport> {
    let name = criterion_name(id).ok_or_else(|| Error::arg("criterion", format!("must be in [1, {N_CRITERIA}], got {id}")))?;
    let start = Instant::now();
    let base = id as u64 * STREAM_BLOCK;
    let checks = match id {
        1 => kernel_identity()?,
        2 => normalization()?,
        3 => exit_point_law(cfg, base)?,
        4 => tau1_law()?,
        5 => stable_mixture()?,
        6 => cycle_counts(cfg, base)?,
        7 => coupon_gumbel(cfg, base)?,
        8 => cover_time(cfg, base)?,
        9 => stable_cover(cfg, base)?,
        10 => occupation(cfg, base)?,
        11 => spectral_suite()?,
        _ => lattice_layer(cfg, base)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(CriterionReport {
        id,
        name: name.to_string(),
        checks,
        pass,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the given criteria in order. A criterion that errors is reported as
/// a failed check carrying the error message.
pub fn run_suite(ids: &[u8], cfg: &SuiteConfig) -> Vec<CriterionReport> {
    ids.iter()
        .map(|&id| {
            run_criterion(id, cfg).unwrap_or_else(|e| CriterionReport {
                id,
                name: criterion_name(id).unwrap_or("unknown").to_string(),
                checks: vec![Check::new(format!("error: {e}"), f64::NAN, f64::NAN, f64::NAN, 0.0, Measure::Absolute, Provenance::Analytic)],
                pass: false,
                seconds: 0.0,
            })
        })
        .collect()
}

fn pt(leg: usize, x: f64) -> SpiderPoint {
    SpiderPoint::new(leg, x).expect("coordinates are nonnegative")
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn tight() -> QuadratureSpec {
    QuadratureSpec::default().with_abs_tol(1e-12).with_rel_tol(1e-11)
}

fn kernel_identity() -> Result<Vec<Check>> {
    let g = SpiderGraph::infinite(3)?;
    let grid = [0.1, 0.5, 1.0, 2.0];
    let mut checks = Vec::new();
    for t in [0.25, 1.0, 4.0] {
        let mut worst: f64 = 0.0;
        let mut at = (0.0, 0.0);
        for &x in &grid {
            for &y in &grid {
                for to_leg in [1, 2] {
                    let q = KernelQuery::new(t, pt(1, x), pt(to_leg, y))?;
                    let a = transition_density(&g, &q)?;
                    let b = transition_density_convolution(&g, &q, 1e-10)?;
                    if (a - b).abs() >= worst {
                        worst = (a - b).abs();
                        at = (a, b);
                    }
                }
            }
        }
        checks.push(Check::absolute(format!("sup |closed - convolution| at t={t}"), at.0, at.1, 1e-6, Provenance::Oracle));
    }
    Ok(checks)
}

fn normalization() -> Result<Vec<Check>> {
    let spec = tight();
    let mut checks = Vec::new();
    for t in [0.5, 2.0] {
        for x in [0.0f64, 0.3, 1.5] {
            let neumann = integrate_with_breaks(
                |y| halfline_kernel(t, x, y, Boundary::Neumann).unwrap_or(0.0),
                &[0.0, x.max(1e-3), x + 5.0, f64::INFINITY],
                &spec,
            )?;
            checks.push(Check::absolute(format!("reflected half-line mass t={t} x={x}"), neumann.value, 1.0, 1e-6, Provenance::Oracle));
            let dirichlet = integrate_with_breaks(
                |y| halfline_kernel(t, x, y, Boundary::Dirichlet).unwrap_or(0.0),
                &[0.0, x.max(1e-3), x + 5.0, f64::INFINITY],
                &spec,
            )?;
            let survival = 1.0 - erfc(x / (2.0 * t).sqrt());
            checks.push(Check::absolute(format!("killed half-line mass t={t} x={x}"), dirichlet.value, survival, 1e-6, Provenance::Oracle));
        }
    }
    for n in [2usize, 3, 5] {
        let g = SpiderGraph::infinite(n)?;
        let lengths = vec![f64::INFINITY; n];
        for t in [0.5f64, 2.0] {
            for from in [SpiderPoint::origin(), pt(1, 0.3), pt(2, 1.5)] {
                let mass = spider_integral(
                    &lengths,
                    |q| transition_density(&g, &KernelQuery::new(t, from, *q).expect("t > 0")).unwrap_or(f64::NAN),
                    &[from.x(), from.x() + 6.0 * t.sqrt()],
                    &spec,
                )?;
                checks.push(Check::absolute(format!("N={n} spider mass t={t} from {from}"), mass, 1.0, 1e-6, Provenance::Oracle));
            }
        }
        let (s, t) = (0.4, 0.7);
        for (from, to) in [(pt(1, 0.3), pt(1, 0.8)), (pt(1, 0.3), pt(2, 1.2)), (pt(2, 1.0), SpiderPoint::origin())] {
            let composite = spider_integral(
                &lengths,
                |z| {
                    let a = transition_density(&g, &KernelQuery::new(s, from, *z).expect("s > 0")).unwrap_or(f64::NAN);
                    let b = transition_density(&g, &KernelQuery::new(t, *z, to).expect("t > 0")).unwrap_or(f64::NAN);
                    a * b
                },
                &[from.x(), to.x(), 6.0],
                &spec,
            )?;
            let direct = transition_density(&g, &KernelQuery::new(s + t, from, to)?)?;
            checks.push(Check::absolute(format!("N={n} Chapman-Kolmogorov {from} -> {to}"), composite, direct, 1e-5, Provenance::Oracle));
        }
    }
    Ok(checks)
}

fn exit_point_law(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let lengths = [1.0, 2.0, 2.0];
    let g = SpiderGraph::from_finite(&lengths)?;
    let n = cfg.replicas(100_000);
    let (dt_fine, ratio) = (1e-3, 4.0);
    let run = |dt: f64, first: u64| -> Result<Vec<(f64, usize)>> {
        run_replicas(cfg.seed, first, n, |s| sample_first_exit(&g, dt, s).map(|r| r.value))
            .into_iter()
            .collect()
    };
    let fine = run(dt_fine, base)?;
    let coarse = run(dt_fine * ratio, base + n as u64)?;
    let expected = exit_point_probability(&lengths)?;
    let mut checks = Vec::new();
    for (leg, &p) in expected.iter().enumerate() {
        let hits = fine.iter().filter(|(_, l)| *l == leg + 1).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        checks.push(Check::z_score(format!("exit frequency of leg {}", leg + 1), hits, p, se));
    }
    let times_f: Vec<f64> = fine.iter().map(|r| r.0).collect();
    let times_c: Vec<f64> = coarse.iter().map(|r| r.0).collect();
    let (mf, sf) = mean_and_se(&times_f);
    let (mc, sc) = mean_and_se(&times_c);
    let extrapolated = richardson(mc, mf, ratio, 1.0);
    let r = ratio;
    let se = ((r * sf).powi(2) + sc.powi(2)).sqrt() / (r - 1.0);
    checks.push(Check::z_score(
        format!("Richardson mean exit time (dt {} and {})", dt_fine * ratio, dt_fine),
        extrapolated,
        general_exit_mean(&lengths)?,
        se,
    ));
    Ok(checks)
}

fn tau1_law() -> Result<Vec<Check>> {
    let spec = QuadratureSpec::default().with_abs_tol(1e-14).with_rel_tol(1e-13);
    let breaks = [0.0, 0.1, TAU1_SWITCH, 2.0, 10.0, f64::INFINITY];
    let density = |s: f64| if s == 0.0 { 0.0 } else { tau1_density(s).unwrap_or(f64::NAN) };
    let mut checks = Vec::new();
    let mass = integrate_with_breaks(density, &breaks, &spec)?.value;
    checks.push(Check::absolute("density mass", mass, 1.0, 1e-8, Provenance::Oracle));
    let mut quad_moments = Vec::new();
    for k in 1..=4 {
        let m = integrate_with_breaks(|s| s.powi(k) * density(s), &breaks, &spec)?.value;
        quad_moments.push(m);
        let label = if k == 1 { "mean by quadrature".to_string() } else { format!("moment {k}: series vs quadrature") };
        let want = tau1_moment(k as usize)?;
        checks.push(Check::absolute(label, want, m, 1e-8 * want.max(1.0), Provenance::Oracle));
    }
    checks.push(Check::absolute("variance", tau1_moment(2)? - 1.0, 2.0 / 3.0, 1e-12, Provenance::Analytic));
    let f = LaplaceFunction::BallExit { l: 1.0, x: 0.0 };
    let mut worst = (0.0, 0.0f64, 0.0f64);
    for i in 0..=40 {
        let s = 0.05 * 100f64.powf(i as f64 / 40.0);
        let inv = laplace_invert(&f, s, DEFAULT_ORDER)?;
        let d = tau1_density(s)?;
        if (inv - d).abs() >= (worst.1 - worst.2).abs() {
            worst = (s, inv, d);
        }
    }
    checks.push(Check::absolute(
        format!("density vs Stehfest inversion on [0.05, 5], worst at s={:.3}", worst.0),
        worst.2,
        worst.1,
        1e-6,
        Provenance::Oracle,
    ));
    Ok(checks)
}

fn stable_mixture() -> Result<Vec<Check>> {
    let spec = QuadratureSpec::default().with_abs_tol(1e-12).with_rel_tol(1e-11);
    let mut checks = Vec::new();
    for (n, n1) in [(2usize, 1usize), (3, 1), (5, 2)] {
        let f = |s: f64| if s == 0.0 { 0.0 } else { one_leg_exit_density(s, 1.0, n, n1).map(|r| r.value).unwrap_or(f64::NAN) };
        for lambda in [0.1, 1.0, 5.0] {
            let lt = integrate_with_breaks(|s| (-lambda * s).exp() * f(s), &[0.0, 0.25, 1.0, 10.0, 100.0, f64::INFINITY], &spec)?.value;
            let closed = partial_boundary_exit_laplace(lambda, 1.0, n, n1)?;
            checks.push(Check::absolute(format!("(N,N1)=({n},{n1}) transform at lambda={lambda}"), lt, closed, 1e-6, Provenance::Oracle));
        }
    }
    Ok(checks)
}

fn cycle_counts(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let n = cfg.replicas(10_000);
    let l = 100.0;
    let exp1 = LimitTarget::Exp { rate: 1.0 };
    let limit = cfg.ks_limit(0.02, n);
    let all: Vec<f64> = run_replicas(cfg.seed, base, n, |s| {
        sample_cycle_count(l, 1, CycleCountVariant::AllLegs, &mut s.rng()).map(|v| v as f64 / l)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let n_legs = 3;
    let one: Vec<f64> = run_replicas(cfg.seed, base + n as u64, n, |s| {
        sample_cycle_count(l, n_legs, CycleCountVariant::OneLeg, &mut s.rng()).map(|v| v as f64 / (l * n_legs as f64))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(vec![
        Check::ks("nu_L / L vs Exp(1), L=100", &all, &exp1, limit)?,
        Check::ks("nu_{N,L} / (L N) vs Exp(1), N=3", &one, &exp1, limit)?,
    ])
}

/// `N H_N` as an exact rational.
fn coupon_mean_exact(n: usize) -> f64 {
    let mut h = BigRational::zero();
    for k in 1..=n {
        h += BigRational::new(BigInt::from(1), BigInt::from(k));
    }
    (h * BigRational::from_integer(BigInt::from(n))).to_f64().unwrap_or(f64::NAN)
}

fn coupon_gumbel(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let n_legs = 500;
    let n = cfg.replicas(10_000);
    let ln = (n_legs as f64).ln();
    let xs: Vec<f64> = run_replicas(cfg.seed, base, n, |s| {
        sample_coupon_count(n_legs, &mut s.rng()).map(|v| v as f64 / n_legs as f64 - ln)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let exact = coupon_mean_exact(n_legs);
    let (mean, _) = coupon_moments(n_legs)?;
    Ok(vec![
        Check::ks("nu_N / N - ln N vs Gumbel, N=500", &xs, &LimitTarget::Gumbel, cfg.ks_limit(0.03, n))?,
        Check::absolute("coupon mean vs exact N H_N", mean, exact, 8.0 * f64::EPSILON * exact, Provenance::Analytic),
    ])
}

fn cover_time(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let (n_legs, l) = (1000usize, 1.0);
    let n = cfg.replicas(1000);
    let times: Vec<f64> = run_replicas(cfg.seed, base, n, |s| {
        sample_cover_time(n_legs, l, CycleKind::RoundTrip, Resolution::ExactCycles, s).map(|c| c.total_time)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let pred = cover_time_prediction(n_legs, l)?;
    let mean = times.iter().sum::<f64>() / n as f64;
    Ok(vec![
        Check::relative("mean cover time vs 2N ln N + 2 gamma N", mean, pred.mean(), cfg.rel_limit(0.02), Provenance::MonteCarlo),
        Check::relative(
            "cover time variance vs (2N)^2 pi^2/6 + (4/3) N ln N",
            sample_variance(&times),
            pred.variance(),
            cfg.rel_limit(0.15),
            Provenance::MonteCarlo,
        ),
    ])
}

fn stable_cover(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let n_legs = 300;
    let n = cfg.replicas(10_000);
    let xs: Vec<f64> = run_replicas(cfg.seed, base, n, |s| {
        sample_cover_time(n_legs, 1.0, CycleKind::ReflectedCover, Resolution::ExactCycles, s)
            .map(|c| c.total_time / (c.n_cycles as f64).powi(2))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(vec![Check::ks(
        "cover time / nu_N^2 vs stable-1/2, N=300",
        &xs,
        &LimitTarget::StableHalf,
        cfg.ks_limit(0.03, n),
    )?])
}

fn occupation(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let n = cfg.replicas(10_000);
    let dt = if cfg.quick { 1e-3 } else { 1e-4 };
    let two: Vec<f64> = run_replicas(cfg.seed, base, n, |s| sample_occupation_fraction(2, 1, 1.0, dt, s))
        .into_iter()
        .collect::<Result<_>>()?;
    let three: Vec<f64> = run_replicas(cfg.seed, base + n as u64, n, |s| sample_occupation_fraction(3, 1, 1.0, dt, s))
        .into_iter()
        .collect::<Result<_>>()?;
    let (m1, se1) = mean_and_se(&three);
    let squares: Vec<f64> = three.iter().map(|x| x * x).collect();
    let (m2, se2) = mean_and_se(&squares);
    Ok(vec![
        Check::ks("N=2 occupation fraction vs (2/pi) arcsin sqrt x", &two, &LimitTarget::ArcSine, cfg.ks_limit(0.02, n))?,
        Check::z_score("(N,N0)=(3,1) first moment", m1, 1.0 / 3.0, se1),
        Check::z_score("(N,N0)=(3,1) second moment", m2, 2.0 / 9.0, se2),
    ])
}

fn spectral_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 2..=4 {
        let modes = eigenbasis(n, 1.0, 20)?;
        let d = gram_defect(&gram_matrix(&modes)?);
        checks.push(Check::absolute(format!("Gram matrix - I, N={n}, n_max=20"), d, 0.0, 1e-10, Provenance::Oracle));
    }
    let grid = KGrid::default();
    for f in [TestFunction::XGauss { leg: 2 }, TestFunction::X2Gauss { leg: 1 }] {
        let func = f.build(3)?;
        let t = spider_transform(&func, &grid)?;
        let mut worst: f64 = 0.0;
        for leg in 1..=3 {
            for i in 0..=40 {
                let p = pt(leg, 0.1 * i as f64);
                worst = worst.max((inverse_transform(&t, &p)? - func.at(&p)).abs());
            }
        }
        checks.push(Check::absolute(format!("round trip sup error, {f} on N=3"), worst, 0.0, 1e-6, Provenance::Oracle));
    }
    for (f, n) in [(TestFunction::ExpDecay { leg: 1 }, 3), (TestFunction::XGauss { leg: 2 }, 3), (TestFunction::OddPair { leg_a: 1, leg_b: 2 }, 2)] {
        let r = parseval_gap(&f.build(n)?, &grid)?;
        let c = channel_constants(n);
        checks.push(Check::absolute(
            format!("Parseval {f} on N={n}, constants 2/pi={:.6} and 2/(N pi)={:.6}", c[0], c[n - 1]),
            r.rhs,
            r.lhs,
            1e-6,
            Provenance::Oracle,
        ));
    }
    let g = SpiderGraph::infinite(3)?;
    let mut worst = (0.0f64, 0.0f64);
    let pts = [0.1, 0.5, 1.0, 2.0];
    for &x in &pts {
        for &y in &pts {
            for to_leg in [1, 2] {
                let (p, q) = (pt(1, x), pt(to_leg, y));
                let spectral = spectral_heat_kernel(3, 10.0, 0.5, &p, &q, 80)?.value;
                let closed = transition_density(&g, &KernelQuery::new(0.5, p, q)?)?;
                if (spectral - closed).abs() >= (worst.0 - worst.1).abs() {
                    worst = (spectral, closed);
                }
            }
        }
    }
    checks.push(Check::absolute("spectral heat kernel vs closed form, L=10 t=0.5", worst.0, worst.1, 1e-4, Provenance::Oracle));
    Ok(checks)
}

fn lattice_layer(cfg: &SuiteConfig, base: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut mismatches = 0usize;
    let mut compared = 0usize;
    for n_legs in 1..=3 {
        for n in 0..=8u64 {
            let starts = [LatticePoint::origin(), LatticePoint::new(1, 1)?, LatticePoint::new(n_legs, 2)?, LatticePoint::new(1, 3)?];
            for from in starts {
                let dist = lattice_distribution_by_enumeration(n_legs, n, from)?;
                for leg in 1..=n_legs {
                    for y in 0..=(n + 4) {
                        if y == 0 && leg > 1 {
                            continue;
                        }
                        let to = LatticePoint::new(leg, y)?;
                        let p = lattice_transition_probability_exact(n_legs, n, from, to)?;
                        let want = dist.get(&to).cloned().unwrap_or_else(BigRational::zero);
                        compared += 1;
                        if p != want {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    checks.push(Check::absolute(
        format!("exact transition probabilities vs enumeration ({compared} cases, n<=8, N<=3)"),
        mismatches as f64,
        0.0,
        0.5,
        Provenance::Oracle,
    ));
    let n_scale: u64 = 200;
    let a = 1.0;
    let samples = cfg.replicas(20_000);
    let cap = 55 * n_scale * n_scale;
    let scaled: Vec<Option<f64>> = run_replicas(cfg.seed, base, samples, |s: RngStream| {
        sample_lattice_hitting_time((a * n_scale as f64) as u64, cap, &mut s.rng()).map(|k| k as f64 / (n_scale * n_scale) as f64)
    });
    for lambda in [0.5, 1.0, 2.0] {
        // Capped walks contribute at most e^{−55λ}.
        let values: Vec<f64> = scaled.iter().map(|t| t.map_or(0.0, |t| (-lambda * t).exp())).collect();
        let (m, se) = mean_and_se(&values);
        checks.push(Check::z_score(
            format!("rescaled hitting transform at lambda={lambda}, n={n_scale}"),
            m,
            (-(2.0 * lambda).sqrt() * a).exp(),
            se,
        ));
    }
    Ok(checks)
}
