//! Limit laws for cycle counts, cover times and occupation fractions, and a
//! Kolmogorov–Smirnov check against them.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::numerics::special::{erfc, normal_cdf};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Mean duration of a round-trip cycle on a unit leg.
pub const CYCLE_MEAN: f64 = 2.0;
/// Variance of a round-trip cycle on a unit leg.
pub const CYCLE_VARIANCE: f64 = 4.0 / 3.0;

/// Asymptotic KS coefficient at the 1% level.
pub const KS_C_01: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LimitTarget {
    Exp { rate: f64 },
    /// `e^{−e^{−x}}`.
    Gumbel,
    /// `e^{−e^{−(x+γ)}}`, the Gumbel law shifted to mean zero.
    GumbelCentered,
    Normal,
    /// Positive stable law with transform `e^{−√(2λ)}`.
    StableHalf,
    /// `(2/π) arcsin √x`.
    ArcSine,
    /// Fraction of time spent on `n0` of `n_legs` legs.
    GeneralizedArcSine { n_legs: usize, n0: usize },
}

impl LimitTarget {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitTarget::Exp { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            LimitTarget::Gumbel => (-(-x).exp()).exp(),
            LimitTarget::GumbelCentered => (-(-(x + EULER_GAMMA)).exp()).exp(),
            LimitTarget::Normal => normal_cdf(x),
            LimitTarget::StableHalf => {
                if x <= 0.0 {
                    0.0
                } else {
                    erfc(1.0 / (2.0 * x).sqrt())
                }
            }
            LimitTarget::ArcSine => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    FRAC_2_PI * x.sqrt().asin()
                }
            }
            LimitTarget::GeneralizedArcSine { n_legs, n0 } => {
                if x <= 0.0 {
                    return 0.0;
                }
                if x >= 1.0 || n0 >= n_legs {
                    return if x >= 1.0 { 1.0 } else { 0.0 };
                }
                let p = n0 as f64 / n_legs as f64;
                FRAC_2_PI * ((1.0 - p) / p * (x / (1.0 - x)).sqrt()).atan()
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            LimitTarget::Exp { rate } => format!("exp(rate={rate})"),
            LimitTarget::Gumbel => "gumbel".into(),
            LimitTarget::GumbelCentered => "gumbel_centered".into(),
            LimitTarget::Normal => "normal".into(),
            LimitTarget::StableHalf => "stable_half".into(),
            LimitTarget::ArcSine => "arcsine".into(),
            LimitTarget::GeneralizedArcSine { n_legs, n0 } => format!("generalized_arcsine({n_legs},{n0})"),
        }
    }
}

pub fn limit_cdf(target: &LimitTarget, x: f64) -> f64 {
    target.cdf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GfVariant {
    AllLegs,
    OneLeg,
}

/// Generating function of the cycle count: `z/(L − (L−1)z)` for all legs,
/// `z/(LN − (LN−1)z)` when one leg of `N` carries the target level.
pub fn cycle_count_gf(z: f64, l: f64, n_legs: usize, variant: GfVariant) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::arg("z", format!("must lie in [0, 1], got {z}")));
    }
    if !(l >= 1.0) {
        return Err(Error::arg("L", format!("must be >= 1, got {l}")));
    }
    let m = match variant {
        GfVariant::AllLegs => l,
        GfVariant::OneLeg => l * n_legs as f64,
    };
    Ok(z / (m - (m - 1.0) * z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub ks_statistic: f64,
    pub n_samples: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// One-sample KS statistic `sup |F_n − F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::arg("samples", "must be nonempty"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::arg("samples", "contain NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Critical KS distance at the 1% level with the usual finite-`n`
/// correction.
pub fn ks_critical_value(n: usize) -> f64 {
    let s = (n as f64).sqrt();
    KS_C_01 / (s + 0.12 + 0.11 / s)
}

/// KS test at the 1% level.
pub fn ks_test(samples: &[f64], target: &LimitTarget) -> Result<GofReport> {
    ks_test_with_threshold(samples, target, ks_critical_value(samples.len()))
}

/// KS test against a fixed distance threshold.
pub fn ks_test_with_threshold(samples: &[f64], target: &LimitTarget, threshold: f64) -> Result<GofReport> {
    let d = ks_statistic(samples, |x| target.cdf(x))?;
    Ok(GofReport {
        ks_statistic: d,
        n_samples: samples.len(),
        threshold,
        pass: d < threshold,
    })
}

/// Exact mean `N H_N` and variance `Σ_{k<N} Nk/(N−k)²` of the number of
/// uniform draws needed to see all `N` legs.
pub fn coupon_moments(n_legs: usize) -> Result<(f64, f64)> {
    if n_legs == 0 {
        return Err(Error::arg("n_legs", "must be >= 1"));
    }
    let n = n_legs as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    // Smallest terms first.
    for k in 0..n_legs {
        let k = k as f64;
        mean += n / (n - k);
        var += n * k / ((n - k) * (n - k));
    }
    Ok((mean, var))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverPrediction {
    /// `a N ln N L²`.
    pub leading: f64,
    /// `a N L²`, the scale of the Gumbel fluctuation.
    pub gumbel_scale: f64,
    /// `σ √(N ln N) L²`, the scale of the Gaussian fluctuation.
    pub gaussian_scale: f64,
}

impl CoverPrediction {
    /// `E T ≈ aN ln N + aNγ`, scaled by `L²`.
    pub fn mean(&self) -> f64 {
        self.leading + EULER_GAMMA * self.gumbel_scale
    }

    /// `(aN)² π²/6 + σ² N ln N`, scaled by `L⁴`.
    pub fn variance(&self) -> f64 {
        self.gumbel_scale.powi(2) * PI * PI / 6.0 + self.gaussian_scale.powi(2)
    }
}

pub fn cover_time_prediction(n_legs: usize, l: f64) -> Result<CoverPrediction> {
    if n_legs < 2 {
        return Err(Error::arg("n_legs", format!("must be >= 2, got {n_legs}")));
    }
    positive("L", l)?;
    let n = n_legs as f64;
    let l2 = l * l;
    Ok(CoverPrediction {
        leading: CYCLE_MEAN * n * n.ln() * l2,
        gumbel_scale: CYCLE_MEAN * n * l2,
        gaussian_scale: CYCLE_VARIANCE.sqrt() * (n * n.ln()).sqrt() * l2,
    })
}

fn check_occupation(n_legs: usize, n0: usize) -> Result<()> {
    if n_legs < 1 || n0 == 0 || n0 > n_legs {
        return Err(Error::arg("n0", format!("need 1 <= n0 <= n_legs, got n0={n0}, n_legs={n_legs}")));
    }
    Ok(())
}

/// `Σ (−1)ⁿ mₙ zⁿ` for the moments of the occupation fraction:
/// `(1/√(1+z)) (N₀ + (N−N₀)√(1+z)) / ((N−N₀) + N₀√(1+z))`.
pub fn arcsine_moment_gf(z: f64, n_legs: usize, n0: usize) -> Result<f64> {
    check_occupation(n_legs, n0)?;
    if !(z.abs() < 1.0) {
        return Err(Error::arg("z", format!("need |z| < 1, got {z}")));
    }
    let (n, n0) = (n_legs as f64, n0 as f64);
    let s = (1.0 + z).sqrt();
    Ok((n0 + (n - n0) * s) / ((n - n0) + n0 * s) / s)
}

/// Taylor coefficients of `(1+z)^a` up to order `m`.
fn binomial_series(a: f64, m: usize) -> Vec<f64> {
    let mut c = vec![1.0; m + 1];
    for k in 1..=m {
        c[k] = c[k - 1] * (a - (k - 1) as f64) / k as f64;
    }
    c
}

/// Moments `m_0, …, m_n` of the occupation fraction, from the Taylor
/// coefficients of [`arcsine_moment_gf`].
pub fn arcsine_moments(n: usize, n_legs: usize, n0: usize) -> Result<Vec<f64>> {
    check_occupation(n_legs, n0)?;
    let (nf, n0f) = (n_legs as f64, n0 as f64);
    let root = binomial_series(0.5, n);
    let inv_root = binomial_series(-0.5, n);
    let num: Vec<f64> = root
        .iter()
        .enumerate()
        .map(|(k, r)| (nf - n0f) * r + if k == 0 { n0f } else { 0.0 })
        .collect();
    let den: Vec<f64> = root
        .iter()
        .enumerate()
        .map(|(k, r)| n0f * r + if k == 0 { nf - n0f } else { 0.0 })
        .collect();
    // quotient = num / den
    let mut quot = vec![0.0; n + 1];
    for k in 0..=n {
        let mut acc = num[k];
        for j in 0..k {
            acc -= quot[j] * den[k - j];
        }
        quot[k] = acc / den[0];
    }
    Ok((0..=n)
        .map(|k| {
            let c: f64 = (0..=k).map(|j| inv_root[j] * quot[k - j]).sum();
            if k % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect())
}

/// `E θⁿ` for the fraction of time spent on `n0` of `n_legs` legs.
pub fn arcsine_moment(n: usize, n_legs: usize, n0: usize) -> Result<f64> {
    Ok(arcsine_moments(n, n_legs, n0)?[n])
}
