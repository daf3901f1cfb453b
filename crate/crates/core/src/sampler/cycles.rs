//! Exact cycle-level sampling: excursion durations, cycle counts, coupon
//! collection and cover times.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::exit::{tau1_cdf, tau1_density, CycleKind};
use crate::numerics::rng::RngStream;
use crate::sampler::path::{sample_reach_time, sample_return_time};

const TABLE_LO: f64 = 0.02;
const TABLE_HI: f64 = 3.0;
const TABLE_POINTS: usize = 4096;

/// Inverse-CDF sampler for the exit time `τ₁` of the unit ball.
///
/// The bulk uses cubic Hermite interpolation of the quantile function on a
/// geometric grid in `s`; above `s = 3` the one-term tail `1 − F(s) = (4/π)e^{−π²s/8}` is
/// inverted in closed form (the next term is `e^{−π²s}` smaller).
#[derive(Debug, Clone)]
pub struct Tau1Sampler {
    u: Vec<f64>,
    s: Vec<f64>,
    dsdu: Vec<f64>,
}

impl Tau1Sampler {
    pub fn new() -> Self {
        let mut u = Vec::with_capacity(TABLE_POINTS);
        let mut s = Vec::with_capacity(TABLE_POINTS);
        let mut dsdu = Vec::with_capacity(TABLE_POINTS);
        for i in 0..TABLE_POINTS {
            let si = TABLE_LO * (TABLE_HI / TABLE_LO).powf(i as f64 / (TABLE_POINTS - 1) as f64);
            s.push(si);
            u.push(tau1_cdf(si).expect("table point is positive"));
            dsdu.push(1.0 / tau1_density(si).expect("table point is positive"));
        }
        Tau1Sampler { u, s, dsdu }
    }

    /// Process-wide instance, built on first use.
    pub fn shared() -> &'static Tau1Sampler {
        static SHARED: OnceLock<Tau1Sampler> = OnceLock::new();
        SHARED.get_or_init(Tau1Sampler::new)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.u.len();
        if p >= self.u[n - 1] {
            let tail = (1.0 - p).max(f64::MIN_POSITIVE);
            return -8.0 / (PI * PI) * (PI * tail / 4.0).ln();
        }
        if p <= self.u[0] {
            return self.bisect(p);
        }
        let i = self.u.partition_point(|&v| v <= p) - 1;
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let h = u1 - u0;
        let t = (p - u0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.s[i] + h10 * h * self.dsdu[i] + h01 * self.s[i + 1] + h11 * h * self.dsdu[i + 1]
    }

    fn bisect(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, TABLE_LO);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tau1_cdf(mid).unwrap_or(0.0) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

impl Default for Tau1Sampler {
    fn default() -> Self {
        Self::new()
    }
}

/// Hitting time of level `c` by standard Brownian motion: `c²/Z²`.
pub fn sample_stable_half<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    c * c / (z * z)
}

/// Number of trials up to and including the first success.
pub fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<u64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg("p", format!("must lie in (0, 1], got {p}")));
    }
    if p == 1.0 {
        return Ok(1);
    }
    let g = Geometric::new(p).map_err(|e| Error::arg("p", e.to_string()))?;
    Ok(g.sample(rng) + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleCountVariant {
    /// Cycles to level 1 before reaching level `L`: geometric with mean `L`.
    AllLegs,
    /// Same, when only one of `N` legs leads to level `L`: mean `LN`.
    OneLeg,
}

/// Number of excursion cycles `ν` before the level `l` is reached.
pub fn sample_cycle_count<R: Rng + ?Sized>(
    l: f64,
    n_legs: usize,
    variant: CycleCountVariant,
    rng: &mut R,
) -> Result<u64> {
    if !(l >= 1.0) {
        return Err(Error::arg("L", format!("must be >= 1, got {l}")));
    }
    let mean = match variant {
        CycleCountVariant::AllLegs => l,
        CycleCountVariant::OneLeg => l * n_legs as f64,
    };
    sample_geometric(1.0 / mean, rng)
}

/// Draws needed to see all `n` legs when each draw is uniform.
pub fn sample_coupon_count<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<u64> {
    if n == 0 {
        return Err(Error::arg("n_legs", "must be >= 1"));
    }
    let nf = n as f64;
    let mut total = 0;
    for k in 0..n {
        total += sample_geometric((nf - k as f64) / nf, rng)?;
    }
    Ok(total)
}

/// How cycle durations are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Resolution {
    /// Simulate each cycle with the discretized path sampler.
    Path { dt: f64 },
    /// Draw each cycle duration from its exact law.
    ExactCycles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverSample {
    pub total_time: f64,
    pub n_cycles: u64,
}

/// Duration of one cycle out to `l` and back on a single leg.
pub fn sample_cycle_duration<R: Rng + ?Sized>(
    l: f64,
    kind: CycleKind,
    resolution: Resolution,
    rng: &mut R,
) -> Result<f64> {
    let l2 = l * l;
    match resolution {
        Resolution::ExactCycles => {
            let tau = Tau1Sampler::shared();
            let out = l2 * tau.sample(rng);
            let back = match kind {
                CycleKind::RoundTrip => l2 * tau.sample(rng),
                CycleKind::ReflectedCover => sample_stable_half(l, rng),
            };
            Ok(out + back)
        }
        Resolution::Path { dt } => {
            positive("dt", dt)?;
            let cap = 1e4 * l2;
            let out = sample_reach_time(l, dt, rng, cap)?;
            let back = match kind {
                CycleKind::RoundTrip => sample_reach_time(l, dt, rng, cap)?,
                CycleKind::ReflectedCover => sample_return_time(l, dt, rng, cap)?,
            };
            Ok(out + back)
        }
    }
}

/// Repeats cycles on uniformly chosen legs until every leg has been visited;
/// returns the total time and the number of cycles.
pub fn sample_cover_time(
    n_legs: usize,
    l: f64,
    kind: CycleKind,
    resolution: Resolution,
    stream: RngStream,
) -> Result<CoverSample> {
    if n_legs == 0 {
        return Err(Error::arg("n_legs", "must be >= 1"));
    }
    positive("L", l)?;
    let mut rng = stream.rng();
    let n_cycles = sample_coupon_count(n_legs, &mut rng)?;
    let mut total = 0.0;
    for _ in 0..n_cycles {
        total += sample_cycle_duration(l, kind, resolution, &mut rng)?;
    }
    Ok(CoverSample {
        total_time: total,
        n_cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::derive_stream;

    #[test]
    fn tau1_quantile_inverts_cdf() {
        let t = Tau1Sampler::shared();
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let s = t.quantile(p);
            assert!((tau1_cdf(s).unwrap() - p).abs() < 1e-10, "p={p}");
        }
        for p in [1e-13, 1e-9, 0.999_999, 1.0 - 1e-12] {
            let s = t.quantile(p);
            assert!(((tau1_cdf(s).unwrap() - p) / p.min(1.0 - p)).abs() < 1e-6, "p={p}");
        }
    }

    #[test]
    fn tau1_samples_have_unit_mean() {
        let mut rng = derive_stream(1, 0).rng();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| Tau1Sampler::shared().sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 4.0 * (2.0f64 / 3.0 / n as f64).sqrt());
        assert!((var - 2.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn geometric_and_coupons() {
        let mut rng = derive_stream(2, 0).rng();
        assert_eq!(sample_geometric(1.0, &mut rng).unwrap(), 1);
        assert!(sample_geometric(0.0, &mut rng).is_err());
        assert_eq!(sample_coupon_count(1, &mut rng).unwrap(), 1);
        let n = 20_000;
        let m = (0..n).map(|_| sample_coupon_count(2, &mut rng).unwrap() as f64).sum::<f64>() / n as f64;
        assert!((m - 3.0).abs() < 0.05);
        let m = (0..n)
            .map(|_| sample_cycle_count(7.0, 3, CycleCountVariant::AllLegs, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / n as f64;
        assert!((m - 7.0).abs() < 4.0 * (42.0f64 / n as f64).sqrt());
    }

    #[test]
    fn single_leg_cover_is_one_cycle() {
        for id in 0..20 {
            let c = sample_cover_time(1, 1.0, CycleKind::RoundTrip, Resolution::ExactCycles, derive_stream(3, id)).unwrap();
            assert_eq!(c.n_cycles, 1);
            assert!(c.total_time > 0.0);
        }
    }

    #[test]
    fn path_cycles_match_exact_cycles_in_mean() {
        let mut rng = derive_stream(4, 0).rng();
        let n = 4000;
        let res = Resolution::Path { dt: 1e-3 };
        let m = (0..n)
            .map(|_| sample_cycle_duration(1.0, CycleKind::RoundTrip, res, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        // Mean 2, standard deviation √(4/3); the step bias is about dt.
        assert!((m - 2.0).abs() < 4.0 * (4.0f64 / 3.0 / n as f64).sqrt() + 5e-3, "{m}");
    }
}
