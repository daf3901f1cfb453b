//! First-exit laws on spiders: closed-form Laplace transforms, series
//! densities and moments.
//!
//! Every transform is written once against [`Real`] so the same expression
//! serves ordinary evaluation and the extended-precision inversion oracle.
//! Hyperbolic ratios are formed from `e^{-y}` so nothing overflows for large
//! `√(2λ)L`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, Error, Result};
use crate::numerics::dd::{cosh_ratio, sech, sinh_ratio, y_coth, y_over_sinh, Dd, Real};
use crate::numerics::euler::{bernoulli_numbers, euler_number};
use crate::numerics::laplace::LaplaceTransform;
use crate::numerics::series::{alternating_sum, SeriesResult};
use crate::numerics::special::erfc;

/// Below this time the τ₁ density is summed from its image (small-time)
/// series, above it from the eigenfunction series.
pub const TAU1_SWITCH: f64 = 0.4;

/// Truncation target of the certified density series.
pub const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    /// Origin to the end of a leg of length `L` and back.
    RoundTrip,
    /// Reflected motion on `[0, ∞)`: reach `L`, then return to the origin.
    ReflectedCover,
}

/// `λ ↦ E e^{-λT}` for the exit times handled by this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LaplaceFunction {
    /// Exit from the ball of radius `l` around the origin, started at distance `x`.
    BallExit { l: f64, x: f64 },
    /// Exit from a finite spider started at the origin.
    GeneralExit { lengths: Vec<f64> },
    /// `n1` of `n_legs` legs cut at `l`, the rest infinite, started at the origin.
    PartialBoundary { l: f64, n_legs: usize, n1: usize },
    /// Exit from `(0, l)` started at `x`.
    IntervalExit { l: f64, x: f64 },
    Cycle { l: f64, kind: CycleKind },
    /// Hitting time of the origin from `x` on a half-line.
    FirstPassage { x: f64 },
    Exponential { mean: f64 },
}

impl LaplaceFunction {
    pub fn eval_real<T: Real>(&self, lambda: T) -> T {
        let a = (T::from_f64(2.0) * lambda).sqrt();
        let c = T::from_f64;
        match self {
            LaplaceFunction::BallExit { l, x } => cosh_ratio(a * c(*x), a * c(*l)),
            LaplaceFunction::GeneralExit { lengths } => {
                let mut num = T::zero();
                let mut den = T::zero();
                for &li in lengths {
                    let y = a * c(li);
                    num = num + y_over_sinh(y) / c(li);
                    den = den + y_coth(y) / c(li);
                }
                num / den
            }
            LaplaceFunction::PartialBoundary { l, n_legs, n1 } => {
                let e = (-(a * c(*l))).exp();
                let e2 = e * e;
                let n1 = c(*n1 as f64);
                let rest = c(*n_legs as f64) - n1;
                c(2.0) * e * n1 / (n1 * (T::one() + e2) + rest * (T::one() - e2))
            }
            LaplaceFunction::IntervalExit { l, x } => {
                if lambda.to_f64() == 0.0 || *x == 0.0 || *x == *l {
                    return T::one();
                }
                let al = a * c(*l);
                sinh_ratio(a * c(*l - *x), al) + sinh_ratio(a * c(*x), al)
            }
            LaplaceFunction::Cycle { l, kind } => {
                let y = a * c(*l);
                match kind {
                    CycleKind::RoundTrip => {
                        let s = sech(y);
                        s * s
                    }
                    CycleKind::ReflectedCover => (-y).exp() * sech(y),
                }
            }
            LaplaceFunction::FirstPassage { x } => (-(a * c(*x))).exp(),
            LaplaceFunction::Exponential { mean } => T::one() / (T::one() + lambda * c(*mean)),
        }
    }

    /// Expected value of the underlying time (infinite for heavy tails).
    pub fn mean(&self) -> f64 {
        match self {
            LaplaceFunction::BallExit { l, x } => l * l - x * x,
            LaplaceFunction::GeneralExit { lengths } => general_exit_mean_unchecked(lengths),
            LaplaceFunction::PartialBoundary { l, n_legs, n1 } => {
                if n1 == n_legs {
                    l * l
                } else {
                    f64::INFINITY
                }
            }
            LaplaceFunction::IntervalExit { l, x } => x * (l - x),
            LaplaceFunction::Cycle { l, kind } => match kind {
                CycleKind::RoundTrip => 2.0 * l * l,
                CycleKind::ReflectedCover => f64::INFINITY,
            },
            LaplaceFunction::FirstPassage { .. } => f64::INFINITY,
            LaplaceFunction::Exponential { mean } => *mean,
        }
    }

    pub fn description(&self) -> String {
        match self {
            LaplaceFunction::BallExit { l, x } => format!("ball exit, radius {l}, start {x}"),
            LaplaceFunction::GeneralExit { lengths } => format!("spider exit, lengths {lengths:?}"),
            LaplaceFunction::PartialBoundary { l, n_legs, n1 } => {
                format!("exit through {n1} of {n_legs} legs cut at {l}")
            }
            LaplaceFunction::IntervalExit { l, x } => format!("interval (0, {l}) exit from {x}"),
            LaplaceFunction::Cycle { l, kind } => format!("{kind:?} cycle, leg length {l}"),
            LaplaceFunction::FirstPassage { x } => format!("first passage to 0 from {x}"),
            LaplaceFunction::Exponential { mean } => format!("exponential, mean {mean}"),
        }
    }
}

impl LaplaceTransform for LaplaceFunction {
    fn eval(&self, lambda: f64) -> f64 {
        self.eval_real(lambda)
    }
    fn eval_dd(&self, lambda: Dd) -> Dd {
        self.eval_real(lambda)
    }
}

/// `F(λ)/λ`, the transform of the distribution function `P(T <= s)`.
#[derive(Debug, Clone, Copy)]
pub struct CdfTransform<'a>(pub &'a LaplaceFunction);

impl LaplaceTransform for CdfTransform<'_> {
    fn eval(&self, lambda: f64) -> f64 {
        self.0.eval_real(lambda) / lambda
    }
    fn eval_dd(&self, lambda: Dd) -> Dd {
        self.0.eval_real(lambda) / lambda
    }
}

fn check_lambda(lambda: f64) -> Result<f64> {
    nonnegative("lambda", lambda)
}

fn check_in_segment(l: f64, x: f64) -> Result<()> {
    positive("L", l)?;
    if !(0.0..=l).contains(&x) {
        return Err(Error::arg("x", format!("must lie in [0, {l}], got {x}")));
    }
    Ok(())
}

fn check_lengths(lengths: &[f64]) -> Result<()> {
    if lengths.is_empty() {
        return Err(Error::arg("lengths", "need at least one leg"));
    }
    for &l in lengths {
        positive("lengths", l)?;
    }
    Ok(())
}

fn check_legs(n_legs: usize, n1: usize) -> Result<()> {
    if n_legs < 2 {
        return Err(Error::arg("n_legs", format!("must be >= 2, got {n_legs}")));
    }
    if n1 == 0 || n1 > n_legs {
        return Err(Error::arg("n1", format!("must be in [1, {n_legs}], got {n1}")));
    }
    Ok(())
}

/// `E_x e^{-λτ}` for the exit of the ball of radius `l`, `x` the distance of
/// the start from the origin.
pub fn ball_exit_laplace(lambda: f64, l: f64, x: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_in_segment(l, x)?;
    Ok(LaplaceFunction::BallExit { l, x }.eval(lambda))
}

/// Density of the exit time from the unit ball started at the origin, with
/// its certified truncation bound.
pub fn tau1_density_series(s: f64) -> Result<SeriesResult> {
    positive("s", s)?;
    if s >= TAU1_SWITCH {
        let c = s * PI * PI / 8.0;
        alternating_sum(
            |k| {
                let m = (2 * k + 1) as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * m * PI / 2.0 * (-c * m * m).exp()
            },
            SERIES_TOL,
        )
    } else {
        let pre = 2.0 / (2.0 * PI * s * s * s).sqrt();
        alternating_sum(
            |n| {
                let m = (2 * n + 1) as f64;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * pre * m * (-m * m / (2.0 * s)).exp()
            },
            SERIES_TOL,
        )
    }
}

pub fn tau1_density(s: f64) -> Result<f64> {
    Ok(tau1_density_series(s)?.value.max(0.0))
}

/// `P(τ₁ <= s)`.
pub fn tau1_cdf(s: f64) -> Result<f64> {
    nonnegative("s", s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let r = if s >= TAU1_SWITCH {
        let c = s * PI * PI / 8.0;
        let tail = alternating_sum(
            |k| {
                let m = (2 * k + 1) as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * 4.0 / (PI * m) * (-c * m * m).exp()
            },
            SERIES_TOL,
        )?;
        1.0 - tail.value
    } else {
        let r = (2.0 * s).sqrt();
        alternating_sum(
            |n| {
                let m = (2 * n + 1) as f64;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * 2.0 * erfc(m / r)
            },
            SERIES_TOL,
        )?
        .value
    };
    Ok(r.clamp(0.0, 1.0))
}

/// `E τ₁^k = 2^k k! |E_{2k}| / (2k)!`, read off the Taylor series of
/// `1/cosh √(2λ)`.
pub fn tau1_moment(k: usize) -> Result<f64> {
    tau1_moment_exact(k)?
        .to_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Overflow(format!("moment of order {k}")))
}

pub fn tau1_moment_exact(k: usize) -> Result<BigRational> {
    if k == 0 {
        return Ok(BigRational::from_integer(BigInt::from(1)));
    }
    let e = BigInt::from(euler_number(2 * k)?);
    let fact = |n: usize| (1..=n).fold(BigInt::from(1), |a, i| a * BigInt::from(i));
    let num = (BigInt::from(1) << k) * fact(k) * e;
    Ok(BigRational::new(num, fact(2 * k)))
}

/// `E τ_L^k = L^{2k} E τ₁^k`.
pub fn ball_exit_moment(k: usize, l: f64) -> Result<f64> {
    positive("L", l)?;
    let m = tau1_moment(k)? * l.powi(2 * k as i32);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Overflow(format!("moment of order {k} at L = {l}")))
    }
}

/// Partial product `Π_{k=1}^{n} (1 + 8λ/((2k−1)π)²)` of `cosh √(2λ)`.
pub fn cosh_product(lambda: f64, n_factors: usize) -> f64 {
    (1..=n_factors).fold(1.0, |acc, k| {
        let m = (2 * k - 1) as f64 * PI;
        acc * (1.0 + 8.0 * lambda / (m * m))
    })
}

/// Probability of leaving a finite spider through the end of each leg,
/// started at the origin: proportional to `1/L_i`.
pub fn exit_point_probability(lengths: &[f64]) -> Result<Vec<f64>> {
    check_lengths(lengths)?;
    let total: f64 = lengths.iter().map(|l| 1.0 / l).sum();
    Ok(lengths.iter().map(|l| 1.0 / l / total).collect())
}

pub fn general_exit_laplace(lambda: f64, lengths: &[f64]) -> Result<f64> {
    check_lambda(lambda)?;
    check_lengths(lengths)?;
    Ok(LaplaceFunction::GeneralExit {
        lengths: lengths.to_vec(),
    }
    .eval(lambda))
}

/// `E τ = Σ L_i / Σ (1/L_i)`.
pub fn general_exit_mean(lengths: &[f64]) -> Result<f64> {
    check_lengths(lengths)?;
    Ok(general_exit_mean_unchecked(lengths))
}

fn general_exit_mean_unchecked(lengths: &[f64]) -> f64 {
    lengths.iter().sum::<f64>() / lengths.iter().map(|l| 1.0 / l).sum::<f64>()
}

/// Largest order accepted by the moment routines.
pub const MAX_MOMENT: usize = 40;

/// `E τ^k` for `k = 0..=k_max` on a finite spider started at the origin.
///
/// The transform is `Σ (1/Lᵢ) yᵢ/sinh yᵢ / Σ (1/Lᵢ) yᵢ coth yᵢ` with
/// `yᵢ² = 2λLᵢ²`; both sums are power series in `λ` with Bernoulli
/// coefficients, and `E τ^k = (−1)^k k! [λ^k]` of their quotient.
pub fn general_exit_moments(lengths: &[f64], k_max: usize) -> Result<Vec<f64>> {
    check_lengths(lengths)?;
    if k_max > MAX_MOMENT {
        return Err(Error::arg("k", format!("must be <= {MAX_MOMENT}, got {k_max}")));
    }
    let b = bernoulli_numbers(2 * k_max)?;
    let mut num = vec![0.0; k_max + 1];
    let mut den = vec![0.0; k_max + 1];
    let mut fact = BigInt::from(1);
    for n in 0..=k_max {
        if n > 0 {
            fact *= BigInt::from((2 * n - 1) * 2 * n);
        }
        let pow4 = BigInt::from(1) << (2 * n);
        let b2n = &b[2 * n];
        // y coth y and y / sinh y coefficients of y^{2n}
        let coth = (b2n * BigRational::from_integer(pow4.clone()) / BigRational::from_integer(fact.clone()))
            .to_f64()
            .unwrap_or(f64::NAN);
        let csch = (b2n * BigRational::from_integer(BigInt::from(2) - pow4) / BigRational::from_integer(fact.clone()))
            .to_f64()
            .unwrap_or(f64::NAN);
        for &l in lengths {
            let y2n = (2.0 * l * l).powi(n as i32) / l;
            num[n] += csch * y2n;
            den[n] += coth * y2n;
        }
    }
    let mut quot = vec![0.0; k_max + 1];
    for k in 0..=k_max {
        let mut acc = num[k];
        for j in 0..k {
            acc -= quot[j] * den[k - j];
        }
        quot[k] = acc / den[0];
    }
    let mut fact = 1.0;
    let moments: Vec<f64> = quot
        .iter()
        .enumerate()
        .map(|(k, q)| {
            if k > 0 {
                fact *= k as f64;
            }
            if k % 2 == 0 {
                fact * q
            } else {
                -fact * q
            }
        })
        .collect();
    if moments.iter().all(|m| m.is_finite()) {
        Ok(moments)
    } else {
        Err(Error::Overflow(format!("moments up to order {k_max}")))
    }
}

/// The moments of [`general_exit_moments`] by an independent route: Taylor
/// coefficients of the transform from the trapezoidal rule on a circle in the
/// complex `λ` plane. The radius `π²/(16 L_max²)` is half the distance to the
/// nearest singularity at `−λ₁ <= −π²/(8 L_max²)`.
pub fn general_exit_moments_contour(lengths: &[f64], k_max: usize) -> Result<Vec<f64>> {
    check_lengths(lengths)?;
    if k_max > MAX_MOMENT {
        return Err(Error::arg("k", format!("must be <= {MAX_MOMENT}, got {k_max}")));
    }
    let l_max = lengths.iter().copied().fold(0.0, f64::max);
    let r = PI * PI / (16.0 * l_max * l_max);
    let m = 128;
    let transform = |lambda: Complex64| -> Complex64 {
        let a = (2.0 * lambda).sqrt();
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for &l in lengths {
            let y = a * l;
            num += y / y.sinh() / l;
            den += y * y.cosh() / y.sinh() / l;
        }
        num / den
    };
    let values: Vec<Complex64> = (0..m)
        .map(|j| transform(Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64)))
        .collect();
    let mut fact = 1.0;
    Ok((0..=k_max)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            let c: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / m as f64))
                .sum();
            let coeff = c.re / (m as f64 * r.powi(k as i32));
            if k % 2 == 0 {
                fact * coeff
            } else {
                -fact * coeff
            }
        })
        .collect())
}

/// Decay rates `ω` of the exit-time density of a finite spider: the roots of
/// `Σ cot(Lᵢω) = 0` below `omega_max`, increasing. `Σ cot` falls from `+∞` to
/// `−∞` between consecutive poles `mπ/Lᵢ`, so each gap holds exactly one root.
pub fn general_exit_frequencies(lengths: &[f64], omega_max: f64) -> Result<Vec<f64>> {
    check_lengths(lengths)?;
    positive("omega_max", omega_max)?;
    let mut poles = vec![0.0];
    for &l in lengths {
        let m_max = (omega_max * l / PI).floor() as usize + 1;
        poles.extend((1..=m_max).map(|m| m as f64 * PI / l));
    }
    poles.sort_by(|a, b| a.partial_cmp(b).expect("poles are finite"));
    poles.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * *b);
    let g = |w: f64| lengths.iter().map(|&l| 1.0 / (l * w).tan()).sum::<f64>();
    let mut roots = Vec::new();
    for gap in poles.windows(2) {
        let (mut lo, mut hi) = (gap[0], gap[1]);
        if lo >= omega_max {
            break;
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        if root < omega_max {
            roots.push(root);
        }
    }
    Ok(roots)
}

/// Exit-time density of a finite spider started at the origin, from the
/// residues of the transform at `λ = −ω²/2`:
/// `f(s) = Σ_ω ω Σᵢ 1/sin(Lᵢω) / Σᵢ Lᵢ/sin²(Lᵢω) · e^{−ω²s/2}`.
///
/// Each coefficient is at most `√N ω / L_min` and every unit interval of `ω`
/// holds at most `Σ Lᵢ/π + 1` rates, which bounds the omitted tail.
pub fn general_exit_density(s: f64, lengths: &[f64]) -> Result<SeriesResult> {
    positive("s", s)?;
    check_lengths(lengths)?;
    let n = lengths.len() as f64;
    let l_min = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let per_unit = lengths.iter().sum::<f64>() / PI + 1.0;
    let tail = |w: f64| per_unit * n.sqrt() / l_min * (w + 1.0 / s) * (-0.5 * w * w * s).exp();
    let mut omega_max = (1.0 / s).sqrt() + PI / l_min;
    while tail(omega_max) > SERIES_TOL {
        omega_max *= 1.25;
    }
    let rates = general_exit_frequencies(lengths, omega_max)?;
    let value = rates
        .iter()
        .map(|&w| {
            let (mut inv_sin, mut weight) = (0.0, 0.0);
            for &l in lengths {
                let sn = (l * w).sin();
                inv_sin += 1.0 / sn;
                weight += l / (sn * sn);
            }
            w * inv_sin / weight * (-0.5 * w * w * s).exp()
        })
        .sum();
    Ok(SeriesResult {
        value,
        terms_used: rates.len(),
        tail_bound: tail(omega_max),
    })
}

/// Only leg 1 is cut at `l`; `1/(cosh √(2λ)L + (N−1) sinh √(2λ)L)`.
pub fn one_leg_exit_laplace(lambda: f64, l: f64, n_legs: usize) -> Result<f64> {
    partial_boundary_exit_laplace(lambda, l, n_legs, 1)
}

/// `n1` legs cut at `l`:
/// `N₁ / (N₁ cosh √(2λ)L + (N − N₁) sinh √(2λ)L)`.
pub fn partial_boundary_exit_laplace(lambda: f64, l: f64, n_legs: usize, n1: usize) -> Result<f64> {
    check_lambda(lambda)?;
    positive("L", l)?;
    check_legs(n_legs, n1)?;
    Ok(LaplaceFunction::PartialBoundary { l, n_legs, n1 }.eval(lambda))
}

/// Weights `(p, q)` of the geometric mixture of stable-½ laws at levels
/// `(2n+1)L`: `p = 2N₁/N`, `q = 1 − p`.
pub fn partial_boundary_weights(n_legs: usize, n1: usize) -> Result<(f64, f64)> {
    check_legs(n_legs, n1)?;
    let p = 2.0 * n1 as f64 / n_legs as f64;
    Ok((p, 1.0 - p))
}

/// Density of the exit time through `n1` of `n_legs` legs cut at `l`, as the
/// mixture `Σ p qⁿ (2n+1)L/√(2πs³) e^{−(2n+1)²L²/2s}` with a certified tail.
pub fn one_leg_exit_density(s: f64, l: f64, n_legs: usize, n1: usize) -> Result<SeriesResult> {
    positive("s", s)?;
    positive("L", l)?;
    let (p, q) = partial_boundary_weights(n_legs, n1)?;
    if n1 == n_legs {
        let r = tau1_density_series(s / (l * l))?;
        let scale = 1.0 / (l * l);
        return Ok(SeriesResult {
            value: r.value.max(0.0) * scale,
            terms_used: r.terms_used,
            tail_bound: r.tail_bound * scale,
        });
    }
    let pre = p / (2.0 * PI * s * s * s).sqrt();
    let term = |n: usize, qn: f64| {
        let c = (2 * n + 1) as f64 * l;
        pre * qn * c * (-c * c / (2.0 * s)).exp()
    };
    // Past n_peak the level terms c·e^{−c²/2s} decrease in n; before it they
    // are bounded by their maximum √s·e^{−1/2}.
    let n_peak = ((s.sqrt() / l - 1.0) / 2.0).ceil().max(0.0) as usize;
    let level_max = pre * s.sqrt() * (-0.5f64).exp();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut qn = 1.0;
    for n in 0..10_000_000usize {
        let t = term(n, qn);
        let geometric = level_max * qn.abs() / (1.0 - q.abs());
        let bound = if n >= n_peak {
            let decreasing = if q < 0.0 { t.abs() } else { t.abs() / (1.0 - q) };
            decreasing.min(geometric)
        } else {
            geometric
        };
        if bound < SERIES_TOL * sum.abs() || bound < 1e-300 {
            return Ok(SeriesResult {
                value: sum.max(0.0),
                terms_used: n,
                tail_bound: bound,
            });
        }
        let y = t - comp;
        let z = sum + y;
        comp = (z - sum) - y;
        sum = z;
        qn *= q;
    }
    Err(Error::SeriesDivergence {
        terms: 10_000_000,
        last: term(10_000_000, qn),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalExit {
    pub laplace: f64,
    pub prob_exit_right: f64,
}

/// Exit from `(0, l)` started at `x`.
pub fn interval_exit(lambda: f64, l: f64, x: f64) -> Result<IntervalExit> {
    check_lambda(lambda)?;
    check_in_segment(l, x)?;
    Ok(IntervalExit {
        laplace: LaplaceFunction::IntervalExit { l, x }.eval(lambda),
        prob_exit_right: x / l,
    })
}

pub fn cycle_laplace(lambda: f64, l: f64, kind: CycleKind) -> Result<f64> {
    check_lambda(lambda)?;
    positive("L", l)?;
    Ok(LaplaceFunction::Cycle { l, kind }.eval(lambda))
}

/// First two moments `(E T, E T²)` from one-sided finite differences of the
/// transform at `λ = 0`.
pub fn transform_moments<T: LaplaceTransform + ?Sized>(f: &T) -> (f64, f64) {
    let (d1, _) = crate::numerics::forward_derivatives(|l| f.eval(l), 0.0, 1e-4);
    let (_, d2) = crate::numerics::forward_derivatives(|l| f.eval(l), 0.0, 1e-3);
    (-d1, d2)
}

/// Which density an [`ExitLaw`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExitDensity {
    /// `τ_L = L² τ₁` for the ball of radius `l` started at the origin.
    Ball { l: f64 },
    /// Stable-½ hitting density from level `x`.
    Stable { x: f64 },
    PartialBoundary { l: f64, n_legs: usize, n1: usize },
}

impl ExitDensity {
    pub fn eval(&self, s: f64) -> Result<f64> {
        match *self {
            ExitDensity::Ball { l } => Ok(tau1_density(s / (l * l))? / (l * l)),
            ExitDensity::Stable { x } => crate::kernels::first_passage_density(s, x),
            ExitDensity::PartialBoundary { l, n_legs, n1 } => {
                Ok(one_leg_exit_density(s, l, n_legs, n1)?.value)
            }
        }
    }
}

/// An exit time described by its transform, and where available its density
/// and integer moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitLaw {
    pub transform: LaplaceFunction,
    pub density: Option<ExitDensity>,
    pub moments: Option<Vec<f64>>,
}

impl ExitLaw {
    /// Exit from the ball of radius `l` around the origin, with moments up to
    /// order `n_moments`.
    pub fn ball(l: f64, n_moments: usize) -> Result<Self> {
        positive("L", l)?;
        let moments = (1..=n_moments).map(|k| ball_exit_moment(k, l)).collect::<Result<Vec<_>>>()?;
        Ok(ExitLaw {
            transform: LaplaceFunction::BallExit { l, x: 0.0 },
            density: Some(ExitDensity::Ball { l }),
            moments: Some(moments),
        })
    }

    pub fn partial_boundary(l: f64, n_legs: usize, n1: usize) -> Result<Self> {
        positive("L", l)?;
        check_legs(n_legs, n1)?;
        Ok(ExitLaw {
            transform: LaplaceFunction::PartialBoundary { l, n_legs, n1 },
            density: Some(ExitDensity::PartialBoundary { l, n_legs, n1 }),
            moments: None,
        })
    }

    pub fn first_passage(x: f64) -> Result<Self> {
        positive("x", x)?;
        Ok(ExitLaw {
            transform: LaplaceFunction::FirstPassage { x },
            density: Some(ExitDensity::Stable { x }),
            moments: None,
        })
    }
}
