//! Eigenfunctions of the Kirchhoff Laplacian on the spider and the spider
//! Fourier transform.
//!
//! On `Sp(N, L)` with Dirichlet ends the spectrum splits into sine modes
//! `k = nπ/L`, whose leg amplitudes are orthogonal to `(1, …, 1)`, and
//! cosine modes `k = (n + ½)π/L`, equal on every leg. The sine amplitudes use
//! a fixed Helmert basis of that hyperplane.
//!
//! For functions on the infinite spider the transform has `N − 1` sine
//! channels `F_j(k) = Σ_i v_j[i] f̂_{i,S}(k)` and one cosine channel
//! `F_0(k) = Σ_i f̂_{i,C}(k)`. The inverse is
//!
//! ```text
//! f_i(x) = (2/π) Σ_j v_j[i] ∫ F_j(k) sin(kx) dk + (2/(Nπ)) ∫ F_0(k) cos(kx) dk.
//! ```
//!
//! Channels are stored at Gauss–Legendre nodes on `[0, K]`. Beyond `K` each
//! channel is replaced by its large-`k` expansion in powers of `1/k`, built
//! from the derivatives of `f` at the origin, and the tail integrals are done
//! in closed form.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::numerics::quad::{composite_gauss_legendre, integrate_with_breaks, QuadratureSpec};
use crate::numerics::special::sine_integral_tail;
use crate::spider::SpiderPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Sine,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    /// Index `n` of the wavenumber.
    pub n: usize,
    pub k: f64,
    pub parity: Parity,
    /// Amplitude on each leg, normalization included.
    pub coeffs: Vec<f64>,
    /// `√(2/L)` for sine modes, `1/√(NL/2)` for cosine modes.
    pub norm_factor: f64,
    pub length: f64,
}

impl EigenMode {
    /// `k²/2`, the eigenvalue of `−½ d²/dx²`.
    pub fn eigenvalue(&self) -> f64 {
        0.5 * self.k * self.k
    }

    /// Sum of outgoing derivatives at the origin.
    pub fn kirchhoff_residual(&self) -> f64 {
        match self.parity {
            Parity::Sine => self.k * self.coeffs.iter().sum::<f64>(),
            Parity::Cosine => 0.0,
        }
    }

    /// Largest difference of the leg values at the origin.
    pub fn continuity_residual(&self) -> f64 {
        match self.parity {
            Parity::Sine => 0.0,
            Parity::Cosine => {
                let max = self.coeffs.iter().cloned().fold(f64::MIN, f64::max);
                let min = self.coeffs.iter().cloned().fold(f64::MAX, f64::min);
                max - min
            }
        }
    }

    #[inline]
    fn value(&self, leg: usize, x: f64) -> f64 {
        match self.parity {
            Parity::Sine => self.coeffs[leg - 1] * (self.k * x).sin(),
            Parity::Cosine => self.coeffs[leg - 1] * (self.k * x).cos(),
        }
    }
}

/// Orthonormal basis of `{v : Σ v_i = 0}` in `ℝ^N`. Vector `j` (1-based) is
/// zero on the first `N − 1 − j` legs, `−j` on the next, `1` after, scaled to
/// unit length. For `N = 3` this gives `(0, −1, 1)/√2` and `(−2, 1, 1)/√6`.
pub fn helmert_basis(n_legs: usize) -> Vec<Vec<f64>> {
    (1..n_legs)
        .map(|j| {
            let norm = ((j * (j + 1)) as f64).sqrt();
            let pivot = n_legs - 1 - j;
            (0..n_legs)
                .map(|i| match i.cmp(&pivot) {
                    std::cmp::Ordering::Less => 0.0,
                    std::cmp::Ordering::Equal => -(j as f64) / norm,
                    std::cmp::Ordering::Greater => 1.0 / norm,
                })
                .collect()
        })
        .collect()
}

fn check_spider(n_legs: usize, l: f64) -> Result<()> {
    if n_legs < 2 {
        return Err(Error::arg("n_legs", format!("must be >= 2, got {n_legs}")));
    }
    positive("L", l)?;
    Ok(())
}

/// All modes with `1 <= n <= n_max` for sine and `0 <= n <= n_max` for
/// cosine, ordered by `n`, cosine first at each `n`.
pub fn eigenbasis(n_legs: usize, l: f64, n_max: usize) -> Result<Vec<EigenMode>> {
    check_spider(n_legs, l)?;
    if n_max < 1 {
        return Err(Error::arg("n_max", "must be >= 1"));
    }
    let basis = helmert_basis(n_legs);
    let sine_norm = (2.0 / l).sqrt();
    let cos_norm = 1.0 / (n_legs as f64 * l / 2.0).sqrt();
    let mut modes = Vec::with_capacity((n_max + 1) * n_legs);
    for n in 0..=n_max {
        modes.push(EigenMode {
            n,
            k: (n as f64 + 0.5) * PI / l,
            parity: Parity::Cosine,
            coeffs: vec![cos_norm; n_legs],
            norm_factor: cos_norm,
            length: l,
        });
        if n == 0 {
            continue;
        }
        for v in &basis {
            modes.push(EigenMode {
                n,
                k: n as f64 * PI / l,
                parity: Parity::Sine,
                coeffs: v.iter().map(|c| c * sine_norm).collect(),
                norm_factor: sine_norm,
                length: l,
            });
        }
    }
    Ok(modes)
}

pub fn evaluate_mode(mode: &EigenMode, p: &SpiderPoint) -> Result<f64> {
    if p.leg() > mode.coeffs.len() {
        return Err(Error::arg("leg", format!("must be in [1, {}], got {}", mode.coeffs.len(), p.leg())));
    }
    if p.x() > mode.length {
        return Err(Error::arg("x", format!("must be <= {}, got {}", mode.length, p.x())));
    }
    Ok(mode.value(p.leg(), p.x()))
}

/// Inner products `⟨ψ_a, ψ_b⟩` on `Sp(N, L)` by composite Gauss–Legendre
/// quadrature on each leg.
pub fn gram_matrix(modes: &[EigenMode]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = modes.first() else {
        return Ok(Vec::new());
    };
    let (n_legs, l) = (first.coeffs.len(), first.length);
    let k_max = modes.iter().map(|m| m.k).fold(0.0, f64::max);
    let panels = ((2.0 * k_max * l / 3.0).ceil() as usize).max(4);
    let (xs, ws) = composite_gauss_legendre(0.0, l, panels, 16);
    let mut g = vec![vec![0.0; modes.len()]; modes.len()];
    let profiles: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| {
            xs.iter()
                .map(|&x| match m.parity {
                    Parity::Sine => (m.k * x).sin(),
                    Parity::Cosine => (m.k * x).cos(),
                })
                .collect()
        })
        .collect();
    for a in 0..modes.len() {
        for b in a..modes.len() {
            let radial: f64 = ws.iter().zip(&profiles[a]).zip(&profiles[b]).map(|((w, p), q)| w * p * q).sum();
            let legs: f64 = (0..n_legs).map(|i| modes[a].coeffs[i] * modes[b].coeffs[i]).sum();
            g[a][b] = radial * legs;
            g[b][a] = g[a][b];
        }
    }
    Ok(g)
}

/// Largest entry of `G − I`.
pub fn gram_defect(g: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((v - target).abs());
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelValue {
    pub value: f64,
    /// Bound on the omitted modes.
    pub tail_bound: f64,
}

/// Tail tolerance above which [`spectral_heat_kernel`] logs a warning.
pub const HEAT_TAIL_WARN: f64 = 1e-8;

fn check_on_leg(n_legs: usize, l: f64, p: &SpiderPoint) -> Result<()> {
    if p.leg() > n_legs {
        return Err(Error::arg("leg", format!("must be in [1, {n_legs}], got {}", p.leg())));
    }
    if p.x() > l {
        return Err(Error::arg("x", format!("must be <= {l}, got {}", p.x())));
    }
    Ok(())
}

/// `Σ e^{−k²t/2} ψ(p) ψ(q)` over modes with `n <= n_max` on `Sp(N, L)` with
/// absorbing ends. The sum over the sine amplitudes uses
/// `Σ_j v_j[i] v_j[i'] = δ_{ii'} − 1/N`.
pub fn spectral_heat_kernel(
    n_legs: usize,
    l: f64,
    t: f64,
    p: &SpiderPoint,
    q: &SpiderPoint,
    n_max: usize,
) -> Result<HeatKernelValue> {
    check_spider(n_legs, l)?;
    positive("t", t)?;
    check_on_leg(n_legs, l, p)?;
    check_on_leg(n_legs, l, q)?;
    let nf = n_legs as f64;
    let (x, y) = (p.x(), q.x());
    let same = if p.is_origin() || q.is_origin() || p.leg() == q.leg() { 1.0 } else { 0.0 };
    let legs = same - 1.0 / nf;
    let mut value = 0.0;
    for n in 0..=n_max {
        let kc = (n as f64 + 0.5) * PI / l;
        value += (-0.5 * kc * kc * t).exp() * (kc * x).cos() * (kc * y).cos() * 2.0 / (nf * l);
        if n > 0 {
            let ks = n as f64 * PI / l;
            value += (-0.5 * ks * ks * t).exp() * (ks * x).sin() * (ks * y).sin() * 2.0 / l * legs;
        }
    }
    let c = 0.5 * (PI / l).powi(2) * t;
    let m = (n_max + 1) as f64;
    let tail_bound = 2.0 * (2.0 / l) * (-c * m * m).exp() / (-(-c * (2.0 * m + 1.0)).exp_m1());
    if tail_bound > HEAT_TAIL_WARN {
        log::warn!("heat kernel truncated at n_max = {n_max} leaves a tail up to {tail_bound:e}");
    }
    Ok(HeatKernelValue { value, tail_bound })
}

/// `∫ p(t, x, y) dy` over `Sp(N, L)` from the mode sum. Sine modes integrate
/// to zero over the legs, leaving `Σ (2/L)(−1)ⁿ e^{−k̃²t/2} cos(k̃x)/k̃`.
pub fn spectral_heat_mass(n_legs: usize, l: f64, t: f64, p: &SpiderPoint, n_max: usize) -> Result<f64> {
    check_spider(n_legs, l)?;
    positive("t", t)?;
    check_on_leg(n_legs, l, p)?;
    Ok((0..=n_max)
        .map(|n| {
            let k = (n as f64 + 0.5) * PI / l;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * 2.0 / l * (-0.5 * k * k * t).exp() * (k * p.x()).cos() / k
        })
        .sum())
}

pub type LegFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of derivatives at the origin carried in a jet.
pub const JET_ORDER: usize = 6;

/// One function per leg, negligible beyond `support`, with the derivatives
/// `f(0), f'(0), …, f⁽⁵⁾(0)` of every leg.
#[derive(Clone)]
pub struct SpiderFunction {
    legs: Vec<LegFn>,
    support: f64,
    jets: Vec<[f64; JET_ORDER]>,
    name: String,
}

impl fmt::Debug for SpiderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpiderFunction")
            .field("name", &self.name)
            .field("n_legs", &self.legs.len())
            .field("support", &self.support)
            .finish()
    }
}

impl SpiderFunction {
    /// Without `jets`, the derivatives at the origin are estimated by
    /// one-sided finite differences.
    pub fn new(legs: Vec<LegFn>, support: f64, jets: Option<Vec<[f64; JET_ORDER]>>) -> Result<Self> {
        if legs.len() < 2 {
            return Err(Error::arg("legs", "need at least two legs"));
        }
        positive("support", support)?;
        let jets = match jets {
            Some(j) if j.len() == legs.len() => j,
            Some(_) => return Err(Error::arg("jets", "need one jet per leg")),
            None => legs.iter().map(|f| estimate_jet(f.as_ref(), support)).collect(),
        };
        Ok(SpiderFunction {
            legs,
            support,
            jets,
            name: "custom".into(),
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn jets(&self) -> &[[f64; JET_ORDER]] {
        &self.jets
    }

    pub fn eval(&self, leg: usize, x: f64) -> f64 {
        if x > self.support {
            0.0
        } else {
            (self.legs[leg - 1])(x)
        }
    }

    pub fn at(&self, p: &SpiderPoint) -> f64 {
        self.eval(p.leg(), p.x())
    }

    /// The function with legs reordered: leg `i` of the result is leg
    /// `perm[i]` (1-based) of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_legs()];
        for &p in perm {
            if p == 0 || p > self.n_legs() || seen[p - 1] {
                return Err(Error::arg("perm", "must be a permutation of the legs"));
            }
            seen[p - 1] = true;
        }
        if perm.len() != self.n_legs() {
            return Err(Error::arg("perm", "must be a permutation of the legs"));
        }
        Ok(SpiderFunction {
            legs: perm.iter().map(|&p| self.legs[p - 1].clone()).collect(),
            support: self.support,
            jets: perm.iter().map(|&p| self.jets[p - 1]).collect(),
            name: format!("{} permuted", self.name),
        })
    }

    /// `Σ_i ∫ f_i²`.
    pub fn squared_norm(&self, spec: &QuadratureSpec) -> Result<f64> {
        let breaks = segment_points(self.support, 1.0);
        let mut total = 0.0;
        for leg in 1..=self.n_legs() {
            total += integrate_with_breaks(|x| self.eval(leg, x).powi(2), &breaks, spec)?.value;
        }
        Ok(total)
    }
}

fn segment_points(end: f64, width: f64) -> Vec<f64> {
    let n = (end / width).ceil().max(1.0) as usize;
    (0..=n).map(|i| end * i as f64 / n as f64).collect()
}

fn estimate_jet(f: &(dyn Fn(f64) -> f64 + Send + Sync), support: f64) -> [f64; JET_ORDER] {
    // One-sided differences on a 10-point stencil.
    let h = (support * 1e-2).min(2e-2);
    let v: Vec<f64> = (0..10).map(|i| f(i as f64 * h)).collect();
    let mut jet = [0.0; JET_ORDER];
    // Forward differences Δ^m f(0) / h^m ≈ f^(m)(0) with leading correction.
    let mut diffs = v.clone();
    for (m, slot) in jet.iter_mut().enumerate() {
        if m > 0 {
            diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        }
        // Δ^m f(0) = h^m f^(m) + (m/2) h^{m+1} f^(m+1) + …; correct with the next difference.
        let next: Vec<f64> = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        let corrected = diffs[0] - 0.5 * m as f64 * next[0];
        *slot = corrected / h.powi(m as i32);
    }
    jet
}

/// Named test functions for the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TestFunction {
    Zero,
    /// `e^{−x}` on one leg.
    ExpDecay { leg: usize },
    /// `x e^{−x²}` on one leg.
    XGauss { leg: usize },
    /// `x² e^{−x²}` on one leg.
    X2Gauss { leg: usize },
    /// `e^{−x²}` on every leg.
    Gauss,
    /// `x e^{−x²}` on `leg_a`, its negative on `leg_b`.
    OddPair { leg_a: usize, leg_b: usize },
    /// `exp(−1/(1 − u²))` with `u` mapping `[a, b]` onto `[−1, 1]`, on one leg.
    Bump { leg: usize, a: f64, b: f64 },
}

impl TestFunction {
    pub fn build(&self, n_legs: usize) -> Result<SpiderFunction> {
        if n_legs < 2 {
            return Err(Error::arg("n_legs", format!("must be >= 2, got {n_legs}")));
        }
        let check = |leg: usize| {
            if leg == 0 || leg > n_legs {
                Err(Error::arg("leg", format!("must be in [1, {n_legs}], got {leg}")))
            } else {
                Ok(())
            }
        };
        let zero: LegFn = Arc::new(|_| 0.0);
        let mut legs: Vec<LegFn> = vec![zero; n_legs];
        let mut jets = vec![[0.0; JET_ORDER]; n_legs];
        let support;
        match *self {
            TestFunction::Zero => support = 1.0,
            TestFunction::ExpDecay { leg } => {
                check(leg)?;
                legs[leg - 1] = Arc::new(|x: f64| (-x).exp());
                jets[leg - 1] = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
                support = 40.0;
            }
            TestFunction::XGauss { leg } => {
                check(leg)?;
                legs[leg - 1] = Arc::new(|x: f64| x * (-x * x).exp());
                jets[leg - 1] = [0.0, 1.0, 0.0, -6.0, 0.0, 60.0];
                support = 7.0;
            }
            TestFunction::X2Gauss { leg } => {
                check(leg)?;
                legs[leg - 1] = Arc::new(|x: f64| x * x * (-x * x).exp());
                jets[leg - 1] = [0.0, 0.0, 2.0, 0.0, -24.0, 0.0];
                support = 7.0;
            }
            TestFunction::Gauss => {
                for (f, j) in legs.iter_mut().zip(jets.iter_mut()) {
                    *f = Arc::new(|x: f64| (-x * x).exp());
                    *j = [1.0, 0.0, -2.0, 0.0, 12.0, 0.0];
                }
                support = 7.0;
            }
            TestFunction::OddPair { leg_a, leg_b } => {
                check(leg_a)?;
                check(leg_b)?;
                if leg_a == leg_b {
                    return Err(Error::arg("leg_b", "must differ from leg_a"));
                }
                legs[leg_a - 1] = Arc::new(|x: f64| x * (-x * x).exp());
                legs[leg_b - 1] = Arc::new(|x: f64| -x * (-x * x).exp());
                jets[leg_a - 1] = [0.0, 1.0, 0.0, -6.0, 0.0, 60.0];
                jets[leg_b - 1] = [0.0, -1.0, 0.0, 6.0, 0.0, -60.0];
                support = 7.0;
            }
            TestFunction::Bump { leg, a, b } => {
                check(leg)?;
                if !(a > 0.0 && b > a && b.is_finite()) {
                    return Err(Error::arg("bump", format!("need 0 < a < b, got [{a}, {b}]")));
                }
                legs[leg - 1] = Arc::new(move |x: f64| {
                    let u = (2.0 * x - a - b) / (b - a);
                    if u.abs() >= 1.0 {
                        0.0
                    } else {
                        (-1.0 / (1.0 - u * u)).exp()
                    }
                });
                support = b;
            }
        }
        Ok(SpiderFunction {
            legs,
            support,
            jets,
            name: self.to_string(),
        })
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Zero => write!(f, "zero"),
            TestFunction::ExpDecay { leg } => write!(f, "exp:{leg}"),
            TestFunction::XGauss { leg } => write!(f, "xgauss:{leg}"),
            TestFunction::X2Gauss { leg } => write!(f, "x2gauss:{leg}"),
            TestFunction::Gauss => write!(f, "gauss"),
            TestFunction::OddPair { leg_a, leg_b } => write!(f, "oddpair:{leg_a}:{leg_b}"),
            TestFunction::Bump { leg, a, b } => write!(f, "bump:{leg}:{a}:{b}"),
        }
    }
}

/// Parses `zero`, `gauss`, `exp:LEG`, `xgauss:LEG`, `x2gauss:LEG`,
/// `oddpair:A:B` or `bump:LEG:A:B`.
impl FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::arg("function", format!("cannot parse `{s}`"));
        let int = |i: usize| parts.get(i).ok_or_else(bad)?.parse::<usize>().map_err(|_| bad());
        let real = |i: usize| parts.get(i).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad());
        let arity = |n: usize| if parts.len() == n { Ok(()) } else { Err(bad()) };
        match parts[0] {
            "zero" => arity(1).map(|_| TestFunction::Zero),
            "gauss" => arity(1).map(|_| TestFunction::Gauss),
            "exp" => arity(2).and_then(|_| Ok(TestFunction::ExpDecay { leg: int(1)? })),
            "xgauss" => arity(2).and_then(|_| Ok(TestFunction::XGauss { leg: int(1)? })),
            "x2gauss" => arity(2).and_then(|_| Ok(TestFunction::X2Gauss { leg: int(1)? })),
            "oddpair" => arity(3).and_then(|_| {
                Ok(TestFunction::OddPair {
                    leg_a: int(1)?,
                    leg_b: int(2)?,
                })
            }),
            "bump" => arity(4).and_then(|_| {
                Ok(TestFunction::Bump {
                    leg: int(1)?,
                    a: real(2)?,
                    b: real(3)?,
                })
            }),
            _ => Err(bad()),
        }
    }
}

/// `∫ f(x) sin(kx) dx` or `∫ f(x) cos(kx) dx` over the support of one leg.
pub fn leg_transform(f: &SpiderFunction, leg: usize, k: f64, parity: Parity) -> Result<f64> {
    if leg == 0 || leg > f.n_legs() {
        return Err(Error::arg("leg", format!("must be in [1, {}], got {leg}", f.n_legs())));
    }
    if !(k >= 0.0) {
        return Err(Error::arg("k", format!("must be >= 0, got {k}")));
    }
    let width = if k > 0.0 { (PI / k).min(1.0) } else { 1.0 };
    let breaks = segment_points(f.support, width);
    let spec = QuadratureSpec::default().with_abs_tol(1e-13).with_rel_tol(1e-12);
    let r = match parity {
        Parity::Sine => integrate_with_breaks(|x| f.eval(leg, x) * (k * x).sin(), &breaks, &spec)?,
        Parity::Cosine => integrate_with_breaks(|x| f.eval(leg, x) * (k * x).cos(), &breaks, &spec)?,
    };
    Ok(r.value)
}

/// Resolution of the `k` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    /// Width of one Gauss–Legendre panel.
    pub panel_width: f64,
    /// Nodes per panel.
    pub order: usize,
    /// Fixed cutoff `K`; chosen adaptively when `None`.
    pub cutoff: Option<f64>,
    /// Adaptive `K` is accepted once `k |F(k) − F_asym(k)| < residual_tol`
    /// near `K` on every channel.
    pub residual_tol: f64,
    pub max_cutoff: f64,
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid {
            panel_width: 0.5,
            order: 16,
            cutoff: None,
            residual_tol: 1e-9,
            max_cutoff: 4096.0,
        }
    }
}

/// Sine and cosine transforms of every leg, the channels built from them and
/// the large-`k` expansion of each channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformData {
    pub n_legs: usize,
    pub cutoff: f64,
    pub panel_width: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `f̂_{i,S}` per leg at the nodes.
    pub sine: Vec<Vec<f64>>,
    /// `f̂_{i,C}` per leg at the nodes.
    pub cosine: Vec<Vec<f64>>,
    /// `N − 1` sine channels followed by the cosine channel.
    pub channels: Vec<Vec<f64>>,
    /// Coefficient of `k^{−m}` at index `m` in each channel's expansion.
    pub asymptotic: Vec<[f64; JET_ORDER + 1]>,
}

impl TransformData {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Index of the cosine channel.
    pub fn cosine_channel(&self) -> usize {
        self.channels.len() - 1
    }
}

/// Large-`k` expansions of the leg transforms from the jet.
fn leg_asymptotics(jet: &[f64; JET_ORDER]) -> ([f64; JET_ORDER + 1], [f64; JET_ORDER + 1]) {
    let mut s = [0.0; JET_ORDER + 1];
    let mut c = [0.0; JET_ORDER + 1];
    s[1] = jet[0];
    s[3] = -jet[2];
    s[5] = jet[4];
    c[2] = -jet[1];
    c[4] = jet[3];
    c[6] = -jet[5];
    (s, c)
}

fn channel_asymptotics(f: &SpiderFunction, basis: &[Vec<f64>]) -> Vec<[f64; JET_ORDER + 1]> {
    let legs: Vec<_> = f.jets.iter().map(leg_asymptotics).collect();
    let mut out = Vec::with_capacity(basis.len() + 1);
    for v in basis {
        let mut a = [0.0; JET_ORDER + 1];
        for (i, (s, _)) in legs.iter().enumerate() {
            for m in 0..=JET_ORDER {
                a[m] += v[i] * s[m];
            }
        }
        out.push(a);
    }
    let mut a = [0.0; JET_ORDER + 1];
    for (_, c) in &legs {
        for m in 0..=JET_ORDER {
            a[m] += c[m];
        }
    }
    out.push(a);
    out
}

fn eval_asymptotic(a: &[f64; JET_ORDER + 1], k: f64) -> f64 {
    let inv = 1.0 / k;
    let mut p = inv;
    let mut sum = 0.0;
    for coeff in a.iter().skip(1) {
        sum += coeff * p;
        p *= inv;
    }
    sum
}

/// Nodes and weights in `x` able to resolve `sin(kx)` for `k <= k_max`.
fn x_grid(support: f64, k_max: f64) -> (Vec<f64>, Vec<f64>) {
    let width = (1.5 / k_max.max(1e-3)).min(0.25);
    let panels = (support / width).ceil().max(1.0) as usize;
    composite_gauss_legendre(0.0, support, panels, 16)
}

struct LegSamples {
    /// `f_i` at the x-grid nodes, times the weights.
    weighted: Vec<Vec<f64>>,
    xs: Vec<f64>,
}

impl LegSamples {
    fn new(f: &SpiderFunction, k_max: f64) -> Self {
        let (xs, ws) = x_grid(f.support, k_max);
        let weighted = (1..=f.n_legs())
            .map(|leg| xs.iter().zip(&ws).map(|(&x, &w)| w * f.eval(leg, x)).collect())
            .collect();
        LegSamples { weighted, xs }
    }

    /// `(f̂_{i,S}(k), f̂_{i,C}(k))` for every leg.
    fn at(&self, k: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.weighted.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        for (j, &x) in self.xs.iter().enumerate() {
            let (sn, cs) = (k * x).sin_cos();
            for i in 0..n {
                let w = self.weighted[i][j];
                s[i] += w * sn;
                c[i] += w * cs;
            }
        }
        (s, c)
    }
}

fn channels_from(basis: &[Vec<f64>], s: &[f64], c: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = basis.iter().map(|v| v.iter().zip(s).map(|(a, b)| a * b).sum()).collect();
    out.push(c.iter().sum());
    out
}

fn choose_cutoff(f: &SpiderFunction, basis: &[Vec<f64>], asym: &[[f64; JET_ORDER + 1]], grid: &KGrid) -> Result<f64> {
    let mut k_cut = 8.0;
    loop {
        let samples = LegSamples::new(f, k_cut);
        let mut worst: f64 = 0.0;
        for j in 0..6 {
            let k = k_cut * (1.0 - 0.04 * j as f64);
            let (s, c) = samples.at(k);
            for (ch, a) in channels_from(basis, &s, &c).iter().zip(asym) {
                worst = worst.max(k * (ch - eval_asymptotic(a, k)).abs());
            }
        }
        if worst < grid.residual_tol {
            return Ok(k_cut);
        }
        if 2.0 * k_cut > grid.max_cutoff {
            return Err(Error::Resolution(format!(
                "transform residual {worst:e} at k = {k_cut} exceeds {:e}; raise max_cutoff",
                grid.residual_tol
            )));
        }
        k_cut *= 2.0;
    }
}

pub fn spider_transform(f: &SpiderFunction, grid: &KGrid) -> Result<TransformData> {
    positive("panel_width", grid.panel_width)?;
    positive("residual_tol", grid.residual_tol)?;
    if grid.order < 2 {
        return Err(Error::arg("order", "need at least 2 nodes per panel"));
    }
    let n = f.n_legs();
    let basis = helmert_basis(n);
    let asymptotic = channel_asymptotics(f, &basis);
    let cutoff = match grid.cutoff {
        Some(k) => positive("cutoff", k)?,
        None => choose_cutoff(f, &basis, &asymptotic, grid)?,
    };
    let panels = (cutoff / grid.panel_width).ceil().max(1.0) as usize;
    let (nodes, weights) = composite_gauss_legendre(0.0, cutoff, panels, grid.order);
    let samples = LegSamples::new(f, cutoff);
    let mut sine = vec![Vec::with_capacity(nodes.len()); n];
    let mut cosine = vec![Vec::with_capacity(nodes.len()); n];
    let mut channels = vec![Vec::with_capacity(nodes.len()); n];
    for &k in &nodes {
        let (s, c) = samples.at(k);
        for (ch, v) in channels.iter_mut().zip(channels_from(&basis, &s, &c)) {
            ch.push(v);
        }
        for i in 0..n {
            sine[i].push(s[i]);
            cosine[i].push(c[i]);
        }
    }
    Ok(TransformData {
        n_legs: n,
        cutoff,
        panel_width: cutoff / panels as f64,
        nodes,
        weights,
        sine,
        cosine,
        channels,
        asymptotic,
    })
}

/// `∫_K^∞ sin(kx) k^{−m} dk` (odd `m`) and `∫_K^∞ cos(kx) k^{−m} dk` (even
/// `m`) for `m = 1..=6`, by integration by parts from `π/2 − Si(Kx)`.
fn tail_integrals(k_cut: f64, x: f64) -> [f64; JET_ORDER + 1] {
    let mut out = [0.0; JET_ORDER + 1];
    if x == 0.0 {
        for m in (2..=JET_ORDER).step_by(2) {
            out[m] = k_cut.powi(1 - m as i32) / (m - 1) as f64;
        }
        return out;
    }
    let (sk, ck) = (k_cut * x).sin_cos();
    out[1] = sine_integral_tail(k_cut * x);
    for m in 1..JET_ORDER {
        let km = k_cut.powi(m as i32);
        let mf = m as f64;
        out[m + 1] = if m % 2 == 1 {
            ck / (mf * km) - x / mf * out[m]
        } else {
            (sk / km + x * out[m]) / mf
        };
    }
    out
}

/// Value at `p` reconstructed from the transform.
pub fn inverse_transform(t: &TransformData, p: &SpiderPoint) -> Result<f64> {
    if p.leg() > t.n_legs {
        return Err(Error::arg("leg", format!("must be in [1, {}], got {}", t.n_legs, p.leg())));
    }
    let x = p.x();
    if t.panel_width * x > 3.0 {
        return Err(Error::Resolution(format!(
            "k panels of width {} cannot resolve cos(kx) at x = {x}",
            t.panel_width
        )));
    }
    let basis = helmert_basis(t.n_legs);
    let tails = tail_integrals(t.cutoff, x);
    let tail_of = |a: &[f64; JET_ORDER + 1]| -> f64 { (1..=JET_ORDER).map(|m| a[m] * tails[m]).sum() };
    let cos_ch = t.cosine_channel();
    let mut sines = vec![0.0; cos_ch];
    let mut cos_part = 0.0;
    for (idx, (&k, &w)) in t.nodes.iter().zip(&t.weights).enumerate() {
        let (s, c) = (k * x).sin_cos();
        for (j, acc) in sines.iter_mut().enumerate() {
            *acc += w * t.channels[j][idx] * s;
        }
        cos_part += w * t.channels[cos_ch][idx] * c;
    }
    let mut value = 2.0 / (t.n_legs as f64 * PI) * (cos_part + tail_of(&t.asymptotic[cos_ch]));
    if !p.is_origin() {
        for (j, v) in basis.iter().enumerate() {
            value += 2.0 / PI * v[p.leg() - 1] * (sines[j] + tail_of(&t.asymptotic[j]));
        }
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    /// `Σ_i ∫ f_i²`.
    pub lhs: f64,
    /// `Σ_c w_c ∫ F_c²`.
    pub rhs: f64,
    /// `w_c`, sine channels first.
    pub channel_constants: Vec<f64>,
}

impl ParsevalReport {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// The constants making the channel energies add up to `∫ f²`: `2/π` per
/// sine channel and `2/(Nπ)` for the cosine channel, the same weights as in
/// the inverse transform.
pub fn channel_constants(n_legs: usize) -> Vec<f64> {
    let mut c = vec![2.0 / PI; n_legs - 1];
    c.push(2.0 / (n_legs as f64 * PI));
    c
}

pub fn parseval_gap(f: &SpiderFunction, grid: &KGrid) -> Result<ParsevalReport> {
    let t = spider_transform(f, grid)?;
    let spec = QuadratureSpec::default().with_abs_tol(1e-13).with_rel_tol(1e-12);
    let lhs = f.squared_norm(&spec)?;
    let constants = channel_constants(t.n_legs);
    let k_cut = t.cutoff;
    let mut rhs = 0.0;
    for (c, (ch, a)) in t.channels.iter().zip(&t.asymptotic).enumerate() {
        let body: f64 = ch.iter().zip(&t.weights).map(|(v, w)| w * v * v).sum();
        let mut tail = 0.0;
        for m in 1..=JET_ORDER {
            for mm in 1..=JET_ORDER {
                let p = (m + mm) as i32;
                tail += a[m] * a[mm] * k_cut.powi(1 - p) / (p - 1) as f64;
            }
        }
        rhs += constants[c] * (body + tail);
    }
    Ok(ParsevalReport {
        lhs,
        rhs,
        channel_constants: constants,
    })
}

/// `∫_{Sp(N,L)} (f − P f)²`, where `P` projects onto the modes in `modes`.
pub fn projection_error(f: &SpiderFunction, modes: &[EigenMode]) -> Result<f64> {
    let l = modes.first().map(|m| m.length).ok_or_else(|| Error::arg("modes", "empty"))?;
    let k_max = modes.iter().map(|m| m.k).fold(0.0, f64::max);
    let panels = ((2.0 * k_max * l / 3.0).ceil() as usize).max(8);
    let (xs, ws) = composite_gauss_legendre(0.0, l, panels, 16);
    let n = f.n_legs();
    let values: Vec<Vec<f64>> = (1..=n).map(|leg| xs.iter().map(|&x| f.eval(leg, x)).collect()).collect();
    let mut residual = values.clone();
    for m in modes {
        let mut coeff = 0.0;
        for leg in 1..=n {
            for (j, &x) in xs.iter().enumerate() {
                coeff += ws[j] * values[leg - 1][j] * m.value(leg, x);
            }
        }
        for leg in 1..=n {
            for (j, &x) in xs.iter().enumerate() {
                residual[leg - 1][j] -= coeff * m.value(leg, x);
            }
        }
    }
    Ok(residual
        .iter()
        .map(|r| r.iter().zip(&ws).map(|(v, w)| w * v * v).sum::<f64>())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{density, gauss};

    fn pt(leg: usize, x: f64) -> SpiderPoint {
        SpiderPoint::new(leg, x).unwrap()
    }

    #[test]
    fn helmert_vectors() {
        let b = helmert_basis(3);
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        assert_eq!(b[0], vec![0.0, -1.0 / s2, 1.0 / s2]);
        assert!((b[1][0] + 2.0 / s6).abs() < 1e-15 && (b[1][1] - 1.0 / s6).abs() < 1e-15);
        for n in 2..8 {
            let b = helmert_basis(n);
            for (i, u) in b.iter().enumerate() {
                assert!(u.iter().sum::<f64>().abs() < 1e-14);
                for (j, v) in b.iter().enumerate() {
                    let d: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mode_structure() {
        let modes = eigenbasis(3, PI, 4).unwrap();
        assert_eq!(modes.len(), 5 + 2 * 4);
        let k1 = modes.iter().find(|m| m.parity == Parity::Sine && m.n == 1).unwrap().k;
        let kc1 = modes.iter().find(|m| m.parity == Parity::Cosine && m.n == 1).unwrap().k;
        assert!((k1 - 1.0).abs() < 1e-15 && (kc1 - 1.5).abs() < 1e-15);
        for m in &modes {
            assert!(m.kirchhoff_residual().abs() < 1e-13);
            assert!(m.continuity_residual().abs() < 1e-15);
            for leg in 1..=3 {
                assert!(evaluate_mode(m, &pt(leg, PI)).unwrap().abs() < 1e-14);
            }
            if m.parity == Parity::Sine {
                assert_eq!(evaluate_mode(m, &SpiderPoint::origin()).unwrap(), 0.0);
            }
        }
        let c0 = eigenbasis(3, 1.0, 1).unwrap().into_iter().find(|m| m.n == 0).unwrap();
        assert!((evaluate_mode(&c0, &SpiderPoint::origin()).unwrap() - 0.816_496_580_9).abs() < 1e-10);
        assert!(evaluate_mode(&c0, &pt(2, 1.5)).is_err());
    }

    #[test]
    fn n3_sine_modes_match_displayed_directions() {
        let l = 2.0;
        let modes = eigenbasis(3, l, 1).unwrap();
        let sines: Vec<_> = modes.iter().filter(|m| m.parity == Parity::Sine).collect();
        // ψ_{n,1} ∝ (0, 1, −1) sin(kx)/√L and ψ_{n,2} ∝ (−2, 1, 1) sin(kx)/√(3L).
        let a = &sines[0].coeffs;
        assert_eq!(a[0], 0.0);
        assert!((a[1].abs() - 1.0 / l.sqrt()).abs() < 1e-15 && (a[1] + a[2]).abs() < 1e-15);
        let b = &sines[1].coeffs;
        assert!((b[1] - 1.0 / (3.0 * l).sqrt()).abs() < 1e-15);
        assert!((b[0] + 2.0 / (3.0 * l).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gram_is_identity() {
        for n in 2..=4 {
            let modes = eigenbasis(n, 1.0, 10).unwrap();
            let g = gram_matrix(&modes).unwrap();
            assert!(gram_defect(&g) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn heat_kernel_matches_infinite_spider() {
        let p = pt(1, 1.0);
        let v = spectral_heat_kernel(3, 10.0, 0.5, &p, &p, 80).unwrap();
        assert!(v.tail_bound < 1e-12);
        assert!((v.value - density(3, 0.5, &p, &p)).abs() < 1e-10);
        let q = pt(2, 0.4);
        let a = spectral_heat_kernel(3, 10.0, 0.5, &p, &q, 80).unwrap().value;
        let b = spectral_heat_kernel(3, 10.0, 0.5, &q, &p, 80).unwrap().value;
        assert_eq!(a, b);
        assert!((a - 2.0 / 3.0 * gauss(0.5, 1.4)).abs() < 1e-10);
        let far = spectral_heat_kernel(3, 1.0, 5.0, &p, &q, 5).unwrap().value;
        assert!(far > 0.0);
    }

    #[test]
    fn heat_mass_is_survival() {
        let l = 1.0;
        for t in [0.1, 0.5, 2.0] {
            let m = spectral_heat_mass(4, l, t, &SpiderPoint::origin(), 200).unwrap();
            let survival = 1.0 - crate::exit::tau1_cdf(t).unwrap();
            assert!((m - survival).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn leg_transforms_of_exponential() {
        let f = TestFunction::ExpDecay { leg: 1 }.build(3).unwrap();
        for k in [0.0, 0.5, 3.0, 20.0] {
            assert!((leg_transform(&f, 1, k, Parity::Sine).unwrap() - k / (1.0 + k * k)).abs() < 1e-10);
            assert!((leg_transform(&f, 1, k, Parity::Cosine).unwrap() - 1.0 / (1.0 + k * k)).abs() < 1e-10);
            assert_eq!(leg_transform(&f, 2, k, Parity::Sine).unwrap(), 0.0);
        }
    }

    #[test]
    fn tail_integrals_against_quadrature() {
        for (k_cut, x) in [(10.0, 0.7), (30.0, 2.0), (8.0, 0.0)] {
            let t = tail_integrals(k_cut, x);
            let upper = k_cut + 4000.0;
            let (ks, ws) = composite_gauss_legendre(k_cut, upper, 40_000, 16);
            for m in 1..=JET_ORDER {
                if x == 0.0 && m % 2 == 1 {
                    continue;
                }
                let g = |k: f64| if m % 2 == 1 { (k * x).sin() } else { (k * x).cos() } * k.powi(-(m as i32));
                let q: f64 = ks.iter().zip(&ws).map(|(&k, w)| w * g(k)).sum();
                // Beyond `upper` the integral is at most 2/(x upper) or upper^{1−m}.
                let slack = if m == 1 { 2.0 / (x * upper) } else { upper.powi(1 - m as i32) };
                assert!((q - t[m]).abs() < slack + 1e-12, "K={k_cut} x={x} m={m}: {q} vs {}", t[m]);
            }
        }
    }

    #[test]
    fn round_trip_xgauss() {
        let f = TestFunction::XGauss { leg: 2 }.build(3).unwrap();
        let t = spider_transform(&f, &KGrid::default()).unwrap();
        for leg in 1..=3 {
            for x in [0.0, 0.3, 0.7, 1.5, 3.0] {
                let p = SpiderPoint::new(leg, x).unwrap();
                let r = inverse_transform(&t, &p).unwrap();
                assert!((r - f.at(&p)).abs() < 1e-8, "leg {leg} x {x}: {r} vs {}", f.at(&p));
            }
        }
    }

    #[test]
    fn channel_structure() {
        let grid = KGrid { cutoff: Some(10.0), ..KGrid::default() };
        let one_leg = spider_transform(&TestFunction::X2Gauss { leg: 1 }.build(3).unwrap(), &grid).unwrap();
        assert!(one_leg.channels[0].iter().all(|v| v.abs() < 1e-15));
        let sym = spider_transform(&TestFunction::Gauss.build(4).unwrap(), &grid).unwrap();
        for j in 0..3 {
            assert!(sym.channels[j].iter().all(|v| v.abs() < 1e-14));
        }
        let odd = spider_transform(&TestFunction::OddPair { leg_a: 2, leg_b: 3 }.build(3).unwrap(), &grid).unwrap();
        assert!(odd.channels[2].iter().all(|v| v.abs() < 1e-15));
        let zero = spider_transform(&TestFunction::Zero.build(3).unwrap(), &KGrid::default()).unwrap();
        assert!(zero.channels.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(inverse_transform(&zero, &pt(2, 0.4)).unwrap(), 0.0);
    }

    #[test]
    fn parseval_examples() {
        let f = TestFunction::ExpDecay { leg: 1 }.build(3).unwrap();
        let r = parseval_gap(&f, &KGrid::default()).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-12);
        assert!(r.gap() < 1e-6, "{r:?}");
        let odd = TestFunction::OddPair { leg_a: 1, leg_b: 2 }.build(2).unwrap();
        let r = parseval_gap(&odd, &KGrid::default()).unwrap();
        assert!(r.gap() < 1e-9);
        let zero = parseval_gap(&TestFunction::Zero.build(2).unwrap(), &KGrid::default()).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
    }

    #[test]
    fn estimated_jets_are_close() {
        let f = TestFunction::XGauss { leg: 1 }.build(2).unwrap();
        let legs: Vec<LegFn> = vec![f.legs[0].clone(), f.legs[1].clone()];
        let g = SpiderFunction::new(legs, 7.0, None).unwrap();
        assert!((g.jets()[0][1] - 1.0).abs() < 1e-3);
        assert!((g.jets()[0][3] + 6.0).abs() < 0.5);
    }

    #[test]
    fn parse_test_functions() {
        for s in ["zero", "gauss", "exp:1", "xgauss:2", "x2gauss:3", "oddpair:1:2", "bump:1:0.5:2.5"] {
            let f: TestFunction = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("xgauss".parse::<TestFunction>().is_err());
        assert!("wave:1".parse::<TestFunction>().is_err());
    }
}
