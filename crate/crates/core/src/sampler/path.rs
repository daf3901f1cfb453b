//! Time-discretized Brownian motion on the spider.
//!
//! The radial part moves by reflected Gaussian increments `|r + √dt ξ|`. A
//! step touches the origin when the unreflected endpoint is `<= 0`, or else
//! with the bridge probability `exp(−2 r w / dt)`; after a touch the leg is
//! drawn uniformly. For infinite legs this reproduces the law of the process
//! at grid times exactly. Boundary hits at a leg end use the same bridge
//! correction, so the exit time is late by at most one step and its mean is
//! biased by `O(dt)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::numerics::rng::RngStream;
use crate::spider::{SpiderGraph, SpiderPoint};

/// Exponents beyond this make a bridge event negligible (`e^{-40}`).
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub points: Vec<SpiderPoint>,
    pub dt: f64,
}

/// A sampled functional and the stream that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample<V> {
    pub value: V,
    pub n_steps: u64,
    pub stream: RngStream,
}

#[inline]
fn bridge_hit<R: Rng + ?Sized>(a: f64, b: f64, dt: f64, rng: &mut R) -> bool {
    let e = 2.0 * a * b / dt;
    e < BRIDGE_CUTOFF && rng.random::<f64>() < (-e).exp()
}

/// State of the discretized walker.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Walker {
    pub leg: usize,
    pub r: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub touched_origin: bool,
    pub previous_leg: usize,
}

impl Walker {
    pub fn at(p: &SpiderPoint) -> Self {
        Walker { leg: p.leg(), r: p.x() }
    }

    /// Advances by `dt`; `sd = √dt`.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, n_legs: usize, dt: f64, sd: f64, rng: &mut R) -> Step {
        let xi: f64 = rng.sample(StandardNormal);
        let w = self.r + sd * xi;
        let previous_leg = self.leg;
        let touched = w <= 0.0 || bridge_hit(self.r, w, dt, rng);
        if touched {
            self.leg = rng.random_range(1..=n_legs);
        }
        self.r = w.abs();
        Step {
            touched_origin: touched,
            previous_leg,
        }
    }

    pub fn point(&self) -> SpiderPoint {
        SpiderPoint::new(self.leg, self.r).expect("radial part is nonnegative")
    }
}

fn check_dt(dt: f64) -> Result<f64> {
    positive("dt", dt)
}

/// Folds `r` into `[0, l]` by reflection at both ends.
fn fold(r: f64, l: f64) -> f64 {
    if r <= l {
        return r;
    }
    let period = 2.0 * l;
    let m = r % period;
    if m <= l {
        m
    } else {
        period - m
    }
}

/// Discretized path started at the origin on grid `0, dt, 2dt, …, t_max`.
/// Finite legs reflect at their far end.
pub fn sample_bm_path(g: &SpiderGraph, t_max: f64, dt: f64, stream: RngStream) -> Result<PathSample> {
    sample_bm_path_from(g, SpiderPoint::origin(), t_max, dt, stream)
}

pub fn sample_bm_path_from(
    g: &SpiderGraph,
    start: SpiderPoint,
    t_max: f64,
    dt: f64,
    stream: RngStream,
) -> Result<PathSample> {
    check_dt(dt)?;
    positive("t_max", t_max)?;
    if dt >= t_max {
        return Err(Error::arg("dt", format!("must be < t_max = {t_max}, got {dt}")));
    }
    g.contains(&start)?;
    let lengths: Vec<f64> = g.lengths().iter().map(|l| l.as_f64()).collect();
    let n = g.n_legs();
    let steps = (t_max / dt * (1.0 + 1e-12)).floor() as usize;
    let sd = dt.sqrt();
    let mut rng = stream.rng();
    let mut walker = Walker::at(&start);
    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(start);
    for k in 1..=steps {
        walker.step(n, dt, sd, &mut rng);
        walker.r = fold(walker.r, lengths[walker.leg - 1]);
        times.push(k as f64 * dt);
        points.push(walker.point());
    }
    Ok(PathSample { times, points, dt })
}

/// Position at time `t` of the discretized process started at `start` on an
/// infinite spider, without storing the path.
pub fn sample_position(n_legs: usize, start: SpiderPoint, t: f64, dt: f64, stream: RngStream) -> Result<SpiderPoint> {
    if n_legs == 0 {
        return Err(Error::InvalidGraph("need at least 1 leg".into()));
    }
    if !start.is_origin() && start.leg() > n_legs {
        return Err(Error::arg("start", format!("leg {} of a {n_legs}-leg spider", start.leg())));
    }
    check_dt(dt)?;
    positive("t", t)?;
    let steps = (t / dt).round().max(1.0) as usize;
    let dt = t / steps as f64;
    let sd = dt.sqrt();
    let mut rng = stream.rng();
    let mut walker = Walker::at(&start);
    for _ in 0..steps {
        walker.step(n_legs, dt, sd, &mut rng);
    }
    Ok(walker.point())
}

/// Time and leg of the first arrival at the end of a leg, started at the
/// origin. All legs must be finite.
pub fn sample_first_exit(g: &SpiderGraph, dt: f64, stream: RngStream) -> Result<FunctionalSample<(f64, usize)>> {
    sample_first_exit_from(g, SpiderPoint::origin(), dt, stream)
}

pub fn sample_first_exit_from(
    g: &SpiderGraph,
    start: SpiderPoint,
    dt: f64,
    stream: RngStream,
) -> Result<FunctionalSample<(f64, usize)>> {
    let lengths = g.finite_lengths()?;
    let max_l = lengths.iter().cloned().fold(0.0, f64::max);
    let cap = 1e4 * max_l * max_l;
    sample_first_exit_within(g, start, dt, cap, stream)?.ok_or(Error::SimulationCap { cap })
}

/// First arrival at the end of a finite leg before `t_max`, or `None`.
/// Infinite legs are allowed; at least one leg must be finite.
pub fn sample_first_exit_within(
    g: &SpiderGraph,
    start: SpiderPoint,
    dt: f64,
    t_max: f64,
    stream: RngStream,
) -> Result<Option<FunctionalSample<(f64, usize)>>> {
    check_dt(dt)?;
    positive("t_max", t_max)?;
    g.contains(&start)?;
    if g.all_infinite() {
        return Err(Error::InvalidGraph("first exit needs at least one finite leg".into()));
    }
    let lengths: Vec<f64> = g.lengths().iter().map(|l| l.as_f64()).collect();
    let n = g.n_legs();
    let sd = dt.sqrt();
    let mut rng = stream.rng();
    let mut walker = Walker::at(&start);
    if !start.is_origin() && start.x() >= lengths[start.leg() - 1] {
        return Ok(Some(FunctionalSample {
            value: (0.0, start.leg()),
            n_steps: 0,
            stream,
        }));
    }
    let mut k: u64 = 0;
    while (k as f64) * dt < t_max {
        let r0 = walker.r;
        let step = walker.step(n, dt, sd, &mut rng);
        k += 1;
        let l = lengths[walker.leg - 1];
        // After an origin touch the boundary bridge starts from 0 on the new leg.
        let from = if step.touched_origin { 0.0 } else { r0 };
        if walker.r >= l || bridge_hit(l - from, l - walker.r, dt, &mut rng) {
            return Ok(Some(FunctionalSample {
                value: (k as f64 * dt, walker.leg),
                n_steps: k,
                stream,
            }));
        }
    }
    Ok(None)
}

/// Fraction of `[0, t]` spent on legs `1..=n0`, started at the origin of an
/// infinite spider. A step that touches the origin is shared equally between
/// the legs before and after it.
pub fn sample_occupation_fraction(n_legs: usize, n0: usize, t: f64, dt: f64, stream: RngStream) -> Result<f64> {
    if n_legs < 1 {
        return Err(Error::arg("n_legs", "must be >= 1"));
    }
    if n0 == 0 || n0 > n_legs {
        return Err(Error::arg("n0", format!("must be in [1, {n_legs}], got {n0}")));
    }
    check_dt(dt)?;
    positive("t", t)?;
    if n0 == n_legs {
        return Ok(1.0);
    }
    let steps = (t / dt).round().max(1.0) as usize;
    let dt = t / steps as f64;
    let sd = dt.sqrt();
    let mut rng = stream.rng();
    let mut walker = Walker {
        leg: rng.random_range(1..=n_legs),
        r: 0.0,
    };
    let mut inside = 0.0f64;
    for _ in 0..steps {
        let step = walker.step(n_legs, dt, sd, &mut rng);
        let before = (step.previous_leg <= n0) as u8 as f64;
        let after = (walker.leg <= n0) as u8 as f64;
        inside += if step.touched_origin { 0.5 * (before + after) } else { before };
    }
    Ok(inside / steps as f64)
}

/// Time for reflected motion on `[0, l]` started at 0 to reach `l`.
pub(crate) fn sample_reach_time<R: Rng + ?Sized>(l: f64, dt: f64, rng: &mut R, cap: f64) -> Result<f64> {
    let sd = dt.sqrt();
    let mut r = 0.0f64;
    let mut k: u64 = 0;
    loop {
        let xi: f64 = rng.sample(StandardNormal);
        let w = (r + sd * xi).abs();
        k += 1;
        if w >= l || bridge_hit(l - r, l - w, dt, rng) {
            return Ok(k as f64 * dt);
        }
        r = w;
        if k as f64 * dt > cap {
            return Err(Error::SimulationCap { cap });
        }
    }
}

/// Time for motion on `[0, ∞)` started at `l` to hit the origin.
pub(crate) fn sample_return_time<R: Rng + ?Sized>(l: f64, dt: f64, rng: &mut R, cap: f64) -> Result<f64> {
    let sd = dt.sqrt();
    let mut r = l;
    let mut k: u64 = 0;
    loop {
        let xi: f64 = rng.sample(StandardNormal);
        let w = r + sd * xi;
        k += 1;
        if w <= 0.0 || bridge_hit(r, w, dt, rng) {
            return Ok(k as f64 * dt);
        }
        r = w;
        if k as f64 * dt > cap {
            return Err(Error::SimulationCap { cap });
        }
    }
}

/// Extrapolates two estimates at step sizes `h` (coarse) and `h/ratio`
/// (fine) whose error is `C h^order`.
pub fn richardson(coarse: f64, fine: f64, ratio: f64, order: f64) -> f64 {
    let r = ratio.powf(order);
    (r * fine - coarse) / (r - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::derive_stream;
    use crate::spider::LegLength;

    #[test]
    fn path_shape_and_determinism() {
        let g = SpiderGraph::infinite(3).unwrap();
        let a = sample_bm_path(&g, 1.0, 1e-2, derive_stream(3, 1)).unwrap();
        let b = sample_bm_path(&g, 1.0, 1e-2, derive_stream(3, 1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times.len(), 101);
        assert_eq!(a.times[0], 0.0);
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
        for w in a.points.windows(2) {
            if w[0].leg() != w[1].leg() && !w[0].is_origin() && !w[1].is_origin() {
                // A leg change is a passage through the origin.
                assert!(w[0].x() + w[1].x() < 10.0 * 0.1);
            }
        }
        assert!(sample_bm_path(&g, 1.0, 1.0, derive_stream(3, 1)).is_err());
    }

    #[test]
    fn finite_legs_stay_in_range() {
        let g = SpiderGraph::from_finite(&[0.3, 0.5]).unwrap();
        let p = sample_bm_path(&g, 2.0, 1e-2, derive_stream(4, 0)).unwrap();
        for q in &p.points {
            assert!(g.contains(q).is_ok());
        }
        assert_eq!(fold(1.3, 1.0), 0.7);
        assert!((fold(2.5, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn first_exit_is_reproducible_and_on_a_leg_end() {
        let g = SpiderGraph::from_finite(&[1.0, 2.0, 2.0]).unwrap();
        let a = sample_first_exit(&g, 1e-3, derive_stream(8, 4)).unwrap();
        let b = sample_first_exit(&g, 1e-3, derive_stream(8, 4)).unwrap();
        assert_eq!(a, b);
        assert!((1..=3).contains(&a.value.1));
        assert!(sample_first_exit(&SpiderGraph::infinite(3).unwrap(), 1e-3, derive_stream(0, 0)).is_err());
        let mixed = SpiderGraph::new(2, vec![LegLength::Finite(1.0), LegLength::Infinite]).unwrap();
        let origin = SpiderPoint::origin();
        assert!(sample_first_exit_within(&mixed, origin, 1e-3, 1e-2, derive_stream(0, 0)).unwrap().is_none());
        let hit = sample_first_exit_within(&mixed, origin, 1e-3, 1e6, derive_stream(0, 1)).unwrap().unwrap();
        assert_eq!(hit.value.1, 1);
        let at_end = sample_first_exit_from(&g, SpiderPoint::new(2, 2.0).unwrap(), 1e-3, derive_stream(0, 0)).unwrap();
        assert_eq!(at_end.value, (0.0, 2));
    }

    #[test]
    fn occupation_edge_cases() {
        assert_eq!(sample_occupation_fraction(3, 3, 1.0, 1e-3, derive_stream(0, 0)).unwrap(), 1.0);
        let f = sample_occupation_fraction(3, 1, 1.0, 1e-3, derive_stream(0, 0)).unwrap();
        assert!((0.0..=1.0).contains(&f));
        assert!(sample_occupation_fraction(3, 0, 1.0, 1e-3, derive_stream(0, 0)).is_err());
    }

    #[test]
    fn richardson_removes_linear_bias() {
        let f = |h: f64| 2.5 + 0.7 * h;
        assert!((richardson(f(4e-3), f(1e-3), 4.0, 1.0) - 2.5).abs() < 1e-14);
    }
}
