//! Simple random walk on the lattice spider `ℤ(Sp_N)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::rng::RngStream;

/// A lattice site: leg (1-based) and integer distance from the origin. The
/// origin is stored as `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    leg: usize,
    x: u64,
}

impl LatticePoint {
    pub fn new(leg: usize, x: u64) -> Result<Self> {
        if leg == 0 {
            return Err(Error::arg("leg", "legs are numbered from 1"));
        }
        Ok(if x == 0 { Self::origin() } else { LatticePoint { leg, x } })
    }

    pub const fn origin() -> Self {
        LatticePoint { leg: 1, x: 0 }
    }

    pub fn leg(&self) -> usize {
        self.leg
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn is_origin(&self) -> bool {
        self.x == 0
    }
}

fn check_point(n_legs: usize, p: &LatticePoint) -> Result<()> {
    if n_legs < 1 {
        return Err(Error::arg("n_legs", "must be >= 1"));
    }
    if p.leg > n_legs {
        return Err(Error::arg("leg", format!("must be in [1, {n_legs}], got {}", p.leg)));
    }
    Ok(())
}

/// One step: from the origin onto a uniformly chosen leg, elsewhere ±1 with
/// probability ½ each.
pub fn lattice_step<R: Rng + ?Sized>(n_legs: usize, p: LatticePoint, rng: &mut R) -> LatticePoint {
    if p.is_origin() {
        LatticePoint {
            leg: rng.random_range(1..=n_legs),
            x: 1,
        }
    } else if rng.random::<bool>() {
        LatticePoint { leg: p.leg, x: p.x + 1 }
    } else if p.x == 1 {
        LatticePoint::origin()
    } else {
        LatticePoint { leg: p.leg, x: p.x - 1 }
    }
}

/// The sites visited in `n_steps` steps, starting point included.
pub fn lattice_walk(n_legs: usize, start: LatticePoint, n_steps: usize, stream: RngStream) -> Result<Vec<LatticePoint>> {
    check_point(n_legs, &start)?;
    let mut rng = stream.rng();
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut p = start;
    path.push(p);
    for _ in 0..n_steps {
        p = lattice_step(n_legs, p, &mut rng);
        path.push(p);
    }
    Ok(path)
}

/// `E z^{τ₀}` for the hitting time of the origin from level `x`:
/// `((1 − √(1 − z²))/z)^x`.
pub fn lattice_passage_gf(x: u64, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::arg("z", format!("must lie in [0, 1], got {z}")));
    }
    if x == 0 {
        return Ok(1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // (1 − √(1 − z²))/z = z/(1 + √(1 − z²)), stable for small z.
    let root = z / (1.0 + (1.0 - z * z).sqrt());
    Ok(root.powf(x as f64))
}

fn binomial(n: u64, k: u64) -> BigInt {
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

fn pow2(n: u64) -> BigInt {
    BigInt::one() << n
}

/// Symmetric walk on ℤ: probability of displacement `d` after `n` steps.
fn free_kernel(n: u64, d: i64) -> BigRational {
    let a = d.unsigned_abs();
    if a > n || !(n + a).is_multiple_of(2) {
        return BigRational::zero();
    }
    BigRational::new(binomial(n, (n + a) / 2), pow2(n))
}

/// Probability that the walk on ℤ started at `x > 0` first hits 0 at step `k`.
fn hitting_probability(k: u64, x: u64) -> BigRational {
    if k < x || !(k + x).is_multiple_of(2) {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(x) * binomial(k, (k + x) / 2), BigInt::from(k) * pow2(k))
}

/// Exact `n`-step transition probability on `ℤ(Sp_N)`.
///
/// Out of the origin the walk is a reflected symmetric walk with a uniform
/// leg, so `Q(n, 0, y_j) = (2/N) Q̃(n, 0, y)` and `Q(n, 0, 0) = Q̃(n, 0, 0)`.
/// From `x_i ≠ 0` the path either stays on leg `i` without touching the
/// origin (the killed kernel `Q̃(n, x, y) − Q̃(n, x, −y)`) or first reaches
/// the origin at some step `k` and continues from there.
pub fn lattice_transition_probability_exact(
    n_legs: usize,
    n: u64,
    from: LatticePoint,
    to: LatticePoint,
) -> Result<BigRational> {
    check_point(n_legs, &from)?;
    check_point(n_legs, &to)?;
    let spread = BigRational::new(BigInt::from(2), BigInt::from(n_legs));
    let from_origin = |m: u64| -> BigRational {
        if to.is_origin() {
            free_kernel(m, 0)
        } else {
            &spread * free_kernel(m, to.x as i64)
        }
    };
    if from.is_origin() {
        return Ok(from_origin(n));
    }
    let (x, y) = (from.x as i64, to.x as i64);
    let mut total = if !to.is_origin() && to.leg == from.leg {
        free_kernel(n, x - y) - free_kernel(n, x + y)
    } else {
        BigRational::zero()
    };
    for k in from.x..=n {
        let h = hitting_probability(k, from.x);
        if !h.is_zero() {
            total += h * from_origin(n - k);
        }
    }
    Ok(total)
}

pub fn lattice_transition_probability(n_legs: usize, n: u64, from: LatticePoint, to: LatticePoint) -> Result<f64> {
    let p = lattice_transition_probability_exact(n_legs, n, from, to)?;
    Ok(p.to_f64().unwrap_or(0.0))
}

/// Distribution after `n` steps obtained by expanding every path, with
/// exact weights. Exponential in `n`; meant for small cases.
pub fn lattice_distribution_by_enumeration(
    n_legs: usize,
    n: u64,
    from: LatticePoint,
) -> Result<HashMap<LatticePoint, BigRational>> {
    check_point(n_legs, &from)?;
    if n > 24 {
        return Err(Error::arg("n", format!("enumeration is limited to 24 steps, got {n}")));
    }
    fn expand(n_legs: usize, left: u64, p: LatticePoint, w: BigRational, out: &mut HashMap<LatticePoint, BigRational>) {
        if left == 0 {
            *out.entry(p).or_insert_with(BigRational::zero) += w;
            return;
        }
        if p.is_origin() {
            let w = w / BigRational::from_integer(BigInt::from(n_legs));
            for leg in 1..=n_legs {
                expand(n_legs, left - 1, LatticePoint { leg, x: 1 }, w.clone(), out);
            }
        } else {
            let half = w / BigRational::from_integer(BigInt::from(2));
            expand(n_legs, left - 1, LatticePoint { leg: p.leg, x: p.x + 1 }, half.clone(), out);
            let down = if p.x == 1 { LatticePoint::origin() } else { LatticePoint { leg: p.leg, x: p.x - 1 } };
            expand(n_legs, left - 1, down, half, out);
        }
    }
    let mut out = HashMap::new();
    expand(n_legs, n, from, BigRational::one(), &mut out);
    Ok(out)
}

/// Hitting time of the origin by the walk on ℤ started at `x`, or `None`
/// if it exceeds `cap` steps. Far from the origin, 64 steps are taken at
/// once from one random word.
pub fn sample_lattice_hitting_time<R: Rng + ?Sized>(x: u64, cap: u64, rng: &mut R) -> Option<u64> {
    let mut pos = x as i64;
    let mut k: u64 = 0;
    if pos == 0 {
        return Some(0);
    }
    while k < cap {
        if pos > 64 && cap - k >= 64 {
            let ups = rng.next_u64().count_ones() as i64;
            pos += 2 * ups - 64;
            k += 64;
        } else {
            let mut word = rng.next_u64();
            for _ in 0..64 {
                pos += if word & 1 == 1 { 1 } else { -1 };
                word >>= 1;
                k += 1;
                if pos == 0 {
                    return Some(k);
                }
                if k >= cap || pos > 64 {
                    break;
                }
            }
        }
    }
    None
}
