//! Double-double arithmetic and the small real-number trait shared by the
//! closed-form transforms.
//!
//! A [`Dd`] carries an unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`,
//! giving roughly 32 significant digits. The Laplace inversion oracle needs
//! this headroom: its weights grow like `1e20` at the orders it runs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// The operations the closed-form transforms are written against, so the same
/// expression can run in `f64` or in [`Dd`].
pub trait Real:
    Copy
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

pub const PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    fn scale_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// exp(x) - 1 for |x| <= ln2/2048 by Taylor series.
    fn expm1_small(self) -> Dd {
        let mut term = self;
        let mut sum = self;
        for n in 2..30 {
            term = term * self / Dd::from(n as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
                break;
            }
        }
        sum
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        // Two rounds of long division.
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Real for Dd {
    fn from_f64(v: f64) -> Self {
        Dd::from(v)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(self.hi.sqrt());
        }
        let x = self.hi.sqrt();
        let xx = Dd::from(x) * Dd::from(x);
        let corr = (self - xx).hi / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, corr);
        Dd { hi, lo }
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::from(0.0);
        }
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2 * Dd::from(k);
        const SQUARINGS: i32 = 11;
        let r = r.scale_pow2(-SQUARINGS);
        let mut s = r.expm1_small();
        for _ in 0..SQUARINGS {
            s = s * Dd::from(2.0) + s * s;
        }
        (s + Dd::from(1.0)).scale_pow2(k as i32)
    }
}

/// cosh for nonnegative arguments.
pub fn cosh<T: Real>(x: T) -> T {
    let e = x.exp();
    (e + T::one() / e) * T::from_f64(0.5)
}

/// sinh with a Taylor branch near zero to avoid cancellation.
pub fn sinh<T: Real>(x: T) -> T {
    if x.abs().to_f64() < 0.5 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for n in 1..40 {
            term = term * x2 / T::from_f64(((2 * n) * (2 * n + 1)) as f64);
            sum = sum + term;
            if term.abs().to_f64() < 1e-34 * sum.abs().to_f64() {
                break;
            }
        }
        sum
    } else {
        let e = x.exp();
        (e - T::one() / e) * T::from_f64(0.5)
    }
}

/// `y / sinh(y)` for `y >= 0`, finite for every argument.
pub fn y_over_sinh<T: Real>(y: T) -> T {
    let yf = y.to_f64();
    if yf == 0.0 {
        T::one()
    } else if yf > 20.0 {
        // 2 y e^{-y} / (1 - e^{-2y})
        let e = (-y).exp();
        T::from_f64(2.0) * y * e / (T::one() - e * e)
    } else {
        y / sinh(y)
    }
}

/// `y coth(y)` for `y >= 0`, with the value 1 at zero.
pub fn y_coth<T: Real>(y: T) -> T {
    let yf = y.to_f64();
    if yf == 0.0 {
        T::one()
    } else if yf > 20.0 {
        let e2 = (-(y + y)).exp();
        y * (T::one() + e2) / (T::one() - e2)
    } else {
        y * cosh(y) / sinh(y)
    }
}

/// `sinh(u) / sinh(v)` for `0 <= u <= v`, overflow free, `u / v` in the limit
/// `v -> 0`.
pub fn sinh_ratio<T: Real>(u: T, v: T) -> T {
    let vf = v.to_f64();
    if vf == 0.0 {
        return T::one();
    }
    if vf > 20.0 {
        let e2u = (-(u + u)).exp();
        let e2v = (-(v + v)).exp();
        (u - v).exp() * (T::one() - e2u) / (T::one() - e2v)
    } else {
        sinh(u) / sinh(v)
    }
}

/// `cosh(u) / cosh(v)` for `0 <= u, v`, overflow free.
pub fn cosh_ratio<T: Real>(u: T, v: T) -> T {
    let e2u = (-(u + u)).exp();
    let e2v = (-(v + v)).exp();
    (u - v).exp() * (T::one() + e2u) / (T::one() + e2v)
}

/// `1 / cosh(y)` for `y >= 0`.
pub fn sech<T: Real>(y: T) -> T {
    let e = (-y).exp();
    T::from_f64(2.0) * e / (T::one() + e * e)
}
