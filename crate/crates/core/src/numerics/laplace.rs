//! Gaver–Stehfest numerical Laplace inversion, evaluated in double-double.
//!
//! Only used as an independent oracle for the closed-form densities. The
//! alternating Stehfest weights reach `1e20` at order 32, so the transform is
//! evaluated in [`Dd`] arithmetic; plain `f64` loses every digit long before
//! the truncation error of the scheme drops below `1e-6`.

use crate::error::{Error, Result};
use crate::numerics::dd::{Dd, Real, LN_2};

/// A Laplace transform `λ ↦ ∫ e^{-λs} f(s) ds` evaluable on the real axis.
pub trait LaplaceTransform {
    fn eval(&self, lambda: f64) -> f64;

    /// Extended-precision evaluation. The default rounds through `f64`, which
    /// is only adequate for low inversion orders.
    fn eval_dd(&self, lambda: Dd) -> Dd {
        Dd::from(self.eval(lambda.to_f64()))
    }
}

impl<F: Fn(f64) -> f64> LaplaceTransform for F {
    fn eval(&self, lambda: f64) -> f64 {
        self(lambda)
    }
}

pub const DEFAULT_ORDER: usize = 32;
/// Orders compared by [`laplace_invert_checked`] around the requested one.
pub const CHECK_SPREAD: usize = 4;

fn factorial(n: usize) -> Dd {
    (2..=n).fold(Dd::from(1.0), |acc, k| acc * Dd::from(k as f64))
}

fn power(base: usize, exp: usize) -> Dd {
    (0..exp).fold(Dd::from(1.0), |acc, _| acc * Dd::from(base as f64))
}

/// Stehfest weights `V_1..V_order`.
pub fn stehfest_weights(order: usize) -> Result<Vec<Dd>> {
    if order < 2 || !order.is_multiple_of(2) || order > 48 {
        return Err(Error::arg("order", format!("must be even in [2, 48], got {order}")));
    }
    let m = order / 2;
    let weights = (1..=order)
        .map(|k| {
            let mut sum = Dd::from(0.0);
            for j in k.div_ceil(2)..=k.min(m) {
                let num = power(j, m) * factorial(2 * j);
                let den = factorial(m - j)
                    * factorial(j)
                    * factorial(j - 1)
                    * factorial(k - j)
                    * factorial(2 * j - k);
                sum = sum + num / den;
            }
            if (k + m) % 2 == 1 {
                -sum
            } else {
                sum
            }
        })
        .collect();
    Ok(weights)
}

/// Approximates the inverse transform at `s > 0` with the given even order.
pub fn laplace_invert<T: LaplaceTransform + ?Sized>(transform: &T, s: f64, order: usize) -> Result<f64> {
    crate::error::positive("s", s)?;
    let weights = stehfest_weights(order)?;
    let step = LN_2 / Dd::from(s);
    let mut acc = Dd::from(0.0);
    for (k, w) in weights.iter().enumerate() {
        let lambda = step * Dd::from((k + 1) as f64);
        acc = acc + *w * transform.eval_dd(lambda);
    }
    Ok((acc * step).to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceInversion {
    pub value: f64,
    /// Largest deviation of the neighbouring orders from `value`.
    pub spread: f64,
}

/// Inverts at `order` and at `order ± 4`, reporting their disagreement. A
/// warning is logged when the spread exceeds `warn_tol`.
pub fn laplace_invert_checked<T: LaplaceTransform + ?Sized>(
    transform: &T,
    s: f64,
    order: usize,
    warn_tol: f64,
) -> Result<LaplaceInversion> {
    let value = laplace_invert(transform, s, order)?;
    let mut spread: f64 = 0.0;
    for o in [order.saturating_sub(CHECK_SPREAD), order + CHECK_SPREAD] {
        if (2..=48).contains(&o) {
            spread = spread.max((laplace_invert(transform, s, o)? - value).abs());
        }
    }
    if spread > warn_tol {
        log::warn!("Stehfest inversion at s={s} unstable: orders disagree by {spread:e}");
    }
    Ok(LaplaceInversion { value, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct ExpPair;
    impl LaplaceTransform for ExpPair {
        fn eval(&self, l: f64) -> f64 {
            1.0 / (1.0 + l)
        }
        fn eval_dd(&self, l: Dd) -> Dd {
            Dd::from(1.0) / (Dd::from(1.0) + l)
        }
    }

    #[test]
    fn weights_sum_to_zero() {
        for order in [8, 14, 32] {
            let w = stehfest_weights(order).unwrap();
            let s = w.iter().fold(Dd::from(0.0), |a, b| a + *b);
            assert!(s.to_f64().abs() < 1e-12 * w[order / 2].to_f64().abs(), "order {order}");
        }
        // First weight of the order-10 table.
        let w = stehfest_weights(10).unwrap();
        assert!((w[0].to_f64() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_pair_at_order_14() {
        let v = laplace_invert(&ExpPair, 1.0, 14).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-6, "{v}");
    }

    #[test]
    fn rejects_odd_order() {
        assert!(laplace_invert(&ExpPair, 1.0, 13).is_err());
        assert!(laplace_invert(&ExpPair, 0.0, 14).is_err());
    }

    #[test]
    fn closure_transforms_work_at_low_order() {
        let f = |l: f64| 1.0 / (2.0 + l);
        let v = laplace_invert(&f, 0.5, 12).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn checked_inversion_reports_spread() {
        let r = laplace_invert_checked(&ExpPair, 2.0, DEFAULT_ORDER, 1e-6).unwrap();
        assert!((r.value - (-2f64).exp()).abs() < 1e-8);
        assert!(r.spread < 1e-6);
    }
}
