//! Shared numerical machinery: quadrature, series, Laplace inversion, Euler
//! numbers, special functions and random stream derivation.

pub mod dd;
pub mod euler;
pub mod laplace;
pub mod quad;
pub mod rng;
pub mod series;
pub mod special;

pub use dd::{Dd, Real};
pub use euler::{bernoulli_numbers, euler_number};
pub use laplace::{laplace_invert, laplace_invert_checked, LaplaceInversion, LaplaceTransform};
pub use quad::{integrate, integrate_with_breaks, Quadrature, QuadratureSpec};
pub use rng::{derive_stream, RngStream};
pub use series::{alternating_sum, SeriesResult};

/// Default tolerances used across the crate. Acceptance checks pin their own
/// thresholds explicitly; these are the library defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub quadrature: QuadratureSpec,
    /// Truncation target for certified series (densities, CDFs).
    pub series: f64,
    pub stehfest_order: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: QuadratureSpec::default(),
            series: 1e-13,
            stehfest_order: laplace::DEFAULT_ORDER,
        }
    }
}

/// One-sided fourth-order finite differences at `x0` (first and second
/// derivative). Transforms are only defined for `λ >= 0`, so a centred
/// stencil at the origin is not available.
pub fn forward_derivatives<F: Fn(f64) -> f64>(f: F, x0: f64, h: f64) -> (f64, f64) {
    let v: Vec<f64> = (0..6).map(|i| f(x0 + i as f64 * h)).collect();
    let d1 = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
    let d2 = (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5])
        / (12.0 * h * h);
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_differences_on_exponential() {
        let (d1, d2) = forward_derivatives(|x: f64| (-2.0 * x).exp(), 0.0, 1e-3);
        assert!((d1 + 2.0).abs() < 1e-9);
        assert!((d2 - 4.0).abs() < 1e-6);
    }
}
