//! Special functions used by the transform tails and limit laws.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// `π/2 − Si(z) = ∫_z^∞ sin(u)/u du` for `z >= 0`.
pub fn sine_integral_tail(z: f64) -> f64 {
    assert!(z >= 0.0, "sine_integral_tail needs z >= 0");
    if z <= 4.0 {
        // Power series of Si.
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        let mut n = 0usize;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) && n < 200 {
            n += 1;
            let k = (2 * n) as f64;
            term *= -z2 / (k * (k + 1.0));
            sum += term / (k + 1.0);
        }
        FRAC_PI_2 - sum
    } else {
        // Continued fraction for E1(iz), modified Lentz.
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, z);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..1000 {
            let a = -((i - 1) * (i - 1)) as f64;
            b += Complex64::new(2.0, 0.0);
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(z.cos(), -z.sin());
        -h.im
    }
}

/// `∫_z^∞ sin(u)/u du` for any real `z`.
pub fn sine_integral(z: f64) -> f64 {
    if z >= 0.0 {
        FRAC_PI_2 - sine_integral_tail(z)
    } else {
        -sine_integral(-z)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn gauss_density(t: f64, dx: f64) -> f64 {
    (-dx * dx / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{integrate, QuadratureSpec};

    #[test]
    fn sine_integral_reference_values() {
        // Si(1), Si(5), Si(10) from tables.
        let cases = [
            (1.0, 0.946_083_070_367_183),
            (5.0, 1.549_931_244_944_674),
            (10.0, 1.658_347_594_218_874),
        ];
        for (z, want) in cases {
            assert!((sine_integral(z) - want).abs() < 1e-14, "Si({z}) = {}", sine_integral(z));
        }
    }

    #[test]
    fn series_and_fraction_meet_at_the_switch() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-14).with_rel_tol(1e-14);
        let by_quad = integrate(|u: f64| u.sin() / u, 4.0, 4.5, &spec).unwrap().value;
        let diff = sine_integral_tail(4.0) - sine_integral_tail(4.5);
        assert!((by_quad - diff).abs() < 1e-14);
    }

    #[test]
    fn large_argument_by_quadrature() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-14).with_rel_tol(1e-14);
        let piece = integrate(|u: f64| u.sin() / u, 10.0, 50.0, &spec).unwrap().value;
        assert!((sine_integral(50.0) - sine_integral(10.0) - piece).abs() < 1e-13);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.3) + normal_cdf(-1.3) - 1.0).abs() < 1e-15);
    }
}
