//! Closed-form densities and distribution functions against numerical
//! inversion of their transforms.

use spider_bm::exit::{tau1_cdf, tau1_moment, CdfTransform, ExitLaw, LaplaceFunction};
use spider_bm::limits::LimitTarget;
use spider_bm::numerics::laplace::{laplace_invert, laplace_invert_checked, DEFAULT_ORDER};
use spider_bm::numerics::quad::{integrate, QuadratureSpec};

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn densities_invert_their_transforms() {
    let laws = [
        ExitLaw::ball(1.0, 0).unwrap(),
        ExitLaw::ball(2.0, 0).unwrap(),
        ExitLaw::first_passage(1.0).unwrap(),
        ExitLaw::partial_boundary(1.0, 3, 1).unwrap(),
        ExitLaw::partial_boundary(1.0, 5, 2).unwrap(),
    ];
    for law in &laws {
        let density = law.density.unwrap();
        for s in log_grid(0.05, 10.0, 25) {
            let inv = laplace_invert_checked(&law.transform, s, DEFAULT_ORDER, 1e-6).unwrap();
            let d = density.eval(s).unwrap();
            assert!((inv.value - d).abs() < 1e-5, "{}: s={s}, {} vs {d}", law.transform.description(), inv.value);
        }
    }
}

#[test]
fn stable_cdf_inverts_the_first_passage_transform() {
    let law = LaplaceFunction::FirstPassage { x: 1.0 };
    for s in log_grid(0.05, 20.0, 30) {
        let inv = laplace_invert(&CdfTransform(&law), s, DEFAULT_ORDER).unwrap();
        let cdf = LimitTarget::StableHalf.cdf(s);
        assert!((inv - cdf).abs() < 1e-6, "s={s}: {inv} vs {cdf}");
    }
}

#[test]
fn unit_ball_cdf_and_moments_are_consistent() {
    let law = LaplaceFunction::BallExit { l: 1.0, x: 0.0 };
    for s in log_grid(0.05, 5.0, 15) {
        let inv = laplace_invert(&CdfTransform(&law), s, DEFAULT_ORDER).unwrap();
        assert!((inv - tau1_cdf(s).unwrap()).abs() < 1e-6);
    }
    // ∫ P(T > s) ds is the mean, ∫ 2s P(T > s) ds the second moment.
    let spec = QuadratureSpec::default();
    let m1 = integrate(|s| 1.0 - tau1_cdf(s).unwrap(), 0.0, 40.0, &spec).unwrap().value;
    let m2 = integrate(|s| 2.0 * s * (1.0 - tau1_cdf(s).unwrap()), 0.0, 40.0, &spec).unwrap().value;
    assert!((m1 - tau1_moment(1).unwrap()).abs() < 1e-9);
    assert!((m2 - tau1_moment(2).unwrap()).abs() < 1e-9);
    assert!((m2 - m1 * m1 - 2.0 / 3.0).abs() < 1e-9);
}
