//! Transition densities on the infinite spider.

use proptest::prelude::*;
use spider_bm::kernels::{
    gauss_kernel, halfline_kernel, spider_integral, transition_density, transition_density_convolution, Boundary,
    KernelQuery,
};
use spider_bm::numerics::quad::QuadratureSpec;
use spider_bm::{SpiderGraph, SpiderPoint};

fn point(leg: usize, x: f64) -> SpiderPoint {
    if x == 0.0 {
        SpiderPoint::origin()
    } else {
        SpiderPoint::new(leg, x).unwrap()
    }
}

fn p(g: &SpiderGraph, t: f64, a: SpiderPoint, b: SpiderPoint) -> f64 {
    transition_density(g, &KernelQuery::new(t, a, b).unwrap()).unwrap()
}

#[test]
fn chapman_kolmogorov_through_every_leg() {
    let n = 4;
    let g = SpiderGraph::infinite(n).unwrap();
    let spec = QuadratureSpec::new(1e-13, 1e-12, 4000).unwrap();
    let (s, t) = (0.3, 0.5);
    for (a, b) in [(point(1, 0.5), point(2, 0.8)), (point(1, 0.5), point(1, 1.1)), (point(3, 0.0), point(2, 0.4))] {
        let lengths = vec![f64::INFINITY; n];
        let composed = spider_integral(&lengths, |z| p(&g, s, a, *z) * p(&g, t, *z, b), &[a.x(), b.x()], &spec).unwrap();
        let direct = p(&g, s + t, a, b);
        assert!((composed - direct).abs() < 1e-10, "{a:?} -> {b:?}: {composed} vs {direct}");
    }
}

#[test]
fn total_mass_is_one() {
    let spec = QuadratureSpec::default();
    for n in [2, 3, 7] {
        let g = SpiderGraph::infinite(n).unwrap();
        let lengths = vec![f64::INFINITY; n];
        for from in [point(1, 0.0), point(1, 0.7)] {
            let m = spider_integral(&lengths, |z| p(&g, 0.8, from, *z), &[from.x()], &spec).unwrap();
            assert!((m - 1.0).abs() < 1e-10, "N={n}: {m}");
        }
    }
}

#[test]
fn origin_row_is_the_neumann_kernel_shared_by_the_legs() {
    for n in [2, 5] {
        let g = SpiderGraph::infinite(n).unwrap();
        for y in [0.1, 0.9, 2.5] {
            let h = halfline_kernel(0.6, 0.0, y, Boundary::Neumann).unwrap();
            assert!((n as f64 * p(&g, 0.6, point(1, 0.0), point(2, y)) - h).abs() < 1e-15);
        }
    }
}

proptest! {
    #[test]
    fn two_legs_are_the_real_line(t in 0.01f64..5.0, x in 0.0f64..4.0, y in 0.0f64..4.0, same in any::<bool>()) {
        let g = SpiderGraph::infinite(2).unwrap();
        let to_leg = if same { 1 } else { 2 };
        let line_y = if same { y } else { -y };
        let v = p(&g, t, point(1, x), point(to_leg, y));
        let line = gauss_kernel(t, x - line_y).unwrap();
        prop_assert!((v - line).abs() <= 1e-14 * line.max(1e-300) + 1e-300);
    }

    #[test]
    fn density_is_symmetric_and_nonnegative(
        n in 2usize..8,
        t in 0.01f64..5.0,
        la in 1usize..8, x in 0.0f64..3.0,
        lb in 1usize..8, y in 0.0f64..3.0,
    ) {
        let g = SpiderGraph::infinite(n).unwrap();
        let a = point(1 + (la - 1) % n, x);
        let b = point(1 + (lb - 1) % n, y);
        let ab = p(&g, t, a, b);
        let ba = p(&g, t, b, a);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-15 * ab.max(1.0));
    }

    #[test]
    fn convolution_agrees_with_closed_form(
        n in 2usize..6,
        t in 0.05f64..3.0,
        x in 0.05f64..2.0,
        y in 0.0f64..2.0,
        same in any::<bool>(),
    ) {
        let g = SpiderGraph::infinite(n).unwrap();
        let q = KernelQuery::new(t, point(1, x), point(if same { 1 } else { 2 }, y)).unwrap();
        let closed = transition_density(&g, &q).unwrap();
        let conv = transition_density_convolution(&g, &q, 1e-11).unwrap();
        prop_assert!((closed - conv).abs() < 1e-10, "{} vs {}", closed, conv);
    }
}

#[test]
fn finite_legs_are_rejected() {
    let g = SpiderGraph::uniform(3, 1.0).unwrap();
    let q = KernelQuery::new(1.0, point(1, 0.5), point(2, 0.5)).unwrap();
    assert!(transition_density(&g, &q).is_err());
    assert!(KernelQuery::new(0.0, point(1, 0.5), point(2, 0.5)).is_err());
}
