//! Transition densities of Brownian motion on the half-line and on the
//! infinite spider, with the first-passage convolution used as an oracle.

use std::f64::consts::PI;

use crate::error::{nonnegative, positive, Error, Result};
use crate::numerics::quad::{integrate, integrate_with_breaks, QuadratureSpec};
use crate::spider::{SpiderGraph, SpiderPoint};

/// Heat kernel on the line for the generator `½ d²/dx²`.
pub fn gauss_kernel(t: f64, dx: f64) -> Result<f64> {
    positive("t", t)?;
    Ok(gauss(t, dx))
}

#[inline]
pub(crate) fn gauss(t: f64, dx: f64) -> f64 {
    (-dx * dx / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Killed at the origin.
    Dirichlet,
    /// Reflected at the origin.
    Neumann,
}

pub fn halfline_kernel(t: f64, x: f64, y: f64, boundary: Boundary) -> Result<f64> {
    positive("t", t)?;
    nonnegative("x", x)?;
    nonnegative("y", y)?;
    let direct = gauss(t, x - y);
    let image = gauss(t, x + y);
    Ok(match boundary {
        Boundary::Dirichlet => (direct - image).max(0.0),
        Boundary::Neumann => direct + image,
    })
}

/// Density at `s` of the hitting time of the origin from level `x`.
pub fn first_passage_density(s: f64, x: f64) -> Result<f64> {
    positive("s", s)?;
    positive("x", x)?;
    Ok(hitting_density(s, x))
}

#[inline]
pub(crate) fn hitting_density(s: f64, x: f64) -> f64 {
    x / (2.0 * PI * s * s * s).sqrt() * (-x * x / (2.0 * s)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub t: f64,
    pub from: SpiderPoint,
    pub to: SpiderPoint,
}

impl KernelQuery {
    pub fn new(t: f64, from: SpiderPoint, to: SpiderPoint) -> Result<Self> {
        positive("t", t)?;
        Ok(KernelQuery { t, from, to })
    }
}

fn check_infinite(g: &SpiderGraph, q: &KernelQuery) -> Result<()> {
    if !g.all_infinite() {
        return Err(Error::InvalidGraph(
            "closed-form kernels need infinite legs; use the spectral heat kernel".into(),
        ));
    }
    positive("t", q.t)?;
    g.contains(&q.from)?;
    g.contains(&q.to)
}

/// Closed-form transition density on the infinite spider.
pub fn transition_density(g: &SpiderGraph, q: &KernelQuery) -> Result<f64> {
    check_infinite(g, q)?;
    Ok(density(g.n_legs(), q.t, &q.from, &q.to))
}

pub(crate) fn density(n: usize, t: f64, p: &SpiderPoint, q: &SpiderPoint) -> f64 {
    let nf = n as f64;
    let (x, y) = (p.x(), q.x());
    if p.is_origin() || q.is_origin() {
        (2.0 / nf) * gauss(t, x + y)
    } else if p.leg() == q.leg() {
        (gauss(t, x - y) - (nf - 2.0) / nf * gauss(t, x + y)).max(0.0)
    } else {
        (2.0 / nf) * gauss(t, x + y)
    }
}

/// The same density assembled from the first-passage decomposition: the
/// killed kernel on the starting leg plus the hitting time of the origin
/// convolved with the kernel out of the origin.
pub fn transition_density_convolution(g: &SpiderGraph, q: &KernelQuery, quad_tol: f64) -> Result<f64> {
    check_infinite(g, q)?;
    positive("quad_tol", quad_tol)?;
    let nf = g.n_legs() as f64;
    let (t, x, y) = (q.t, q.from.x(), q.to.x());
    if q.from.is_origin() {
        return Ok(2.0 / nf * gauss(t, y));
    }
    let killed = if q.from.leg() == q.to.leg() {
        (gauss(t, x - y) - gauss(t, x + y)).max(0.0)
    } else {
        0.0
    };
    let spec = QuadratureSpec::default()
        .with_abs_tol(0.25 * quad_tol)
        .with_rel_tol(1e-13);
    let half = (0.5 * t).sqrt();
    // s = v² on (0, t/2]: the hitting density times 2v is smooth at v = 0.
    let early = integrate(
        |v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            let s = v * v;
            2.0 * v * hitting_density(s, x) * (2.0 / nf) * gauss(t - s, y)
        },
        0.0,
        half,
        &spec,
    )?;
    // s = t - w² on [t/2, t): the origin kernel times 2w is bounded.
    let late = integrate(
        |w: f64| {
            let r = w * w;
            let s = t - r;
            let from_origin = if w == 0.0 {
                if y == 0.0 {
                    2.0 / (2.0 * PI).sqrt()
                } else {
                    0.0
                }
            } else {
                2.0 * (-y * y / (2.0 * r)).exp() / (2.0 * PI).sqrt()
            };
            hitting_density(s, x) * (2.0 / nf) * from_origin
        },
        0.0,
        half,
        &spec,
    )?;
    Ok(killed + early.value + late.value)
}

/// Integral of `f` over all legs of a graph with the given leg lengths
/// (`f64::INFINITY` for half-lines). `hints` are coordinates at which `f`
/// varies quickly, used as quadrature break points on every leg.
pub fn spider_integral<F: Fn(&SpiderPoint) -> f64>(
    lengths: &[f64],
    f: F,
    hints: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut total = 0.0;
    for (i, &l) in lengths.iter().enumerate() {
        let mut pts = vec![0.0];
        let mut inner: Vec<f64> = hints.iter().copied().filter(|&h| h > 0.0 && h < l).collect();
        inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
        inner.dedup();
        pts.extend(inner);
        pts.push(l);
        let leg = i + 1;
        let r = integrate_with_breaks(
            |x: f64| {
                if x == 0.0 {
                    f(&SpiderPoint::origin())
                } else {
                    f(&SpiderPoint::new(leg, x).expect("coordinate is positive"))
                }
            },
            &pts,
            spec,
        )?;
        total += r.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(leg: usize, x: f64) -> SpiderPoint {
        SpiderPoint::new(leg, x).unwrap()
    }

    fn q(t: f64, a: SpiderPoint, b: SpiderPoint) -> KernelQuery {
        KernelQuery::new(t, a, b).unwrap()
    }

    #[test]
    fn gauss_values() {
        assert!((gauss_kernel(1.0, 0.0).unwrap() - 0.398_942_280_4).abs() < 1e-10);
        assert!((gauss_kernel(4.0, 0.0).unwrap() - 0.5 * gauss(1.0, 0.0)).abs() < 1e-16);
        assert!((gauss_kernel(1.0, 1.0).unwrap() - 0.241_970_724_5).abs() < 1e-10);
        assert!(gauss_kernel(0.0, 1.0).is_err());
        let spec = QuadratureSpec::default();
        let mass = integrate(|x| gauss(1.0, x), 0.0, f64::INFINITY, &spec).unwrap().value;
        assert!((2.0 * mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn halfline_values() {
        for (t, y) in [(0.3, 0.0), (1.0, 2.0)] {
            assert_eq!(halfline_kernel(t, 0.0, y, Boundary::Dirichlet).unwrap(), 0.0);
        }
        let n = halfline_kernel(1.0, 0.0, 0.0, Boundary::Neumann).unwrap();
        assert!((n - 0.797_884_560_8).abs() < 1e-10);
        let d = halfline_kernel(1.0, 1.0, 1.0, Boundary::Dirichlet).unwrap();
        assert!((d - 0.3449).abs() < 1e-4);
        let a = halfline_kernel(0.7, 0.2, 1.1, Boundary::Neumann).unwrap();
        let b = halfline_kernel(0.7, 1.1, 0.2, Boundary::Neumann).unwrap();
        assert_eq!(a, b);
        assert!(halfline_kernel(1.0, -1.0, 0.0, Boundary::Neumann).is_err());
    }

    #[test]
    fn first_passage_mass_transform_and_mode() {
        let spec = QuadratureSpec::default();
        let mass = integrate(|s| if s == 0.0 { 0.0 } else { hitting_density(s, 1.0) }, 0.0, f64::INFINITY, &spec)
            .unwrap()
            .value;
        assert!((mass - 1.0).abs() < 1e-8);
        let lt = integrate(
            |s| if s == 0.0 { 0.0 } else { (-0.5 * s).exp() * hitting_density(s, 1.0) },
            0.0,
            f64::INFINITY,
            &spec,
        )
        .unwrap()
        .value;
        assert!((lt - (-1f64).exp()).abs() < 1e-9);
        let lt1 = integrate(
            |s| if s == 0.0 { 0.0 } else { (-s).exp() * hitting_density(s, 1.0) },
            0.0,
            f64::INFINITY,
            &spec,
        )
        .unwrap()
        .value;
        assert!((lt1 - (-(2f64.sqrt())).exp()).abs() < 1e-9);
        let m = 1.0 / 3.0;
        let f = |s: f64| first_passage_density(s, 1.0).unwrap();
        assert!(f(m) > f(m - 1e-3) && f(m) > f(m + 1e-3));
        assert!(first_passage_density(1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let g2 = SpiderGraph::infinite(2).unwrap();
        let v = transition_density(&g2, &q(0.8, pt(1, 0.3), pt(2, 0.9))).unwrap();
        assert!((v - gauss(0.8, 1.2)).abs() < 1e-16);
        let g3 = SpiderGraph::infinite(3).unwrap();
        let v = transition_density(&g3, &q(1.0, SpiderPoint::origin(), pt(2, 1.0))).unwrap();
        assert!((v - 2.0 / 3.0 * 0.241_970_724_5).abs() < 1e-10);
        assert!((v - 0.1613).abs() < 1e-4);
        let v = transition_density(&g3, &q(1.0, pt(1, 1.0), pt(1, 1.0))).unwrap();
        assert!((v - 0.3809).abs() < 1e-4);
        assert!(transition_density(&SpiderGraph::uniform(3, 1.0).unwrap(), &q(1.0, pt(1, 0.5), pt(1, 0.5))).is_err());
    }

    #[test]
    fn convolution_matches_closed_form() {
        let g2 = SpiderGraph::infinite(2).unwrap();
        let c = transition_density_convolution(&g2, &q(1.0, pt(1, 1.0), pt(2, 1.0)), 1e-10).unwrap();
        assert!((c - 0.053_990_966_5).abs() < 1e-9);
        let g5 = SpiderGraph::infinite(5).unwrap();
        for (a, b) in [(pt(1, 0.5), pt(2, 2.0)), (pt(3, 0.5), pt(3, 2.0)), (pt(1, 1.0), SpiderPoint::origin())] {
            let qq = q(2.0, a, b);
            let c = transition_density_convolution(&g5, &qq, 1e-10).unwrap();
            let d = transition_density(&g5, &qq).unwrap();
            assert!((c - d).abs() < 1e-8, "{a} -> {b}: {c} vs {d}");
        }
    }

    #[test]
    fn approach_to_origin_is_continuous() {
        let g = SpiderGraph::infinite(4).unwrap();
        let at0 = transition_density(&g, &q(1.0, pt(2, 0.8), SpiderPoint::origin())).unwrap();
        for leg in 1..=4 {
            let near = transition_density_convolution(&g, &q(1.0, pt(2, 0.8), pt(leg, 1e-7)), 1e-11).unwrap();
            assert!((near - at0).abs() < 1e-6, "leg {leg}");
        }
    }

    #[test]
    fn normalization_and_symmetry() {
        let spec = QuadratureSpec::default().with_abs_tol(1e-11);
        for n in [2, 3, 5] {
            let lengths = vec![f64::INFINITY; n];
            for (t, p) in [(0.25, pt(1, 0.1)), (1.0, pt(2, 1.5)), (4.0, SpiderPoint::origin())] {
                let mass = spider_integral(&lengths, |z| density(n, t, &p, z), &[p.x()], &spec).unwrap();
                assert!((mass - 1.0).abs() < 1e-8, "N={n} t={t}: {mass}");
            }
            let (a, b) = (pt(1, 0.4), pt(n, 1.3));
            assert_eq!(density(n, 0.6, &a, &b), density(n, 0.6, &b, &a));
        }
    }
}
