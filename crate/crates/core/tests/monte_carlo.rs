//! Samplers against the closed forms, each at 3 standard errors.

use spider_bm::exit::{ball_exit_laplace, cycle_laplace, exit_point_probability, partial_boundary_exit_laplace, CycleKind};
use spider_bm::limits::coupon_moments;
use spider_bm::numerics::rng::derive_stream;
use spider_bm::numerics::special::normal_cdf;
use spider_bm::sampler::{
    lattice_passage_gf, lattice_step, richardson, run_replicas, sample_cover_time, sample_cycle_duration,
    sample_first_exit, sample_first_exit_within, sample_lattice_hitting_time, sample_occupation_fraction,
    sample_position, LatticePoint, Resolution,
};
use spider_bm::spider::LegLength;
use spider_bm::{SpiderGraph, SpiderPoint};

const SEED: u64 = 0xC0FFEE;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn assert_within(label: &str, observed: f64, expected: f64, se: f64) {
    let z = (observed - expected) / se;
    assert!(z.abs() < 3.0, "{label}: observed {observed}, expected {expected}, z = {z:.2}");
}

fn exit_frequencies(lengths: &[f64], n: usize, first: u64) -> Vec<f64> {
    let g = SpiderGraph::from_finite(lengths).unwrap();
    let legs = run_replicas(SEED, first, n, |s| sample_first_exit(&g, 2e-3, s).unwrap().value.1);
    (1..=lengths.len())
        .map(|leg| legs.iter().filter(|&&l| l == leg).count() as f64 / n as f64)
        .collect()
}

#[test]
fn exit_legs_follow_inverse_lengths_and_permute_with_the_legs() {
    let n = 20_000;
    let lengths = [1.0, 2.0, 2.0];
    let permuted = [2.0, 2.0, 1.0];
    let p = exit_point_probability(&lengths).unwrap();
    let a = exit_frequencies(&lengths, n, 0);
    let b = exit_frequencies(&permuted, n, n as u64);
    for i in 0..3 {
        let se = (p[i] * (1.0 - p[i]) / n as f64).sqrt();
        assert_within("exit leg", a[i], p[i], se);
        assert_within("permuted exit leg", b[2 - i], p[i], se);
    }
}

#[test]
fn equal_legs_exit_in_unit_mean_time() {
    let g = SpiderGraph::uniform(3, 1.0).unwrap();
    let n = 20_000;
    let run = |dt: f64, first: u64| -> (f64, f64) {
        let t = run_replicas(SEED, first, n, |s| sample_first_exit(&g, dt, s).unwrap().value.0);
        mean_se(&t)
    };
    let (mf, sf) = run(1e-3, 100_000);
    let (mc, sc) = run(4e-3, 200_000);
    let est = richardson(mc, mf, 4.0, 1.0);
    let se = ((4.0 * sf).powi(2) + sc.powi(2)).sqrt() / 3.0;
    assert_within("Richardson mean", est, 1.0, se);
    // Without extrapolation the coarse estimate sits above the fine one.
    assert!(mc > mf - 3.0 * (sf * sf + sc * sc).sqrt());
}

#[test]
fn partial_boundary_transform_matches_simulation() {
    // Legs 1 and 2 end at L = 1, legs 3 to 5 are half-lines.
    let mut lengths = vec![LegLength::Finite(1.0); 2];
    lengths.extend([LegLength::Infinite; 3]);
    let g = SpiderGraph::new(5, lengths).unwrap();
    let lambda = 1.0;
    let n = 10_000;
    let vals = run_replicas(SEED, 300_000, n, |s| {
        match sample_first_exit_within(&g, SpiderPoint::origin(), 1e-3, 30.0, s).unwrap() {
            Some(hit) => (-lambda * hit.value.0).exp(),
            None => 0.0,
        }
    });
    let (m, se) = mean_se(&vals);
    let closed = partial_boundary_exit_laplace(lambda, 1.0, 5, 2).unwrap();
    assert_within("partial boundary transform", m, closed, se);
    // The mixture with weight 2/(N − N₁ + 1) predicts a different value.
    let a = (2.0 * lambda).sqrt();
    let (p, q) = (0.5, 0.5);
    let other = p * (-a).exp() / (1.0 - q * (-2.0 * a).exp());
    assert!(((m - other) / se).abs() > 10.0);
}

#[test]
fn small_ball_exit_has_the_one_step_law() {
    let delta = 0.5;
    let g = SpiderGraph::uniform(3, delta).unwrap();
    let n = 20_000;
    let times = run_replicas(SEED, 400_000, n, |s| sample_first_exit(&g, 1e-4, s).unwrap().value.0);
    for lambda in [0.5, 2.0, 8.0] {
        let vals: Vec<f64> = times.iter().map(|t| (-lambda * t).exp()).collect();
        let (m, se) = mean_se(&vals);
        assert_within("one-step transform", m, ball_exit_laplace(lambda, delta, 0.0).unwrap(), se);
    }
}

/// Upper 1% point of χ² with `k` degrees of freedom (Wilson–Hilferty).
fn chi2_critical_01(k: usize) -> f64 {
    let k = k as f64;
    let a = 2.0 / (9.0 * k);
    k * (1.0 - a + 2.326_348 * a.sqrt()).powi(3)
}

fn chi2_against_kernel(n_legs: usize, start: SpiderPoint, first: u64) -> (f64, f64) {
    let n = 20_000;
    let pts = run_replicas(SEED, first, n, |s| sample_position(n_legs, start, 1.0, 1e-3, s).unwrap());
    let edges: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).chain([f64::INFINITY]).collect();
    let nf = n_legs as f64;
    let x = start.x();
    let mass = |a: f64, b: f64, shift: f64| normal_cdf(b + shift) - normal_cdf(a + shift);
    let mut chi2 = 0.0;
    let mut cells = 0;
    for leg in 1..=n_legs {
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let p = if start.is_origin() {
                2.0 / nf * mass(a, b, 0.0)
            } else if leg == start.leg() {
                mass(a, b, -x) - (nf - 2.0) / nf * mass(a, b, x)
            } else {
                2.0 / nf * mass(a, b, x)
            };
            let observed = pts.iter().filter(|q| !q.is_origin() && q.leg() == leg && q.x() > a && q.x() <= b).count() as f64;
            let expected = p * n as f64;
            chi2 += (observed - expected).powi(2) / expected;
            cells += 1;
        }
    }
    (chi2, chi2_critical_01(cells - 1))
}

#[test]
fn marginal_law_passes_chi_square() {
    let (c, crit) = chi2_against_kernel(3, SpiderPoint::origin(), 500_000);
    assert!(c < crit, "from origin: chi2 {c} >= {crit}");
    let (c, crit) = chi2_against_kernel(3, SpiderPoint::new(1, 0.5).unwrap(), 600_000);
    assert!(c < crit, "from 1:0.5: chi2 {c} >= {crit}");
}

#[test]
fn radial_part_is_reflected_brownian_motion() {
    let n = 10_000;
    let x2 = run_replicas(SEED, 700_000, n, |s| sample_position(1, SpiderPoint::origin(), 1.0, 1e-2, s).unwrap().x().powi(2));
    let (m, se) = mean_se(&x2);
    assert_within("E x^2 at t = 1", m, 1.0, se);
}

#[test]
fn occupation_of_one_leg_in_three() {
    let n = 4_000;
    let f = run_replicas(SEED, 800_000, n, |s| sample_occupation_fraction(3, 1, 1.0, 1e-3, s).unwrap());
    let (m, se) = mean_se(&f);
    assert_within("mean occupation", m, 1.0 / 3.0, se);
}

#[test]
fn lattice_steps_from_origin_and_from_a_leg() {
    let mut rng = derive_stream(SEED, 900_000).rng();
    let n = 300_000;
    let mut counts = [0usize; 3];
    for _ in 0..n {
        let p = lattice_step(3, LatticePoint::origin(), &mut rng);
        assert_eq!(p.x(), 1);
        counts[p.leg() - 1] += 1;
    }
    let se = (1.0 / 3.0 * 2.0 / 3.0 / n as f64).sqrt();
    for c in counts {
        assert_within("leg frequency", c as f64 / n as f64, 1.0 / 3.0, se);
    }
    let from = LatticePoint::new(1, 5).unwrap();
    let mut up = 0usize;
    for _ in 0..10_000 {
        let p = lattice_step(3, from, &mut rng);
        assert_eq!(p.leg(), 1);
        assert!(p.x() == 4 || p.x() == 6);
        up += (p.x() == 6) as usize;
    }
    assert_within("up step", up as f64 / 1e4, 0.5, (0.25f64 / 1e4).sqrt());
}

#[test]
fn lattice_passage_generating_function() {
    let z: f64 = 0.9;
    let n = 100_000;
    let vals = run_replicas(SEED, 1_000_000, n, |s| {
        sample_lattice_hitting_time(1, 10_000, &mut s.rng()).map_or(0.0, |k| z.powi(k as i32))
    });
    let (m, se) = mean_se(&vals);
    assert_within("E z^T", m, lattice_passage_gf(1, z).unwrap(), se);
}

#[test]
fn cover_time_cycles_and_duration() {
    let n = 10_000;
    let covers = run_replicas(SEED, 1_100_000, n, |s| {
        sample_cover_time(20, 1.0, CycleKind::RoundTrip, Resolution::ExactCycles, s).unwrap()
    });
    let cycles: Vec<f64> = covers.iter().map(|c| c.n_cycles as f64).collect();
    let totals: Vec<f64> = covers.iter().map(|c| c.total_time).collect();
    let (mean_cycles, var_cycles) = coupon_moments(20).unwrap();
    assert!((mean_cycles - 71.954_793).abs() < 1e-5);
    let (m, _) = mean_se(&cycles);
    assert_within("cycles", m, mean_cycles, (var_cycles / n as f64).sqrt());
    let (t, se) = mean_se(&totals);
    assert_within("total time", t, 2.0 * mean_cycles, se);
}

#[test]
fn exact_and_path_cycles_have_the_cycle_transform() {
    for kind in [CycleKind::RoundTrip, CycleKind::ReflectedCover] {
        let n = 20_000;
        let exact = run_replicas(SEED, 1_200_000, n, |s| {
            sample_cycle_duration(1.0, kind, Resolution::ExactCycles, &mut s.rng()).unwrap()
        });
        for lambda in [0.5, 2.0] {
            let vals: Vec<f64> = exact.iter().map(|t| (-lambda * t).exp()).collect();
            let (m, se) = mean_se(&vals);
            assert_within("exact cycle transform", m, cycle_laplace(lambda, 1.0, kind).unwrap(), se);
        }
    }
    let n = 4_000;
    let path = run_replicas(SEED, 1_300_000, n, |s| {
        sample_cycle_duration(1.0, CycleKind::RoundTrip, Resolution::Path { dt: 1e-3 }, &mut s.rng()).unwrap()
    });
    let vals: Vec<f64> = path.iter().map(|t| (-t).exp()).collect();
    let (m, se) = mean_se(&vals);
    assert_within("path cycle transform", m, cycle_laplace(1.0, 1.0, CycleKind::RoundTrip).unwrap(), se);
}

#[test]
fn replicas_do_not_depend_on_scheduling() {
    let f = |s| sample_position(3, SpiderPoint::origin(), 0.5, 1e-2, s).unwrap();
    let a = run_replicas(SEED, 7, 200, f);
    let b = run_replicas(SEED, 7, 200, f);
    assert_eq!(a, b);
    let c = run_replicas(SEED, 8, 199, f);
    assert_eq!(&a[1..], &c[..]);
}
