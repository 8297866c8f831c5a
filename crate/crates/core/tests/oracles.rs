//! Cross-checks of the closed forms against independent numerical oracles.

mod common;

use common::*;
use num_complex::Complex64;
use ratfilt::baselines::{gauss_legendre_filter, gauss_legendre_nodes};
use ratfilt::filter::{compute_wcr, InnerInterval, RationalFilter};
use ratfilt::optim::Objective;
use ratfilt::slise::{gradient, objective, pack, SliseObjective};
use ratfilt::weights::WeightVector;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn objective_matches_quadrature() {
    let mut r = rng(2024);
    for case in 0..20 {
        let (f, w) = random_pair(&mut r);
        let closed = objective(&f, &w);
        let quad = quad_objective(&f, &w);
        assert!(rel(closed, quad) <= 1e-8, "case {case}: {closed} vs {quad}");
    }
}

#[test]
fn objective_with_only_the_fixed_weight() {
    let mut r = rng(5);
    for _ in 0..5 {
        let f = random_filter(&mut r, 3);
        let w = WeightVector::new(5, vec![0.96, 1.1, 1.5, 3.0, 0.0, 0.0, 0.0], 0.95).unwrap();
        let quad = 2.0 * integrate(|x| (1.0 - eval_direct(&f, x)).powi(2), 0.0, 0.96, 0.01, 1e-13);
        assert!(rel(objective(&f, &w), quad) <= 1e-10);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut r = rng(77);
    for case in 0..10 {
        let (f, w) = random_pair(&mut r);
        let obj = SliseObjective::new(f.m(), &w);
        let x = pack(&f);
        let g = gradient(&f, &w);
        let fd = fd_gradient(|p| obj.value(p), x.as_slice());
        for (i, (a, b)) in g.as_slice().iter().zip(&fd).enumerate() {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-8), "case {case} component {i}: {a} vs {b}");
        }
    }
}

#[test]
fn gradient_of_zero_filter() {
    // With r = 0 and weight 1 on [0, v1) only, df/dRe(beta_1) = -2 int 2 dr/dRe(beta_1).
    let z = vec![Complex64::new(0.7, 0.4)];
    let f = RationalFilter::new(vec![Complex64::new(1e-300, 0.0)], z.clone(), f64::NAN, false).unwrap();
    let w = WeightVector::new(5, vec![0.96, 1.1, 1.5, 3.0, 0.0, 0.0, 0.0], 0.95).unwrap();
    // dr/dRe(beta) at beta = 0 is the filter with beta = 1.
    let unit = RationalFilter::new(vec![Complex64::new(1.0, 0.0)], z, f64::NAN, false).unwrap();
    let expect = -2.0 * integrate(|x| 2.0 * eval_direct(&unit, x), 0.0, 0.96, 0.01, 1e-13);
    let g = gradient(&f, &w);
    assert!(rel(g.as_slice()[0], expect) <= 1e-10, "{} vs {expect}", g.as_slice()[0]);
}

#[test]
fn gradient_layout_matches_pole_imaginary_part() {
    let mut r = rng(3);
    let (f, w) = random_pair(&mut r);
    let m = f.m();
    let h = 1e-6;
    let shifted = |d: f64| {
        let mut z = f.z().to_vec();
        z[0] += Complex64::new(0.0, d);
        RationalFilter::new(f.beta().to_vec(), z, f64::NAN, false).unwrap()
    };
    let fd = (objective(&shifted(h), &w) - objective(&shifted(-h), &w)) / (2.0 * h);
    let g = gradient(&f, &w);
    assert!(rel(g.as_slice()[3 * m], fd) < 1e-6);
}

#[test]
fn wcr_matches_brute_force_grid() {
    // Perturbed quadrature filters stay bounded away from zero on the inner
    // interval, so the ratio is well conditioned for a grid search.
    let mut r = rng(11);
    let mut filters: Vec<RationalFilter> = (0..2).map(|_| perturbed_gauss_legendre(&mut r, 4, 0.05)).collect();
    filters.push(gauss_legendre_filter(4));
    for f in &filters {
        for (gap, inner) in [(0.9, InnerInterval::Gap), (0.95, InnerInterval::FullInterval)] {
            let fast = compute_wcr(f, gap, inner).unwrap().wcr;
            let brute = brute_wcr(f, gap, inner, 10_000_000);
            // The grid can only underestimate the max and overestimate the min.
            assert!(fast >= brute * (1.0 - 1e-12), "{fast} < {brute}");
            assert!(rel(fast, brute) <= 1e-6, "{fast} vs {brute}");
        }
    }
}

#[test]
fn gauss_legendre_filter_matches_contour_quadrature() {
    for m in 1..=8 {
        let f = gauss_legendre_filter(m);
        for k in 0..100 {
            let x = -3.0 + 6.0 * (k as f64 + 0.5) / 100.0;
            let oracle = contour_gauss_legendre(x, m);
            assert!((f.eval(x) - oracle).abs() <= 1e-12, "m {m}, x {x}: {} vs {oracle}", f.eval(x));
        }
    }
}

#[test]
fn gauss_legendre_nodes_match_golub_welsch() {
    for m in 1..=12 {
        let (x, w) = gauss_legendre_nodes(m);
        let (xo, wo) = golub_welsch(m);
        for i in 0..m {
            assert!((x[i] - xo[i]).abs() < 1e-13 && (w[i] - wo[i]).abs() < 1e-13);
        }
    }
}

#[test]
fn gauss_legendre_against_trapezoidal_contour() {
    let f = gauss_legendre_filter(4);
    let at0 = contour_trapezoid(0.0, 1_000_000);
    let at2 = contour_trapezoid(2.0, 1_000_000);
    assert!((at0 - 1.0).abs() < 1e-12 && at2.abs() < 1e-12);
    assert!((0.99..=1.01).contains(&f.eval(0.0)));
    assert!((f.eval(2.0) - at2).abs() <= 0.05);
    assert!((f.eval(10.0) - contour_trapezoid(10.0, 1_000_000)).abs() < 1e-3);
    // Far from the poles x^2 r(x) tends to 4 Re sum(beta z).
    let limit = 4.0 * f.beta().iter().zip(f.z()).map(|(b, z)| (b * z).re).sum::<f64>();
    let x = 1e4;
    assert!((x * x * f.eval(x) - limit).abs() <= 1e-6);
}

#[test]
fn gauss_legendre_error_decreases_with_m() {
    // Sup of |r| on [1.5, 20], which shrinks as poles are added two at a time.
    let sup = |m: usize| {
        let f = gauss_legendre_filter(m);
        (0..=20_000).map(|k| f.eval(1.5 + 18.5 * k as f64 / 20_000.0).abs()).fold(0.0, f64::max)
    };
    let sups: Vec<f64> = (2..=10).map(sup).collect();
    for k in 0..sups.len() - 2 {
        assert!(sups[k + 2] < sups[k], "m {}: {} then {}", k + 2, sups[k], sups[k + 2]);
    }
    for m in 1..=10 {
        assert!((gauss_legendre_filter(m).eval(0.0) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn predicted_rate_is_consistent_with_observed_iteration() {
    use ratfilt::harness::{subspace_iteration, synthetic_gap_problem, SolveOptions};
    let g = 0.95;
    let f = gauss_legendre_filter(4);
    let wcr = compute_wcr(&f, g, InnerInterval::FullInterval).unwrap().wcr;
    for seed in 0..20u64 {
        let p = synthetic_gap_problem(200, 20, g, 300 + seed).unwrap();
        let rep = subspace_iteration(&f, &p, SolveOptions { c: 1.5, tol: 1e-12, max_iters: 200, seed }).unwrap();
        assert!(rep.converged, "seed {seed}: not converged");
        assert!(
            rep.predicted_rate >= 0.2 * rep.observed_rate && rep.predicted_rate <= wcr,
            "seed {seed}: predicted {} observed {} wcr {wcr}",
            rep.predicted_rate,
            rep.observed_rate
        );
    }
}
