//! Property bodies shared by the proptest suite and the acceptance report.
//! Each takes a seed (plus scalar parameters where useful) so that any
//! runner can drive it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::Rng;

use ratfilt::baselines::gauss_legendre_filter;
use ratfilt::designer::{reduce_filter_wcr, DesignConfig};
use ratfilt::filter::RationalFilter;
use ratfilt::harness::{generate_slices, subspace_iteration, synthetic_spectrum, SolveOptions};
use ratfilt::optim::{
    bfgs_minimize, bfgs_update, de_minimize_1d, lbfgsb_minimize_observed, nelder_mead, project_box, BfgsOptions,
    BoxSpec, DeOptions, FnObjective, LbfgsbOptions, NelderMeadOptions, Objective,
};
use ratfilt::slise::{objective, pack, SliseObjective};
use ratfilt::weights::{initial_weight_vector, repair_into_vs};

use super::{random_filter, random_pair, random_weight, rng};

pub type PropResult = Result<(), TestCaseError>;

/// Sum of the magnitudes of the `4m` terms of `r(x)`, the natural scale for
/// round-off in the sum.
fn term_scale(f: &RationalFilter, x: f64) -> f64 {
    let xc = Complex64::new(x, 0.0);
    f.beta()
        .iter()
        .zip(f.z())
        .map(|(b, z)| {
            let b = b.norm();
            b / (xc - z).norm() + b / (xc - z.conj()).norm() + b / (xc + z).norm() + b / (xc + z.conj()).norm()
        })
        .sum()
}

pub fn evenness(seed: u64, x: f64) -> PropResult {
    let f = random_filter(&mut rng(seed), 1 + (seed % 6) as usize);
    let (a, b) = (f.eval(x), f.eval(-x));
    prop_assert!((a - b).abs() <= 1e-13 * term_scale(&f, x), "r({x}) = {a}, r(-x) = {b}");
    Ok(())
}

pub fn realness(seed: u64, x: f64) -> PropResult {
    let f = random_filter(&mut rng(seed), 1 + (seed % 6) as usize);
    let t = f.eval_terms(x);
    prop_assert!(t.im.abs() <= 1e-12 * term_scale(&f, x), "imaginary residue {} at {x}", t.im);
    Ok(())
}

/// Beyond twice the largest pole modulus, `|x^2 - z^2| >= 3 x^2 / 4`, so
/// `|r(x)| <= (16/3) sum |beta z| / x^2`.
pub fn decay(seed: u64, t: f64) -> PropResult {
    let f = random_filter(&mut rng(seed), 1 + (seed % 6) as usize);
    let rmax = f.z().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let x = 2.0 * rmax * (1.0 + t);
    let bound = 16.0 / 3.0 * f.beta().iter().zip(f.z()).map(|(b, z)| (b * z).norm()).sum::<f64>() / (x * x);
    prop_assert!(f.eval(x).abs() <= bound * (1.0 + 1e-12), "|r({x})| = {} > {bound}", f.eval(x).abs());
    prop_assert!(f.eval(f64::INFINITY) == 0.0);
    Ok(())
}

pub fn weight_evenness(seed: u64, x: f64) -> PropResult {
    let w = random_weight(&mut rng(seed));
    prop_assert_eq!(w.weight_at(x), w.weight_at(-x));
    Ok(())
}

pub fn repair_idempotent(seed: u64) -> PropResult {
    let w = random_weight(&mut rng(seed));
    let mut r = rng(seed ^ 1);
    let signed: Vec<f64> = w.values().iter().map(|v| if r.gen_bool(0.5) { -v } else { *v }).collect();
    let once = repair_into_vs(&signed, w.s(), w.gap()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let twice = repair_into_vs(once.values(), w.s(), w.gap()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&once, &twice);
    prop_assert_eq!(&once, &w);
    Ok(())
}

pub fn objective_weight_scaling(seed: u64, c: f64) -> PropResult {
    let (f, w) = random_pair(&mut rng(seed));
    // The unit weight on [0, v1) is fixed in a weight vector, so the scaled
    // weight is expressed as a profile.
    let scaled = SliseObjective::with_profile(f.m(), w.profile().scaled(c));
    let base = SliseObjective::new(f.m(), &w);
    let x = pack(&f);
    let (a, b) = (scaled.value(x.as_slice()), base.value(x.as_slice()));
    prop_assert!((a - c * b).abs() <= 1e-12 * (c * b).abs(), "{a} vs {}", c * b);
    let (ga, gb) = (scaled.gradient(x.as_slice()), base.gradient(x.as_slice()));
    for (p, q) in ga.iter().zip(&gb) {
        prop_assert!((p - c * q).abs() <= 1e-11 * (c * q).abs().max(1e-12));
    }
    Ok(())
}

pub fn objective_permutation_and_reflection(seed: u64) -> PropResult {
    let (f, w) = random_pair(&mut rng(seed));
    let m = f.m();
    let mut beta = f.beta().to_vec();
    let mut z = f.z().to_vec();
    beta.rotate_left(1);
    z.rotate_left(1);
    let rotated = RationalFilter::new(beta.clone(), z.clone(), f64::NAN, false).unwrap();
    // Replace one pair by its image (-conj beta, -conj z) in the second quadrant.
    let i = (seed as usize) % m;
    beta[i] = -beta[i].conj();
    z[i] = -z[i].conj();
    let reflected = RationalFilter::from_any_quadrant(beta, z, f64::NAN, false).unwrap();
    let base = objective(&f, &w);
    prop_assert!((objective(&rotated, &w) - base).abs() <= 1e-12 * base);
    prop_assert!((objective(&reflected, &w) - base).abs() <= 1e-12 * base);
    prop_assert!(objective(&f, &w) >= 0.0);
    Ok(())
}

pub fn projection_idempotent(seed: u64, lb: f64) -> PropResult {
    let mut r = rng(seed);
    let m = 1 + (seed % 6) as usize;
    let y: Vec<f64> = (0..4 * m).map(|_| r.gen_range(-1.0..1.0)).collect();
    let b = BoxSpec::for_poles(m, lb);
    let p = project_box(&y, &b);
    prop_assert!(b.is_feasible(&p));
    prop_assert_eq!(project_box(&p, &b), p.clone());
    for j in 0..4 * m {
        if !b.constrained.contains(&j) || y[j].abs() >= lb {
            prop_assert_eq!(p[j], y[j]);
        }
    }
    Ok(())
}

/// A random SPD matrix stays SPD under updates with `y^T s > 0`.
///
/// Exact arithmetic allows any positive `y^T s`. In floating point each update
/// can raise the condition number by about `|s|^2 |y|^2 / (y^T s)^2`, so pairs
/// are kept only when the angle between `s` and `y` is well below 90 degrees.
/// The sequence is kept short enough that an SPD result stays numerically
/// SPD, and Cholesky then tests the update itself rather than round-off.
pub fn bfgs_update_positive_definite(seed: u64, n: usize) -> PropResult {
    let mut r = rng(seed);
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let mut h = &a * a.transpose() + DMatrix::identity(n, n) * 0.1;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..8 {
        let s: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut y: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        // Mixing in s bounds the angle between s and y away from 90 degrees.
        for (yi, si) in y.iter_mut().zip(&s) {
            *yi = 0.5 * *yi + *si;
        }
        let ys: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if ys <= 0.2 * norm(&s) * norm(&y) {
            continue;
        }
        h = bfgs_update(&h, &s, &y, ys);
        prop_assert!(h.clone().cholesky().is_some(), "update lost positive definiteness");
        let hy = &h * DVector::from_column_slice(&y);
        for i in 0..n {
            prop_assert!((hy[i] - s[i]).abs() <= 1e-8 * (1.0 + s[i].abs()) * h.norm());
        }
    }
    Ok(())
}

/// BFGS on a random strictly convex quadratic: strictly decreasing values
/// and no inverse-Hessian resets.
pub fn bfgs_descent(seed: u64) -> PropResult {
    let mut r = rng(seed);
    let n = 2 + (seed % 8) as usize;
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let q = &a * a.transpose() + DMatrix::identity(n, n);
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    let obj = FnObjective {
        f: |x: &[f64]| {
            let d = DVector::from_iterator(n, x.iter().zip(&c).map(|(a, b)| a - b));
            0.5 * d.dot(&(&q * &d))
        },
        g: |x: &[f64]| {
            let d = DVector::from_iterator(n, x.iter().zip(&c).map(|(a, b)| a - b));
            (&q * d).as_slice().to_vec()
        },
    };
    let rep = bfgs_minimize(&obj, &vec![0.0; n], BfgsOptions { tol: 1e-10, ..Default::default() });
    prop_assert!(rep.f_history.windows(2).all(|w| w[1] < w[0]), "{:?}", rep.f_history);
    prop_assert_eq!(rep.hessian_resets, 0);
    prop_assert!(rep.x.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-6));
    Ok(())
}

/// Nelder-Mead on a shifted Rosenbrock-like valley.
pub fn nelder_mead_monotone(seed: u64, n: usize) -> PropResult {
    let mut r = rng(seed);
    let c: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let x0: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    let f = |x: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            s += (x[i] - c[i]).powi(2);
            if i + 1 < n {
                s += 10.0 * (x[i + 1] - c[i + 1] - (x[i] - c[i]).powi(2)).powi(2);
            }
        }
        s
    };
    let rep = nelder_mead(f, &x0, NelderMeadOptions { ftol: 1e-12, max_evals: 400 });
    prop_assert!(rep.best_history.windows(2).all(|w| w[1] <= w[0]), "{:?}", rep.best_history);
    prop_assert!(rep.evals <= 400 + n + 1);
    Ok(())
}

/// Every accepted iterate of the box-constrained SLiSe solve is feasible.
pub fn lbfgsb_feasible(seed: u64, lb: f64) -> PropResult {
    let (f, w) = random_pair(&mut rng(seed));
    let obj = SliseObjective::new(f.m(), &w);
    let b = BoxSpec::for_poles(f.m(), lb);
    let mut ok = true;
    let rep = lbfgsb_minimize_observed(
        &obj,
        pack(&f).as_slice(),
        &b,
        LbfgsbOptions { max_iter: 60, ..Default::default() },
        |x| ok &= b.is_feasible(x),
    );
    prop_assert!(ok);
    prop_assert!(b.is_feasible(&rep.x));
    Ok(())
}

pub fn de_deterministic(seed: u64) -> PropResult {
    let run = || {
        de_minimize_1d(|x| (3.0 * x).sin() + 0.1 * x * x, -4.0, 4.0, DeOptions { seed, max_evals: 200, ..Default::default() })
    };
    let (a, b) = (run(), run());
    prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
    prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
    Ok(())
}

pub fn slices_deterministic(seed: u64) -> PropResult {
    let spec = synthetic_spectrum(200, seed);
    let a = generate_slices(&spec, 10, seed).unwrap();
    let b = generate_slices(&spec, 10, seed).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn subspace_deterministic(seed: u64) -> PropResult {
    let spec = synthetic_spectrum(120, seed);
    let p = &generate_slices(&spec, 1, seed).unwrap()[0];
    let f = gauss_legendre_filter(4);
    let opts = SolveOptions { seed, max_iters: 8, ..Default::default() };
    let a = subspace_iteration(&f, p, opts).unwrap();
    let b = subspace_iteration(&f, p, opts).unwrap();
    prop_assert_eq!(a.residual_history.len(), b.residual_history.len());
    for (x, y) in a.residual_history.iter().zip(&b.residual_history) {
        prop_assert_eq!(x.to_bits(), y.to_bits());
    }
    prop_assert_eq!(a.ritz_values, b.ritz_values);
    Ok(())
}

/// Two short design runs with the same seed agree exactly.
pub fn design_deterministic(seed: u64) -> PropResult {
    let mut cfg = DesignConfig::new(0.9, 2);
    cfg.seed = seed;
    cfg.max_outer_iters = 1;
    cfg.de_population = 4;
    cfg.de_max_evals = 8;
    cfg.nm_max_evals = 12;
    let v0 = initial_weight_vector(5, cfg.gap).unwrap();
    let f0 = gauss_legendre_filter(2);
    let a = reduce_filter_wcr(&v0, &f0, &cfg).unwrap();
    let b = reduce_filter_wcr(&v0, &f0, &cfg).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn any_seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

pub fn abscissa() -> impl Strategy<Value = f64> {
    -20.0..20.0f64
}

/// One named property with its own runner, for the acceptance report.
pub struct Named {
    pub name: &'static str,
    pub run: fn(&mut TestRunner) -> Result<(), String>,
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

macro_rules! named {
    ($name:literal, $strat:expr, $body:expr) => {
        Named {
            name: $name,
            run: |r: &mut TestRunner| r.run(&$strat, $body).map_err(|e| e.to_string()),
        }
    };
}

/// Every property with its case count.
pub fn all() -> Vec<(Named, u32)> {
    vec![
        (named!("evenness", (any_seed(), abscissa()), |(s, x)| evenness(s, x)), 256),
        (named!("realness", (any_seed(), abscissa()), |(s, x)| realness(s, x)), 256),
        (named!("decay", (any_seed(), 0.0..1e3f64), |(s, t)| decay(s, t)), 256),
        (named!("weight evenness", (any_seed(), abscissa()), |(s, x)| weight_evenness(s, x)), 256),
        (named!("repair idempotence", any_seed(), repair_idempotent), 128),
        (named!("weight scaling", (any_seed(), 1e-3..1e3f64), |(s, c)| objective_weight_scaling(s, c)), 64),
        (named!("pair permutation", any_seed(), objective_permutation_and_reflection), 64),
        (named!("projection idempotence", (any_seed(), 1e-3..0.9f64), |(s, l)| projection_idempotent(s, l)), 256),
        (named!("BFGS update positive definite", (any_seed(), 2..29usize), |(s, n)| {
            bfgs_update_positive_definite(s, n)
        }), 64),
        (named!("BFGS descent", any_seed(), bfgs_descent), 64),
        (named!("Nelder-Mead monotone best vertex", (any_seed(), 1..6usize), |(s, n)| {
            nelder_mead_monotone(s, n)
        }), 64),
        (named!("L-BFGS-B feasibility", (any_seed(), 0.01..0.3f64), |(s, l)| lbfgsb_feasible(s, l)), 24),
        (named!("DE determinism", any_seed(), de_deterministic), 32),
        (named!("slice determinism", any_seed(), slices_deterministic), 32),
        (named!("subspace determinism", any_seed(), subspace_deterministic), 8),
        (named!("design determinism", any_seed(), design_deterministic), 3),
    ]
}

/// Runs every property; returns `(name, error)` for each failure.
pub fn run_all() -> Vec<(&'static str, String)> {
    all()
        .into_iter()
        .filter_map(|(p, cases)| (p.run)(&mut runner(cases)).err().map(|e| (p.name, e)))
        .collect()
}
