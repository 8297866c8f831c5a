//! Independent oracles and random-instance generators shared by the
//! integration tests. Nothing here calls the closed-form objective or the
//! analytic gradient.

#![allow(dead_code)]

pub mod props;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratfilt::filter::{InnerInterval, RationalFilter};
use ratfilt::weights::WeightVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random filter with poles in `[0.2, 1.5] x [0.05, 0.8]`.
pub fn random_filter(rng: &mut ChaCha8Rng, m: usize) -> RationalFilter {
    let z: Vec<Complex64> =
        (0..m).map(|_| Complex64::new(rng.gen_range(0.2..1.5), rng.gen_range(0.05..0.8))).collect();
    let beta: Vec<Complex64> =
        (0..m).map(|_| Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))).collect();
    RationalFilter::new(beta, z, f64::NAN, false).expect("random poles are distinct and in the quadrant")
}

/// Random member of `V_5` for a random gap in `[0.8, 0.97]`.
pub fn random_weight(rng: &mut ChaCha8Rng) -> WeightVector {
    let g: f64 = rng.gen_range(0.8..0.97);
    let v1 = rng.gen_range(g..1.0);
    let v2 = rng.gen_range(1.01..1.3);
    let v3 = v2 + rng.gen_range(0.1..1.0);
    let v4 = v3 + rng.gen_range(0.5..5.0);
    let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..20.0)).collect();
    WeightVector::new(5, vec![v1, v2, v3, v4, w[0], w[1], w[2]], g).expect("constructed inside V_5")
}

/// Gauss-Legendre filter with every coefficient and pole scaled by an
/// independent factor in `[1 - eps, 1 + eps]`.
pub fn perturbed_gauss_legendre(rng: &mut ChaCha8Rng, m: usize, eps: f64) -> RationalFilter {
    let base = ratfilt::baselines::gauss_legendre_filter(m);
    let mut jitter = |c: &Complex64| c * rng.gen_range(1.0 - eps..1.0 + eps);
    let beta: Vec<Complex64> = base.beta().iter().map(&mut jitter).collect();
    let z: Vec<Complex64> = base.z().iter().map(&mut jitter).collect();
    RationalFilter::new(beta, z, f64::NAN, false).expect("small perturbation keeps poles in the quadrant")
}

/// `(filter, weight)` with `m` drawn from `{2, 4, 6}`.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (RationalFilter, WeightVector) {
    let m = [2, 4, 6][rng.gen_range(0..3)];
    let f = random_filter(rng, m);
    let w = random_weight(rng);
    (f, w)
}

/// Direct evaluation of the four-pole-per-quadrant sum, written out term by
/// term.
pub fn eval_direct(f: &RationalFilter, x: f64) -> f64 {
    let x = Complex64::new(x, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for (b, z) in f.beta().iter().zip(f.z()) {
        s += b / (x - z);
        s += b.conj() / (x - z.conj());
        s -= b / (x + z);
        s -= b.conj() / (x + z.conj());
    }
    s.re
}

fn integrate_piece<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol || depth == 0 {
        return out.integral;
    }
    let mid = 0.5 * (a + b);
    integrate_piece(f, a, mid, 0.5 * tol, depth - 1) + integrate_piece(f, mid, b, 0.5 * tol, depth - 1)
}

/// Adaptive double-exponential quadrature of `f` on `[a, b]`, pre-split into
/// chunks no wider than `chunk`. The error target is `rel` times a coarse
/// estimate of the integral of `|f|`.
pub fn integrate(f: impl Fn(f64) -> f64 + Copy, a: f64, b: f64, chunk: f64, rel: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = ((b - a) / chunk).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let piece = |k: usize| {
        let lo = a + k as f64 * h;
        (lo, if k + 1 == n { b } else { lo + h })
    };
    let scale: f64 = (0..n)
        .map(|k| {
            let (lo, hi) = piece(k);
            quadrature::integrate(|x| f(x).abs(), lo, hi, 1e-6).integral
        })
        .sum();
    let tol = (rel * scale).max(f64::MIN_POSITIVE) / n as f64;
    (0..n)
        .map(|k| {
            let (lo, hi) = piece(k);
            integrate_piece(f, lo, hi, tol, 12)
        })
        .sum()
}

/// `int_R omega(x) (r(x) - 1_{|x|<1})^2 dx` by quadrature on every piece
/// where the integrand is smooth.
pub fn quad_objective(f: &RationalFilter, w: &WeightVector) -> f64 {
    let bps = w.breakpoints();
    let mut cuts = vec![0.0, 1.0];
    cuts.extend_from_slice(bps);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let min_im = f.z().iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let chunk = (min_im / 2.0).clamp(1e-3, 0.1);
    let last = *bps.last().unwrap();
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a >= last {
            break;
        }
        let mid = 0.5 * (a + b);
        let weight = w.weight_at(mid);
        let e = if mid < 1.0 { 1.0 } else { 0.0 };
        if weight == 0.0 {
            continue;
        }
        total += weight * integrate(|x| (eval_direct(f, x) - e).powi(2), a, b, chunk, 1e-13);
    }
    2.0 * total
}

/// Central differences with one Richardson step, choosing per component the
/// step whose estimate agrees best with its neighbour.
pub fn fd_gradient(func: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let richardson = |i: usize, h: f64| {
        let d = |h: f64| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (func(&xp) - func(&xm)) / (2.0 * h)
        };
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    };
    (0..x.len())
        .map(|i| {
            let scale = x[i].abs().max(0.05);
            let steps: Vec<f64> = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4].iter().map(|s| s * scale).collect();
            let est: Vec<f64> = steps.iter().map(|&h| richardson(i, h)).collect();
            let mut best = (f64::INFINITY, est[0]);
            for k in 0..est.len() - 1 {
                let gap = (est[k] - est[k + 1]).abs();
                if gap < best.0 {
                    best = (gap, est[k + 1]);
                }
            }
            best.1
        })
        .collect()
}

/// Brute-force WCR on a uniform composite grid of about `n` points: the
/// inner interval, `[1/G, 1/G + 10]`, and the tail in `t = 1/x`.
pub fn brute_wcr(f: &RationalFilter, gap: f64, inner: InnerInterval, n: usize) -> f64 {
    let third = n / 3;
    let inner_end = match inner {
        InnerInterval::Gap => gap,
        InnerInterval::FullInterval => 1.0,
    };
    let grid = |a: f64, b: f64, k: usize| (0..=k).map(move |j| a + (b - a) * j as f64 / k as f64);
    let den = grid(0.0, inner_end, third).map(|x| f.eval(x).abs()).fold(f64::INFINITY, f64::min);
    let near = grid(1.0 / gap, 1.0 / gap + 10.0, third).map(|x| f.eval(x).abs()).fold(0.0, f64::max);
    let tail = grid(0.0, 1.0 / (1.0 / gap + 10.0), third)
        .filter(|t| *t > 0.0)
        .map(|t| f.eval(1.0 / t).abs())
        .fold(0.0, f64::max);
    near.max(tail) / den
}

/// Gauss-Legendre rule from the eigen-decomposition of the Jacobi matrix.
pub fn golub_welsch(m: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::<f64>::from_fn(m, m, |i, k| {
        if i + 1 == k || k + 1 == i {
            let n = i.max(k) as f64;
            n / (4.0 * n * n - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `(1/2 pi i) oint dz / (z - x)` on the unit circle with an `m`-point
/// Gauss-Legendre rule on each quarter of the angle range.
pub fn contour_gauss_legendre(x: f64, m: usize) -> f64 {
    let (t, w) = golub_welsch(m);
    let xc = Complex64::new(x, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for q in 0..4 {
        let base = q as f64 * PI / 2.0;
        for (ti, wi) in t.iter().zip(&w) {
            let theta = base + PI / 4.0 * (1.0 + ti);
            let z = Complex64::from_polar(1.0, theta);
            // dz = i z dtheta, dtheta = (pi/4) dt.
            s += z / (z - xc) * (wi * PI / 4.0);
        }
    }
    (s / (2.0 * PI)).re
}

/// The same contour integral by the `n`-point trapezoidal rule in the angle.
pub fn contour_trapezoid(x: f64, n: usize) -> f64 {
    let xc = Complex64::new(x, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        s += z / (z - xc);
    }
    (s / n as f64).re
}
