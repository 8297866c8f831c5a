//! Gauss-Legendre contour-quadrature filters.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::filter::RationalFilter;

/// `m`-point Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
///
/// Nodes are Newton iterates on `P_m` from Chebyshev-like initial guesses;
/// the low half is mirrored so the rule is exactly symmetric.
pub fn gauss_legendre_nodes(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre discretization of `(1/2 pi i) oint dz/(z - x)` on the unit
/// circle, one `m`-point rule per quadrant.
///
/// First-quadrant nodes sit at angles `(pi/4)(1 + t_i)`, `z_i = exp(i theta_i)`.
/// The quadrature term `(w_i/8) z_i / (z_i - x)` is `beta_i / (x - z_i)` with
/// `beta_i = -w_i z_i / 8`; the remaining quadrants are the symmetric images.
pub fn gauss_legendre_filter(m: usize) -> RationalFilter {
    let (t, w) = gauss_legendre_nodes(m);
    let mut beta = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    for (ti, wi) in t.iter().zip(&w) {
        let theta = 0.25 * PI * (1.0 + ti);
        let zi = Complex64::from_polar(1.0, theta);
        z.push(zi);
        beta.push(-zi * (wi / 8.0));
    }
    RationalFilter::new(beta, z, f64::NAN, false).expect("Gauss-Legendre poles are in the open quadrant")
}
