//! The weighted least-squares filter objective
//!
//! ```text
//! f_w(beta, z) = integral over R of w(x) (1_(-1,1)(x) - r(x))^2 dx
//! ```
//!
//! evaluated in closed form from partial-fraction antiderivatives of the
//! `4m`-pole expansion, together with its exact gradient with respect to the
//! real parameter vector `(Re beta | Re z | Im beta | Im z)`.

use num_complex::Complex64;

use crate::error::{FilterError, Result};
use crate::filter::{expand_poles, RationalFilter};
use crate::optim::Objective;
use crate::weights::{WeightProfile, WeightVector};

/// Real image of `(beta, z)`, laid out as `(Re beta | Re z | Im beta | Im z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealParamVector(pub Vec<f64>);

impl RealParamVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices holding the pole imaginary parts.
    pub fn pole_imag_indices(m: usize) -> std::ops::Range<usize> {
        3 * m..4 * m
    }
}

/// Filter parameters without the quadrant invariant; what the optimizer
/// iterates on.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterParams {
    pub beta: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl FilterParams {
    pub fn from_filter(f: &RationalFilter) -> Self {
        Self { beta: f.beta().to_vec(), z: f.z().to_vec() }
    }

    /// Restores every pole into the first quadrant and validates.
    pub fn into_filter(self, gap: f64, scaled: bool) -> Result<RationalFilter> {
        RationalFilter::from_any_quadrant(self.beta, self.z, gap, scaled)
    }
}

pub fn pack(f: &RationalFilter) -> RealParamVector {
    pack_params(f.beta(), f.z())
}

pub fn pack_params(beta: &[Complex64], z: &[Complex64]) -> RealParamVector {
    let m = beta.len();
    let mut x = vec![0.0; 4 * m];
    for i in 0..m {
        x[i] = beta[i].re;
        x[m + i] = z[i].re;
        x[2 * m + i] = beta[i].im;
        x[3 * m + i] = z[i].im;
    }
    RealParamVector(x)
}

pub fn unpack(p: &RealParamVector, m: usize) -> Result<FilterParams> {
    unpack_slice(&p.0, m)
}

pub(crate) fn unpack_slice(x: &[f64], m: usize) -> Result<FilterParams> {
    if x.len() != 4 * m {
        return Err(FilterError::LengthMismatch { expected: 4 * m, actual: x.len() });
    }
    let beta = (0..m).map(|i| Complex64::new(x[i], x[2 * m + i])).collect();
    let z = (0..m).map(|i| Complex64::new(x[m + i], x[3 * m + i])).collect();
    Ok(FilterParams { beta, z })
}

pub fn objective(f: &RationalFilter, w: &WeightVector) -> f64 {
    evaluate(f.beta(), f.z(), &w.profile(), false).0
}

pub fn gradient(f: &RationalFilter, w: &WeightVector) -> RealParamVector {
    RealParamVector(evaluate(f.beta(), f.z(), &w.profile(), true).1)
}

/// Objective and (optionally) gradient for an arbitrary weight profile.
pub fn evaluate_profile(
    beta: &[Complex64],
    z: &[Complex64],
    profile: &WeightProfile,
    with_gradient: bool,
) -> (f64, Vec<f64>) {
    evaluate(beta, z, profile, with_gradient)
}

/// [`Objective`] adaptor over packed real parameters.
#[derive(Debug, Clone)]
pub struct SliseObjective {
    m: usize,
    profile: WeightProfile,
}

impl SliseObjective {
    pub fn new(m: usize, w: &WeightVector) -> Self {
        Self { m, profile: w.profile() }
    }

    pub fn with_profile(m: usize, profile: WeightProfile) -> Self {
        Self { m, profile }
    }

    fn split(&self, x: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let p = unpack_slice(x, self.m).expect("parameter vector has length 4m");
        (p.beta, p.z)
    }
}

impl Objective for SliseObjective {
    fn value(&self, x: &[f64]) -> f64 {
        let (b, z) = self.split(x);
        evaluate(&b, &z, &self.profile, false).0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (b, z) = self.split(x);
        evaluate(&b, &z, &self.profile, true)
    }
}

/// Relative pole separation (in units of the distance to the real axis)
/// below which the pairwise antiderivatives switch to their series form.
const SERIES_RATIO: f64 = 0.1;
const SERIES_TERMS: usize = 20;

struct Piece {
    a: usize,
    b: usize,
    weight: f64,
    inside: bool,
}

/// Per-endpoint data for one pole: `x - p`, `log(x - p)`, `1/(x - p)`.
#[derive(Clone, Copy)]
struct EndData {
    u: Complex64,
    log: Complex64,
    inv: Complex64,
}

fn evaluate(
    beta: &[Complex64],
    z: &[Complex64],
    profile: &WeightProfile,
    with_gradient: bool,
) -> (f64, Vec<f64>) {
    let m = beta.len();
    let poles = expand_poles(beta, z);
    let np = poles.len();

    // Pieces of [0, inf) with constant weight and constant indicator value.
    let mut ends: Vec<f64> = Vec::new();
    let mut raw: Vec<(f64, f64, f64, bool)> = Vec::new();
    for s in &profile.segments {
        if s.weight == 0.0 || !(s.end > s.start) {
            continue;
        }
        if s.start < 1.0 && s.end > 1.0 {
            raw.push((s.start, 1.0, s.weight, true));
            raw.push((1.0, s.end, s.weight, false));
        } else {
            raw.push((s.start, s.end, s.weight, s.end <= 1.0));
        }
    }
    for (a, b, _, _) in &raw {
        ends.push(*a);
        ends.push(*b);
    }
    ends.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ends.dedup();
    let idx = |x: f64| ends.iter().position(|e| *e == x).unwrap();
    let pieces: Vec<Piece> = raw
        .iter()
        .map(|&(a, b, weight, inside)| Piece { a: idx(a), b: idx(b), weight, inside })
        .collect();

    // data[e][k]
    let data: Vec<Vec<EndData>> = ends
        .iter()
        .map(|&x| {
            poles
                .iter()
                .map(|(p, _)| {
                    let u = Complex64::new(x, 0.0) - p;
                    EndData { u, log: u.ln(), inv: 1.0 / u }
                })
                .collect()
        })
        .collect();

    let mut value = 0.0;
    let mut grad = if with_gradient { vec![0.0; 4 * m] } else { Vec::new() };
    let mut kmat = vec![Complex64::new(0.0, 0.0); np * np];

    for piece in &pieces {
        let (da, db) = (&data[piece.a], &data[piece.b]);
        let c = piece.weight;
        let e = if piece.inside { 1.0 } else { 0.0 };
        let len = ends[piece.b] - ends[piece.a];

        for k in 0..np {
            kmat[k * np + k] = -(db[k].inv - da[k].inv);
            for l in (k + 1)..np {
                let v = pair_integral(poles[k].0, poles[l].0, &da[k], &da[l], &db[k], &db[l]);
                kmat[k * np + l] = v;
                kmat[l * np + k] = v;
            }
        }

        let mut i1 = Complex64::new(0.0, 0.0);
        let mut i2 = Complex64::new(0.0, 0.0);
        for k in 0..np {
            let ak = poles[k].1;
            i1 += ak * (db[k].log - da[k].log);
            let mut row = Complex64::new(0.0, 0.0);
            for l in 0..np {
                row += poles[l].1 * kmat[k * np + l];
            }
            i2 += ak * row;
        }
        value += 2.0 * c * (e * len - 2.0 * e * i1.re + i2.re);

        if !with_gradient {
            continue;
        }
        for i in 0..m {
            let (jp, jm) = (4 * i, 4 * i + 2);
            // A = integral (e - r) (1/(x - z) - 1/(x + z))
            let mut a_int = (db[jp].log - da[jp].log - db[jm].log + da[jm].log) * e;
            // B = integral (e - r) (1/(x - z)^2 + 1/(x + z)^2)
            let mut b_int = (-(db[jp].inv - da[jp].inv) - (db[jm].inv - da[jm].inv)) * e;
            for k in 0..np {
                let ak = poles[k].1;
                a_int -= ak * (kmat[k * np + jp] - kmat[k * np + jm]);
                let k2p = pair_integral_sq(poles[k].0, poles[jp].0, &da[k], &da[jp], &db[k], &db[jp], k == jp);
                let k2m = pair_integral_sq(poles[k].0, poles[jm].0, &da[k], &da[jm], &db[k], &db[jm], k == jm);
                b_int -= ak * (k2p + k2m);
            }
            let bb = beta[i] * b_int;
            grad[i] += -8.0 * c * a_int.re;
            grad[2 * m + i] += 8.0 * c * a_int.im;
            grad[m + i] += -8.0 * c * bb.re;
            grad[3 * m + i] += 8.0 * c * bb.im;
        }
    }
    (value, grad)
}

fn use_series(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < SERIES_RATIO * a.im.abs().min(b.im.abs())
}

/// `integral_x0^x1 dx / ((x - a)(x - b))` for `a != b`.
fn pair_integral(
    a: Complex64,
    b: Complex64,
    da_a: &EndData,
    da_b: &EndData,
    db_a: &EndData,
    db_b: &EndData,
) -> Complex64 {
    let delta = a - b;
    if use_series(a, b) {
        // 1/((u - d) u) = sum d^n / u^(n+2), u = x - b.
        let f = |u: Complex64| {
            let q = delta / u;
            let mut term = 1.0 / u;
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..SERIES_TERMS {
                acc -= term / (n + 1) as f64;
                term *= q;
            }
            acc
        };
        f(db_b.u) - f(da_b.u)
    } else {
        ((db_a.log - db_b.log) - (da_a.log - da_b.log)) / delta
    }
}

/// `integral_x0^x1 dx / ((x - a)(x - b)^2)`.
fn pair_integral_sq(
    a: Complex64,
    b: Complex64,
    da_a: &EndData,
    da_b: &EndData,
    db_a: &EndData,
    db_b: &EndData,
    same: bool,
) -> Complex64 {
    if same {
        return -0.5 * (db_b.inv * db_b.inv - da_b.inv * da_b.inv);
    }
    let delta = a - b;
    if use_series(a, b) {
        // 1/((u - d) u^2) = sum d^n / u^(n+3).
        let f = |u: Complex64| {
            let q = delta / u;
            let mut term = 1.0 / (u * u);
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..SERIES_TERMS {
                acc -= term / (n + 2) as f64;
                term *= q;
            }
            acc
        };
        f(db_b.u) - f(da_b.u)
    } else {
        let anti = |ea: &EndData, eb: &EndData| (ea.log - eb.log) / (delta * delta) + eb.inv / delta;
        anti(db_a, db_b) - anti(da_a, da_b)
    }
}
