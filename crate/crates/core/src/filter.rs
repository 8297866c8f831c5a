//! Symmetric real rational filters and their worst-case convergence rate.
//!
//! A filter of degree `m` is stored through its first-quadrant poles `z_i`
//! and coefficients `beta_i`; the remaining `3m` poles are the conjugates and
//! negations, so that
//!
//! ```text
//! r(x) = sum_i  beta_i/(x - z_i) + conj(beta_i)/(x - conj(z_i))
//!             - beta_i/(x + z_i) - conj(beta_i)/(x + conj(z_i))
//! ```
//!
//! is real and even on the real axis and decays like `1/x^2`.

use num_complex::Complex64;

use crate::error::{FilterError, Result};

/// Samples per finite interval used by the extremum search.
pub const WCR_SAMPLES: usize = 4096;
/// Bracket width at which the golden-section refinement stops.
pub const GOLDEN_TOL: f64 = 1e-12;
/// Smallest admissible denominator of a WCR report.
pub const DEGENERATE_DEN: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalFilter {
    beta: Vec<Complex64>,
    z: Vec<Complex64>,
    gap: f64,
    scaled: bool,
}

impl RationalFilter {
    /// Builds a filter from quadrant poles and coefficients, checking that the
    /// poles lie in the open first quadrant and are pairwise distinct.
    pub fn new(beta: Vec<Complex64>, z: Vec<Complex64>, gap: f64, scaled: bool) -> Result<Self> {
        if beta.is_empty() {
            return Err(FilterError::InvalidFilter("m must be at least 1".into()));
        }
        if beta.len() != z.len() {
            return Err(FilterError::LengthMismatch { expected: beta.len(), actual: z.len() });
        }
        for (i, (b, p)) in beta.iter().zip(&z).enumerate() {
            if !(b.re.is_finite() && b.im.is_finite() && p.re.is_finite() && p.im.is_finite()) {
                return Err(FilterError::InvalidFilter(format!("non-finite parameter at index {i}")));
            }
            if !(p.re > 0.0 && p.im > 0.0) {
                return Err(FilterError::InvalidFilter(format!(
                    "pole {i} = {p} is not in the open first quadrant"
                )));
            }
        }
        for i in 0..z.len() {
            for j in (i + 1)..z.len() {
                if z[i] == z[j] {
                    return Err(FilterError::InvalidFilter(format!("poles {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { beta, z, gap, scaled })
    }

    /// Maps arbitrary pole positions into the first quadrant, using that the
    /// 4m-pole expansion is invariant under reflecting one quadrant pole.
    pub fn from_any_quadrant(
        beta: Vec<Complex64>,
        z: Vec<Complex64>,
        gap: f64,
        scaled: bool,
    ) -> Result<Self> {
        let mut beta = beta;
        let mut z = z;
        for (b, p) in beta.iter_mut().zip(z.iter_mut()) {
            let (nb, np) = reflect_into_quadrant(*b, *p);
            *b = nb;
            *p = np;
        }
        Self::new(beta, z, gap, scaled)
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn scaled(&self) -> bool {
        self.scaled
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    /// All `4m` poles with their coefficients, in the order
    /// `z_i, conj(z_i), -z_i, -conj(z_i)` for each `i`.
    pub fn expanded_poles(&self) -> Vec<(Complex64, Complex64)> {
        expand_poles(&self.beta, &self.z)
    }

    /// Evaluates `r(x)`; `r(+-inf) = 0`.
    pub fn eval(&self, x: f64) -> f64 {
        eval_params(&self.beta, &self.z, x)
    }

    /// The full four-term sum in complex arithmetic, before discarding the
    /// (round-off sized) imaginary part.
    pub fn eval_terms(&self, x: f64) -> Complex64 {
        if x.is_infinite() {
            return Complex64::new(0.0, 0.0);
        }
        let xc = Complex64::new(x, 0.0);
        self.beta
            .iter()
            .zip(&self.z)
            .map(|(b, p)| {
                b / (xc - p) + b.conj() / (xc - p.conj()) - b / (xc + p) - b.conj() / (xc + p.conj())
            })
            .sum()
    }
}

/// Reflects a single quadrant pole `p` (and its coefficient) back into the
/// open first quadrant without changing the filter.
///
/// The four images of `(b, p)` are `(b, p)`, `(conj b, conj p)`,
/// `(-b, -p)` and `(-conj b, -conj p)`; whichever lies in the first quadrant
/// is returned.
pub fn reflect_into_quadrant(b: Complex64, p: Complex64) -> (Complex64, Complex64) {
    match (p.re >= 0.0, p.im >= 0.0) {
        (true, true) => (b, p),
        (true, false) => (b.conj(), p.conj()),
        (false, false) => (-b, -p),
        (false, true) => (-b.conj(), -p.conj()),
    }
}

pub(crate) fn expand_poles(beta: &[Complex64], z: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let mut out = Vec::with_capacity(4 * z.len());
    for (b, p) in beta.iter().zip(z) {
        out.push((*p, *b));
        out.push((p.conj(), b.conj()));
        out.push((-p, -b));
        out.push((-p.conj(), -b.conj()));
    }
    out
}

/// `r(x) = 4 Re sum_i beta_i z_i / (x^2 - z_i^2)`, the four-term sum folded
/// using its conjugate and parity symmetry.
pub(crate) fn eval_params(beta: &[Complex64], z: &[Complex64], x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let x2 = x * x;
    let mut acc = 0.0;
    for (b, p) in beta.iter().zip(z) {
        let num = b * p;
        let den = Complex64::new(x2, 0.0) - p * p;
        acc += (num / den).re;
    }
    4.0 * acc
}

/// Which inner interval the WCR denominator is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerInterval {
    /// `[-G, G]`.
    Gap,
    /// The whole search interval `[-1, 1]`.
    FullInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WcrReport {
    pub wcr: f64,
    /// Max of `|r|` over `|x| >= 1/G`.
    pub num_max: f64,
    /// Location of `num_max`; `f64::INFINITY` when attained at infinity.
    pub num_argmax: f64,
    pub den_min: f64,
    pub den_argmin: f64,
    pub inner_interval: (f64, f64),
}

/// Worst-case convergence rate of `f` for gap `gap`.
pub fn compute_wcr(f: &RationalFilter, gap: f64, inner: InnerInterval) -> Result<WcrReport> {
    let beta: Vec<Complex64> = f.beta.iter().zip(&f.z).map(|(b, p)| b * p).collect();
    let z2: Vec<Complex64> = f.z.iter().map(|p| p * p).collect();
    // |r(1/t)| = |4 Re sum beta z t^2 / (1 - z^2 t^2)|, regular at t = 0.
    let tail = |t: f64| {
        let t2 = t * t;
        let mut acc = 0.0;
        for (bz, zz) in beta.iter().zip(&z2) {
            acc += (bz * t2 / (Complex64::new(1.0, 0.0) - zz * t2)).re;
        }
        (4.0 * acc).abs()
    };
    let inside = |x: f64| f.eval(x).abs();
    wcr_from_parts(inside, tail, gap, inner)
}

/// WCR of an arbitrary even function `r`, given as a closure over `x >= 0`.
/// The tail is sampled in the coordinate `t = 1/x`.
pub fn compute_wcr_fn<F: Fn(f64) -> f64>(r: F, gap: f64, inner: InnerInterval) -> Result<WcrReport> {
    let tail = |t: f64| if t == 0.0 { r(f64::INFINITY).abs() } else { r(1.0 / t).abs() };
    let inside = |x: f64| r(x).abs();
    wcr_from_parts(inside, tail, gap, inner)
}

fn wcr_from_parts<I, T>(inside: I, tail: T, gap: f64, inner: InnerInterval) -> Result<WcrReport>
where
    I: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if !(gap > 0.0 && gap < 1.0) {
        return Err(FilterError::InvalidGap(gap));
    }
    let inner_hi = match inner {
        InnerInterval::Gap => gap,
        InnerInterval::FullInterval => 1.0,
    };
    let (den_argmin, den_min) = extremum(&inside, 0.0, inner_hi, Extremum::Min);
    let (t_arg, num_max) = extremum(&tail, 0.0, gap, Extremum::Max);
    if !(den_min >= DEGENERATE_DEN) {
        return Err(FilterError::DegenerateFilter(den_min));
    }
    let num_argmax = if t_arg == 0.0 { f64::INFINITY } else { 1.0 / t_arg };
    Ok(WcrReport {
        wcr: num_max / den_min,
        num_max,
        num_argmax,
        den_min,
        den_argmin,
        inner_interval: (-inner_hi, inner_hi),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// Chebyshev-Lobatto points on `[a, b]`, ascending.
pub(crate) fn chebyshev_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut pts: Vec<f64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::PI * (n - 1 - k) as f64 / (n - 1) as f64;
            mid + half * theta.cos()
        })
        .collect();
    pts[0] = a;
    pts[n - 1] = b;
    pts
}

/// Global extremum of `g` over `[a, b]`: dense sampling, then golden-section
/// refinement in the bracket around every sampled local extremum.
fn extremum<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, kind: Extremum) -> (f64, f64) {
    let xs = chebyshev_points(a, b, WCR_SAMPLES);
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    // Work with "larger is better".
    let score = |v: f64| match kind {
        Extremum::Max => v,
        Extremum::Min => -v,
    };
    let mut best_x = xs[0];
    let mut best = score(vals[0]);
    for (x, v) in xs.iter().zip(&vals) {
        if score(*v) > best {
            best = score(*v);
            best_x = *x;
        }
    }
    let n = xs.len();
    for k in 1..n - 1 {
        let (l, c, r) = (score(vals[k - 1]), score(vals[k]), score(vals[k + 1]));
        if c >= l && c > r || c > l && c >= r {
            let (x, v) = golden_max(|x| score(g(x)), xs[k - 1], xs[k + 1]);
            if v > best {
                best = v;
                best_x = x;
            }
        }
    }
    let value = match kind {
        Extremum::Max => best,
        Extremum::Min => -best,
    };
    (best_x, value)
}

fn golden_max<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while (b - a).abs() > GOLDEN_TOL {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if gc > gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Applies the substitution `x -> sqrt(G) x`, which rescales coefficients and
/// poles by `1/sqrt(G)`.
pub fn scale_filter(f: &RationalFilter, gap: f64) -> Result<RationalFilter> {
    if f.scaled {
        return Err(FilterError::AlreadyScaled);
    }
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(FilterError::InvalidGap(gap));
    }
    let factor = 1.0 / gap.sqrt();
    let beta = f.beta.iter().map(|b| b * factor).collect();
    let z = f.z.iter().map(|p| p * factor).collect();
    RationalFilter::new(beta, z, f.gap, true)
}
