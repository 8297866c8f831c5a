//! Strong Wolfe line search (bracketing phase followed by zoom with
//! safeguarded cubic interpolation).

use super::{dot, Counted, Objective};

#[derive(Debug, Clone, Copy)]
pub struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    /// Cap on trial step evaluations across both phases.
    pub max_trials: usize,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self { c1: 1e-4, c2: 0.9, max_trials: 50 }
    }
}

#[derive(Debug, Clone)]
pub struct StepPoint {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

#[derive(Clone)]
struct Trial {
    alpha: f64,
    f: f64,
    df: f64,
}

/// Searches along `d` from `x` for a step satisfying the strong Wolfe
/// conditions. On failure returns the best sufficient-decrease point seen,
/// if any, as `Err(Some(..))`.
pub(crate) fn strong_wolfe<O: Objective + ?Sized>(
    obj: &Counted<'_, O>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
    params: WolfeParams,
) -> Result<StepPoint, Option<StepPoint>> {
    strong_wolfe_capped(obj, x, f0, g0, d, alpha0, f64::INFINITY, params)
}

/// As [`strong_wolfe`] with steps restricted to `alpha <= alpha_max`. When
/// the slope is still negative at `alpha_max` with sufficient decrease, that
/// step is returned as it is the best the cap allows.
#[allow(clippy::too_many_arguments)]
pub(crate) fn strong_wolfe_capped<O: Objective + ?Sized>(
    obj: &Counted<'_, O>,
    x: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
    alpha_max: f64,
    params: WolfeParams,
) -> Result<StepPoint, Option<StepPoint>> {
    let df0 = dot(g0, d);
    if !(df0 < 0.0) {
        return Err(None);
    }
    let mut trials = 0usize;
    let mut best: Option<StepPoint> = None;

    let eval = |alpha: f64, best: &mut Option<StepPoint>| -> (Trial, StepPoint) {
        let xa: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let (f, g) = obj.value_and_gradient(&xa);
        let f = if f.is_finite() { f } else { f64::INFINITY };
        let df = if f.is_finite() { dot(&g, d) } else { f64::NAN };
        let pt = StepPoint { alpha, x: xa, f, g };
        if f <= f0 + params.c1 * alpha * df0 && best.as_ref().map_or(true, |b| f < b.f) {
            *best = Some(pt.clone());
        }
        (Trial { alpha, f, df }, pt)
    };

    let sufficient = |t: &Trial| t.f <= f0 + params.c1 * t.alpha * df0;
    let curvature = |t: &Trial| t.df.abs() <= -params.c2 * df0;

    let mut prev = Trial { alpha: 0.0, f: f0, df: df0 };
    let mut alpha = alpha0.min(alpha_max);
    let mut first = true;
    let (mut lo, mut hi);
    loop {
        if trials >= params.max_trials {
            return Err(best);
        }
        trials += 1;
        let (t, pt) = eval(alpha, &mut best);
        if !sufficient(&t) || (!first && t.f >= prev.f) {
            lo = prev;
            hi = t;
            break;
        }
        if curvature(&t) {
            return Ok(pt);
        }
        if t.df >= 0.0 {
            lo = t;
            hi = prev;
            break;
        }
        if t.alpha >= alpha_max {
            return Ok(pt);
        }
        prev = t;
        alpha = (alpha * 2.0).min(alpha_max);
        first = false;
    }

    // Zoom: invariant `lo` satisfies sufficient decrease with the lowest f so far,
    // and df(lo) * (hi - lo) < 0.
    loop {
        if trials >= params.max_trials {
            return Err(best);
        }
        let width = (hi.alpha - lo.alpha).abs();
        if width <= 1e-16 * lo.alpha.abs().max(1.0) {
            return Err(best);
        }
        let aj = interpolate(&lo, &hi);
        trials += 1;
        let (t, pt) = eval(aj, &mut best);
        if !sufficient(&t) || t.f >= lo.f {
            hi = t;
        } else {
            if curvature(&t) {
                return Ok(pt);
            }
            if t.df * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
    }
}

/// Cubic interpolation of the two trials, safeguarded to the middle 80% of
/// the bracket; bisection if the cubic is unusable.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    let mid = 0.5 * (a + b);
    if !(hi.f.is_finite() && hi.df.is_finite()) {
        // Only sufficient information for a quadratic through lo with slope.
        return mid;
    }
    let d1 = lo.df + hi.df - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.df * hi.df;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.df - lo.df + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let c = b - (b - a) * (hi.df + d2 - d1) / denom;
    if !c.is_finite() || c < left + margin || c > right - margin {
        mid
    } else {
        c
    }
}
