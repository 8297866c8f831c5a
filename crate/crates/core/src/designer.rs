//! Weight-function search that minimizes the worst-case convergence rate of
//! SLiSe filters.
//!
//! The outer loop works on the shifted gap `G_s = sqrt(G)`. Each iteration
//! runs a coordinate-descent pass (one differential-evolution search per
//! weight-vector coordinate), then Nelder-Mead over all coordinates except
//! the two gap-adjacent breakpoints, then accepts the new weight vector and
//! filter. On exit the filter is rescaled so that its denominator is taken
//! over the whole interval `[-1, 1]` at the user gap.

use std::collections::HashMap;

use crate::error::{FilterError, Result};
use crate::filter::{compute_wcr, scale_filter, InnerInterval, RationalFilter};
use crate::optim::{
    bfgs_minimize, de_minimize_1d, lbfgsb_minimize, nelder_mead, BfgsOptions, BoxSpec, DeOptions,
    LbfgsbOptions, NelderMeadOptions, OptimReport, Termination,
};
use crate::slise::{objective, pack, unpack_slice, SliseObjective};
use crate::weights::{repair_into_vs, WeightVector};

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    /// User gap in `(0, 1)`.
    pub gap: f64,
    /// Poles per quadrant.
    pub m: usize,
    /// Number of weight intervals.
    pub s: usize,
    /// Lower bound on `|Im z_i|`; `None` runs unconstrained BFGS.
    pub lb: Option<f64>,
    pub res_tol: f64,
    /// Gradient tolerance of every inner SLiSe solve.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub seed: u64,
    pub max_outer_iters: usize,
    pub de_population: usize,
    pub de_max_evals: usize,
    pub nm_max_evals: usize,
    pub nm_ftol: f64,
}

impl DesignConfig {
    pub fn new(gap: f64, m: usize) -> Self {
        Self {
            gap,
            m,
            s: 5,
            lb: None,
            res_tol: 1e-9,
            inner_tol: 1e-8,
            inner_max_iter: 500,
            seed: 0,
            max_outer_iters: 50,
            de_population: 15,
            de_max_evals: 300,
            nm_max_evals: 1000,
            nm_ftol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap > 0.0 && self.gap < 1.0) {
            return Err(FilterError::InvalidGap(self.gap));
        }
        if self.m < 1 {
            return Err(FilterError::InvalidFilter("m must be at least 1".into()));
        }
        if self.s < 2 {
            return Err(FilterError::UnsupportedIntervals(self.s));
        }
        if let Some(lb) = self.lb {
            if !(lb > 0.0 && lb.is_finite()) {
                return Err(FilterError::InvalidFilter(format!("lower bound {lb} must be positive")));
            }
        }
        Ok(())
    }

    /// The gap the outer loop works with.
    pub fn shifted_gap(&self) -> f64 {
        self.gap.sqrt()
    }

    pub fn box_spec(&self) -> Option<BoxSpec> {
        self.lb.map(|lb| BoxSpec::for_poles(self.m, lb))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub outer_iter: usize,
    /// Unscaled WCR at the shifted gap after this iteration.
    pub h: f64,
    pub residual: f64,
    /// SLiSe objective of the accepted filter under the accepted weights.
    pub f_omega: f64,
    /// Iterations of the inner solve that produced the accepted filter.
    pub inner_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    /// Scaled filter with `gap` set to the user gap.
    pub filter: RationalFilter,
    /// Final weight vector (validated against the shifted gap).
    pub weight: WeightVector,
    /// WCR of the scaled filter over `[0, 1]` at the user gap.
    pub wcr: f64,
    /// WCR of the unscaled filter over `[0, G_s]` at the shifted gap.
    pub unscaled_wcr: f64,
    /// The unscaled filter that `filter` was derived from.
    pub unscaled: RationalFilter,
    pub trace: Vec<TraceEntry>,
    /// Whether the residual dropped below `res_tol` before the iteration cap.
    pub converged: bool,
    /// Number of `h` evaluations that ran an inner solve.
    pub h_evals: usize,
}

/// Minimizes the SLiSe objective for weight `w` starting at `f0`. The result
/// keeps `f0`'s gap, is unscaled, and has its poles mapped back into the
/// first quadrant.
pub fn slise_solve(
    f0: &RationalFilter,
    w: &WeightVector,
    bounds: Option<&BoxSpec>,
    tol: f64,
    max_iter: usize,
) -> Result<(RationalFilter, OptimReport)> {
    let m = f0.m();
    let obj = SliseObjective::new(m, w);
    let x0 = pack(f0);
    let report = match bounds {
        Some(b) => lbfgsb_minimize(
            &obj,
            x0.as_slice(),
            b,
            LbfgsbOptions { tol, max_iter: max_iter.max(1), ..Default::default() },
        ),
        None => bfgs_minimize(&obj, x0.as_slice(), BfgsOptions { tol, max_iter, ..Default::default() }),
    };
    let filter = unpack_slice(&report.x, m)?.into_filter(f0.gap(), false)?;
    Ok((filter, report))
}

/// Outcome of one `h` evaluation.
#[derive(Debug, Clone)]
pub struct HEval {
    /// WCR at the shifted gap, `+inf` for a rejected candidate.
    pub wcr: f64,
    pub filter: Option<RationalFilter>,
    pub inner_iters: usize,
    pub termination: Option<Termination>,
}

impl HEval {
    fn rejected() -> Self {
        Self { wcr: f64::INFINITY, filter: None, inner_iters: 0, termination: None }
    }
}

/// `h(v)`: WCR at the shifted gap of the SLiSe filter for weight `v`, warm
/// started from `start`.
pub fn h_value(start: &RationalFilter, v: &WeightVector, cfg: &DesignConfig) -> HEval {
    let gs = cfg.shifted_gap();
    let bounds = cfg.box_spec();
    let Ok((filter, report)) = slise_solve(start, v, bounds.as_ref(), cfg.inner_tol, cfg.inner_max_iter)
    else {
        return HEval::rejected();
    };
    match compute_wcr(&filter, gs, InnerInterval::Gap) {
        Ok(rep) if rep.wcr.is_finite() => HEval {
            wcr: rep.wcr,
            filter: Some(filter),
            inner_iters: report.iterations,
            termination: Some(report.termination),
        },
        _ => HEval::rejected(),
    }
}

/// `h` with a fixed warm start and a cache keyed on the bits of `v`.
pub struct HCache<'a> {
    start: RationalFilter,
    cfg: &'a DesignConfig,
    memo: HashMap<Vec<u64>, HEval>,
    pub evals: usize,
}

impl<'a> HCache<'a> {
    pub fn new(start: RationalFilter, cfg: &'a DesignConfig) -> Self {
        Self { start, cfg, memo: HashMap::new(), evals: 0 }
    }

    pub fn start(&self) -> &RationalFilter {
        &self.start
    }

    /// Changes the warm start and drops every cached value.
    pub fn reset(&mut self, start: RationalFilter) {
        self.start = start;
        self.memo.clear();
    }

    fn key(v: &WeightVector) -> Vec<u64> {
        v.values().iter().map(|x| x.to_bits()).collect()
    }

    pub fn eval(&mut self, v: &WeightVector) -> HEval {
        let key = Self::key(v);
        if let Some(h) = self.memo.get(&key) {
            return h.clone();
        }
        self.evals += 1;
        let h = h_value(&self.start, v, self.cfg);
        self.memo.insert(key, h.clone());
        h
    }

    /// `h` of raw coordinates; invalid vectors score `+inf`.
    pub fn eval_raw(&mut self, raw: &[f64], s: usize) -> f64 {
        match WeightVector::new(s, raw.to_vec(), self.cfg.shifted_gap()) {
            Ok(v) => self.eval(&v).wcr,
            Err(_) => f64::INFINITY,
        }
    }
}

/// Search interval for coordinate `i` (0-based) of `v`, or `None` when the
/// interval is empty.
pub fn coordinate_interval(v: &[f64], s: usize, i: usize, gap: f64) -> Option<(f64, f64)> {
    let nb = s - 1;
    // 1-based coordinate index to match the usual table.
    let k = i + 1;
    let (lo, hi) = if k == 1 {
        (gap, 1.0)
    } else if k == 2 && nb >= 2 {
        (1.0, 1.0 / gap)
    } else if k == nb {
        (v[k - 2], 3.0 * v[k - 1])
    } else if k == 3 {
        (1.0 / gap, v[3])
    } else if k < nb {
        (v[k - 2], v[k])
    } else {
        (0.1 * v[k - 1], 10.0 * v[k - 1])
    };
    (lo < hi && lo.is_finite() && hi.is_finite()).then_some((lo, hi))
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED69));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One pass of coordinate descent. Returns the updated vector and its `h`.
/// A coordinate is replaced only when the candidate strictly improves `w`.
pub fn coordinate_descent_pass(
    v: &WeightVector,
    w: f64,
    cache: &mut HCache<'_>,
    cfg: &DesignConfig,
    pass_seed: u64,
) -> (WeightVector, f64) {
    let s = v.s();
    let gs = cfg.shifted_gap();
    let mut cur = v.clone();
    let mut w = w;
    for i in 0..cur.values().len() {
        let Some((lo, hi)) = coordinate_interval(cur.values(), s, i, gs) else {
            continue;
        };
        let base = cur.values().to_vec();
        let opts = DeOptions {
            population: cfg.de_population,
            max_evals: cfg.de_max_evals,
            seed: mix_seed(pass_seed, i as u64, 0),
            ..Default::default()
        };
        let (c, hc) = de_minimize_1d(
            |c| {
                let mut trial = base.clone();
                trial[i] = c;
                cache.eval_raw(&trial, s)
            },
            lo,
            hi,
            opts,
        );
        if hc < w {
            let mut next = base;
            next[i] = c;
            if let Ok(nv) = WeightVector::new(s, next, gs) {
                cur = nv;
                w = hc;
            }
        }
    }
    (cur, w)
}

/// Runs the weight search from `v0` and the initial filter `f0`.
///
/// `v0` may be validated against either gap; it is revalidated against the
/// shifted gap.
pub fn reduce_filter_wcr(v0: &WeightVector, f0: &RationalFilter, cfg: &DesignConfig) -> Result<DesignResult> {
    reduce_filter_wcr_observed(v0, f0, cfg, |_| {})
}

/// As [`reduce_filter_wcr`], reporting each trace entry as it is produced.
pub fn reduce_filter_wcr_observed<F: FnMut(&TraceEntry)>(
    v0: &WeightVector,
    f0: &RationalFilter,
    cfg: &DesignConfig,
    mut observe: F,
) -> Result<DesignResult> {
    cfg.validate()?;
    if f0.m() != cfg.m {
        return Err(FilterError::LengthMismatch { expected: cfg.m, actual: f0.m() });
    }
    if f0.scaled() {
        return Err(FilterError::AlreadyScaled);
    }
    if v0.s() != cfg.s {
        return Err(FilterError::UnsupportedIntervals(v0.s()));
    }
    let gs = cfg.shifted_gap();
    let s = cfg.s;
    let mut v = v0.with_gap(gs)?;
    let start = f0.clone().with_gap(gs);
    let mut cache = HCache::new(start, cfg);
    let first = cache.eval(&v);
    let mut w = first.wcr;
    let mut current = match first.filter {
        Some(f) => f,
        None => return Err(FilterError::DegenerateFilter(w)),
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut outer = 0;

    // The first iteration's warm start is the initial filter itself, so h_0
    // above is consistent with the cache used by coordinate descent.
    while outer < cfg.max_outer_iters {
        outer += 1;
        let (v_cd, w_cd) = coordinate_descent_pass(&v, w, &mut cache, cfg, mix_seed(cfg.seed, outer as u64, 1));

        let (v_new, eval_new) = if s >= 3 {
            let fixed = [v_cd.values()[0], v_cd.values()[1]];
            let x0 = v_cd.values()[2..].to_vec();
            let nm = nelder_mead(
                |b| {
                    let mut raw = fixed.to_vec();
                    raw.extend_from_slice(b);
                    match repair_into_vs(&raw, s, gs) {
                        Ok(vv) => cache.eval(&vv).wcr,
                        Err(_) => f64::INFINITY,
                    }
                },
                &x0,
                NelderMeadOptions { ftol: cfg.nm_ftol, max_evals: cfg.nm_max_evals },
            );
            let mut raw = fixed.to_vec();
            raw.extend_from_slice(&nm.x);
            match repair_into_vs(&raw, s, gs) {
                Ok(vv) if nm.f <= w_cd => {
                    let e = cache.eval(&vv);
                    (vv, e)
                }
                _ => (v_cd.clone(), cache.eval(&v_cd)),
            }
        } else {
            (v_cd.clone(), cache.eval(&v_cd))
        };

        // When nothing improved, `v_new` equals `v` and its `h` comes from a
        // fresh solve warm-started at the current filter. That solve may keep
        // descending, which is accepted as progress. A worse or non-finite
        // result leaves the current state in place with zero residual, which
        // keeps the accepted sequence non-increasing.
        let (v_new, eval_new) = match eval_new.filter {
            Some(_) if eval_new.wcr <= w => (v_new, eval_new),
            _ => (v.clone(), HEval { wcr: w, filter: Some(current.clone()), ..eval_new }),
        };
        let f_new = eval_new.filter.clone().expect("accepted state has a filter");
        let w_new = eval_new.wcr;
        let residual = (w - w_new).abs() / w;
        let entry = TraceEntry {
            outer_iter: outer,
            h: w_new,
            residual,
            f_omega: objective(&f_new, &v_new),
            inner_iters: eval_new.inner_iters,
        };
        observe(&entry);
        trace.push(entry);
        w = w_new;
        v = v_new;
        current = f_new;
        cache.reset(current.clone());
        if residual <= cfg.res_tol {
            converged = true;
            break;
        }
    }

    let unscaled = current.clone().with_gap(gs);
    let filter = scale_filter(&current, cfg.gap)?.with_gap(cfg.gap);
    let wcr = compute_wcr(&filter, cfg.gap, InnerInterval::FullInterval)?.wcr;
    Ok(DesignResult {
        filter,
        weight: v,
        wcr,
        unscaled_wcr: w,
        unscaled,
        trace,
        converged,
        h_evals: cache.evals,
    })
}
