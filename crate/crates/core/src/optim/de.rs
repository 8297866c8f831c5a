//! Self-adaptive differential evolution (jDE, rand/1/bin) on a scalar
//! variable, used for the coordinate-descent line searches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct DeOptions {
    pub population: usize,
    pub max_evals: usize,
    pub seed: u64,
    pub f_range: (f64, f64),
    pub cr_range: (f64, f64),
    /// Probability of resampling an individual's F and CR.
    pub tau: f64,
}

impl Default for DeOptions {
    fn default() -> Self {
        Self {
            population: 15,
            max_evals: 300,
            seed: 0,
            f_range: (0.4, 1.0),
            cr_range: (0.1, 1.0),
            tau: 0.1,
        }
    }
}

fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    // Reflect until inside; more than a couple of bounces only happens for
    // huge F and falls back to a clamp.
    for _ in 0..4 {
        if v < lo {
            v = lo + (lo - v);
        } else if v > hi {
            v = hi - (v - hi);
        } else {
            return v;
        }
    }
    if !(width > 0.0) {
        lo
    } else {
        v.clamp(lo, hi)
    }
}

/// Minimizes `f` over `[lo, hi]`; returns `(x*, f(x*))`.
pub fn de_minimize_1d<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, opts: DeOptions) -> (f64, f64) {
    assert!(lo < hi, "empty interval [{lo}, {hi}]");
    let np = opts.population.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut evals = 0;
    let mut score = |x: f64, evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pop: Vec<f64> = (0..np).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut fit: Vec<f64> = Vec::with_capacity(np);
    for &x in &pop {
        fit.push(score(x, &mut evals));
        if evals >= opts.max_evals {
            break;
        }
    }
    let mut fs = vec![0.5 * (opts.f_range.0 + opts.f_range.1); np];
    let mut crs = vec![0.9_f64.clamp(opts.cr_range.0, opts.cr_range.1); np];

    'outer: while evals < opts.max_evals && fit.len() == np {
        for i in 0..np {
            if evals >= opts.max_evals {
                break 'outer;
            }
            let fi = if rng.gen::<f64>() < opts.tau {
                rng.gen_range(opts.f_range.0..=opts.f_range.1)
            } else {
                fs[i]
            };
            let cri = if rng.gen::<f64>() < opts.tau {
                rng.gen_range(opts.cr_range.0..=opts.cr_range.1)
            } else {
                crs[i]
            };
            let mut pick = || loop {
                let r = rng.gen_range(0..np);
                if r != i {
                    break r;
                }
            };
            let (r1, mut r2, mut r3) = (pick(), pick(), pick());
            while r2 == r1 {
                r2 = pick();
            }
            while r3 == r1 || r3 == r2 {
                r3 = pick();
            }
            let mutant = pop[r1] + fi * (pop[r2] - pop[r3]);
            // Binomial crossover in one dimension: the forced index always
            // takes the mutant component, so CR only matters as inherited state.
            let trial = reflect(mutant, lo, hi);
            let ft = score(trial, &mut evals);
            if ft <= fit[i] {
                pop[i] = trial;
                fit[i] = ft;
                fs[i] = fi;
                crs[i] = cri;
            }
        }
    }

    let (best, _) = fit
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bf), (i, &v)| if v < bf { (i, v) } else { (bi, bf) });
    (pop[best], fit.get(best).copied().unwrap_or(f64::INFINITY))
}
