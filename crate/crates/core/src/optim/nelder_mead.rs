//! Nelder-Mead simplex minimization (reflection 1, expansion 2,
//! contractions 1/2, shrink 1/2).

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once `f_worst - f_best <= ftol * |f_best|`.
    pub ftol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { ftol: 1e-10, max_evals: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best vertex value at the start of every iteration and at exit.
    pub best_history: Vec<f64>,
}

pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: NelderMeadOptions,
) -> NelderMeadReport {
    let n = x0.len();
    assert!(n >= 1, "Nelder-Mead needs at least one dimension");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += (0.05 * x0[i].abs()).max(1e-4);
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };

    let converged = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        history.push(best);
        if worst - best <= opts.ftol * best.abs() || worst == best {
            break true;
        }
        if evals >= opts.max_evals {
            break false;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi / n as f64;
            }
        }
        let xw = simplex[n].0.clone();
        // x_r = c + (c - x_w)
        let xr = combine(&centroid, &xw, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = combine(&centroid, &xw, -2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = combine(&centroid, &xw, -0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = combine(&centroid, &xw, 0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = combine(&x_best, &vertex.0, 0.5);
            let fv = eval(&v, &mut evals);
            *vertex = (v, fv);
        }
    };

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    NelderMeadReport { x, f: fx, evals, iterations, converged, best_history: history }
}
