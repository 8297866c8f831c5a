use nalgebra::{DMatrix, DVector};

use super::line_search::{strong_wolfe, WolfeParams};
use super::{norm_inf, Counted, Objective, OptimReport, Termination};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Stop when `||g||_inf <= tol * max(1, |f|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Stop after `plateau_window` consecutive steps whose relative decrease
    /// is below `ftol`; 0 disables.
    pub ftol: f64,
    pub plateau_window: usize,
    pub wolfe: WolfeParams,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500, ftol: 0.0, plateau_window: 5, wolfe: WolfeParams::default() }
    }
}

/// Dense BFGS with `H_0 = I` and a strong Wolfe line search.
pub fn bfgs_minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: BfgsOptions) -> OptimReport {
    let n = x0.len();
    let counted = Counted::new(obj);
    let mut x = x0.to_vec();
    let (mut f, mut g) = counted.value_and_gradient(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut history = vec![f];
    let mut resets = 0;
    let mut iterations = 0;
    let mut small_steps = 0;

    let done = |f: f64, g: &[f64]| norm_inf(g) <= opts.tol * f.abs().max(1.0);

    let termination = loop {
        if !f.is_finite() {
            break Termination::LineSearchFailure;
        }
        if done(f, &g) {
            break Termination::Converged;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        let gv = DVector::from_column_slice(&g);
        let mut d: Vec<f64> = (-(&h * &gv)).iter().copied().collect();
        if super::dot(&d, &g) >= 0.0 {
            h = DMatrix::identity(n, n);
            resets += 1;
            d = g.iter().map(|v| -v).collect();
        }
        let step = match strong_wolfe(&counted, &x, f, &g, &d, 1.0, opts.wolfe) {
            Ok(p) => p,
            Err(Some(p)) if p.f < f => {
                // Accept the decrease but stop: no curvature guarantee.
                x = p.x;
                f = p.f;
                g = p.g;
                history.push(f);
                iterations += 1;
                break Termination::LineSearchFailure;
            }
            Err(_) => break Termination::LineSearchFailure,
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let ys = super::dot(&y, &s);
        let rel_decrease = (f - step.f) / f.abs().max(f64::MIN_POSITIVE);
        x = step.x;
        f = step.f;
        g = step.g;
        history.push(f);
        iterations += 1;
        if ys > 0.0 {
            let candidate = bfgs_update(&h, &s, &y, ys);
            if candidate.clone().cholesky().is_some() {
                h = candidate;
            } else {
                h = DMatrix::identity(n, n);
                resets += 1;
            }
        }
        if opts.ftol > 0.0 {
            small_steps = if rel_decrease < opts.ftol { small_steps + 1 } else { 0 };
            if small_steps >= opts.plateau_window && !done(f, &g) {
                break Termination::Plateau;
            }
        }
    };

    OptimReport {
        g_norm: norm_inf(&g),
        x,
        f,
        iterations,
        f_evals: counted.f_evals.get(),
        g_evals: counted.g_evals.get(),
        termination,
        f_history: history,
        hessian_resets: resets,
    }
}

/// `H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T`, `rho = 1 / y^T s`.
pub fn bfgs_update(h: &DMatrix<f64>, s: &[f64], y: &[f64], ys: f64) -> DMatrix<f64> {
    let s = DVector::from_column_slice(s);
    let y = DVector::from_column_slice(y);
    let rho = 1.0 / ys;
    let hy = h * &y;
    let yhy = y.dot(&hy);
    let mut out = h - (&s * hy.transpose() + &hy * s.transpose()) * rho;
    out += &s * s.transpose() * (rho * rho * yhy + rho);
    // Symmetrize against round-off drift.
    let t = out.transpose();
    (out + t) * 0.5
}
