//! Limited-memory BFGS with gradient projection for the pole constraints
//! `|Im z_i| >= lb`.
//!
//! The feasible set is `{x : |x_j| >= lb for j in constrained}`. A component
//! sitting on its bound with the gradient pushing it toward the real axis is
//! treated as an equality constraint: its gradient and search-direction
//! components are zeroed while it stays active, and the step on the remaining
//! components is the quasi-Newton step restricted to that face. Steps are
//! chosen by a strong Wolfe search capped at the first breakpoint where a free
//! component reaches the bound, and every accepted point is passed through
//! [`project_box`].

use std::collections::VecDeque;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::line_search::{strong_wolfe_capped, WolfeParams};
use super::{dot, norm2, norm_inf, Counted, Objective, OptimReport, Termination};

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub lb: f64,
    pub constrained: Range<usize>,
}

impl BoxSpec {
    /// Bounds on the pole imaginary parts of a `4m` parameter vector.
    pub fn for_poles(m: usize, lb: f64) -> Self {
        assert!(lb > 0.0, "lower bound must be positive");
        Self { lb, constrained: 3 * m..4 * m }
    }

    pub fn is_feasible(&self, y: &[f64]) -> bool {
        self.constrained.clone().all(|j| y[j].abs() >= self.lb)
    }
}

/// Clamps constrained components with `|y_j| < lb` to `sign(y_j) lb`, where
/// `sign(0) = +1`.
pub fn project_box(y: &[f64], b: &BoxSpec) -> Vec<f64> {
    let mut out = y.to_vec();
    for j in b.constrained.clone() {
        if out[j].abs() < b.lb {
            out[j] = if out[j] < 0.0 { -b.lb } else { b.lb };
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct LbfgsbOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    /// Relative decrease below which a step counts toward the plateau.
    pub ftol: f64,
    pub plateau_window: usize,
    pub wolfe: WolfeParams,
}

impl Default for LbfgsbOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 2000,
            memory: 10,
            ftol: 1e-12,
            plateau_window: 5,
            wolfe: WolfeParams::default(),
        }
    }
}

fn active_set(x: &[f64], g: &[f64], b: &BoxSpec) -> Vec<bool> {
    let mut act = vec![false; x.len()];
    for j in b.constrained.clone() {
        let on_bound = x[j].abs() <= b.lb * (1.0 + 1e-14);
        let sign = if x[j] < 0.0 { -1.0 } else { 1.0 };
        // Steepest descent would move toward the real axis.
        if on_bound && g[j] * sign > 0.0 {
            act[j] = true;
        }
    }
    act
}

/// Quasi-Newton step restricted to the face of the blocked components.
///
/// Zeroing entries of `-H g` is not the minimizer of the quadratic model on
/// that face. Fixing the blocked set `A`, the model on the free set `F` has
/// inverse Hessian `H_FF - H_FA H_AA^-1 H_AF` (a Schur complement of the full
/// inverse approximation `H`), so the two-loop recursion is used to form `H`
/// explicitly. That is affordable at the sizes used here (`4m <= 28`).
fn reduced_direction(
    g: &[f64],
    x: &[f64],
    act: &[bool],
    b: &BoxSpec,
    pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>,
) -> Vec<f64> {
    let n = g.len();
    let mut blocked = act.to_vec();
    let mut d = two_loop(g, pairs);
    // Components on the bound that the free step would push inward join the
    // blocked set; one refinement pass is enough for a descent direction.
    for _ in 0..2 {
        for j in b.constrained.clone() {
            let on_bound = x[j].abs() <= b.lb * (1.0 + 1e-14);
            if on_bound && x[j].signum() * d[j] < 0.0 {
                blocked[j] = true;
            }
        }
        if !blocked.iter().any(|&a| a) {
            return d;
        }
        let free: Vec<usize> = (0..n).filter(|&j| !blocked[j]).collect();
        let fixed: Vec<usize> = (0..n).filter(|&j| blocked[j]).collect();
        let mut h = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = two_loop(&e, pairs);
            for i in 0..n {
                h[(i, j)] = -col[i];
            }
        }
        let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i], cols[j])]);
        let mut reduced = sub(&free, &free);
        if let Some(chol) = sub(&fixed, &fixed).cholesky() {
            reduced -= sub(&free, &fixed) * chol.solve(&sub(&fixed, &free));
        }
        let gf = DVector::from_iterator(free.len(), free.iter().map(|&j| g[j]));
        let df = -(reduced * gf);
        d = vec![0.0; n];
        for (k, &j) in free.iter().enumerate() {
            d[j] = df[k];
        }
    }
    block(&mut d, x, &blocked, b);
    d
}

/// Zeroes the direction on active components and on constrained components
/// that sit on the bound and would move toward the real axis.
fn block(d: &mut [f64], x: &[f64], act: &[bool], b: &BoxSpec) {
    for (j, dj) in d.iter_mut().enumerate() {
        let on_bound = b.constrained.contains(&j) && x[j].abs() <= b.lb * (1.0 + 1e-14);
        if act[j] || (on_bound && x[j].signum() * *dj < 0.0) {
            *dj = 0.0;
        }
    }
}

/// Largest step along `d` keeping every constrained component at or beyond
/// the bound.
fn breakpoint(x: &[f64], d: &[f64], b: &BoxSpec) -> f64 {
    b.constrained
        .clone()
        .filter(|&j| x[j] * d[j] < 0.0)
        .map(|j| (x[j].abs() - b.lb).max(0.0) / d[j].abs())
        .fold(f64::INFINITY, f64::min)
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let bcoef = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - bcoef) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Projected L-BFGS minimization. Every accepted iterate is feasible; an
/// infeasible `x0` is projected first.
pub fn lbfgsb_minimize<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    bounds: &BoxSpec,
    opts: LbfgsbOptions,
) -> OptimReport {
    lbfgsb_minimize_observed(obj, x0, bounds, opts, |_| {})
}

/// As [`lbfgsb_minimize`], calling `observe` on every accepted iterate
/// (including the projected start).
pub fn lbfgsb_minimize_observed<O: Objective + ?Sized, F: FnMut(&[f64])>(
    obj: &O,
    x0: &[f64],
    bounds: &BoxSpec,
    opts: LbfgsbOptions,
    mut observe: F,
) -> OptimReport {
    let counted = Counted::new(obj);
    let mut x = project_box(x0, bounds);
    observe(&x);
    let (mut f, mut g) = counted.value_and_gradient(&x);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut history = vec![f];
    let mut iterations = 0;
    let mut small_steps = 0;

    let projected_grad = |x: &[f64], g: &[f64]| -> Vec<f64> {
        let act = active_set(x, g, bounds);
        g.iter().zip(&act).map(|(gi, a)| if *a { 0.0 } else { *gi }).collect()
    };

    let termination = loop {
        let pg = projected_grad(&x, &g);
        if !f.is_finite() {
            break Termination::LineSearchFailure;
        }
        if norm_inf(&pg) <= opts.tol * f.abs().max(1.0) {
            break Termination::Converged;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        let act = active_set(&x, &g, bounds);
        let mut d = reduced_direction(&g, &x, &act, bounds, &pairs);
        if !(dot(&d, &pg) < 0.0) {
            pairs.clear();
            d = pg.iter().map(|v| -v).collect();
            block(&mut d, &x, &act, bounds);
        }
        let alpha0 = if pairs.is_empty() { 1.0 / norm2(&d).max(1.0) } else { 1.0 };
        let alpha_max = breakpoint(&x, &d, bounds);
        let step = match strong_wolfe_capped(&counted, &x, f, &g, &d, alpha0, alpha_max, opts.wolfe) {
            Ok(pt) => Some(pt),
            Err(best) => best,
        };
        let Some(pt) = step.filter(|pt| pt.f.is_finite() && pt.f <= f) else {
            break Termination::LineSearchFailure;
        };
        // A step to the breakpoint lands on the bound only up to rounding, so
        // components that reached it are placed on it exactly.
        let mut xn = project_box(&pt.x, bounds);
        if pt.alpha >= alpha_max {
            for j in bounds.constrained.clone() {
                if x[j] * d[j] < 0.0 && (xn[j].abs() - bounds.lb).abs() <= 1e-12 * bounds.lb {
                    xn[j] = bounds.lb.copysign(xn[j]);
                }
            }
        }
        let (fnew, gn) = if xn == pt.x { (pt.f, pt.g) } else { counted.value_and_gradient(&xn) };
        if !(fnew <= f) {
            break Termination::LineSearchFailure;
        }
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm2(&s) * norm2(&y) {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let rel_decrease = (f - fnew) / f.abs().max(f64::MIN_POSITIVE);
        x = xn;
        f = fnew;
        g = gn;
        observe(&x);
        history.push(f);
        iterations += 1;
        small_steps = if rel_decrease < opts.ftol { small_steps + 1 } else { 0 };
        if opts.ftol > 0.0 && small_steps >= opts.plateau_window {
            break Termination::Plateau;
        }
    };

    OptimReport {
        g_norm: norm_inf(&projected_grad(&x, &g)),
        x,
        f,
        iterations,
        f_evals: counted.f_evals.get(),
        g_evals: counted.g_evals.get(),
        termination,
        f_history: history,
        hessian_resets: 0,
    }
}
