//! General-purpose minimizers used by the filter designer.

pub mod bfgs;
pub mod de;
pub mod lbfgsb;
pub mod line_search;
pub mod nelder_mead;

pub use bfgs::{bfgs_minimize, bfgs_update, BfgsOptions};
pub use de::{de_minimize_1d, DeOptions};
pub use lbfgsb::{lbfgsb_minimize, lbfgsb_minimize_observed, project_box, BoxSpec, LbfgsbOptions};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadReport};

/// A smooth objective on `R^n`.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }
}

/// Objective built from a value closure and a gradient closure.
pub struct FnObjective<F, G> {
    pub f: F,
    pub g: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.g)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient tolerance met.
    Converged,
    /// Relative decrease stayed below the function tolerance.
    Plateau,
    MaxIterations,
    LineSearchFailure,
}

#[derive(Debug, Clone)]
pub struct OptimReport {
    pub x: Vec<f64>,
    pub f: f64,
    /// Infinity norm of the (projected) gradient at `x`.
    pub g_norm: f64,
    pub iterations: usize,
    pub f_evals: usize,
    pub g_evals: usize,
    pub termination: Termination,
    /// Objective value after each accepted step, starting with `f(x0)`.
    pub f_history: Vec<f64>,
    /// Number of times the inverse-Hessian failed its Cholesky check.
    pub hessian_resets: usize,
}

impl OptimReport {
    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Converged | Termination::Plateau)
    }
}

/// Counts evaluations of a wrapped objective.
pub(crate) struct Counted<'a, O: Objective + ?Sized> {
    inner: &'a O,
    pub f_evals: std::cell::Cell<usize>,
    pub g_evals: std::cell::Cell<usize>,
}

impl<'a, O: Objective + ?Sized> Counted<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self { inner, f_evals: Default::default(), g_evals: Default::default() }
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.f_evals.set(self.f_evals.get() + 1);
        self.g_evals.set(self.g_evals.get() + 1);
        self.inner.value_and_gradient(x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
