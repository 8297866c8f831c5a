//! Small-scale eigensolver used to validate filters: subspace iteration with a
//! rational spectral projector, Rayleigh-Ritz extraction and convergence-rate
//! measurement on dense or diagonal Hermitian problems.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{FilterError, Result};
use crate::filter::RationalFilter;

/// Largest dimension accepted by [`EigenProblem`].
pub const MAX_DIM: usize = 2000;
/// Relative Hermitian tolerance for dense matrices.
pub const HERMITIAN_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemMatrix {
    Diagonal(Vec<f64>),
    Dense(DMatrix<Complex64>),
}

/// `A v = lambda v` restricted to the search interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenProblem {
    matrix: ProblemMatrix,
    interval: (f64, f64),
    true_eigs: Option<Vec<f64>>,
}

impl EigenProblem {
    /// A diagonal problem; its eigenvalues are known exactly.
    pub fn diagonal(diag: Vec<f64>, interval: (f64, f64)) -> Result<Self> {
        check_interval(interval)?;
        if diag.is_empty() || diag.len() > MAX_DIM {
            return Err(FilterError::InvalidProblem(format!("dimension {} out of range", diag.len())));
        }
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(FilterError::InvalidProblem("non-finite diagonal entry".into()));
        }
        let mut eigs = diag.clone();
        eigs.sort_by(f64::total_cmp);
        Ok(Self { matrix: ProblemMatrix::Diagonal(diag), interval, true_eigs: Some(eigs) })
    }

    /// A dense Hermitian problem. `true_eigs`, when given, is sorted here.
    pub fn dense(a: DMatrix<Complex64>, interval: (f64, f64), true_eigs: Option<Vec<f64>>) -> Result<Self> {
        check_interval(interval)?;
        let n = a.nrows();
        if n == 0 || n != a.ncols() || n > MAX_DIM {
            return Err(FilterError::InvalidProblem(format!("matrix shape {}x{}", a.nrows(), a.ncols())));
        }
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let asym = (&a - a.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(asym <= HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE)) {
            return Err(FilterError::InvalidProblem(format!("matrix is not Hermitian (defect {asym:e})")));
        }
        let true_eigs = match true_eigs {
            Some(mut e) => {
                if e.len() != n {
                    return Err(FilterError::LengthMismatch { expected: n, actual: e.len() });
                }
                e.sort_by(f64::total_cmp);
                Some(e)
            }
            None => None,
        };
        Ok(Self { matrix: ProblemMatrix::Dense(a), interval, true_eigs })
    }

    pub fn n(&self) -> usize {
        match &self.matrix {
            ProblemMatrix::Diagonal(d) => d.len(),
            ProblemMatrix::Dense(a) => a.nrows(),
        }
    }

    pub fn matrix(&self) -> &ProblemMatrix {
        &self.matrix
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn true_eigs(&self) -> Option<&[f64]> {
        self.true_eigs.as_deref()
    }

    /// Sorted eigenvalues: the stored ones, or a dense eigensolve.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if let Some(e) = &self.true_eigs {
            return e.clone();
        }
        match &self.matrix {
            ProblemMatrix::Diagonal(d) => {
                let mut e = d.clone();
                e.sort_by(f64::total_cmp);
                e
            }
            ProblemMatrix::Dense(a) => {
                let mut e: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
                e.sort_by(f64::total_cmp);
                e
            }
        }
    }

    /// Centre and half-width of the affine map taking `[a, b]` to `[-1, 1]`.
    pub fn mapping(&self) -> (f64, f64) {
        let (a, b) = self.interval;
        (0.5 * (a + b), 0.5 * (b - a))
    }

    pub fn map_eigenvalue(&self, lambda: f64) -> f64 {
        let (c, h) = self.mapping();
        (lambda - c) / h
    }

    pub fn in_interval(&self, lambda: f64) -> bool {
        lambda >= self.interval.0 && lambda <= self.interval.1
    }

    /// Number of eigenvalues inside `[a, b]`.
    pub fn eigencount(&self) -> usize {
        self.eigenvalues().into_iter().filter(|&l| self.in_interval(l)).count()
    }

    /// `max |lambda|` when the spectrum is stored, otherwise the 1-norm.
    pub fn norm_estimate(&self) -> f64 {
        if let Some(e) = &self.true_eigs {
            return e.iter().map(|x| x.abs()).fold(0.0, f64::max);
        }
        match &self.matrix {
            ProblemMatrix::Diagonal(d) => d.iter().map(|x| x.abs()).fold(0.0, f64::max),
            ProblemMatrix::Dense(a) => {
                (0..a.ncols()).map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
            }
        }
    }
}

fn check_interval((a, b): (f64, f64)) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(FilterError::InvalidProblem(format!("interval [{a}, {b}] is empty or not finite")))
    }
}

/// A filter bound to a problem: entrywise values for diagonal matrices, an
/// explicit `r(A_hat)` for dense ones (factor once, reuse every iteration).
#[derive(Debug, Clone)]
pub enum FilterOperator {
    Diagonal { r: Vec<f64>, diag: Vec<f64> },
    Dense { r: DMatrix<Complex64>, a: DMatrix<Complex64> },
}

impl FilterOperator {
    pub fn new(f: &RationalFilter, problem: &EigenProblem) -> Result<Self> {
        match problem.matrix() {
            ProblemMatrix::Diagonal(d) => Ok(Self::Diagonal {
                r: d.iter().map(|&l| f.eval(problem.map_eigenvalue(l))).collect(),
                diag: d.clone(),
            }),
            ProblemMatrix::Dense(a) => Ok(Self::Dense { r: dense_filter_matrix(f, problem)?, a: a.clone() }),
        }
    }

    fn apply_complex(&self, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        match self {
            Self::Diagonal { r, .. } => {
                let mut out = y.clone();
                for (k, rk) in r.iter().enumerate() {
                    out.row_mut(k).scale_mut(*rk);
                }
                out
            }
            Self::Dense { r, .. } => r * y,
        }
    }
}

/// `r(A_hat) = T + T^H` with `T = sum_i beta_i [(A_hat - z_i)^-1 - (A_hat + z_i)^-1]`.
///
/// For Hermitian `A_hat` the conjugate poles contribute exactly `T^H`, so only
/// the `2m` shifts `+-z_i` are factored.
fn dense_filter_matrix(f: &RationalFilter, problem: &EigenProblem) -> Result<DMatrix<Complex64>> {
    let ProblemMatrix::Dense(a) = problem.matrix() else {
        unreachable!("dense filter matrix requested for a diagonal problem");
    };
    let n = a.nrows();
    let (c, h) = problem.mapping();
    let mut ahat = a.map(|v| v / h);
    for i in 0..n {
        ahat[(i, i)] -= Complex64::new(c / h, 0.0);
    }
    let shifts: Vec<(Complex64, Complex64)> =
        f.beta().iter().zip(f.z()).flat_map(|(b, z)| [(*b, *z), (-*b, -*z)]).collect();
    let terms: Vec<Result<DMatrix<Complex64>>> = shifts
        .par_iter()
        .map(|&(beta, z)| {
            let mut shifted = ahat.clone();
            for i in 0..n {
                shifted[(i, i)] -= z;
            }
            let inv = shifted
                .lu()
                .try_inverse()
                .ok_or_else(|| FilterError::SingularShift(format!("A_hat - ({z}) I is singular")))?;
            Ok(inv * beta)
        })
        .collect();
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    for term in terms {
        t += term?;
    }
    Ok(&t + t.adjoint())
}

/// Returns `r(A_hat) Y`.
pub fn apply_filter(f: &RationalFilter, problem: &EigenProblem, y: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if y.nrows() != problem.n() {
        return Err(FilterError::LengthMismatch { expected: problem.n(), actual: y.nrows() });
    }
    Ok(FilterOperator::new(f, problem)?.apply_complex(y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Per iteration, the `M`-th smallest residual `||A x - theta x||` over
    /// Ritz values inside `[a, b]`, where `M` is the eigencount. With fewer
    /// than `M` such Ritz values it is the largest of them, or the largest
    /// residual overall when there is none.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub converged_count: usize,
    pub observed_rate: f64,
    /// `NaN` when the spectrum is unknown.
    pub predicted_rate: f64,
    pub m0: usize,
    pub eigencount: usize,
    /// Approximate floating-point operation count; see [`flop_estimate`].
    pub flops: f64,
    /// At exit, the (at most `M`) Ritz values inside `[a, b]` with the
    /// smallest residuals, ascending.
    pub ritz_values: Vec<f64>,
}

/// Scalar types the subspace loop runs in.
trait Field: ComplexField<RealField = f64> + Copy + faer::traits::ComplexField<Real = f64> {
    fn sample(rng: &mut ChaCha8Rng) -> Self;
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
/// matrix, read from its lower triangle.
///
/// The projected matrix becomes nearly diagonal once the subspace has
/// converged. nalgebra's `SymmetricEigen` can lose about six digits on such
/// input (an eigen-residual near 1e-9 where 1e-15 is expected), which shows
/// up as residual floors in the iteration, so the Rayleigh-Ritz step uses
/// faer instead, keeping nalgebra only as a fallback if faer fails.
fn hermitian_eigen<T: Field>(h: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let n = h.nrows();
    let m = faer::Mat::<T>::from_fn(n, n, |i, j| h[(i, j)]);
    let Ok(eig) = m.self_adjoint_eigen(faer::Side::Lower) else {
        let e = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
        return (values, DMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]));
    };
    let s = eig.S().column_vector();
    let values = (0..n).map(|i| ComplexField::real(s[i])).collect();
    let u = eig.U();
    (values, DMatrix::from_fn(n, n, |i, j| u[(i, j)]))
}

impl Field for f64 {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Field for Complex64 {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
}

trait Operator<T: Field> {
    fn filter(&self, y: &DMatrix<T>) -> DMatrix<T>;
    fn apply_a(&self, q: &DMatrix<T>) -> DMatrix<T>;
}

struct DiagOp<'a> {
    r: &'a [f64],
    diag: &'a [f64],
}

impl Operator<f64> for DiagOp<'_> {
    fn filter(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = y.clone();
        for (k, rk) in self.r.iter().enumerate() {
            out.row_mut(k).scale_mut(*rk);
        }
        out
    }

    fn apply_a(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = q.clone();
        for (k, l) in self.diag.iter().enumerate() {
            out.row_mut(k).scale_mut(*l);
        }
        out
    }
}

struct DenseOp<'a> {
    r: &'a DMatrix<Complex64>,
    a: &'a DMatrix<Complex64>,
}

impl Operator<Complex64> for DenseOp<'_> {
    fn filter(&self, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.r * y
    }

    fn apply_a(&self, q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.a * q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Subspace multiplier `C >= 1`.
    pub c: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { c: 1.1, tol: 1e-12, max_iters: 100, seed: 0 }
    }
}

/// Subspace size `ceil(C M)`, computed so that exact products like
/// `1.1 * 100` are not rounded up by representation error.
pub fn subspace_size(c: f64, m: usize) -> usize {
    let raw = c * m as f64;
    let r = raw.round();
    if (raw - r).abs() <= 1e-9 * raw.max(1.0) {
        r as usize
    } else {
        raw.ceil() as usize
    }
}

/// Subspace iteration with Rayleigh-Ritz extraction. A report is returned
/// even when the iteration cap is reached.
pub fn subspace_iteration(f: &RationalFilter, problem: &EigenProblem, opts: SolveOptions) -> Result<SolveReport> {
    if !(opts.c >= 1.0) || !opts.c.is_finite() {
        return Err(FilterError::InvalidProblem(format!("subspace multiplier {} must be at least 1", opts.c)));
    }
    if !(opts.tol > 0.0) {
        return Err(FilterError::InvalidProblem(format!("tolerance {} must be positive", opts.tol)));
    }
    let eigencount = problem.eigencount();
    if eigencount == 0 {
        return Err(FilterError::InvalidProblem("search interval contains no eigenvalues".into()));
    }
    let m0 = subspace_size(opts.c, eigencount);
    if m0 > problem.n() {
        return Err(FilterError::InvalidProblem(format!("subspace size {m0} exceeds dimension {}", problem.n())));
    }
    let op = FilterOperator::new(f, problem)?;
    let norm = problem.norm_estimate();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = match &op {
        FilterOperator::Diagonal { r, diag } => {
            run_subspace(&DiagOp { r, diag }, problem, eigencount, m0, norm, opts, &mut rng)
        }
        FilterOperator::Dense { r, a } => run_subspace(&DenseOp { r, a }, problem, eigencount, m0, norm, opts, &mut rng),
    };
    report.eigencount = eigencount;
    report.predicted_rate = if problem.true_eigs().is_some() { predicted_rate(f, problem, m0)? } else { f64::NAN };
    report.flops = flop_estimate(problem.n(), f.m(), m0, report.iterations);
    Ok(report)
}

fn run_subspace<T: Field, O: Operator<T>>(
    op: &O,
    problem: &EigenProblem,
    eigencount: usize,
    m0: usize,
    norm: f64,
    opts: SolveOptions,
    rng: &mut ChaCha8Rng,
) -> SolveReport {
    let n = problem.n();
    let mut y = DMatrix::<T>::from_fn(n, m0, |_, _| T::sample(rng));
    let mut history = Vec::new();
    let mut converged = false;
    let mut converged_count = 0;
    let mut ritz_inside = Vec::new();
    let threshold = opts.tol * norm;

    for _ in 0..opts.max_iters {
        let filtered = op.filter(&y);
        let q = filtered.qr().q();
        let aq = op.apply_a(&q);
        let mut h = q.adjoint() * &aq;
        let ht = h.adjoint();
        h = (h + ht).scale(0.5);
        let (theta_all, vecs) = hermitian_eigen(&h);
        let x = &q * &vecs;
        let ax = &aq * &vecs;

        // Extra subspace columns can mix eigenvectors from both sides of the
        // interval, giving spurious Ritz values inside it whose residuals do
        // not decay. A pair with residual below the threshold is close to a
        // true eigenpair, so convergence asks for `M` such pairs inside.
        let mut worst_any: f64 = 0.0;
        let mut inside: Vec<(f64, f64)> = Vec::new();
        for j in 0..m0 {
            let theta = theta_all[j];
            let res = (ax.column(j) - x.column(j) * T::from_real(theta)).norm();
            worst_any = worst_any.max(res);
            if problem.in_interval(theta) {
                inside.push((res, theta));
            }
        }
        inside.sort_by(|p, q| p.0.total_cmp(&q.0));
        let worst = match inside.len() {
            0 => worst_any,
            k if k < eigencount => inside[k - 1].0,
            _ => inside[eigencount - 1].0,
        };
        history.push(worst.max(f64::MIN_POSITIVE));
        converged_count = inside.iter().filter(|p| p.0 <= threshold).count().min(eigencount);
        let mut sought: Vec<f64> = inside.iter().take(eigencount).map(|p| p.1).collect();
        sought.sort_by(f64::total_cmp);
        ritz_inside = sought;
        y = x;
        if converged_count == eigencount {
            converged = true;
            break;
        }
    }

    SolveReport {
        iterations: history.len(),
        observed_rate: observed_rate(&history),
        residual_history: history,
        converged,
        converged_count,
        predicted_rate: f64::NAN,
        m0,
        eigencount: 0,
        flops: 0.0,
        ritz_values: ritz_inside,
    }
}

/// Geometric mean of the ratios `res_k / res_{k-1}` between consecutive
/// residuals of iterations `2 ..= K-1`, so the first (pre-asymptotic) step
/// `res_2 / res_1` and the last step, which is often limited by round-off,
/// are both left out. With three iterations only `res_3 / res_2` remains, with
/// two only `res_2 / res_1`, and fewer than two give `NaN`.
pub fn observed_rate(history: &[f64]) -> f64 {
    let k = history.len();
    if k < 2 {
        return f64::NAN;
    }
    let ratios: Vec<f64> = history.windows(2).map(|w| w[1] / w[0]).collect();
    // ratios[j] = res_{j+2} / res_{j+1} in 1-based iteration numbers.
    let linear = match k {
        2 => &ratios[..],
        3 => &ratios[1..],
        _ => &ratios[1..ratios.len() - 1],
    };
    let log_mean = linear.iter().map(|r| r.ln()).sum::<f64>() / linear.len() as f64;
    log_mean.exp()
}

/// `|r(lambda_out)| / |r(lambda_in)|`: `lambda_in` is the in-interval
/// eigenvalue with the smallest `|r|`, `lambda_out` the eigenvalue with the
/// largest `|r|` outside the `m0` eigenvalues of largest `|r|`.
pub fn predicted_rate(f: &RationalFilter, problem: &EigenProblem, m0: usize) -> Result<f64> {
    let eigs = problem
        .true_eigs()
        .ok_or_else(|| FilterError::InvalidProblem("predicted rate needs the true spectrum".into()))?;
    if m0 >= eigs.len() {
        return Ok(0.0);
    }
    let mut mags: Vec<f64> = eigs.iter().map(|&l| f.eval(problem.map_eigenvalue(l)).abs()).collect();
    let inner = eigs
        .iter()
        .zip(&mags)
        .filter(|(l, _)| problem.in_interval(**l))
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    if !inner.is_finite() {
        return Err(FilterError::InvalidProblem("search interval contains no eigenvalues".into()));
    }
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags[m0] / inner)
}

/// Per-pole ratio `max |lambda_hat - z_i| / min |lambda_hat - z_i|` over the
/// mapped spectrum.
pub fn condition_report(f: &RationalFilter, problem: &EigenProblem) -> Result<Vec<f64>> {
    let eigs = problem
        .true_eigs()
        .ok_or_else(|| FilterError::InvalidProblem("condition report needs the true spectrum".into()))?;
    let mapped: Vec<f64> = eigs.iter().map(|&l| problem.map_eigenvalue(l)).collect();
    Ok(f
        .z()
        .iter()
        .map(|z| {
            let (lo, hi) = mapped.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &l| {
                let d = (Complex64::new(l, 0.0) - z).norm();
                (lo.min(d), hi.max(d))
            });
            hi / lo
        })
        .collect())
}

/// Approximate operation count of a dense solve: `2m` complex LU
/// factorizations up front, then per iteration `2m` pairs of triangular solves
/// with `m0` right-hand sides, a QR of the `n x m0` block and the projected
/// eigenproblem. Complex operations count as four real ones.
pub fn flop_estimate(n: usize, m: usize, m0: usize, iterations: usize) -> f64 {
    let (n, m, k, it) = (n as f64, m as f64, m0 as f64, iterations as f64);
    let factor = 2.0 * m * 4.0 * (2.0 / 3.0) * n.powi(3);
    let solves = 2.0 * m * 4.0 * 2.0 * n * n * k;
    let qr = 4.0 * 2.0 * n * k * k;
    let rr = 4.0 * (2.0 * n * n * k + 2.0 * n * k * k) + 4.0 * 9.0 * k.powi(3);
    factor + it * (solves + qr + rr)
}

/// Randomly chosen search intervals on a diagonal matrix with the given
/// spectrum. Each interval holds between 5% and 15% of the eigenvalues, and
/// each end sits at 10%, 50% or 90% of the gap to the next eigenvalue.
pub fn generate_slices(spectrum: &[f64], count: usize, seed: u64) -> Result<Vec<EigenProblem>> {
    let n = spectrum.len();
    if n < 20 {
        return Err(FilterError::SpectrumTooSmall(n));
    }
    if spectrum.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FilterError::InvalidProblem("spectrum must be strictly increasing".into()));
    }
    const FRACTIONS: [f64; 3] = [0.1, 0.5, 0.9];
    let lo_count = (0.05 * n as f64).ceil() as usize;
    let hi_count = ((0.15 * n as f64).floor() as usize).max(lo_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let m = rng.gen_range(lo_count..=hi_count);
        // Neighbours on both sides are needed to place the boundaries.
        let first = rng.gen_range(1..=n - m - 1);
        let last = first + m - 1;
        let fa = FRACTIONS[rng.gen_range(0..3)];
        let fb = FRACTIONS[rng.gen_range(0..3)];
        let a = spectrum[first] - fa * (spectrum[first] - spectrum[first - 1]);
        let b = spectrum[last] + fb * (spectrum[last + 1] - spectrum[last]);
        out.push(EigenProblem::diagonal(spectrum.to_vec(), (a, b))?);
    }
    Ok(out)
}

/// Sorted spectrum of `n` uniform points on `[-1, 1]`.
pub fn synthetic_spectrum(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    e.sort_by(f64::total_cmp);
    e.dedup();
    e
}

/// A dense Hermitian `n x n` problem on `[-1, 1]` with `m` eigenvalues in
/// `(-G, G)` and the rest in `G^-1 < |lambda| < 3 G^-1`, so that no mapped
/// eigenvalue falls in the annulus `G <= |x| <= G^-1`.
pub fn synthetic_gap_problem(n: usize, m: usize, gap: f64, seed: u64) -> Result<EigenProblem> {
    if !(gap > 0.0 && gap < 1.0) {
        return Err(FilterError::InvalidGap(gap));
    }
    if m == 0 || m >= n {
        return Err(FilterError::InvalidProblem(format!("eigencount {m} must lie in 1..{n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eigs = Vec::with_capacity(n);
    for _ in 0..m {
        eigs.push(gap * rng.gen_range(-0.99..0.99));
    }
    for _ in m..n {
        let mag = rng.gen_range(1.01 / gap..3.0 / gap);
        eigs.push(if rng.gen::<bool>() { mag } else { -mag });
    }
    let q = DMatrix::<Complex64>::from_fn(n, n, |_, _| Complex64::sample(&mut rng)).qr().q();
    let d = DMatrix::<Complex64>::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eigs.iter().map(|&l| Complex64::new(l, 0.0)),
    ));
    let mut a = &q * d * q.adjoint();
    let at = a.adjoint();
    a = (a + at).scale(0.5);
    EigenProblem::dense(a, (-1.0, 1.0), Some(eigs))
}

/// One row of a comparative sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub slice: usize,
    pub filter: String,
    pub c: f64,
    pub eigencount: usize,
    pub iterations: usize,
    pub converged: bool,
    pub flops: f64,
}

/// Solves every slice with every filter and multiplier, in parallel across
/// slices. Rows are ordered by slice, then filter, then multiplier.
pub fn run_sweep(
    slices: &[EigenProblem],
    filters: &[(String, RationalFilter)],
    cs: &[f64],
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let rows: Vec<Result<Vec<SweepRow>>> = slices
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rows = Vec::new();
            for (name, f) in filters {
                for &c in cs {
                    let opts = SolveOptions { c, tol, max_iters, seed: seed.wrapping_add(i as u64) };
                    let rep = subspace_iteration(f, p, opts)?;
                    rows.push(SweepRow {
                        slice: i,
                        filter: name.clone(),
                        c,
                        eigencount: rep.eigencount,
                        iterations: rep.iterations,
                        converged: rep.converged,
                        flops: rep.flops,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}
