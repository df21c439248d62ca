//! Global quadratic surrogate and the closed-form active-subspace estimator.
//!
//! For `f(x) ≈ ½xᵀAx + cᵀx + e` the gradient is `Ax + c`, so under the uniform
//! measure on `[-1, 1]^d` the gradient covariance is `E[(Ax+c)(Ax+c)ᵀ] =
//! A²/3 + ccᵀ`. The constant in front of `A²` is configurable:
//! [`GAMMA_UNIFORM`] is the value implied by the uniform measure and
//! [`GAMMA_LEGACY`] reproduces the `4/3` constant used by earlier tooling.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rayon::prelude::*;

use crate::doe::{seeded_rng, DesignOfExperiments};
use crate::error::{Error, Result};
use crate::linalg::{self, RankRevealed};
use crate::scalar::Real;
use crate::subspace::Subspace;

pub const GAMMA_UNIFORM: f64 = 1.0 / 3.0;
pub const GAMMA_LEGACY: f64 = 4.0 / 3.0;

/// Minimum oversampling factor `N / coefficient_count` for a quadratic fit.
pub const DEFAULT_OVERSAMPLING: f64 = 1.5;

/// Number of coefficients of a total-order polynomial of degree `k` in `d`
/// variables, `binomial(d + k, k)`.
pub fn coefficient_count(d: usize, k: usize) -> u64 {
    num_integer::binomial((d + k) as u64, k as u64)
}

/// `f(x) = ½xᵀAx + cᵀx + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel<T: Real> {
    pub a: DMatrix<T>,
    pub c: DVector<T>,
    pub e: T,
}

impl<T: Real> QuadraticModel<T> {
    pub fn new(a: DMatrix<T>, c: DVector<T>, e: T) -> Result<Self> {
        let d = c.len();
        if a.shape() != (d, d) {
            return Err(Error::InvalidArgument(format!("A is {:?} but c has {d} entries", a.shape())));
        }
        if a.iter().chain(c.iter()).any(|v| !v.is_finite()) || !e.is_finite() {
            return Err(Error::InvalidArgument("non-finite quadratic coefficient".into()));
        }
        let scale = T::one().max(linalg::max_abs(&a));
        if linalg::asymmetry(&a) > T::lit(T::ORTHO_TOL) * scale {
            return Err(Error::InvalidArgument("A is not symmetric".into()));
        }
        Ok(Self { a, c, e })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Values at each row of `x` (N×d).
    pub fn evaluate(&self, x: &DMatrix<T>) -> DVector<T> {
        let half = T::lit(0.5);
        DVector::from_fn(x.nrows(), |i, _| {
            let row = x.row(i).transpose();
            half * row.dot(&(&self.a * &row)) + self.c.dot(&row) + self.e
        })
    }

    /// Gradients `A x_i + c` as rows.
    pub fn gradients(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let mut g = x * &self.a;
        for mut row in g.row_iter_mut() {
            row += self.c.transpose();
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFitOptions {
    /// Required ratio of samples to coefficients.
    pub oversampling_min: f64,
    /// Fit even when the oversampling requirement is not met.
    pub allow_undersampled: bool,
}

impl Default for QuadraticFitOptions {
    fn default() -> Self {
        Self { oversampling_min: DEFAULT_OVERSAMPLING, allow_undersampled: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFit<T: Real> {
    pub model: QuadraticModel<T>,
    /// Set when the design matrix was rank deficient; the model is then the
    /// minimum-norm least-squares solution.
    pub rank_deficient: bool,
    pub rank: usize,
}

fn quadratic_design_matrix<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    let (rows, d) = x.shape();
    let cols = 1 + d + d * (d + 1) / 2;
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        m[(i, 0)] = T::one();
        for j in 0..d {
            m[(i, 1 + j)] = x[(i, j)];
        }
        let mut col = 1 + d;
        for j in 0..d {
            for k in j..d {
                m[(i, col)] = x[(i, j)] * x[(i, k)];
                col += 1;
            }
        }
    }
    m
}

/// Least-squares fit of `½xᵀAx + cᵀx + e` to the samples.
pub fn fit_quadratic<T: Real>(doe: &DesignOfExperiments<T>, options: &QuadraticFitOptions) -> Result<QuadraticFit<T>> {
    let d = doe.dim();
    if d == 0 {
        return Err(Error::InvalidArgument("inputs have no columns".into()));
    }
    let needed = coefficient_count(d, 2);
    let n = doe.len();
    if !options.allow_undersampled && (n as f64) < options.oversampling_min * needed as f64 {
        return Err(Error::Precondition(format!(
            "{n} samples < {} x {needed} coefficients; pass an override to fit anyway",
            options.oversampling_min
        )));
    }
    let design = quadratic_design_matrix(doe.inputs());
    let rr = RankRevealed::new(&design)?;
    let coeffs = rr.solve(doe.outputs());
    let e = coeffs[0];
    let c = DVector::from_fn(d, |j, _| coeffs[1 + j]);
    let mut a = DMatrix::zeros(d, d);
    let mut col = 1 + d;
    let two = T::lit(2.0);
    for j in 0..d {
        for k in j..d {
            if j == k {
                a[(j, j)] = two * coeffs[col];
            } else {
                a[(j, k)] = coeffs[col];
                a[(k, j)] = coeffs[col];
            }
            col += 1;
        }
    }
    Ok(QuadraticFit {
        model: QuadraticModel::new(a, c, e)?,
        rank_deficient: !rr.is_full_column_rank(),
        rank: rr.rank,
    })
}

/// `K = γA² + ccᵀ`.
pub fn gradient_covariance<T: Real>(model: &QuadraticModel<T>, gamma: T) -> Result<DMatrix<T>> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let a2 = &model.a * &model.a;
    let k = a2 * gamma + &model.c * model.c.transpose();
    Ok((&k + k.transpose()) * T::lit(0.5))
}

/// How many leading eigenvectors form the subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionRule {
    Fixed(usize),
    /// Largest ratio `λ_n / λ_{n+1}` over `1 ≤ n ≤ max_dim`; ties pick the smallest n.
    Gap { max_dim: usize },
}

/// Eigenvalue diagnostics of a gradient-covariance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport<T: Real> {
    /// Descending, clamped at zero.
    pub eigenvalues: Vec<T>,
    pub eigenvectors: DMatrix<T>,
    pub bootstrap_lo: Option<Vec<T>>,
    pub bootstrap_hi: Option<Vec<T>>,
    pub replicates: usize,
    pub subsample_size: usize,
}

/// Index maximizing the eigenvalue gap ratio; see [`DimensionRule::Gap`].
pub fn gap_dimension<T: Real>(eigenvalues: &[T], max_dim: usize) -> usize {
    let d = eigenvalues.len();
    let upper = max_dim.min(d.saturating_sub(1)).max(1);
    if d < 2 {
        return 1;
    }
    // Eigenvalues below machine precision relative to the leading one count as zero.
    let floor = T::default_epsilon() * eigenvalues[0].max(T::zero());
    if floor <= T::zero() {
        return 1;
    }
    let mut best = 1;
    let mut best_ratio = T::zero();
    for n in 1..=upper {
        let num = eigenvalues[n - 1].max(floor);
        let den = eigenvalues[n].max(floor);
        let ratio = num / den;
        if ratio > best_ratio {
            best_ratio = ratio;
            best = n;
        }
    }
    best
}

fn eigen_report<T: Real>(k: &DMatrix<T>) -> Result<EigenReport<T>> {
    if k.nrows() != k.ncols() {
        return Err(Error::InvalidArgument(format!("K must be square, got {:?}", k.shape())));
    }
    let scale = T::one().max(linalg::max_abs(k));
    if linalg::asymmetry(k) > T::lit(T::ORTHO_TOL) * scale {
        return Err(Error::InvalidArgument("K is not symmetric".into()));
    }
    let sym = (k + k.transpose()) * T::lit(0.5);
    let (values, vectors) = linalg::symmetric_eigen_desc(&sym);
    Ok(EigenReport {
        eigenvalues: values.into_iter().map(|v| v.max(T::zero())).collect(),
        eigenvectors: vectors,
        bootstrap_lo: None,
        bootstrap_hi: None,
        replicates: 0,
        subsample_size: 0,
    })
}

/// Leading eigenvectors of a symmetric `K` under the given dimension rule.
pub fn active_subspace<T: Real>(k: &DMatrix<T>, rule: DimensionRule) -> Result<(Subspace<T>, EigenReport<T>)> {
    let report = eigen_report(k)?;
    let d = report.eigenvalues.len();
    let n = match rule {
        DimensionRule::Fixed(n) => n,
        DimensionRule::Gap { max_dim } => gap_dimension(&report.eigenvalues, max_dim),
    };
    if n == 0 || n > d {
        return Err(Error::InvalidArgument(format!("subspace dimension {n} outside 1..={d}")));
    }
    let sub = Subspace::from_columns(report.eigenvectors.columns(0, n).into_owned())?;
    Ok((sub, report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub subsample_size: usize,
    pub replicates: usize,
    pub seed: u64,
    pub gamma: f64,
}

/// Eigenvalues of the full-sample covariance with per-index min/max bands
/// over subsample refits.
///
/// Each replicate draws `subsample_size` distinct rows (without replacement)
/// from a ChaCha stream keyed by `(seed, replicate)`, so results do not depend
/// on how replicates are scheduled across threads.
pub fn bootstrap_eigenvalues<T: Real>(doe: &DesignOfExperiments<T>, options: &BootstrapOptions) -> Result<EigenReport<T>> {
    let n = doe.len();
    let floor = coefficient_count(doe.dim(), 2) as usize;
    if options.subsample_size > n || options.subsample_size < floor {
        return Err(Error::Precondition(format!(
            "subsample size {} must lie in {floor}..={n}",
            options.subsample_size
        )));
    }
    if options.replicates == 0 {
        return Err(Error::Precondition("at least one replicate required".into()));
    }
    let gamma = T::lit(options.gamma);
    let fit = QuadraticFitOptions { allow_undersampled: true, ..Default::default() };
    let full = fit_quadratic(doe, &fit)?;
    let mut report = eigen_report(&gradient_covariance(&full.model, gamma)?)?;

    let replicate_values: Vec<Vec<T>> = (0..options.replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(options.seed, r as u64);
            let mut rows = index::sample(&mut rng, n, options.subsample_size).into_vec();
            rows.sort_unstable();
            let sub = doe.subset(&rows);
            let model = fit_quadratic(&sub, &fit)?.model;
            Ok(eigen_report(&gradient_covariance(&model, gamma)?)?.eigenvalues)
        })
        .collect::<Result<_>>()?;

    let d = doe.dim();
    let mut lo = vec![T::max_value().unwrap_or(T::one() / T::zero()); d];
    let mut hi = vec![T::zero(); d];
    for values in &replicate_values {
        for (i, &v) in values.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    report.bootstrap_lo = Some(lo);
    report.bootstrap_hi = Some(hi);
    report.replicates = options.replicates;
    report.subsample_size = options.subsample_size;
    Ok(report)
}
