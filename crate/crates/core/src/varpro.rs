//! Polynomial ridge approximation by variable projection.
//!
//! For a fixed subspace `U` the polynomial coefficients are the linear
//! least-squares solution, so the fit reduces to minimizing the projected
//! residual `r(U) = (I − P P⁺) f` over matrices with orthonormal columns.
//! The Jacobian of `r` with respect to `vec(U)` is assembled from the basis
//! gradients and a symmetric generalized inverse of `P`, and Gauss–Newton
//! steps are taken in the tangent space `(I − UUᵀ)Δ` followed by a QR
//! retraction.
//!
//! Jacobian layout: `N × (m·n)` with column `j + m·k` holding
//! `∂r/∂U_{(j,k)}`, i.e. column-major over `(j, k)` to match `vec(U)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::doe::{gaussian_matrix, seeded_rng, DesignOfExperiments};
use crate::error::{Error, Result};
use crate::linalg::{self, RankRevealed};
use crate::polybasis::{basis_gradient_from_coords, basis_matrix_from_coords, make_index_set, BasisKind, MultiIndexSet};
use crate::scalar::Real;
use crate::subspace::{r_squared, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    /// Backtracking (halving) with an Armijo sufficient-decrease test.
    LineSearch,
    /// Full Gauss–Newton steps, accepted unconditionally.
    FixedStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarproOptions {
    pub max_iterations: usize,
    /// Stop when `‖(I − UUᵀ) ∇‖ ≤ tol · max(1, ‖f‖)`.
    pub gradient_tolerance: f64,
    /// Stop when the relative decrease of `‖r‖²` falls below this.
    pub residual_stall_tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    pub damping: Damping,
}

impl Default for VarproOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            residual_stall_tolerance: 1e-12,
            restarts: 5,
            seed: 0,
            damping: Damping::LineSearch,
        }
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// Fitted surrogate `f(x) ≈ Σ_l α_l ψ_l(Uᵀx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel<T: Real> {
    pub subspace: Subspace<T>,
    pub index_set: MultiIndexSet,
    pub alpha: DVector<T>,
    pub residual_norm: T,
    pub r_squared: T,
    pub iterations: usize,
    pub converged: bool,
    /// Restart that produced this model.
    pub restart: usize,
}

impl<T: Real> RidgeModel<T> {
    pub fn predict(&self, x: &DMatrix<T>) -> Result<DVector<T>> {
        let coords = crate::subspace::project(x, &self.subspace)?;
        Ok(basis_matrix_from_coords(&coords, &self.index_set)? * &self.alpha)
    }
}

struct Projection<T: Real> {
    coords: DMatrix<T>,
    factor: RankRevealed<T>,
    alpha: DVector<T>,
    residual: DVector<T>,
}

fn check_shapes<T: Real>(u: &Subspace<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<()> {
    if u.ambient_dim() != doe.dim() {
        return Err(Error::InvalidArgument(format!(
            "subspace lives in R^{} but inputs have {} columns",
            u.ambient_dim(),
            doe.dim()
        )));
    }
    if u.dim() != idx.dimension() {
        return Err(Error::InvalidArgument(format!(
            "subspace has {} columns but index set has dimension {}",
            u.dim(),
            idx.dimension()
        )));
    }
    Ok(())
}

fn projection<T: Real>(u: &DMatrix<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<Projection<T>> {
    let coords = doe.inputs() * u;
    let p = basis_matrix_from_coords(&coords, idx)?;
    let factor = RankRevealed::new(&p)?;
    let alpha = factor.solve(doe.outputs());
    let residual = factor.project_out(doe.outputs());
    Ok(Projection { coords, factor, alpha, residual })
}

/// `r(U) = (I − P P⁺) f`.
pub fn residual<T: Real>(u: &Subspace<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<DVector<T>> {
    check_shapes(u, doe, idx)?;
    Ok(projection(u.matrix(), doe, idx)?.residual)
}

fn jacobian_from<T: Real>(proj: &Projection<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<DMatrix<T>> {
    let x = doe.inputs();
    let (rows, m) = x.shape();
    let n = idx.dimension();
    let grads = basis_gradient_from_coords(&proj.coords, idx)?;
    let r = &proj.residual;
    let mut jac = DMatrix::zeros(rows, m * n);
    for (k, grad) in grads.iter().enumerate() {
        // (∂P/∂U_jk) α = x_j ∘ (D_k α)
        let d_alpha = grad * &proj.alpha;
        for j in 0..m {
            let xj = x.column(j);
            let dp_alpha = DVector::from_fn(rows, |i, _| xj[i] * d_alpha[i]);
            let first = proj.factor.project_out(&dp_alpha);
            // (∂P/∂U_jk)ᵀ r = D_kᵀ (x_j ∘ r)
            let xr = DVector::from_fn(rows, |i, _| xj[i] * r[i]);
            let dpt_r = grad.tr_mul(&xr);
            let second = proj.factor.ginv_transpose_mul(&dpt_r);
            jac.set_column(j + m * k, &(-(first + second)));
        }
    }
    Ok(jac)
}

/// Jacobian of the projected residual with respect to `vec(U)`.
pub fn jacobian<T: Real>(u: &Subspace<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<DMatrix<T>> {
    check_shapes(u, doe, idx)?;
    let proj = projection(u.matrix(), doe, idx)?;
    jacobian_from(&proj, doe, idx)
}

fn check_raw<T: Real>(u: &DMatrix<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<()> {
    if u.nrows() != doe.dim() || u.ncols() != idx.dimension() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{} but inputs have {} columns and the index set dimension {}",
            u.nrows(),
            u.ncols(),
            doe.dim(),
            idx.dimension()
        )));
    }
    Ok(())
}

/// [`residual`] for an arbitrary full-column-rank `U`.
pub fn residual_at<T: Real>(u: &DMatrix<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<DVector<T>> {
    check_raw(u, doe, idx)?;
    Ok(projection(u, doe, idx)?.residual)
}

/// [`jacobian`] for an arbitrary full-column-rank `U`; column `j + m·k` is `∂r/∂U_jk`.
pub fn jacobian_at<T: Real>(u: &DMatrix<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet) -> Result<DMatrix<T>> {
    check_raw(u, doe, idx)?;
    let proj = projection(u, doe, idx)?;
    jacobian_from(&proj, doe, idx)
}

/// Retraction onto matrices with orthonormal columns.
fn retract<T: Real>(u: &DMatrix<T>) -> DMatrix<T> {
    linalg::orthonormalize_columns(u)
}

struct Run<T: Real> {
    u: DMatrix<T>,
    rss: T,
    iterations: usize,
    converged: bool,
}

fn gauss_newton<T: Real>(mut u: DMatrix<T>, doe: &DesignOfExperiments<T>, idx: &MultiIndexSet, options: &VarproOptions) -> Result<Run<T>> {
    let (m, n) = u.shape();
    let fnorm = doe.outputs().norm();
    let grad_tol = T::lit(options.gradient_tolerance) * T::one().max(fnorm);
    let stall_tol = T::lit(options.residual_stall_tolerance);
    let tiny = T::default_epsilon() * fnorm;
    let mut proj = projection(&u, doe, idx)?;
    let mut rss = proj.residual.norm_squared();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        if !rss.is_finite() {
            break;
        }
        if rss.sqrt() <= tiny {
            converged = true;
            break;
        }
        let jac = jacobian_from(&proj, doe, idx)?;
        let tangent = DMatrix::identity(m, m) - &u * u.transpose();
        let grad_vec = jac.tr_mul(&proj.residual);
        let grad = DMatrix::from_column_slice(m, n, grad_vec.as_slice());
        if (&tangent * grad).norm() <= grad_tol {
            converged = true;
            break;
        }
        let step_vec = -RankRevealed::new(&jac)?.solve(&proj.residual);
        let step = &tangent * DMatrix::from_column_slice(m, n, step_vec.as_slice());
        // Directional derivative of ‖r‖² along the projected step.
        let slope = T::lit(2.0) * grad_vec.dot(&DVector::from_column_slice(step.as_slice()));
        iterations += 1;
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial_u = retract(&(&u + &step * t));
            let trial = projection(&trial_u, doe, idx)?;
            let trial_rss = trial.residual.norm_squared();
            let ok = match options.damping {
                Damping::FixedStep => true,
                Damping::LineSearch => trial_rss.is_finite() && trial_rss <= rss + T::lit(ARMIJO) * t * slope.min(T::zero()),
            };
            if ok {
                accepted = Some((trial_u, trial, trial_rss));
                break;
            }
            t *= T::lit(0.5);
        }
        let Some((next_u, next_proj, next_rss)) = accepted else {
            // No sufficient decrease along the step: treat as a stall.
            break;
        };
        let decrease = rss - next_rss;
        u = next_u;
        proj = next_proj;
        let previous = rss;
        rss = next_rss;
        if options.damping == Damping::LineSearch && decrease <= stall_tol * previous {
            break;
        }
    }
    Ok(Run { u, rss, iterations, converged })
}

/// Fits an `n`-dimensional polynomial ridge of the given kind and degree.
///
/// Each restart starts from a seeded Gaussian matrix orthonormalized by QR;
/// the restart with the smallest residual wins (ties by restart index).
pub fn varpro_fit<T: Real>(doe: &DesignOfExperiments<T>, n: usize, kind: BasisKind, options: &VarproOptions) -> Result<RidgeModel<T>> {
    let m = doe.dim();
    if n == 0 || n >= m {
        return Err(Error::Precondition(format!("subspace dimension {n} must satisfy 1 <= n < d = {m}")));
    }
    let idx = make_index_set(kind, n)?;
    if idx.len() > doe.len() {
        return Err(Error::Precondition(format!("{} basis terms exceed {} samples", idx.len(), doe.len())));
    }
    if options.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart required".into()));
    }
    let runs: Vec<Result<Run<T>>> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(options.seed, r as u64);
            let start = retract(&gaussian_matrix::<T>(&mut rng, m, n));
            gauss_newton(start, doe, &idx, options)
        })
        .collect();
    let mut best: Option<(usize, Run<T>)> = None;
    let mut last_err = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(run) if run.rss.is_finite() => {
                if best.as_ref().is_none_or(|(_, b)| run.rss < b.rss) {
                    best = Some((r, run));
                }
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let Some((restart, run)) = best else {
        return Err(last_err.unwrap_or_else(|| Error::Numerical("every restart produced a non-finite residual".into())));
    };
    let mut u = run.u;
    linalg::canonical_sign(&mut u);
    let subspace = Subspace::from_columns(u)?;
    let proj = projection(subspace.matrix(), doe, &idx)?;
    Ok(RidgeModel {
        r_squared: r_squared(doe.outputs(), &proj.residual),
        residual_norm: proj.residual.norm(),
        subspace,
        index_set: idx,
        alpha: proj.alpha,
        iterations: run.iterations,
        converged: run.converged,
        restart,
    })
}
