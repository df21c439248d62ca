//! Full-dimensional designs that share fixed reduced coordinates.
//!
//! With `W = [U V]` orthogonal and `V = null(Uᵀ)`, every design with reduced
//! coordinates `y` is `x = Uy + Vz`; the box `−1 ≤ x ≤ 1` becomes a polytope
//! in `z`. Equality `Uᵀx = y` therefore holds by construction and only the
//! box enters the linear programs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::doe::seeded_rng;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::simplex::{simplex_solve, LinearProgram, LpOutcome};
use crate::subspace::{null_complement, ResponseSurface, Subspace};

/// Box tolerance on generated designs.
pub const BOX_TOLERANCE: f64 = 1e-9;
/// Designs closer than this (max-abs) are duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

/// `1 − ‖x‖_∞`: the uniform distance of `x` to the faces of the unit box.
pub fn box_slack<T: Real>(x: &DVector<T>) -> T {
    T::one() - x.amax()
}

/// The polytope slice `{ z : −1 ≤ Uy + Vz ≤ 1 }`.
#[derive(Debug, Clone)]
struct Slice<T: Real> {
    offset: DVector<T>,
    complement: DMatrix<T>,
}

impl<T: Real> Slice<T> {
    fn new(subspace: &Subspace<T>, y: &[T]) -> Result<Self> {
        if y.len() != subspace.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} reduced coordinates for a {}-dimensional subspace",
                y.len(),
                subspace.dim()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite reduced coordinate".into()));
        }
        let offset = subspace.matrix() * DVector::from_column_slice(y);
        let complement = if subspace.dim() == subspace.ambient_dim() {
            DMatrix::zeros(subspace.ambient_dim(), 0)
        } else {
            null_complement(subspace)?.into_matrix()
        };
        Ok(Self { offset, complement })
    }

    fn dim(&self) -> usize {
        self.offset.len()
    }

    fn free(&self) -> usize {
        self.complement.ncols()
    }

    fn design(&self, z: &DVector<T>) -> DVector<T> {
        &self.offset + &self.complement * z
    }

    /// Box rows `V_i z ≤ 1 − o_i − w_i` and `−V_i z ≤ 1 + o_i − w_i` where
    /// `w_i` is either a fixed level or a shared variable appended after `z`.
    fn box_rows(&self, levels: &[Level<T>], extra_vars: usize) -> (DMatrix<T>, DVector<T>) {
        let d = self.dim();
        let k = self.free();
        let mut g = DMatrix::zeros(2 * d, k + extra_vars);
        let mut h = DVector::zeros(2 * d);
        for i in 0..d {
            for j in 0..k {
                g[(2 * i, j)] = self.complement[(i, j)];
                g[(2 * i + 1, j)] = -self.complement[(i, j)];
            }
            let o = self.offset[i];
            match levels[i] {
                Level::Fixed(w) => {
                    h[2 * i] = T::one() - o - w;
                    h[2 * i + 1] = T::one() + o - w;
                }
                Level::Shared(var) => {
                    g[(2 * i, k + var)] = T::one();
                    g[(2 * i + 1, k + var)] = T::one();
                    h[2 * i] = T::one() - o;
                    h[2 * i + 1] = T::one() + o;
                }
            }
        }
        (g, h)
    }

    /// `max s` subject to every coordinate keeping slack `s`.
    fn max_uniform_slack(&self, levels: &[Level<T>]) -> Result<(DVector<T>, T)> {
        let k = self.free();
        let (g, h) = self.box_rows(levels, 1);
        let mut c = DVector::zeros(k + 1);
        c[k] = -T::one();
        match simplex_solve(&LinearProgram::new(c, g, h))? {
            LpOutcome::Optimal { x, .. } => Ok((x.rows(0, k).into_owned(), x[k])),
            // The slack variable can always absorb violations and is bounded by 1.
            other => Err(Error::Numerical(format!("slack program returned {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Level<T> {
    Fixed(T),
    Shared(usize),
}

/// Result of the phase-one feasibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<T: Real> {
    pub feasible: bool,
    /// A design `x = Uy + Vz` inside the box, when one exists.
    pub witness: Option<DVector<T>>,
    /// `min_z max_i |x_i| − 1`; non-positive exactly when feasible.
    pub max_violation: T,
}

/// Decides whether some `x` in the unit box has reduced coordinates `y`.
pub fn feasible_box<T: Real>(subspace: &Subspace<T>, y: &[T]) -> Result<Feasibility<T>> {
    let slice = Slice::new(subspace, y)?;
    let levels = vec![Level::Fixed(T::zero()); slice.dim()];
    let (g, h) = slice.box_rows(&levels, 0);
    let lp = LinearProgram::new(DVector::zeros(slice.free()), g, h);
    match simplex_solve(&lp)? {
        LpOutcome::Optimal { x: z, .. } => {
            let witness = slice.design(&z);
            let max_violation = -box_slack(&witness);
            Ok(Feasibility { feasible: true, witness: Some(witness), max_violation })
        }
        _ => {
            let shared = vec![Level::Shared(0); slice.dim()];
            let (_, s) = slice.max_uniform_slack(&shared)?;
            Ok(Feasibility { feasible: false, witness: None, max_violation: -s })
        }
    }
}

/// The most interior design with reduced coordinates `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevCenter<T: Real> {
    pub x: DVector<T>,
    pub slack: T,
}

/// Maximizes the uniform box slack, then refines lexicographically: the
/// coordinates that cannot gain slack are frozen and the common slack of the
/// remaining ones is maximized again, until every coordinate is frozen. The
/// refinement makes the center unique where the first program has a face of
/// optima.
pub fn chebyshev_center<T: Real>(subspace: &Subspace<T>, y: &[T]) -> Result<ChebyshevCenter<T>> {
    let slice = Slice::new(subspace, y)?;
    chebyshev_on_slice(&slice)
}

fn chebyshev_on_slice<T: Real>(slice: &Slice<T>) -> Result<ChebyshevCenter<T>> {
    let d = slice.dim();
    let tol = T::lit(T::LP_TOL);
    let mut levels = vec![Level::Shared(0); d];
    let (mut z, first) = slice.max_uniform_slack(&levels)?;
    if first < -tol {
        return Err(Error::Infeasible { max_violation: -first.to_f64_lossy() });
    }
    let mut t = first;
    let improve_tol = T::lit(1e3 * T::LP_TOL);
    for _stage in 0..d {
        let x = slice.design(&z);
        let active: Vec<usize> = (0..d).filter(|&i| matches!(levels[i], Level::Shared(_))).collect();
        if active.is_empty() {
            break;
        }
        let mut blocked = Vec::new();
        for &i in &active {
            let slack_i = T::one() - x[i].abs();
            if slack_i > t + improve_tol {
                continue;
            }
            // Can coordinate i gain slack while every other active coordinate keeps t?
            let mut trial: Vec<Level<T>> = levels
                .iter()
                .map(|&l| match l {
                    Level::Shared(_) => Level::Fixed(t),
                    fixed => fixed,
                })
                .collect();
            trial[i] = Level::Shared(0);
            let (_, best) = slice.max_uniform_slack(&trial)?;
            if best <= t + improve_tol {
                blocked.push(i);
            }
        }
        if blocked.is_empty() {
            blocked = active.clone();
        }
        for &i in &blocked {
            levels[i] = Level::Fixed(t);
        }
        if blocked.len() == active.len() {
            break;
        }
        // Relax frozen levels by the tolerance so round-off cannot make the next stage infeasible.
        let relaxed: Vec<Level<T>> = levels
            .iter()
            .map(|&l| match l {
                Level::Fixed(w) => Level::Fixed(w - tol),
                shared => shared,
            })
            .collect();
        let (next_z, next_t) = slice.max_uniform_slack(&relaxed)?;
        z = next_z;
        t = next_t;
    }
    let x = slice.design(&z);
    Ok(ChebyshevCenter { slack: box_slack(&x), x })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStrategy {
    ChebyshevCenter,
    RandomVertex,
}

impl DesignStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignStrategy::ChebyshevCenter => "chebyshev_center",
            DesignStrategy::RandomVertex => "random_vertex",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design<T: Real> {
    pub x: DVector<T>,
    pub strategy: DesignStrategy,
    /// `1 − ‖x‖_∞`.
    pub slack: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignBatch<T: Real> {
    pub y: Vec<T>,
    pub designs: Vec<Design<T>>,
    /// Fewer distinct designs than requested were found within the attempt budget.
    pub short: bool,
    /// The subspace spans the whole space, so `x = Uy` is the only design.
    pub null_space_empty: bool,
}

/// The Chebyshev center followed by random-objective vertices of the slice.
///
/// Objectives are standard Gaussian directions in `z`, normalized, drawn from
/// a ChaCha stream keyed by `seed`. Duplicates are redrawn, up to
/// `10 × count` attempts in total.
pub fn generate_designs<T: Real>(subspace: &Subspace<T>, y: &[T], count: usize, seed: u64) -> Result<DesignBatch<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument("design count must be at least 1".into()));
    }
    let slice = Slice::new(subspace, y)?;
    let center = chebyshev_on_slice(&slice)?;
    let mut designs = vec![Design { slack: center.slack, x: center.x, strategy: DesignStrategy::ChebyshevCenter }];
    let null_space_empty = slice.free() == 0;
    if null_space_empty {
        return Ok(DesignBatch { y: y.to_vec(), designs, short: count > 1, null_space_empty });
    }
    let k = slice.free();
    let levels = vec![Level::Fixed(T::zero()); slice.dim()];
    let (g, h) = slice.box_rows(&levels, 0);
    let mut rng = seeded_rng(seed, 0);
    let dup_tol = T::lit(DUPLICATE_TOLERANCE);
    let mut attempts = 0;
    while designs.len() < count && attempts < 10 * count {
        attempts += 1;
        let raw = DVector::from_fn(k, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)));
        let norm = raw.norm();
        if !(norm > T::zero()) {
            continue;
        }
        let lp = LinearProgram::new(raw / norm, g.clone(), h.clone());
        let Some((z, _)) = simplex_solve(&lp)?.optimal() else {
            return Err(Error::Numerical("vertex program failed on a feasible slice".into()));
        };
        let x = slice.design(&z);
        if designs.iter().any(|d| (&d.x - &x).amax() <= dup_tol) {
            continue;
        }
        designs.push(Design { slack: box_slack(&x), x, strategy: DesignStrategy::RandomVertex });
    }
    let short = designs.len() < count;
    Ok(DesignBatch { y: y.to_vec(), designs, short, null_space_empty })
}

/// A design seen through another operating point's subspace and surface.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossProjection<T: Real> {
    pub y: Vec<T>,
    pub predicted: T,
    /// `y` lies outside the other surface's training bounds.
    pub extrapolated: bool,
}

/// Projects arbitrary designs onto a subspace and evaluates the surface there.
pub fn project_designs<T: Real>(designs: &[DVector<T>], surface: &ResponseSurface<T>, subspace: &Subspace<T>) -> Result<Vec<CrossProjection<T>>> {
    if surface.dim() != subspace.dim() {
        return Err(Error::InvalidArgument(format!(
            "surface over {} coordinates, subspace with {} columns",
            surface.dim(),
            subspace.dim()
        )));
    }
    designs
        .iter()
        .map(|x| {
            if x.len() != subspace.ambient_dim() {
                return Err(Error::InvalidArgument(format!("design of length {} for R^{}", x.len(), subspace.ambient_dim())));
            }
            let y: Vec<T> = subspace.matrix().tr_mul(x).iter().copied().collect();
            Ok(CrossProjection { predicted: surface.predict_one(&y)?, extrapolated: surface.is_extrapolation(&y), y })
        })
        .collect()
}

/// [`project_designs`] over the designs of a batch.
pub fn crossproject<T: Real>(batch: &DesignBatch<T>, other_surface: &ResponseSurface<T>, other_subspace: &Subspace<T>) -> Result<Vec<CrossProjection<T>>> {
    let xs: Vec<DVector<T>> = batch.designs.iter().map(|d| d.x.clone()).collect();
    project_designs(&xs, other_surface, other_subspace)
}

/// Parallel-coordinates weights `|u_j| · x_j` for a design.
pub fn parallel_weights<T: Real>(x: &DVector<T>, direction: &DVector<T>) -> DVector<T> {
    x.zip_map(direction, |xv, u| xv * u.abs())
}
