//! Subspace algebra: distances, projections, complements and fixed-subspace
//! response surfaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, RankRevealed};
use crate::polybasis::{basis_matrix_from_coords, make_index_set, BasisKind, MultiIndexSet};
use crate::scalar::Real;

/// An m×n matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T: Real> {
    columns: DMatrix<T>,
}

impl<T: Real> Subspace<T> {
    /// Wraps a matrix that already has orthonormal columns.
    pub fn from_columns(columns: DMatrix<T>) -> Result<Self> {
        let (m, n) = columns.shape();
        if n > m {
            return Err(Error::InvalidArgument(format!("subspace with {n} columns in R^{m}")));
        }
        if columns.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite subspace entry".into()));
        }
        let gram = columns.tr_mul(&columns) - DMatrix::identity(n, n);
        let err = linalg::max_abs(&gram);
        if err > T::lit(T::ORTHO_TOL) {
            return Err(Error::InvalidArgument(format!(
                "columns are not orthonormal (max |UᵀU - I| = {err:e})"
            )));
        }
        Ok(Self { columns })
    }

    /// Orthonormalizes an arbitrary full-column-rank matrix by thin QR.
    pub fn orthonormalize(raw: &DMatrix<T>) -> Result<Self> {
        let (m, n) = raw.shape();
        if n > m {
            return Err(Error::InvalidArgument(format!("subspace with {n} columns in R^{m}")));
        }
        let rr = RankRevealed::new(raw)?;
        if rr.rank < n {
            return Err(Error::Numerical(format!("basis has rank {} < {n}", rr.rank)));
        }
        Self::from_columns(linalg::orthonormalize_columns(raw))
    }

    /// Span of the coordinate axes listed in `axes`.
    pub fn coordinate_axes(ambient: usize, axes: &[usize]) -> Result<Self> {
        let mut m = DMatrix::zeros(ambient, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= ambient {
                return Err(Error::InvalidArgument(format!("axis {a} outside R^{ambient}")));
            }
            m[(a, j)] = T::one();
        }
        Self::from_columns(m)
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.columns
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.columns
    }

    /// Row count m.
    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    /// Column count n.
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    /// Orthogonal projector `U Uᵀ`.
    pub fn projector(&self) -> DMatrix<T> {
        &self.columns * self.columns.transpose()
    }

    pub fn column(&self, j: usize) -> DVector<T> {
        self.columns.column(j).into_owned()
    }
}

/// Spectral norm of the difference of the two orthogonal projectors.
pub fn projector_distance<T: Real>(a: &Subspace<T>, b: &Subspace<T>) -> Result<T> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "subspaces live in R^{} and R^{}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(linalg::spectral_norm(&(a.projector() - b.projector())))
}

/// `φ = arcsin ‖U₁U₁ᵀ − U₂U₂ᵀ‖₂`, clamped to `[0, π/2]`.
pub fn subspace_angle<T: Real>(a: &Subspace<T>, b: &Subspace<T>) -> Result<T> {
    let s = projector_distance(a, b)?;
    Ok(s.min(T::one()).max(T::zero()).asin())
}

/// Reduced coordinates `Y = X U`.
pub fn project<T: Real>(samples: &DMatrix<T>, subspace: &Subspace<T>) -> Result<DMatrix<T>> {
    if samples.ncols() != subspace.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "samples have {} columns, subspace lives in R^{}",
            samples.ncols(),
            subspace.ambient_dim()
        )));
    }
    Ok(samples * subspace.matrix())
}

/// Orthonormal basis `V` of `null(Uᵀ)`, so `[U V]` is orthogonal.
pub fn null_complement<T: Real>(subspace: &Subspace<T>) -> Result<Subspace<T>> {
    let (m, n) = subspace.matrix().shape();
    if n == m {
        return Err(Error::EmptyComplement(m));
    }
    // QR of [U I] yields a full orthogonal Q whose leading n columns span U.
    let mut stacked = DMatrix::zeros(m, n + m);
    stacked.view_mut((0, 0), (m, n)).copy_from(subspace.matrix());
    stacked.view_mut((0, n), (m, m)).fill_with_identity();
    let q = linalg::orthonormalize_columns(&stacked);
    let raw = q.columns(n, m - n).into_owned();
    // One Gram–Schmidt sweep against U removes round-off leakage.
    let cleaned = &raw - subspace.matrix() * subspace.matrix().tr_mul(&raw);
    let mut v = linalg::orthonormalize_columns(&cleaned);
    linalg::canonical_sign(&mut v);
    Subspace::from_columns(v)
}

/// Least-squares polynomial surrogate over reduced coordinates.
///
/// Coordinates are mapped affinely from `y_bounds` onto `[-1, 1]` before the
/// basis is evaluated; a degenerate coordinate (zero range) maps to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSurface<T: Real> {
    pub index_set: MultiIndexSet,
    pub alpha: DVector<T>,
    pub r_squared: T,
    pub y_bounds: Vec<(T, T)>,
    /// True when the least-squares system was rank deficient and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

impl<T: Real> ResponseSurface<T> {
    pub fn dim(&self) -> usize {
        self.index_set.dimension()
    }

    pub fn rescale(&self, coords: &DMatrix<T>) -> DMatrix<T> {
        rescale_to_unit(coords, &self.y_bounds)
    }

    /// Surface values at each row of `coords` (N×n, unscaled).
    pub fn predict(&self, coords: &DMatrix<T>) -> Result<DVector<T>> {
        if coords.ncols() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} reduced coordinates, got {}",
                self.dim(),
                coords.ncols()
            )));
        }
        let p = basis_matrix_from_coords(&self.rescale(coords), &self.index_set)?;
        Ok(p * &self.alpha)
    }

    pub fn predict_one(&self, y: &[T]) -> Result<T> {
        let row = DMatrix::from_row_slice(1, y.len(), y);
        Ok(self.predict(&row)?[0])
    }

    /// True when any coordinate of `y` falls outside the training bounds.
    pub fn is_extrapolation(&self, y: &[T]) -> bool {
        y.iter().zip(&self.y_bounds).any(|(&v, &(lo, hi))| v < lo || v > hi)
    }
}

fn rescale_to_unit<T: Real>(coords: &DMatrix<T>, bounds: &[(T, T)]) -> DMatrix<T> {
    let two = T::lit(2.0);
    let mut out = coords.clone();
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let range = hi - lo;
        for v in out.column_mut(j).iter_mut() {
            *v = if range > T::zero() { two * (*v - lo) / range - T::one() } else { T::zero() };
        }
    }
    out
}

/// `1 − ‖r‖² / ‖f − f̄‖²`, defined as 1 for zero-variance targets, clamped to `[0, 1]`.
pub fn r_squared<T: Real>(outputs: &DVector<T>, residual: &DVector<T>) -> T {
    let n = T::from_usize_lossy(outputs.len().max(1));
    let mean = outputs.sum() / n;
    let total: T = outputs.iter().map(|&v| (v - mean) * (v - mean)).fold(T::zero(), |a, b| a + b);
    let rss = residual.norm_squared();
    let scale = outputs.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let tiny = T::lit(64.0) * T::default_epsilon() * T::default_epsilon() * (T::one() + scale * scale) * n;
    if total <= tiny {
        return T::one();
    }
    (T::one() - rss / total).max(T::zero()).min(T::one())
}

/// Fits a polynomial of the given kind and degree over reduced coordinates `Y` (N×n).
pub fn fit_response_surface<T: Real>(
    coords: &DMatrix<T>,
    outputs: &DVector<T>,
    kind: BasisKind,
) -> Result<ResponseSurface<T>> {
    let (rows, n) = coords.shape();
    if outputs.len() != rows {
        return Err(Error::InvalidArgument(format!("{rows} coordinate rows but {} outputs", outputs.len())));
    }
    if coords.iter().chain(outputs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite reduced coordinate or output".into()));
    }
    let index_set = make_index_set(kind, n)?;
    let y_bounds: Vec<(T, T)> = (0..n)
        .map(|j| {
            let col = coords.column(j);
            (col.min(), col.max())
        })
        .collect();
    let scaled = rescale_to_unit(coords, &y_bounds);
    let p = basis_matrix_from_coords(&scaled, &index_set)?;
    let rr = RankRevealed::new(&p)?;
    let alpha = rr.solve(outputs);
    let residual = outputs - &p * &alpha;
    let rank_deficient = !rr.is_full_column_rank() || index_set.len() > rows;
    Ok(ResponseSurface {
        index_set,
        alpha,
        r_squared: r_squared(outputs, &residual),
        y_bounds,
        rank_deficient,
    })
}

/// Regular `resolution × resolution` grid of `(y1, y2, value)` over `y_bounds`.
///
/// Row-major with `y1` as the outer (slow) index.
pub fn contour_grid<T: Real>(surface: &ResponseSurface<T>, resolution: usize) -> Result<Vec<[T; 3]>> {
    if surface.dim() != 2 {
        return Err(Error::InvalidArgument(format!("contour grid needs a 2-D surface, got {}", surface.dim())));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    let axis = |(lo, hi): (T, T)| -> Vec<T> {
        let denom = T::from_usize_lossy(resolution - 1);
        (0..resolution)
            .map(|k| if k + 1 == resolution { hi } else { lo + (hi - lo) * T::from_usize_lossy(k) / denom })
            .collect()
    };
    let a1 = axis(surface.y_bounds[0]);
    let a2 = axis(surface.y_bounds[1]);
    let mut coords = DMatrix::zeros(resolution * resolution, 2);
    for (i, &y1) in a1.iter().enumerate() {
        for (j, &y2) in a2.iter().enumerate() {
            coords[(i * resolution + j, 0)] = y1;
            coords[(i * resolution + j, 1)] = y2;
        }
    }
    let values = surface.predict(&coords)?;
    Ok((0..coords.nrows()).map(|r| [coords[(r, 0)], coords[(r, 1)], values[r]]).collect())
}
