//! Dense linear-algebra helpers built on nalgebra factorizations.

use nalgebra::{DMatrix, DVector, SymmetricEigen, QR, SVD};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest absolute entry of a matrix (zero for empty matrices).
pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Residual of a symmetry check, `max |K - Kᵀ|`.
pub fn asymmetry<T: Real>(k: &DMatrix<T>) -> T {
    let mut worst = T::zero();
    for i in 0..k.nrows() {
        for j in (i + 1)..k.ncols() {
            worst = worst.max((k[(i, j)] - k[(j, i)]).abs());
        }
    }
    worst
}

/// Flips the sign of a column so its largest-magnitude entry is positive.
///
/// Ties go to the lowest row index, so repeated calls are reproducible.
pub fn canonical_sign<T: Real>(m: &mut DMatrix<T>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = T::zero();
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col.len() > 0 && col[best] < T::zero() {
            col.neg_mut();
        }
    }
}

/// Eigen-decomposition of a symmetric matrix sorted by descending eigenvalue.
///
/// Only the lower triangle is read. Eigenvector signs are canonicalized.
pub fn symmetric_eigen_desc<T: Real>(k: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let d = k.nrows();
    if d == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(k.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    canonical_sign(&mut vectors);
    (values, vectors)
}

/// Thin orthonormal factor of `m` (columns of Q with a non-negative R diagonal).
pub fn orthonormalize_columns<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let qr = QR::new(m.clone());
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols.min(r.nrows()) {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s))
}

/// Rank-revealing factorization `A = U_r S_r V_rᵀ` truncated at a relative
/// singular-value threshold.
///
/// `V_r S_r⁻¹ U_rᵀ` is the pseudoinverse and therefore a symmetric
/// generalized inverse: `A A⁻ A = A` and `(A A⁻)ᵀ = A A⁻`.
#[derive(Debug, Clone)]
pub struct RankRevealed<T: Real> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: DMatrix<T>,
    pub rank: usize,
    pub cols: usize,
}

impl<T: Real> RankRevealed<T> {
    pub fn new(a: &DMatrix<T>) -> Result<Self> {
        Self::with_tolerance(a, T::lit(T::RANK_TOL))
    }

    pub fn with_tolerance(a: &DMatrix<T>, rel_tol: T) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return Ok(Self {
                u: DMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v: DMatrix::zeros(cols, 0),
                rank: 0,
                cols,
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite entry in least-squares matrix".into()));
        }
        let svd = SVD::new(a.clone(), true, true);
        let u_full = svd.u.expect("requested U");
        let vt_full = svd.v_t.expect("requested Vᵀ");
        let sv = svd.singular_values;
        let smax = sv.iter().fold(T::zero(), |acc, &s| acc.max(s));
        let cutoff = rel_tol * smax;
        let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cutoff && sv[i] > T::zero()).collect();
        let rank = keep.len();
        let mut u = DMatrix::zeros(rows, rank);
        let mut v = DMatrix::zeros(cols, rank);
        let mut singular_values = Vec::with_capacity(rank);
        for (dst, &src) in keep.iter().enumerate() {
            u.set_column(dst, &u_full.column(src));
            v.set_column(dst, &vt_full.row(src).transpose());
            singular_values.push(sv[src]);
        }
        Ok(Self { u, singular_values, v, rank, cols })
    }

    pub fn is_full_column_rank(&self) -> bool {
        self.rank == self.cols
    }

    /// Minimum-norm least-squares solution of `A x ≈ b`.
    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        let mut coeffs = self.u.tr_mul(b);
        for (c, &s) in coeffs.iter_mut().zip(&self.singular_values) {
            *c /= s;
        }
        &self.v * coeffs
    }

    /// Applies `(A⁻)ᵀ = U_r S_r⁻¹ V_rᵀ` to a vector of length `cols`.
    pub fn ginv_transpose_mul(&self, w: &DVector<T>) -> DVector<T> {
        let mut coeffs = self.v.tr_mul(w);
        for (c, &s) in coeffs.iter_mut().zip(&self.singular_values) {
            *c /= s;
        }
        &self.u * coeffs
    }

    /// Orthogonal projection of `b` onto the range of `A`.
    pub fn project(&self, b: &DVector<T>) -> DVector<T> {
        &self.u * self.u.tr_mul(b)
    }

    /// `b - A A⁺ b`.
    pub fn project_out(&self, b: &DVector<T>) -> DVector<T> {
        b - self.project(b)
    }
}
