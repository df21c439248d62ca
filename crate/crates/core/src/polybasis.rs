//! Orthonormal Legendre polynomials and multivariate bases over multi-index sets.
//!
//! The univariate family is orthonormal with respect to the uniform
//! probability weight `1/2` on `[-1, 1]`, i.e. `ψ_q = √(2q+1) · P_q` with
//! `P_q` the classical Legendre polynomial. Values and derivatives are
//! produced by the three-term recurrence, so any degree is supported.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::subspace::Subspace;

/// Rule that selects which degree tuples enter the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `Σ q_j ≤ p`
    TotalOrder(usize),
    /// `max q_j ≤ p`
    TensorOrder(usize),
}

impl BasisKind {
    pub fn max_degree(&self) -> usize {
        match *self {
            BasisKind::TotalOrder(p) | BasisKind::TensorOrder(p) => p,
        }
    }
}

/// Ordered set of degree tuples defining a multivariate polynomial basis.
///
/// Tuples are in graded lexicographic order: by total degree, then by
/// descending lexicographic order of the tuple, so `(0,…,0)` is first and in
/// two dimensions the degree-one terms read `(1,0), (0,1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dimension: usize,
    kind: BasisKind,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexSet {
    pub fn new(kind: BasisKind, dimension: usize) -> Result<Self> {
        make_index_set(kind, dimension)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.kind.max_degree()
    }
}

/// Builds the total- or tensor-order index set in graded lexicographic order.
pub fn make_index_set(kind: BasisKind, dimension: usize) -> Result<MultiIndexSet> {
    if dimension == 0 {
        return Err(Error::InvalidArgument("index set dimension must be at least 1".into()));
    }
    let p = kind.max_degree();
    let mut indices = Vec::new();
    let mut current = vec![0usize; dimension];
    // Odometer over the tensor grid {0..=p}^n, filtered by the kind rule.
    loop {
        let keep = match kind {
            BasisKind::TotalOrder(_) => current.iter().sum::<usize>() <= p,
            BasisKind::TensorOrder(_) => true,
        };
        if keep {
            indices.push(current.clone());
        }
        let mut pos = 0;
        loop {
            if pos == dimension {
                indices.sort_by(|a, b| {
                    let sa: usize = a.iter().sum();
                    let sb: usize = b.iter().sum();
                    sa.cmp(&sb).then_with(|| b.cmp(a))
                });
                return Ok(MultiIndexSet { dimension, kind, indices });
            }
            current[pos] += 1;
            let overflow = match kind {
                BasisKind::TotalOrder(_) => current.iter().sum::<usize>() > p,
                BasisKind::TensorOrder(_) => current[pos] > p,
            };
            if overflow {
                current[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
    }
}

/// Value of the degree-`q` orthonormal Legendre polynomial at `t`.
pub fn eval_univariate<T: Real>(q: usize, t: T) -> T {
    eval_univariate_with_derivative(q, t).0
}

/// Value and first derivative of the degree-`q` orthonormal polynomial.
pub fn eval_univariate_with_derivative<T: Real>(q: usize, t: T) -> (T, T) {
    let table = legendre_table(q, t);
    table[q]
}

/// `(ψ_k(t), ψ_k'(t))` for `k = 0..=p`.
pub fn legendre_table<T: Real>(p: usize, t: T) -> Vec<(T, T)> {
    // Classical P_k and P_k' first, then scale by √(2k+1).
    let mut out = Vec::with_capacity(p + 1);
    let (mut p_prev, mut d_prev) = (T::one(), T::zero());
    out.push((p_prev, d_prev));
    if p >= 1 {
        let (mut p_cur, mut d_cur) = (t, T::one());
        out.push((p_cur, d_cur));
        for k in 1..p {
            let kf = T::from_usize_lossy(k);
            let two_k_plus_one = T::from_usize_lossy(2 * k + 1);
            let k_plus_one = kf + T::one();
            let p_next = (two_k_plus_one * t * p_cur - kf * p_prev) / k_plus_one;
            let d_next = (two_k_plus_one * (p_cur + t * d_cur) - kf * d_prev) / k_plus_one;
            p_prev = p_cur;
            d_prev = d_cur;
            p_cur = p_next;
            d_cur = d_next;
            out.push((p_cur, d_cur));
        }
    }
    for (k, entry) in out.iter_mut().enumerate() {
        let scale = T::from_usize_lossy(2 * k + 1).sqrt();
        entry.0 *= scale;
        entry.1 *= scale;
    }
    out
}

fn check_coords<T: Real>(coords: &DMatrix<T>, idx: &MultiIndexSet) -> Result<()> {
    if coords.ncols() != idx.dimension() {
        return Err(Error::InvalidArgument(format!(
            "coordinate dimension {} does not match index-set dimension {}",
            coords.ncols(),
            idx.dimension()
        )));
    }
    Ok(())
}

fn projected<T: Real>(subspace: &Subspace<T>, samples: &DMatrix<T>, idx: &MultiIndexSet) -> Result<DMatrix<T>> {
    if samples.ncols() != subspace.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "sample dimension {} does not match subspace row count {}",
            samples.ncols(),
            subspace.ambient_dim()
        )));
    }
    if subspace.dim() != idx.dimension() {
        return Err(Error::InvalidArgument(format!(
            "subspace has {} columns but index set has dimension {}",
            subspace.dim(),
            idx.dimension()
        )));
    }
    Ok(samples * subspace.matrix())
}

/// `P(i, l) = Π_j ψ_{q(l)_j}(y_i^{(j)})` evaluated on reduced coordinates `Y` (N×n).
pub fn basis_matrix_from_coords<T: Real>(coords: &DMatrix<T>, idx: &MultiIndexSet) -> Result<DMatrix<T>> {
    check_coords(coords, idx)?;
    let (rows, n) = coords.shape();
    let p = idx.max_degree();
    let mut out = DMatrix::zeros(rows, idx.len());
    let mut tables = Vec::with_capacity(n);
    for i in 0..rows {
        tables.clear();
        tables.extend((0..n).map(|j| legendre_table(p, coords[(i, j)])));
        for (l, q) in idx.indices().iter().enumerate() {
            out[(i, l)] = q.iter().enumerate().fold(T::one(), |acc, (j, &qj)| acc * tables[j][qj].0);
        }
    }
    Ok(out)
}

/// Basis derivatives on reduced coordinates; element `k` of the result holds
/// the N×|idx| matrix of `∂ψ_l/∂y^{(k)}` at every sample.
pub fn basis_gradient_from_coords<T: Real>(coords: &DMatrix<T>, idx: &MultiIndexSet) -> Result<Vec<DMatrix<T>>> {
    check_coords(coords, idx)?;
    let (rows, n) = coords.shape();
    let p = idx.max_degree();
    let mut out = vec![DMatrix::zeros(rows, idx.len()); n];
    let mut tables = Vec::with_capacity(n);
    for i in 0..rows {
        tables.clear();
        tables.extend((0..n).map(|j| legendre_table(p, coords[(i, j)])));
        for (l, q) in idx.indices().iter().enumerate() {
            for (k, grad) in out.iter_mut().enumerate() {
                let mut prod = T::one();
                for (j, &qj) in q.iter().enumerate() {
                    prod *= if j == k { tables[j][qj].1 } else { tables[j][qj].0 };
                }
                grad[(i, l)] = prod;
            }
        }
    }
    Ok(out)
}

/// Basis matrix `P(i, l) = ψ_l(Uᵀ x_i)` for samples `X` (N×m).
pub fn eval_basis_matrix<T: Real>(subspace: &Subspace<T>, samples: &DMatrix<T>, idx: &MultiIndexSet) -> Result<DMatrix<T>> {
    let coords = projected(subspace, samples, idx)?;
    basis_matrix_from_coords(&coords, idx)
}

/// Basis gradients with respect to the reduced coordinates `y = Uᵀx`.
pub fn eval_basis_gradient<T: Real>(
    subspace: &Subspace<T>,
    samples: &DMatrix<T>,
    idx: &MultiIndexSet,
) -> Result<Vec<DMatrix<T>>> {
    let coords = projected(subspace, samples, idx)?;
    basis_gradient_from_coords(&coords, idx)
}
