//! Sufficient dimension reduction: SIR, SAVE, pHd and contour regression.
//!
//! All estimators work on standardized (whitened) inputs and report their
//! directions in the original input coordinates: a whitened direction `b`
//! maps back to `Wᵀb`, and the mapped set is re-orthonormalized.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rayon::prelude::*;

use crate::doe::{seeded_rng, DesignOfExperiments};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::subspace::Subspace;

pub const DEFAULT_SLICES: usize = 10;
pub const DEFAULT_PAIR_CAP: usize = 2000;

/// Affine whitening `z = W (x − mean)` with `W = Σ^{-1/2}` (symmetric).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization<T: Real> {
    pub mean: DVector<T>,
    pub whitener: DMatrix<T>,
    pub inverse_whitener: DMatrix<T>,
}

impl<T: Real> Standardization<T> {
    pub fn whiten(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let mut centered = x.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        centered * self.whitener.transpose()
    }

    pub fn unwhiten(&self, z: &DMatrix<T>) -> DMatrix<T> {
        let mut x = z * self.inverse_whitener.transpose();
        for mut row in x.row_iter_mut() {
            row += self.mean.transpose();
        }
        x
    }

    /// Maps whitened-space directions (columns) to an orthonormal basis in input space.
    pub fn back_map(&self, directions: &DMatrix<T>) -> Result<Subspace<T>> {
        let mapped = self.whitener.transpose() * directions;
        let mut q = linalg::orthonormalize_columns(&mapped);
        linalg::canonical_sign(&mut q);
        Subspace::from_columns(q)
    }
}

/// Centers and whitens the inputs with the unbiased sample covariance.
pub fn standardize<T: Real>(doe: &DesignOfExperiments<T>) -> Result<(DMatrix<T>, Standardization<T>)> {
    let (n, d) = doe.inputs().shape();
    if n <= d {
        return Err(Error::DegenerateInput {
            message: format!("{n} samples cannot standardize {d} inputs"),
            null_directions: Vec::new(),
        });
    }
    let nf = T::from_usize_lossy(n);
    let mean = DVector::from_fn(d, |j, _| doe.inputs().column(j).sum() / nf);
    let mut centered = doe.inputs().clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.tr_mul(&centered) / T::from_usize_lossy(n - 1);
    let (values, vectors) = linalg::symmetric_eigen_desc(&cov);
    let lead = values[0].max(T::zero());
    let cutoff = T::lit(T::RANK_TOL) * lead;
    let null: Vec<usize> = (0..d).filter(|&i| !(values[i] > cutoff) || values[i] <= T::zero()).collect();
    if !null.is_empty() {
        return Err(Error::DegenerateInput {
            message: format!("sample covariance is singular along {} direction(s)", null.len()),
            null_directions: null
                .iter()
                .map(|&i| vectors.column(i).iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
        });
    }
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(d, values.iter().map(|&v| T::one() / v.sqrt())));
    let sqrt = DMatrix::from_diagonal(&DVector::from_iterator(d, values.iter().map(|&v| v.sqrt())));
    let whitener = &vectors * inv_sqrt * vectors.transpose();
    let inverse_whitener = &vectors * sqrt * vectors.transpose();
    let z = &centered * whitener.transpose();
    Ok((z, Standardization { mean, whitener, inverse_whitener }))
}

/// Samples cut into contiguous groups of the output ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceAssignment {
    pub slice_count: usize,
    /// Slice id per sample, in original sample order.
    pub membership: Vec<usize>,
    pub counts: Vec<usize>,
}

impl SliceAssignment {
    pub fn members(&self, slice: usize) -> Vec<usize> {
        (0..self.membership.len()).filter(|&i| self.membership[i] == slice).collect()
    }
}

/// Sorts samples by output (ties by index) and cuts them into `slices`
/// contiguous groups whose sizes differ by at most one; larger groups come first.
pub fn slice_outputs<T: Real>(outputs: &DVector<T>, slices: usize) -> Result<SliceAssignment> {
    let n = outputs.len();
    if slices == 0 || slices > n {
        return Err(Error::InvalidArgument(format!("slice count {slices} outside 1..={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        outputs[a]
            .partial_cmp(&outputs[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let base = n / slices;
    let extra = n % slices;
    let counts: Vec<usize> = (0..slices).map(|s| base + usize::from(s < extra)).collect();
    let mut membership = vec![0; n];
    let mut pos = 0;
    for (s, &count) in counts.iter().enumerate() {
        for &i in &order[pos..pos + count] {
            membership[i] = s;
        }
        pos += count;
    }
    Ok(SliceAssignment { slice_count: slices, membership, counts })
}

/// Output of an SDR estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrEstimate<T: Real> {
    /// Selected directions in original input coordinates.
    pub subspace: Subspace<T>,
    /// The estimator's matrix in whitened coordinates.
    pub matrix: DMatrix<T>,
    /// Eigenvalues in the order used for selection.
    pub eigenvalues: Vec<T>,
    pub standardization: Standardization<T>,
    /// SAVE only: slices with fewer than two samples (contributing zero).
    pub degenerate_slices: usize,
}

#[derive(Clone, Copy)]
enum Ranking {
    Descending,
    AbsDescending,
    Ascending,
}

fn select<T: Real>(matrix: DMatrix<T>, std: Standardization<T>, n: usize, ranking: Ranking, degenerate_slices: usize) -> Result<SdrEstimate<T>> {
    let d = matrix.nrows();
    if n == 0 || n > d {
        return Err(Error::InvalidArgument(format!("subspace dimension {n} outside 1..={d}")));
    }
    let sym = (&matrix + matrix.transpose()) * T::lit(0.5);
    let (values, vectors) = linalg::symmetric_eigen_desc(&sym);
    let mut order: Vec<usize> = (0..d).collect();
    match ranking {
        Ranking::Descending => {}
        Ranking::Ascending => order.reverse(),
        Ranking::AbsDescending => order.sort_by(|&a, &b| {
            values[b]
                .abs()
                .partial_cmp(&values[a].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        }),
    }
    let directions = DMatrix::from_fn(d, n, |i, j| vectors[(i, order[j])]);
    let subspace = std.back_map(&directions)?;
    Ok(SdrEstimate {
        subspace,
        matrix,
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        standardization: std,
        degenerate_slices,
    })
}

/// Slices used by SIR/SAVE. A constant output carries no ranking, so all
/// samples share one slice.
fn slices_for<T: Real>(outputs: &DVector<T>, slices: usize) -> Result<SliceAssignment> {
    let n = outputs.len();
    if slices == 0 || slices > n {
        return Err(Error::InvalidArgument(format!("slice count {slices} outside 1..={n}")));
    }
    let first = outputs[0];
    if outputs.iter().all(|&v| v == first) {
        return slice_outputs(outputs, 1);
    }
    slice_outputs(outputs, slices)
}

fn slice_mean<T: Real>(z: &DMatrix<T>, members: &[usize]) -> DVector<T> {
    let mut mu = DVector::zeros(z.ncols());
    for &i in members {
        mu += z.row(i).transpose();
    }
    mu / T::from_usize_lossy(members.len())
}

/// Sliced inverse regression: `K = (1/N) Σ_s N_s μ_s μ_sᵀ`.
pub fn sir<T: Real>(doe: &DesignOfExperiments<T>, slices: usize, n: usize) -> Result<SdrEstimate<T>> {
    let (z, std) = standardize(doe)?;
    let assignment = slices_for(doe.outputs(), slices)?;
    let d = z.ncols();
    let mut k = DMatrix::zeros(d, d);
    for s in 0..assignment.slice_count {
        let members = assignment.members(s);
        let mu = slice_mean(&z, &members);
        k += &mu * mu.transpose() * T::from_usize_lossy(members.len());
    }
    k /= T::from_usize_lossy(doe.len());
    select(k, std, n, Ranking::Descending, 0)
}

/// Sliced average variance estimation: `K = (1/N) Σ_s N_s (I − Ω_s)²`.
///
/// Slices with a single sample have no covariance; they contribute zero and
/// are counted in [`SdrEstimate::degenerate_slices`].
pub fn save<T: Real>(doe: &DesignOfExperiments<T>, slices: usize, n: usize) -> Result<SdrEstimate<T>> {
    let (z, std) = standardize(doe)?;
    let assignment = slices_for(doe.outputs(), slices)?;
    let d = z.ncols();
    let identity = DMatrix::<T>::identity(d, d);
    let mut k = DMatrix::zeros(d, d);
    let mut degenerate = 0;
    for s in 0..assignment.slice_count {
        let members = assignment.members(s);
        if members.len() < 2 {
            degenerate += 1;
            continue;
        }
        let mu = slice_mean(&z, &members);
        let mut omega = DMatrix::zeros(d, d);
        for &i in &members {
            let dev = z.row(i).transpose() - &mu;
            omega += &dev * dev.transpose();
        }
        omega /= T::from_usize_lossy(members.len() - 1);
        let gap = &identity - omega;
        k += &gap * &gap * T::from_usize_lossy(members.len());
    }
    k /= T::from_usize_lossy(doe.len());
    select(k, std, n, Ranking::Descending, degenerate)
}

/// Principal Hessian directions: `K = (1/N) Σ_i (f_i − f̄) z_i z_iᵀ`,
/// ranked by absolute eigenvalue.
pub fn phd<T: Real>(doe: &DesignOfExperiments<T>, n: usize) -> Result<SdrEstimate<T>> {
    let (z, std) = standardize(doe)?;
    let nf = T::from_usize_lossy(doe.len());
    let fbar = doe.outputs().sum() / nf;
    let d = z.ncols();
    let mut k = DMatrix::zeros(d, d);
    for i in 0..z.nrows() {
        let w = doe.outputs()[i] - fbar;
        if w == T::zero() {
            continue;
        }
        let row = z.row(i).transpose();
        k += &row * row.transpose() * w;
    }
    k /= nf;
    select(k, std, n, Ranking::AbsDescending, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    /// Pair tolerance `c` on `|f_j − f_i|`.
    pub tolerance: f64,
    /// Samples beyond this count are subsampled (seeded) before the pair loop.
    pub pair_cap: usize,
    pub seed: u64,
}

impl ContourOptions {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, pair_cap: DEFAULT_PAIR_CAP, seed: 0 }
    }
}

/// Contour regression: `K(c) = 2/(N(N−1)) Σ_{i≠j} (z_j−z_i)(z_j−z_i)ᵀ 𝟙(|f_j−f_i| ≤ c)`;
/// the directions are the eigenvectors of the `n` smallest eigenvalues.
pub fn contour_regression<T: Real>(doe: &DesignOfExperiments<T>, options: &ContourOptions, n: usize) -> Result<SdrEstimate<T>> {
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance c must be positive, got {}", options.tolerance)));
    }
    if doe.len() < 2 {
        return Err(Error::EmptyAccumulator("fewer than two samples; no pairs to accumulate".into()));
    }
    let capped;
    let doe = if doe.len() > options.pair_cap {
        let mut rows = index::sample(&mut seeded_rng(options.seed, 0), doe.len(), options.pair_cap).into_vec();
        rows.sort_unstable();
        capped = doe.subset(&rows);
        &capped
    } else {
        doe
    };
    let (z, std) = standardize(doe)?;
    let f = doe.outputs();
    let c = T::lit(options.tolerance);
    let rows = z.nrows();
    let d = z.ncols();
    // Unordered pairs, partitioned by first index; reduced in index order.
    let partials: Vec<(DMatrix<T>, usize)> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let mut acc = DMatrix::zeros(d, d);
            let mut count = 0;
            for j in (i + 1)..rows {
                if (f[j] - f[i]).abs() <= c {
                    let diff = z.row(j) - z.row(i);
                    acc += diff.transpose() * &diff;
                    count += 1;
                }
            }
            (acc, count)
        })
        .collect();
    let mut k = DMatrix::zeros(d, d);
    let mut pairs = 0;
    for (acc, count) in partials {
        k += acc;
        pairs += count;
    }
    if pairs == 0 {
        return Err(Error::EmptyAccumulator(format!(
            "no sample pairs within tolerance c = {}; increase c",
            options.tolerance
        )));
    }
    // Each unordered pair appears twice in the ordered sum.
    let nf = T::from_usize_lossy(rows);
    k *= T::lit(4.0) / (nf * (nf - T::one()));
    select(k, std, n, Ranking::Ascending, 0)
}
