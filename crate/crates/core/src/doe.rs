//! Input–output sample sets and synthetic generators with known structure.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadsurf::QuadraticModel;
use crate::scalar::Real;

/// N samples of a d-dimensional input with one scalar output each.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOfExperiments<T: Real> {
    inputs: DMatrix<T>,
    outputs: DVector<T>,
    pub objective_name: String,
    normalized: bool,
}

impl<T: Real> DesignOfExperiments<T> {
    pub fn new(inputs: DMatrix<T>, outputs: DVector<T>) -> Result<Self> {
        Self::with_options(inputs, outputs, "f", false)
    }

    /// Builds a sample set whose inputs are declared to lie in `[-1, 1]^d`.
    pub fn normalized(inputs: DMatrix<T>, outputs: DVector<T>) -> Result<Self> {
        Self::with_options(inputs, outputs, "f", true)
    }

    pub fn with_options(inputs: DMatrix<T>, outputs: DVector<T>, objective_name: &str, normalized: bool) -> Result<Self> {
        if inputs.nrows() != outputs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} input rows but {} outputs",
                inputs.nrows(),
                outputs.len()
            )));
        }
        if let Some(pos) = inputs.iter().position(|v| !v.is_finite()) {
            let rows = inputs.nrows().max(1);
            return Err(Error::InvalidArgument(format!(
                "non-finite input at sample {}, column {}",
                pos % rows,
                pos / rows
            )));
        }
        if let Some(i) = outputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite output at sample {i}")));
        }
        if normalized {
            let limit = T::one() + T::lit(1e-9);
            for (j, col) in inputs.column_iter().enumerate() {
                if col.iter().any(|v| v.abs() > limit) {
                    return Err(Error::InvalidArgument(format!("column {} leaves [-1, 1]", j + 1)));
                }
            }
        }
        Ok(Self { inputs, outputs, objective_name: objective_name.to_string(), normalized })
    }

    pub fn inputs(&self) -> &DMatrix<T> {
        &self.inputs
    }

    pub fn outputs(&self) -> &DVector<T> {
        &self.outputs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Rows selected by `rows`, in that order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        let inputs = self.inputs.select_rows(rows);
        let outputs = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.outputs[i]));
        Self { inputs, outputs, objective_name: self.objective_name.clone(), normalized: self.normalized }
    }

    /// Same inputs with outputs replaced by `map(f_i)`.
    pub fn map_outputs(&self, map: impl Fn(T) -> T) -> Result<Self> {
        Self::with_options(self.inputs.clone(), self.outputs.map(map), &self.objective_name, self.normalized)
    }
}

/// Per-column affine map taking `[lower, upper]` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationMap<T: Real> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> NormalizationMap<T> {
    /// Column-wise min/max of `inputs`.
    pub fn fit(inputs: &DMatrix<T>) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::InvalidArgument("cannot normalize an empty sample set".into()));
        }
        let lower = inputs.column_iter().map(|c| c.min()).collect();
        let upper = inputs.column_iter().map(|c| c.max()).collect();
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Constant columns map to 0.
    pub fn apply(&self, inputs: &DMatrix<T>) -> Result<DMatrix<T>> {
        if inputs.ncols() != self.dim() {
            return Err(Error::InvalidArgument(format!("map has {} columns, samples have {}", self.dim(), inputs.ncols())));
        }
        let two = T::lit(2.0);
        Ok(DMatrix::from_fn(inputs.nrows(), inputs.ncols(), |i, j| {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if hi > lo {
                (two * (inputs[(i, j)] - lo) / (hi - lo) - T::one()).max(-T::one()).min(T::one())
            } else {
                T::zero()
            }
        }))
    }

    pub fn invert(&self, normalized: &DMatrix<T>) -> Result<DMatrix<T>> {
        if normalized.ncols() != self.dim() {
            return Err(Error::InvalidArgument(format!("map has {} columns, samples have {}", self.dim(), normalized.ncols())));
        }
        let half = T::lit(0.5);
        Ok(DMatrix::from_fn(normalized.nrows(), normalized.ncols(), |i, j| {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            lo + (normalized[(i, j)] + T::one()) * half * (hi - lo)
        }))
    }
}

/// Rescales inputs column-wise onto `[-1, 1]` and returns the map used.
pub fn normalize_inputs<T: Real>(doe: &DesignOfExperiments<T>) -> Result<(DesignOfExperiments<T>, NormalizationMap<T>)> {
    let map = NormalizationMap::fit(doe.inputs())?;
    let x = map.apply(doe.inputs())?;
    let out = DesignOfExperiments::with_options(x, doe.outputs().clone(), &doe.objective_name, true)?;
    Ok((out, map))
}

pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn uniform_box<T: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<T> {
    // Row-major draw order so the sample stream does not depend on the storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = T::lit(rng.random_range(-1.0..=1.0));
        }
    }
    m
}

pub(crate) fn gaussian_matrix<T: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = T::lit(rng.sample::<f64, _>(StandardNormal));
        }
    }
    m
}

/// Uniform draws on `[-1, 1]^d` reproducible from `seed`.
pub fn uniform_inputs<T: Real>(samples: usize, dim: usize, seed: u64) -> DMatrix<T> {
    uniform_box(&mut seeded_rng(seed, 0), samples, dim)
}

/// Direction of the exponential ridge, `[1, 1, 1, 1]ᵀ`.
pub const EXP_RIDGE_DIRECTION: [f64; 4] = [1.0, 1.0, 1.0, 1.0];

/// A direction that captures the trend of the exponential ridge but scatters it.
pub const EXP_RIDGE_POOR_DIRECTION: [f64; 4] = [0.4, -0.3, 0.5, 0.4];

/// `exp(x₁ + x₂ + x₃ + x₄)` sampled uniformly on `[-1, 1]^4`.
pub fn synth_exp_ridge<T: Real>(samples: usize, seed: u64) -> Result<DesignOfExperiments<T>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample required".into()));
    }
    let inputs = uniform_inputs::<T>(samples, 4, seed);
    let outputs = DVector::from_fn(samples, |i, _| inputs.row(i).sum().exp());
    DesignOfExperiments::with_options(inputs, outputs, "exp_ridge", true)
}

/// Ground truth for [`synth_ridge`].
#[derive(Debug, Clone)]
pub struct RidgeTruth<T: Real> {
    pub direction: DVector<T>,
}

/// Cubic ridge `f(x) = (uᵀx)³ + uᵀx` with a random unit direction `u`.
pub fn synth_ridge<T: Real>(dim: usize, samples: usize, seed: u64) -> Result<(DesignOfExperiments<T>, RidgeTruth<T>)> {
    if dim == 0 || samples == 0 {
        return Err(Error::InvalidArgument("dimension and sample count must be positive".into()));
    }
    let mut rng = seeded_rng(seed, 0);
    let raw = gaussian_matrix::<T>(&mut rng, dim, 1);
    let direction: DVector<T> = raw.column(0).normalize();
    let inputs = uniform_box::<T>(&mut rng, samples, dim);
    let outputs = (&inputs * &direction).map(|t| t * t * t + t);
    Ok((DesignOfExperiments::with_options(inputs, outputs, "cubic_ridge", true)?, RidgeTruth { direction }))
}

/// Exact samples of `½xᵀAx + cᵀx + e` with `A` having the requested spectrum.
///
/// `A = Q diag(spectrum) Qᵀ` with `Q` a random orthogonal matrix; `c` is a
/// standard Gaussian vector when `with_linear` is set and zero otherwise.
pub fn synth_quadratic<T: Real>(
    dim: usize,
    samples: usize,
    seed: u64,
    spectrum: &[f64],
    with_linear: bool,
) -> Result<(DesignOfExperiments<T>, QuadraticModel<T>)> {
    if dim == 0 || samples == 0 {
        return Err(Error::InvalidArgument("dimension and sample count must be positive".into()));
    }
    if spectrum.len() != dim {
        return Err(Error::InvalidArgument(format!("spectrum has {} entries for d = {dim}", spectrum.len())));
    }
    let mut rng = seeded_rng(seed, 0);
    let q = linalg::orthonormalize_columns(&gaussian_matrix::<T>(&mut rng, dim, dim));
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(dim, spectrum.iter().map(|&v| T::lit(v))));
    let a = &q * lambda * q.transpose();
    let a = (&a + a.transpose()) * T::lit(0.5);
    let c = if with_linear { gaussian_matrix::<T>(&mut rng, dim, 1).column(0).into_owned() } else { DVector::zeros(dim) };
    let e = T::lit(rng.sample::<f64, _>(StandardNormal));
    let model = QuadraticModel::new(a, c, e)?;
    let inputs = uniform_box::<T>(&mut rng, samples, dim);
    let outputs = model.evaluate(&inputs);
    Ok((DesignOfExperiments::with_options(inputs, outputs, "quadratic", true)?, model))
}
