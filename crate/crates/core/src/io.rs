//! Comma-delimited tables and versioned JSON documents.
//!
//! Every floating-point number is written with 17 significant digits
//! (`{:.16e}`), so a save/load cycle reproduces `f64` values bit for bit.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{CrossProjection, DesignBatch, DesignStrategy};
use crate::doe::{DesignOfExperiments, NormalizationMap};
use crate::error::{Error, Result};
use crate::polybasis::{BasisKind, MultiIndexSet};
use crate::quadsurf::EigenReport;
use crate::sdr::SdrEstimate;
use crate::subspace::{ResponseSurface, Subspace};
use crate::varpro::RidgeModel;

/// Version stamped into every JSON document.
pub const FORMAT_VERSION: u32 = 1;

/// Formats `v` with 17 significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_cell(text: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = text.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("column {column}: cannot parse {text:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("column {column}: non-finite value {text:?}") });
    }
    Ok(v)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Tables

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), self.header.len(), |i, j| self.rows[i][j])
    }
}

/// Parses a header line plus numeric rows; `#` lines are skipped.
pub fn parse_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse { line: 1, message: "missing header".into() });
    }
    let physical: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_end_matches('\r').is_empty() && !l.starts_with('#'))
        .map(|(i, _)| i + 1)
        .collect();
    let line_at = |p: Option<&csv::Position>| p.and_then(|p| physical.get(p.record() as usize).copied()).unwrap_or(0);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse { line: line_at(e.position()), message: e.to_string() })?;
        let line = line_at(record.position());
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let row = record.iter().enumerate().map(|(j, cell)| parse_cell(cell, line, j + 1)).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Renders rows of preformatted cells under `header`.
pub fn render_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn numbered(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|j| format!("{prefix}{j}")).collect()
}

fn matrix_cells(m: &DMatrix<f64>) -> Vec<Vec<String>> {
    m.row_iter().map(|r| r.iter().map(|&v| format_number(v)).collect()).collect()
}

// ---------------------------------------------------------------------------
// Sample sets

/// Selects input and output columns by header name.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMap {
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DoeReadOptions {
    /// Require every input to lie in `[-1, 1]`.
    pub normalized: bool,
    /// Without a map the last column is the output and the rest are inputs.
    pub columns: Option<ColumnMap>,
}

pub fn parse_doe(text: &str, options: &DoeReadOptions) -> Result<DesignOfExperiments<f64>> {
    let table = parse_table(text)?;
    let (input_cols, output_col) = match &options.columns {
        Some(map) => {
            let find = |name: &str| {
                table.column_index(name).ok_or_else(|| Error::InvalidArgument(format!("no column named {name:?}")))
            };
            let inputs = map.inputs.iter().map(|n| find(n)).collect::<Result<Vec<_>>>()?;
            (inputs, find(&map.output)?)
        }
        None => {
            if table.header.len() < 2 {
                return Err(Error::Parse { line: 1, message: "need at least one input column and one output column".into() });
            }
            let last = table.header.len() - 1;
            ((0..last).collect(), last)
        }
    };
    if input_cols.is_empty() {
        return Err(Error::InvalidArgument("no input columns selected".into()));
    }
    if table.rows.is_empty() {
        return Err(Error::Parse { line: 2, message: "no samples".into() });
    }
    let x = DMatrix::from_fn(table.rows.len(), input_cols.len(), |i, j| table.rows[i][input_cols[j]]);
    let f = DVector::from_fn(table.rows.len(), |i, _| table.rows[i][output_col]);
    if options.normalized {
        let limit = 1.0 + 1e-9;
        for (j, &c) in input_cols.iter().enumerate() {
            if x.column(j).iter().any(|v| v.abs() > limit) {
                return Err(Error::InvalidArgument(format!(
                    "column {} ({}) leaves [-1, 1]",
                    c + 1,
                    table.header[c]
                )));
            }
        }
    }
    DesignOfExperiments::with_options(x, f, &table.header[output_col], options.normalized)
}

pub fn read_doe(path: impl AsRef<Path>, options: &DoeReadOptions) -> Result<DesignOfExperiments<f64>> {
    parse_doe(&read_text(path.as_ref())?, options)
}

/// Header `x1,…,xd,<objective>`.
pub fn doe_to_string(doe: &DesignOfExperiments<f64>) -> Result<String> {
    let mut header = numbered("x", doe.dim());
    header.push(if doe.objective_name.is_empty() { "f".into() } else { doe.objective_name.clone() });
    let rows: Vec<Vec<String>> = (0..doe.len())
        .map(|i| {
            let mut r: Vec<String> = doe.inputs().row(i).iter().map(|&v| format_number(v)).collect();
            r.push(format_number(doe.outputs()[i]));
            r
        })
        .collect();
    render_csv(&header, &rows)
}

pub fn write_doe(path: impl AsRef<Path>, doe: &DesignOfExperiments<f64>) -> Result<()> {
    write_text(path.as_ref(), &doe_to_string(doe)?)
}

// ---------------------------------------------------------------------------
// Subspaces and exports

/// Header `u1,…,un`, one row per ambient coordinate.
pub fn subspace_to_string(u: &Subspace<f64>) -> Result<String> {
    render_csv(&numbered("u", u.dim()), &matrix_cells(u.matrix()))
}

pub fn parse_subspace(text: &str) -> Result<Subspace<f64>> {
    let table = parse_table(text)?;
    if table.rows.is_empty() {
        return Err(Error::Parse { line: 2, message: "no rows".into() });
    }
    Subspace::from_columns(table.to_matrix())
}

pub fn write_subspace(path: impl AsRef<Path>, u: &Subspace<f64>) -> Result<()> {
    write_text(path.as_ref(), &subspace_to_string(u)?)
}

pub fn read_subspace(path: impl AsRef<Path>) -> Result<Subspace<f64>> {
    parse_subspace(&read_text(path.as_ref())?)
}

/// Header `y1[,y2,…],f`: projected coordinates next to each output.
pub fn summary_plot_to_string(coords: &DMatrix<f64>, outputs: &DVector<f64>) -> Result<String> {
    if coords.nrows() != outputs.len() {
        return Err(Error::InvalidArgument(format!("{} projected rows but {} outputs", coords.nrows(), outputs.len())));
    }
    let mut header = numbered("y", coords.ncols());
    header.push("f".into());
    let mut rows = matrix_cells(coords);
    for (r, &f) in rows.iter_mut().zip(outputs.iter()) {
        r.push(format_number(f));
    }
    render_csv(&header, &rows)
}

/// Header `y1,y2,value`, in the order produced by the grid routine.
pub fn contour_to_string(grid: &[[f64; 3]]) -> Result<String> {
    let header = ["y1", "y2", "value"].map(String::from);
    let rows: Vec<Vec<String>> = grid.iter().map(|p| p.iter().map(|&v| format_number(v)).collect()).collect();
    render_csv(&header, &rows)
}

/// Header `design_id,x1,…,xd,weight1,…,weightd`.
pub fn parallel_coordinates_to_string(designs: &[DVector<f64>], weights: &[DVector<f64>]) -> Result<String> {
    if designs.len() != weights.len() {
        return Err(Error::InvalidArgument("one weight row per design required".into()));
    }
    let d = designs.first().map_or(0, |x| x.len());
    if designs.iter().chain(weights).any(|v| v.len() != d) {
        return Err(Error::InvalidArgument("designs and weights must share one dimension".into()));
    }
    let mut header = vec!["design_id".to_string()];
    header.extend(numbered("x", d));
    header.extend(numbered("weight", d));
    let rows: Vec<Vec<String>> = designs
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(id, (x, w))| {
            let mut r = vec![id.to_string()];
            r.extend(x.iter().chain(w.iter()).map(|&v| format_number(v)));
            r
        })
        .collect();
    render_csv(&header, &rows)
}

/// Header `design_id,y1,…,yn,predicted,extrapolated`.
pub fn cross_projection_to_string(cross: &[CrossProjection<f64>]) -> Result<String> {
    let n = cross.first().map_or(0, |c| c.y.len());
    let mut header = vec!["design_id".to_string()];
    header.extend(numbered("y", n));
    header.push("predicted".into());
    header.push("extrapolated".into());
    let rows: Vec<Vec<String>> = cross
        .iter()
        .enumerate()
        .map(|(id, c)| {
            let mut r = vec![id.to_string()];
            r.extend(c.y.iter().map(|&v| format_number(v)));
            r.push(format_number(c.predicted));
            r.push(c.extrapolated.to_string());
            r
        })
        .collect();
    render_csv(&header, &rows)
}

pub fn write_string(path: impl AsRef<Path>, text: &str) -> Result<()> {
    write_text(path.as_ref(), text)
}

// ---------------------------------------------------------------------------
// JSON documents

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_of(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceDoc {
    /// Row `i` holds coordinate `i` of every basis vector.
    pub rows: Vec<Vec<f64>>,
}

impl From<&Subspace<f64>> for SubspaceDoc {
    fn from(u: &Subspace<f64>) -> Self {
        Self { rows: rows_of(u.matrix()) }
    }
}

impl SubspaceDoc {
    pub fn to_subspace(&self) -> Result<Subspace<f64>> {
        Subspace::from_columns(matrix_of(&self.rows, "subspace")?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisName {
    Total,
    Tensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDoc {
    pub kind: BasisName,
    pub degree: usize,
    pub dimension: usize,
}

impl From<&MultiIndexSet> for BasisDoc {
    fn from(idx: &MultiIndexSet) -> Self {
        let (kind, degree) = match idx.kind() {
            BasisKind::TotalOrder(p) => (BasisName::Total, p),
            BasisKind::TensorOrder(p) => (BasisName::Tensor, p),
        };
        Self { kind, degree, dimension: idx.dimension() }
    }
}

impl BasisDoc {
    pub fn kind(&self) -> BasisKind {
        match self.kind {
            BasisName::Total => BasisKind::TotalOrder(self.degree),
            BasisName::Tensor => BasisKind::TensorOrder(self.degree),
        }
    }

    pub fn to_index_set(&self) -> Result<MultiIndexSet> {
        MultiIndexSet::new(self.kind(), self.dimension)
    }

    fn checked(&self, coefficients: usize) -> Result<MultiIndexSet> {
        let idx = self.to_index_set()?;
        if idx.len() != coefficients {
            return Err(Error::InvalidArgument(format!(
                "basis has {} terms but {} coefficients were stored",
                idx.len(),
                coefficients
            )));
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDoc {
    pub basis: BasisDoc,
    pub alpha: Vec<f64>,
    pub r_squared: f64,
    pub y_bounds: Vec<[f64; 2]>,
    pub rank_deficient: bool,
}

impl From<&ResponseSurface<f64>> for SurfaceDoc {
    fn from(s: &ResponseSurface<f64>) -> Self {
        Self {
            basis: BasisDoc::from(&s.index_set),
            alpha: s.alpha.iter().copied().collect(),
            r_squared: s.r_squared,
            y_bounds: s.y_bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            rank_deficient: s.rank_deficient,
        }
    }
}

impl SurfaceDoc {
    pub fn to_surface(&self) -> Result<ResponseSurface<f64>> {
        let index_set = self.basis.checked(self.alpha.len())?;
        if self.y_bounds.len() != self.basis.dimension {
            return Err(Error::InvalidArgument("one bound pair per reduced coordinate required".into()));
        }
        Ok(ResponseSurface {
            index_set,
            alpha: DVector::from_column_slice(&self.alpha),
            r_squared: self.r_squared,
            y_bounds: self.y_bounds.iter().map(|b| (b[0], b[1])).collect(),
            rank_deficient: self.rank_deficient,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDoc {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_hi: Option<Vec<f64>>,
    pub replicates: usize,
    pub subsample_size: usize,
}

impl From<&EigenReport<f64>> for EigenDoc {
    fn from(r: &EigenReport<f64>) -> Self {
        Self {
            eigenvalues: r.eigenvalues.clone(),
            eigenvectors: rows_of(&r.eigenvectors),
            bootstrap_lo: r.bootstrap_lo.clone(),
            bootstrap_hi: r.bootstrap_hi.clone(),
            replicates: r.replicates,
            subsample_size: r.subsample_size,
        }
    }
}

impl EigenDoc {
    pub fn to_report(&self) -> Result<EigenReport<f64>> {
        Ok(EigenReport {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: matrix_of(&self.eigenvectors, "eigenvectors")?,
            bootstrap_lo: self.bootstrap_lo.clone(),
            bootstrap_hi: self.bootstrap_hi.clone(),
            replicates: self.replicates,
            subsample_size: self.subsample_size,
        })
    }
}

/// Quadratic fit, its gradient covariance and the resulting active subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDoc {
    pub objective: String,
    pub gamma: f64,
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub e: f64,
    pub rank: usize,
    pub rank_deficient: bool,
    pub covariance: Vec<Vec<f64>>,
    pub eigen: EigenDoc,
    pub subspace: SubspaceDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeDoc {
    pub objective: String,
    pub seed: u64,
    pub restarts: usize,
    pub subspace: SubspaceDoc,
    pub basis: BasisDoc,
    pub alpha: Vec<f64>,
    pub residual_norm: f64,
    pub r_squared: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart: usize,
}

impl RidgeDoc {
    pub fn new(model: &RidgeModel<f64>, objective: &str, seed: u64, restarts: usize) -> Self {
        Self {
            objective: objective.to_string(),
            seed,
            restarts,
            subspace: SubspaceDoc::from(&model.subspace),
            basis: BasisDoc::from(&model.index_set),
            alpha: model.alpha.iter().copied().collect(),
            residual_norm: model.residual_norm,
            r_squared: model.r_squared,
            iterations: model.iterations,
            converged: model.converged,
            restart: model.restart,
        }
    }

    pub fn to_model(&self) -> Result<RidgeModel<f64>> {
        Ok(RidgeModel {
            subspace: self.subspace.to_subspace()?,
            index_set: self.basis.checked(self.alpha.len())?,
            alpha: DVector::from_column_slice(&self.alpha),
            residual_norm: self.residual_norm,
            r_squared: self.r_squared,
            iterations: self.iterations,
            converged: self.converged,
            restart: self.restart,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdrMethod {
    Sir,
    Save,
    Phd,
    Cr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdrDoc {
    pub objective: String,
    pub method: SdrMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub subspace: SubspaceDoc,
    pub eigenvalues: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub whitener: Vec<Vec<f64>>,
    pub degenerate_slices: usize,
}

impl SdrDoc {
    pub fn new(estimate: &SdrEstimate<f64>, objective: &str, method: SdrMethod) -> Self {
        Self {
            objective: objective.to_string(),
            method,
            slices: None,
            tolerance: None,
            seed: None,
            subspace: SubspaceDoc::from(&estimate.subspace),
            eigenvalues: estimate.eigenvalues.clone(),
            matrix: rows_of(&estimate.matrix),
            mean: estimate.standardization.mean.iter().copied().collect(),
            whitener: rows_of(&estimate.standardization.whitener),
            degenerate_slices: estimate.degenerate_slices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDoc {
    pub objective: String,
    pub gamma: f64,
    pub seed: u64,
    pub eigen: EigenDoc,
}

/// Everything the explorer needs about one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPointDoc {
    pub name: String,
    pub objective: String,
    pub subspace: SubspaceDoc,
    pub surface: SurfaceDoc,
    /// Projected training inputs, one row per sample.
    pub training_y: Vec<Vec<f64>>,
    pub training_f: Vec<f64>,
}

/// Decoded form of [`OperatingPointDoc`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub name: String,
    pub objective: String,
    pub subspace: Subspace<f64>,
    pub surface: ResponseSurface<f64>,
    pub training_y: DMatrix<f64>,
    pub training_f: DVector<f64>,
}

impl OperatingPointDoc {
    pub fn new(point: &OperatingPoint) -> Self {
        Self {
            name: point.name.clone(),
            objective: point.objective.clone(),
            subspace: SubspaceDoc::from(&point.subspace),
            surface: SurfaceDoc::from(&point.surface),
            training_y: rows_of(&point.training_y),
            training_f: point.training_f.iter().copied().collect(),
        }
    }

    pub fn decode(&self) -> Result<OperatingPoint> {
        let subspace = self.subspace.to_subspace()?;
        let surface = self.surface.to_surface()?;
        if surface.dim() != subspace.dim() {
            return Err(Error::InvalidArgument(format!(
                "surface is over {} coordinates but the subspace has {} columns",
                surface.dim(),
                subspace.dim()
            )));
        }
        let training_y = if self.training_y.is_empty() {
            DMatrix::zeros(0, subspace.dim())
        } else {
            matrix_of(&self.training_y, "training_y")?
        };
        if training_y.ncols() != subspace.dim() || training_y.nrows() != self.training_f.len() {
            return Err(Error::InvalidArgument("training projections do not match the subspace or outputs".into()));
        }
        Ok(OperatingPoint {
            name: self.name.clone(),
            objective: self.objective.clone(),
            subspace,
            surface,
            training_y,
            training_f: DVector::from_column_slice(&self.training_f),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDoc {
    pub x: Vec<f64>,
    pub strategy: String,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignBatchDoc {
    pub point: String,
    pub seed: u64,
    pub y: Vec<f64>,
    pub short: bool,
    pub null_space_empty: bool,
    pub designs: Vec<DesignDoc>,
}

impl DesignBatchDoc {
    pub fn new(batch: &DesignBatch<f64>, point: &str, seed: u64) -> Self {
        Self {
            point: point.to_string(),
            seed,
            y: batch.y.clone(),
            short: batch.short,
            null_space_empty: batch.null_space_empty,
            designs: batch
                .designs
                .iter()
                .map(|d| DesignDoc { x: d.x.iter().copied().collect(), strategy: d.strategy.as_str().into(), slack: d.slack })
                .collect(),
        }
    }

    pub fn design_vectors(&self) -> Vec<DVector<f64>> {
        self.designs.iter().map(|d| DVector::from_column_slice(&d.x)).collect()
    }

    pub fn to_batch(&self) -> Result<DesignBatch<f64>> {
        let designs = self
            .designs
            .iter()
            .map(|d| {
                let strategy = match d.strategy.as_str() {
                    s if s == DesignStrategy::ChebyshevCenter.as_str() => DesignStrategy::ChebyshevCenter,
                    s if s == DesignStrategy::RandomVertex.as_str() => DesignStrategy::RandomVertex,
                    other => return Err(Error::InvalidArgument(format!("unknown design strategy {other:?}"))),
                };
                Ok(crate::design::Design { x: DVector::from_column_slice(&d.x), strategy, slack: d.slack })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignBatch { y: self.y.clone(), designs, short: self.short, null_space_empty: self.null_space_empty })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationDoc {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl From<&NormalizationMap<f64>> for NormalizationDoc {
    fn from(m: &NormalizationMap<f64>) -> Self {
        Self { lower: m.lower.clone(), upper: m.upper.clone() }
    }
}

impl NormalizationDoc {
    pub fn to_map(&self) -> Result<NormalizationMap<f64>> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::InvalidArgument("lower and upper bounds differ in length".into()));
        }
        Ok(NormalizationMap { lower: self.lower.clone(), upper: self.upper.clone() })
    }
}

/// Any JSON artifact written by the toolkit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Quadratic(QuadraticDoc),
    Ridge(RidgeDoc),
    Sdr(SdrDoc),
    Bootstrap(BootstrapDoc),
    OperatingPoint(OperatingPointDoc),
    DesignBatch(DesignBatchDoc),
    Normalization(NormalizationDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Quadratic(_) => "quadratic",
            Document::Ridge(_) => "ridge",
            Document::Sdr(_) => "sdr",
            Document::Bootstrap(_) => "bootstrap",
            Document::OperatingPoint(_) => "operating_point",
            Document::DesignBatch(_) => "design_batch",
            Document::Normalization(_) => "normalization",
        }
    }

    /// Subspace carried by the document, if any.
    pub fn subspace(&self) -> Option<Result<Subspace<f64>>> {
        match self {
            Document::Quadratic(d) => Some(d.subspace.to_subspace()),
            Document::Ridge(d) => Some(d.subspace.to_subspace()),
            Document::Sdr(d) => Some(d.subspace.to_subspace()),
            Document::OperatingPoint(d) => Some(d.subspace.to_subspace()),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<D> {
    version: u32,
    #[serde(flatten)]
    document: D,
}

/// Pretty JSON with every `f64` in 17-significant-digit exponent form.
///
/// Non-finite numbers reach the formatter as nulls and fail to encode.
pub struct ExactFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl Default for ExactFormatter {
    fn default() -> Self {
        Self { inner: serde_json::ser::PrettyFormatter::with_indent(b"  ") }
    }
}

impl serde_json::ser::Formatter for ExactFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if !value.is_finite() {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("cannot encode {value}")));
        }
        writer.write_all(format_number(value).as_bytes())
    }

    fn write_null<W: ?Sized + std::io::Write>(&mut self, _writer: &mut W) -> std::io::Result<()> {
        Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "non-finite number or null value"))
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes any value with [`ExactFormatter`], terminated by a newline.
///
/// Nulls are rejected, so optional fields must be skipped when absent.
pub fn to_exact_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFormatter::default());
    value.serialize(&mut ser).map_err(|e| Error::InvalidArgument(format!("cannot serialize: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Serializes a document together with its `version` and `kind` fields.
pub fn document_to_string(doc: &Document) -> Result<String> {
    to_exact_json(&Envelope { version: FORMAT_VERSION, document: doc })
}

pub fn parse_document(text: &str) -> Result<Document> {
    #[derive(Deserialize)]
    struct Version {
        version: Option<u32>,
    }
    let parse_err = |e: serde_json::Error| Error::Parse { line: e.line(), message: e.to_string() };
    let v: Version = serde_json::from_str(text).map_err(parse_err)?;
    match v.version {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(Error::InvalidArgument(format!("unsupported document version {other}"))),
        None => return Err(Error::InvalidArgument("document has no version field".into())),
    }
    let env: Envelope<Document> = serde_json::from_str(text).map_err(parse_err)?;
    Ok(env.document)
}

pub fn write_document(path: impl AsRef<Path>, doc: &Document) -> Result<()> {
    write_text(path.as_ref(), &document_to_string(doc)?)
}

pub fn read_document(path: impl AsRef<Path>) -> Result<Document> {
    parse_document(&read_text(path.as_ref())?)
}

pub fn read_operating_point(path: impl AsRef<Path>) -> Result<OperatingPoint> {
    let path = path.as_ref();
    match read_document(path)? {
        Document::OperatingPoint(d) => d.decode(),
        other => Err(Error::InvalidArgument(format!(
            "{}: expected an operating_point document, found {}",
            path.display(),
            other.kind()
        ))),
    }
}
