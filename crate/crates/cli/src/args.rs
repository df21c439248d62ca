use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ridgekit_core::quadsurf::GAMMA_UNIFORM;
use ridgekit_core::BasisKind;

#[derive(Debug, Parser)]
#[command(name = "ridgekit", version, about = "Estimate dimension-reducing subspaces and explore designs along them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a subspace (and model) from a sample file.
    Fit {
        #[command(subcommand)]
        method: FitCommand,
    },
    /// Eigenvalue bands of the quadratic-model covariance over subsample refits.
    Bootstrap(BootstrapArgs),
    /// Subspace distance angle between two subspaces.
    Angle(AngleArgs),
    /// Project samples onto a subspace (sufficient summary plot data).
    Project(ProjectArgs),
    /// Fit a polynomial surface over projected samples and save an operating point.
    Surface(SurfaceArgs),
    /// Evaluate an operating point's surface on a regular grid.
    Contour(ContourArgs),
    /// Generate or cross-project designs with fixed reduced coordinates.
    Design {
        #[command(subcommand)]
        action: DesignCommand,
    },
    /// Write synthetic sample sets with known structure.
    Synth {
        #[command(subcommand)]
        kind: SynthCommand,
    },
    /// Pressure ratio, temperature ratio, efficiency and capacities of a stage.
    Metrics(MetricsArgs),
    /// Rescale inputs column-wise onto [-1, 1] and save the map.
    Normalize(NormalizeArgs),
    /// Serve two operating points over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Total,
    Tensor,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Sample file with header x1,...,xd,f.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Reject inputs outside [-1, 1].
    #[arg(long)]
    pub normalized: bool,
    /// Input columns by header name (default: all but the last).
    #[arg(long, value_delimiter = ',', requires = "output_column")]
    pub input_columns: Option<Vec<String>>,
    /// Output column by header name (default: the last).
    #[arg(long, requires = "input_columns")]
    pub output_column: Option<String>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BasisArgs {
    /// Polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, value_enum, default_value = "total")]
    pub basis: BasisArg,
}

impl BasisArgs {
    pub fn kind(&self, default_degree: usize) -> BasisKind {
        let p = self.degree.unwrap_or(default_degree);
        match self.basis {
            BasisArg::Total => BasisKind::TotalOrder(p),
            BasisArg::Tensor => BasisKind::TensorOrder(p),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    /// Model file (JSON).
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    /// Also write the subspace as CSV.
    #[arg(long, value_name = "CSV")]
    pub subspace_out: Option<PathBuf>,
    /// Also write the projected samples as CSV.
    #[arg(long, value_name = "CSV")]
    pub summary_out: Option<PathBuf>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Subcommand)]
pub enum FitCommand {
    /// Global quadratic fit and the eigenvectors of its gradient covariance.
    Quad {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        export: ExportArgs,
        /// Subspace dimension (default: largest eigenvalue gap).
        #[arg(long)]
        n: Option<usize>,
        /// Largest dimension considered by the gap rule.
        #[arg(long)]
        max_dim: Option<usize>,
        /// Input second moment in the covariance formula.
        #[arg(long, default_value_t = GAMMA_UNIFORM, value_parser = positive_f64)]
        gamma: f64,
        /// Fit even with fewer than 1.5 samples per coefficient.
        #[arg(long)]
        allow_undersampled: bool,
    },
    /// Sliced inverse regression.
    Sir {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        export: ExportArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = ridgekit_core::sdr::DEFAULT_SLICES)]
        slices: usize,
    },
    /// Sliced average variance estimation.
    Save {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        export: ExportArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = ridgekit_core::sdr::DEFAULT_SLICES)]
        slices: usize,
    },
    /// Principal Hessian directions.
    Phd {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        export: ExportArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Contour regression.
    Cr {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        export: ExportArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Pair tolerance on output differences.
        #[arg(long = "tolerance-c", value_parser = positive_f64)]
        tolerance_c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Subsample to this many points before forming pairs.
        #[arg(long, default_value_t = ridgekit_core::sdr::DEFAULT_PAIR_CAP)]
        pair_cap: usize,
    },
    /// Polynomial ridge approximation by variable projection.
    Varpro {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        export: ExportArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        max_iterations: usize,
    },
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Rows drawn without replacement per replicate.
    #[arg(long)]
    pub subsample: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = GAMMA_UNIFORM, value_parser = positive_f64)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct AngleArgs {
    /// Subspace CSV or model JSON.
    #[arg(long)]
    pub a: PathBuf,
    /// Subspace CSV or model JSON.
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Subspace CSV or model JSON.
    #[arg(long)]
    pub subspace: PathBuf,
    /// Summary-plot CSV with header y1[,y2,...],f.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Subspace CSV or model JSON.
    #[arg(long)]
    pub subspace: PathBuf,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Operating-point name.
    #[arg(long, default_value = "point")]
    pub name: String,
    /// Operating-point JSON.
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    /// Operating-point JSON.
    #[arg(long)]
    pub point: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Grid CSV with header y1,y2,value.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum DesignCommand {
    /// Chebyshev center plus random vertices of the feasible slice.
    Generate {
        /// Operating-point JSON.
        #[arg(long)]
        point: PathBuf,
        /// Reduced coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Design batch JSON.
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
        /// Parallel-coordinates CSV.
        #[arg(long, value_name = "CSV")]
        parallel_out: Option<PathBuf>,
    },
    /// Project a design batch onto another operating point.
    Crossproject {
        /// Design batch JSON.
        #[arg(long)]
        designs: PathBuf,
        /// Operating-point JSON of the other point.
        #[arg(long)]
        point: PathBuf,
        /// CSV with header design_id,y1,...,predicted,extrapolated.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// exp(x1 + x2 + x3 + x4) on [-1, 1]^4.
    Exp {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out", value_name = "CSV")]
        out: PathBuf,
    },
    /// Exact quadratic with a prescribed Hessian spectrum.
    Quad {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hessian eigenvalues, comma separated (default: 1, 1/2, 1/4, ...).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        spectrum: Option<Vec<f64>>,
        /// Include a random linear term.
        #[arg(long)]
        linear: bool,
        #[arg(long = "out", value_name = "CSV")]
        out: PathBuf,
        /// Ground-truth model JSON.
        #[arg(long, value_name = "JSON")]
        truth_out: Option<PathBuf>,
        #[arg(long, default_value_t = GAMMA_UNIFORM, value_parser = positive_f64)]
        gamma: f64,
    },
    /// Cubic ridge (u'x)^3 + u'x along a random unit direction.
    Ridge {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 300)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out", value_name = "CSV")]
        out: PathBuf,
        /// True direction as a subspace CSV.
        #[arg(long, value_name = "CSV")]
        truth_out: Option<PathBuf>,
    },
}

fn station(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected MASS_FLOW,PRESSURE,TEMPERATURE, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|_| format!("cannot parse {p:?} as a number"))?;
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Inlet mass flow, stagnation pressure and temperature.
    #[arg(long, value_parser = station, value_name = "M,P,T")]
    pub inlet: [f64; 3],
    #[arg(long, value_parser = station, value_name = "M,P,T")]
    pub bypass: [f64; 3],
    #[arg(long, value_parser = station, value_name = "M,P,T")]
    pub core: [f64; 3],
    #[arg(long, default_value_t = ridgekit_core::metrics::DEFAULT_HEAT_RATIO)]
    pub heat_ratio: f64,
    /// Optional one-row CSV of the results.
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', requires = "output_column")]
    pub input_columns: Option<Vec<String>>,
    #[arg(long, requires = "input_columns")]
    pub output_column: Option<String>,
    /// Normalized sample file.
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    /// Per-column bounds JSON.
    #[arg(long, value_name = "JSON")]
    pub map: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// First operating-point JSON.
    #[arg(long)]
    pub a: PathBuf,
    /// Second operating-point JSON.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}
