//! Dimension-reducing subspaces of black-box functions from input–output samples.
//!
//! The crate estimates a matrix `U` with orthonormal columns such that
//! `f(x) ≈ g(Uᵀx)` using five families of estimators:
//!
//! * [`quadsurf`]: a global quadratic fit and the closed-form gradient covariance,
//! * [`sdr`]: sliced inverse regression, SAVE, principal Hessian directions and
//!   contour regression,
//! * [`varpro`]: polynomial ridge approximation by variable projection.
//!
//! Recovered subspaces are compared with [`subspace::subspace_angle`], turned
//! into response surfaces, and used by [`design`] to generate box-constrained
//! designs sharing the same reduced coordinates.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to double precision, which is what the file
//! formats in [`io`] and the command-line tool use.

pub mod design;
pub mod doe;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod polybasis;
pub mod quadsurf;
pub mod scalar;
pub mod sdr;
pub mod simplex;
pub mod subspace;
pub mod varpro;

pub use error::{Error, Result};
pub use polybasis::{BasisKind, MultiIndexSet};
pub use scalar::Real;

pub type Subspace64 = subspace::Subspace<f64>;
pub type Doe64 = doe::DesignOfExperiments<f64>;
pub type QuadraticModel64 = quadsurf::QuadraticModel<f64>;
pub type EigenReport64 = quadsurf::EigenReport<f64>;
pub type RidgeModel64 = varpro::RidgeModel<f64>;
pub type ResponseSurface64 = subspace::ResponseSurface<f64>;
pub type SdrEstimate64 = sdr::SdrEstimate<f64>;
pub type DesignBatch64 = design::DesignBatch<f64>;
pub type LinearProgram64 = simplex::LinearProgram<f64>;

pub type Subspace32 = subspace::Subspace<f32>;
pub type Doe32 = doe::DesignOfExperiments<f32>;
