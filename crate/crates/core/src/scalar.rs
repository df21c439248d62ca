//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra as na;
use num_traits as nt;

/// Real floating-point scalar usable by the estimators: `f32` or `f64`.
///
/// Tolerances are carried per type so that checks written as "1e-10" for
/// double precision degrade sensibly for single precision.
pub trait Real:
    na::RealField + Copy + nt::FromPrimitive + nt::ToPrimitive + Debug + Display + LowerExp + Send + Sync
{
    /// Orthonormality tolerance for `UᵀU = I` checks.
    const ORTHO_TOL: f64;
    /// Relative tolerance below which a singular value is treated as zero.
    const RANK_TOL: f64;
    /// Feasibility/optimality tolerance used by the simplex solver.
    const LP_TOL: f64;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const ORTHO_TOL: f64 = 1e-4;
    const RANK_TOL: f64 = 1e-6;
    const LP_TOL: f64 = 1e-5;
}

impl Real for f64 {
    const ORTHO_TOL: f64 = 1e-10;
    const RANK_TOL: f64 = 1e-12;
    const LP_TOL: f64 = 1e-9;
}
