//! Real scalar abstraction for the numeric parts of the toolkit.

use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point type usable for weights, resistances and cut values.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Copy + Debug + Display + Default + Send + Sync + 'static
{
    /// Residual tolerance for iterative Laplacian solves.
    fn solver_tolerance() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Scalar for f64 {
    fn solver_tolerance() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn solver_tolerance() -> Self {
        1e-5
    }
}
