use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar for all numerical routines: `f32` or `f64`.
///
/// Linear-algebra helpers additionally require `nalgebra::RealField`;
/// those bounds are stated at the function level so that the polynomial
/// core stays a plain `num-traits` consumer.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion of literal constants.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
