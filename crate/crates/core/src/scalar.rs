use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Element type of every matrix and value register.
///
/// Blanket-implemented; in practice `f64` (the modeled machine's
/// double-precision lanes) and `f32`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Parse a decimal literal as found in Matrix Market files.
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse::<f64>().ok().and_then(Self::from_f64)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
}
