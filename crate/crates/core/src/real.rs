//! Scalar abstraction for the analytic layer.
//!
//! All closed-form math (entropy, Poisson weights, decoy bounds, the MDI
//! linear programs, key-rate assembly) is written against [`Real`] so it can
//! run in `f32` or `f64`. The bit-level protocol engine is deliberately not
//! generic: frames and ledgers hold bits and indices, not scalars.

use num_traits::{Float, FromPrimitive, NumAssignOps};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable throughout the analytic layer.
pub trait Real:
    Float + FromPrimitive + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; the standard way constants enter generic code.
    #[inline]
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in any Real type")
    }

    /// Lossless widening to `f64` for output formatting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Base-2 logarithm.
    #[inline]
    fn log2r(self) -> Self {
        self.log2()
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_real_roundtrip_f32_f64() {
        assert_eq!(f32::real(0.5), 0.5f32);
        assert_eq!(f64::real(0.5), 0.5f64);
        assert_eq!(0.25f64.to_f64_lossy(), 0.25);
    }
}
