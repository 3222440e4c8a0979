use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the numerical code is generic over.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Values outside the target range saturate
    /// to infinity (or flush to zero) the same way an `as` cast would.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// 2π.
    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Smallest magnitude treated as a genuine (non-zero) denominator.
    #[inline]
    fn singular_threshold() -> Self {
        Self::lit(1e-300).max(Self::min_positive_value())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Angular frequency in rad/s for a frequency in Hz.
#[inline]
pub fn hz_to_rad<T: Scalar>(f: T) -> T {
    T::two_pi() * f
}

/// Frequency in Hz for an angular frequency in rad/s.
#[inline]
pub fn rad_to_hz<T: Scalar>(w: T) -> T {
    w / T::two_pi()
}

/// `20·log10(|x|)`.
#[inline]
pub fn db<T: Scalar>(mag: T) -> T {
    T::lit(20.0) * mag.log10()
}
