//! Scalar abstraction shared by every numerical module.
//!
//! The dynamics, the eigen-solver and the concurrence are written once over
//! [`Real`] and instantiated for `f32` and `f64`. Tolerances in this crate are
//! quoted for double precision; [`Real::tol`] widens them for narrower types.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub type Cx<T> = Complex<T>;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts a literal. Every `f64` literal used in this crate is
    /// representable (possibly rounded) in every implementor.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// A tolerance quoted for `f64`, rescaled to this type's precision.
    ///
    /// Returns `x` unchanged for `f64`. For wider-epsilon types the tolerance
    /// grows with the square root of the epsilon ratio and never drops below
    /// sixteen ulps at one.
    fn tol(x: f64) -> Self {
        let ratio = Self::epsilon().to_f64().unwrap_or(f64::EPSILON) / f64::EPSILON;
        let scaled = x * ratio.sqrt();
        let floor = 16.0 * Self::epsilon().to_f64().unwrap_or(f64::EPSILON);
        Self::lit(scaled.max(floor).max(x))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
#[cfg(test)]
pub(crate) fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Cx::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Cx::new(x, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_is_identity_for_f64() {
        assert_eq!(<f64 as Real>::tol(1e-12), 1e-12);
        assert_eq!(<f64 as Real>::tol(1e-9), 1e-9);
    }

    #[test]
    fn tol_widens_for_f32() {
        let t = <f32 as Real>::tol(1e-12);
        assert!(t > 1e-7 && t < 1e-4, "{t}");
        assert!(<f32 as Real>::tol(1e-9) >= <f32 as Real>::tol(1e-12));
    }
}
