//! Scalar abstraction: the numerical core is generic over `f32`/`f64`.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the math layers are generic over.
///
/// Concrete aliases for the `f64` instantiation of every domain type live at
/// the crate root.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` constant. Panics only on non-finite input.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Widening (f32) or identity (f64) conversion used at RNG boundaries.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

/// `0 + 0i`.
pub fn czero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

/// `1 + 0i`.
pub fn cone<T: Real>() -> C<T> {
    C::new(T::one(), T::zero())
}

/// `0 + 1i`.
pub fn ci<T: Real>() -> C<T> {
    C::new(T::zero(), T::one())
}

/// Real scalar promoted to the complex plane.
pub fn cr<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// Unit phasor `e^{i phi}`.
pub fn cis<T: Real>(phi: T) -> C<T> {
    C::new(phi.cos(), phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_roundtrip() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25f32);
        assert_eq!(0.5f32.as_f64(), 0.5);
    }

    #[test]
    fn cis_is_unit() {
        let z: C<f64> = cis(1.234);
        assert!((z.norm() - 1.0).abs() < 1e-15);
    }
}
