//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All math is written against [`Real`] so the same code runs in `f32`
//! (cheap exploratory sweeps) and `f64` (the default used by the harness).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts a literal. Every `f64` literal is representable (possibly
    /// rounded) in both supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal fits the scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Uniform variate on `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal variate.
    fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Gamma variate with the given shape and scale (both positive).
    fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, scale: Self) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            #[inline]
            fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: Self, scale: Self) -> Self {
                Gamma::new(shape, scale)
                    .expect("gamma parameters validated by the caller")
                    .sample(rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
