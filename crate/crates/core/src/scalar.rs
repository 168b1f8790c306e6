//! Scalar abstraction shared by the numeric kernels.
//!
//! The tape, message passing and geometry are written against [`Scalar`] so
//! they run on `f32` and `f64` alike. The model, training and evaluation code
//! uses `f64` throughout.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Finite stand-in for an infinite energy, used as a logit.
pub const BLOCKED_LOGIT: f64 = -1e9;

/// Floating point type usable by the numeric kernels.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for types that cannot hold it.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Numerically stable `log(sum(exp(xs)))`. Returns `-inf` for an empty slice.
pub fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Shifts `xs` in place so that `log_sum_exp(xs) == 0`.
pub fn normalize_log<T: Scalar>(xs: &mut [T]) {
    let z = log_sum_exp(xs);
    if z.is_finite() {
        for x in xs.iter_mut() {
            *x = *x - z;
        }
    }
}

/// Softmax of a logit vector.
pub fn softmax<T: Scalar>(xs: &[T]) -> Vec<T> {
    let z = log_sum_exp(xs);
    xs.iter().map(|&x| (x - z).exp()).collect()
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax<T: Scalar>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
