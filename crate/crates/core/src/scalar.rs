//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the expression engine and all constructors are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// (1e-9 boundary residuals, 1e-12 oracle agreement) assume `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a small integer (binomial coefficients, polynomial degrees).
    fn of_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// True when `self` is an exact integer.
    fn is_integral(self) -> bool {
        self.is_finite() && self.fract() == Self::zero()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Binomial coefficient C(n, k) as a scalar.
pub fn binomial<T: Scalar>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k as u64 {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    T::of(acc as f64)
}

/// `count` uniformly spaced values over `[lo, hi]`, endpoints included.
pub fn linspace<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::of_int(count as i64 - 1);
            (0..count).map(|i| if i + 1 == count { hi } else { lo + step * T::of_int(i as i64) }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial::<f64>(4, 2), 6.0);
        assert_eq!(binomial::<f64>(5, 0), 1.0);
        assert_eq!(binomial::<f64>(3, 4), 0.0);
        assert_eq!(binomial::<f32>(6, 3), 20.0);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(-2.0_f64, 1.0, 4);
        assert_eq!(v, vec![-2.0, -1.0, 0.0, 1.0]);
        assert_eq!(linspace(0.0_f64, 1.0, 1), vec![0.0]);
    }
}
