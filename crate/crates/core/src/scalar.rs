//! Scalar abstractions.
//!
//! Exact linear algebra (fraction-free elimination) runs over any
//! [`ExactScalar`]: machine integers when entries provably fit, big integers
//! otherwise, or big rationals. Information measures are generic over a
//! floating [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

use crate::Rational;

/// Integral domain with exact division of multiples (as used by Bareiss
/// elimination). `i64`, `i128`, `BigInt` and `BigRational` all qualify.
pub trait ExactScalar: Num + Signed + Clone + FromPrimitive + Debug {}

impl<T> ExactScalar for T where T: Num + Signed + Clone + FromPrimitive + Debug {}

/// Floating scalar for entropies and divergences.
pub trait Real: Float + FromPrimitive + Debug {}

impl<T> Real for T where T: Float + FromPrimitive + Debug {}

/// Nearest floating value of an exact rational.
pub fn to_real<F: Real>(q: &Rational) -> F {
    let v = q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN);
    if v.is_finite() {
        return F::from_f64(v).unwrap_or_else(F::nan);
    }
    // Very large numerator or denominator: scale down by the bit excess.
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900);
    let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(0.0);
    F::from_f64(n / d).unwrap_or_else(F::nan)
}

/// Base-2 logarithm of a strictly positive rational.
pub fn log2_rational<F: Real>(q: &Rational) -> F {
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    // Normalise both to at most 60 significant bits before converting.
    let ns = (nb - 60).max(0);
    let ds = (db - 60).max(0);
    let n = (q.numer() >> ns as usize).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> ds as usize).to_f64().unwrap_or(f64::NAN);
    F::from_f64(n.log2() - d.log2() + (ns - ds) as f64).unwrap_or_else(F::nan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn rational_to_real() {
        let q = Rational::new(BigInt::from(3), BigInt::from(8));
        assert_eq!(to_real::<f64>(&q), 0.375);
        assert_eq!(to_real::<f32>(&q), 0.375f32);
        let huge = Rational::new(BigInt::from(1) << 2000usize, (BigInt::from(1) << 1999usize) * 3);
        assert!((to_real::<f64>(&huge) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn log2_of_rationals() {
        let q = Rational::new(BigInt::from(1), BigInt::from(1024));
        assert!((log2_rational::<f64>(&q) + 10.0).abs() < 1e-12);
        let big = Rational::from_integer(BigInt::from(3) << 500usize);
        assert!((log2_rational::<f64>(&big) - (500.0 + 3f64.log2())).abs() < 1e-9);
    }
}
