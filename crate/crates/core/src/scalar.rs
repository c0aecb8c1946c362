//! Numeric abstraction shared by beliefs, value tables and response functions.
//!
//! Everything that only adds, multiplies and compares probabilities or values
//! is written against [`Scalar`], so the same code runs in `f64` for Monte
//! Carlo estimation and in [`BigRational`] for exact enumeration.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// A number usable as a probability weight or an expected return.
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + Display + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Converts a finite `f64`. Rationals take the exact binary expansion.
    fn from_f64(x: f64) -> Self;

    /// `num / den` in this representation.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Picks whichever of two equivalent encodings suits the representation:
    /// floats take `approx`, rationals take `exact`.
    fn from_parts(approx: f64, exact: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Natural exponential. Rationals round-trip through `f64`.
    fn exp(&self) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_f64(x: f64) -> Self {
                x as $t
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn from_parts(approx: f64, _exact: &BigRational) -> Self {
                approx as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    const EXACT: bool = true;

    /// Uses the shortest decimal that round-trips, so `0.1` becomes `1/10`.
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "finite value required for exact arithmetic");
        parse_rational(&format!("{x}")).expect("decimal rendering of a finite float")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_parts(_approx: f64, exact: &BigRational) -> Self {
        exact.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn exp(&self) -> Self {
        <Self as Scalar>::from_f64(Scalar::to_f64(self).exp())
    }
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v)
}

/// The larger of two scalars; `a` on ties.
pub fn max<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// `|a - b| <= tol`, evaluated in `f64`.
pub fn approx_eq<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    (a.clone() - b.clone()).abs().to_f64() <= tol
}

/// Index of the first maximal entry, or `None` for an empty slice.
pub fn argmax_first<S: Scalar>(values: &[S]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if *v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Parses `"0.25"`, `"1/4"` or `"3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = BigRational::new(num, den);
        return Some(if negative { -value } else { value });
    }
    let num: BigInt = text.parse().ok()?;
    Some(BigRational::new(num, BigInt::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    #[test]
    fn rationals_are_exact() {
        let sum = q(1, 3) + q(1, 3) + q(1, 3);
        assert!(sum.is_one());
        assert_eq!(<BigRational as Scalar>::from_f64(0.25), q(1, 4));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/4"), Some(q(1, 4)));
        assert_eq!(parse_rational("0.25"), Some(q(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(q(-3, 2)));
        assert_eq!(parse_rational("2"), Some(q(2, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_first::<f64>(&[]), None);
    }
}
