//! Exact rational scalars.
//!
//! Every quantity in this crate is a `Scalar`: an arbitrary-precision
//! rational kept in lowest terms with a positive denominator (both
//! guaranteed by `num_rational::BigRational`). There is no floating
//! point anywhere; comparisons and arithmetic are exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Scalar = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("empty scalar literal")]
    Empty,
    #[error("invalid integer part in {0:?}")]
    BadInteger(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// The integer `n` as a scalar.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// The fraction `num/den` as a scalar. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Scalar {
    assert!(den != 0, "zero denominator");
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

/// 1/n for a positive integer, e.g. a weight 1/m_j.
pub fn unit_fraction(den: u64) -> Scalar {
    assert!(den != 0, "zero denominator");
    Scalar::new(BigInt::one(), BigInt::from(den))
}

pub fn is_zero(x: &Scalar) -> bool {
    x.is_zero()
}

pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

/// Canonical serialisation: always `num/den`, lowest terms, den > 0.
pub fn format_scalar(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `num/den` or a bare integer.
pub fn parse_scalar(s: &str) -> Result<Scalar, ScalarParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ScalarParseError::Empty);
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_str
        .parse()
        .map_err(|_| ScalarParseError::BadInteger(s.to_string()))?;
    let den: BigInt = den_str
        .parse()
        .map_err(|_| ScalarParseError::BadInteger(s.to_string()))?;
    if den.is_zero() {
        return Err(ScalarParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Scalar::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let x = ratio(2, -4);
        assert_eq!(x, ratio(-1, 2));
        assert_eq!(format_scalar(&x), "-1/2");
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["3/4", "-7/2", "0/1", "12"] {
            let x = parse_scalar(s).unwrap();
            assert_eq!(parse_scalar(&format_scalar(&x)).unwrap(), x);
        }
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("").is_err());
        assert!(parse_scalar("a/b").is_err());
    }
}
