//! Exact rational numbers and their `"p/q"` string encoding.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{input, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Canonical encoding: always `p/q` in lowest terms with a positive denominator.
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_pq(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p
        .parse()
        .map_err(|_| crate::Error::Input(format!("bad rational numerator in {s:?}")))?;
    let q: BigInt = q
        .parse()
        .map_err(|_| crate::Error::Input(format!("bad rational denominator in {s:?}")))?;
    if q.is_zero() {
        return input(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(p, q))
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

/// Serializes any displayable value (big integers, mostly) as a JSON string.
pub(crate) fn ser_display<T: std::fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}
