//! Exact arithmetic helpers: binomial coefficients over big integers and the
//! `"num/den"` text form used for every rational that crosses a file boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Ratio = BigRational;

/// `C(a, b)` with the conventions `C(a, b) = 0` for `b < 0` or `b > a`
/// and `C(a, 0) = 1` for `a >= 0`.
pub fn binom(a: i64, b: i64) -> BigInt {
    if b < 0 || a < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigInt::one();
    for k in 0..b {
        acc *= a - k;
        acc /= k + 1;
    }
    acc
}

pub fn int(v: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_bigint(v: BigInt) -> Ratio {
    Ratio::from_integer(v)
}

/// Canonical text form: always `num/den` in lowest terms, denominator positive.
pub fn format_ratio(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"a/b"`, `"a"` and surrounding whitespace.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let s = s.trim();
    let bad = || Error::Parameter(format!("malformed rational {s:?}, expected \"num/den\""));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parameter(format!("zero denominator in {s:?}")));
    }
    Ok(Ratio::new(num, den))
}

/// Smallest integer `k` with `k >= r`.
pub fn ceil_to_int(r: &Ratio) -> BigInt {
    r.ceil().to_integer()
}

pub fn is_positive(r: &Ratio) -> bool {
    r.is_positive()
}

/// Serde adapter storing a [`Ratio`] as its canonical `"num/den"` string.
pub mod ratio_str {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Ratio, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter storing a [`BigInt`] as a decimal string.
pub mod bigint_str {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}
