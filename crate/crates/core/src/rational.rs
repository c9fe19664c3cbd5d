//! Exact rational scalars and their text/JSON encodings.
//!
//! Every scalar in the crate is a [`Rational`] (an arbitrary precision
//! fraction kept in lowest terms). Text form is `"num/den"`; JSON form is a
//! two element array of decimal strings, `["num","den"]`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `num/den` as a [`Rational`]. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half(x: &Rational) -> Rational {
    x / int(2)
}

pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

/// `2^-k` as a rational.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// `3^-k` as a rational.
pub fn pow3_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(3u32).pow(k))
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"num/den"` or a plain integer. Whitespace around the parts is ignored.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form, always `num/den` (denominator positive, lowest terms).
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// JSON representation of a rational: `["num","den"]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatRepr(pub String, pub String);

impl From<&Rational> for RatRepr {
    fn from(x: &Rational) -> Self {
        RatRepr(x.numer().to_string(), x.denom().to_string())
    }
}

impl TryFrom<&RatRepr> for Rational {
    type Error = Error;

    fn try_from(r: &RatRepr) -> Result<Rational> {
        let num = BigInt::from_str(r.0.trim()).map_err(|_| Error::Parse(format!("bad numerator {:?}", r.0)))?;
        let den = BigInt::from_str(r.1.trim()).map_err(|_| Error::Parse(format!("bad denominator {:?}", r.1)))?;
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational::new(num, den))
    }
}

pub fn to_reprs(xs: &[Rational]) -> Vec<RatRepr> {
    xs.iter().map(RatRepr::from).collect()
}

pub fn from_reprs(xs: &[RatRepr]) -> Result<Vec<Rational>> {
    xs.iter().map(Rational::try_from).collect()
}

/// Serde adapter for a single `Rational` field.
pub mod serde_rat {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RatRepr::from(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let r = RatRepr::deserialize(d)?;
        Rational::try_from(&r).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>` fields.
pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        to_reprs(xs).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let r = Vec::<RatRepr>::deserialize(d)?;
        from_reprs(&r).map_err(serde::de::Error::custom)
    }
}

/// Closed rational enclosure `[lo, hi]` of `sqrt(x)` for `x >= 0`.
///
/// Exact (`lo == hi`) when numerator and denominator are perfect squares,
/// otherwise `hi - lo <= 2^-bits`.
pub fn sqrt_enclosure(x: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        let r = Rational::new(rn, rd);
        return (r.clone(), r);
    }
    // floor(sqrt(x * 4^bits)) / 2^bits
    let scale = BigInt::one() << (2 * bits);
    let scaled = (n * scale) / d;
    let s = scaled.sqrt();
    let den = BigInt::one() << bits;
    (Rational::new(s.clone(), den.clone()), Rational::new(s + 1, den))
}

/// Rational upper bound on `sqrt(x)` within `2^-bits`.
pub fn sqrt_upper(x: &Rational, bits: u32) -> Rational {
    sqrt_enclosure(x, bits).1
}

/// Rational lower bound on `sqrt(x)` within `2^-bits`.
pub fn sqrt_lower(x: &Rational, bits: u32) -> Rational {
    sqrt_enclosure(x, bits).0
}

/// Nearest rational with denominator `den` (ties rounded up).
pub fn round_to_den(x: &Rational, den: &BigInt) -> Rational {
    let scaled = x * Rational::from_integer(den.clone()) + rat(1, 2);
    Rational::new(scaled.floor().to_integer(), den.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_integer() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -4 ").unwrap(), int(-4));
        assert_eq!(parse_rational("2/-4").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn text_form_is_lowest_terms() {
        assert_eq!(format_rational(&rat(10, -4)), "-5/2");
        assert_eq!(format_rational(&int(3)), "3/1");
    }

    #[test]
    fn json_pair_form() {
        let s = serde_json::to_string(&RatRepr::from(&rat(7, 12))).unwrap();
        assert_eq!(s, r#"["7","12"]"#);
        let back: RatRepr = serde_json::from_str(&s).unwrap();
        assert_eq!(Rational::try_from(&back).unwrap(), rat(7, 12));
    }

    #[test]
    fn sqrt_exact_and_enclosed() {
        assert_eq!(sqrt_enclosure(&rat(1, 4), 20), (rat(1, 2), rat(1, 2)));
        let (lo, hi) = sqrt_enclosure(&int(2), 24);
        assert!(&lo * &lo < int(2) && &hi * &hi > int(2));
        assert!(&hi - &lo <= pow2_inv(24));
    }

    #[test]
    fn rounding_to_grid() {
        let d = BigInt::from(8);
        assert_eq!(round_to_den(&rat(1, 3), &d), rat(3, 8));
        assert_eq!(round_to_den(&rat(-1, 3), &d), rat(-3, 8));
    }
}
