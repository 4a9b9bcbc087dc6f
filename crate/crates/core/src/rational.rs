//! Arbitrary-precision rational numbers and their JSON form.
//!
//! `Rational` is `num_rational::Ratio<BigInt>`, which already maintains the
//! canonical form this crate relies on: gcd-reduced, denominator positive,
//! zero stored as 0/1. This module only adds construction helpers and the
//! interchange encoding used by instance files: a rational is a two-element
//! array of decimal strings `["num", "den"]`, with a bare integer (JSON
//! number or decimal string, `"7"` or `"-2/3"`) accepted as shorthand on
//! input.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = Ratio<BigInt>;

/// Builds a rational from a machine integer.
pub fn rat_int(n: i64) -> Rational {
    Ratio::from_integer(BigInt::from(n))
}

/// Builds the rational n/d. Panics if `d` is zero; intended for literals in
/// code and tests, not for user input.
pub fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::Schema(format!("not a decimal integer: {s:?}")))
}

/// Parses the textual forms `"7"`, `"-2/3"`.
pub fn rational_from_str(s: &str) -> Result<Rational> {
    match s.split_once('/') {
        None => Ok(Ratio::from_integer(parse_bigint(s)?)),
        Some((n, d)) => {
            let num = parse_bigint(n)?;
            let den = parse_bigint(d)?;
            if den.is_zero() {
                return Err(Error::Schema(format!("zero denominator in {s:?}")));
            }
            Ok(Ratio::new(num, den))
        }
    }
}

/// Decodes a rational from its JSON forms: `["num","den"]` (strings or
/// integers), a bare integer, or a string `"n"` / `"n/d"`.
pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| Error::Schema(format!("not an exact integer: {n}")))?;
            Ok(rat_int(i))
        }
        Value::String(s) => rational_from_str(s),
        Value::Array(parts) if parts.len() == 2 => {
            let num = match &parts[0] {
                Value::String(s) => parse_bigint(s)?,
                Value::Number(n) => BigInt::from(n.as_i64().ok_or_else(|| {
                    Error::Schema(format!("not an exact integer: {n}"))
                })?),
                other => return Err(Error::Schema(format!("bad numerator: {other}"))),
            };
            let den = match &parts[1] {
                Value::String(s) => parse_bigint(s)?,
                Value::Number(n) => BigInt::from(n.as_i64().ok_or_else(|| {
                    Error::Schema(format!("not an exact integer: {n}"))
                })?),
                other => return Err(Error::Schema(format!("bad denominator: {other}"))),
            };
            if den.is_zero() {
                return Err(Error::Schema("zero denominator".into()));
            }
            Ok(Ratio::new(num, den))
        }
        other => Err(Error::Schema(format!("not a rational literal: {other}"))),
    }
}

/// Encodes a rational as the canonical `["num","den"]` pair of decimal
/// strings. The denominator is always positive.
pub fn rational_to_json(r: &Rational) -> Value {
    Value::Array(vec![
        Value::String(r.numer().to_string()),
        Value::String(r.denom().to_string()),
    ])
}

/// Renders `n` or `n/d`, omitting the denominator when it is 1.
pub fn rational_display(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True when the rational is a (possibly negative) integer.
pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Absolute value, used by samplers and display code.
pub fn rational_abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_form_is_maintained() {
        let r = rat(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert!(rat(0, 5).is_zero());
        assert_eq!(rat(0, 5).denom(), &BigInt::from(1));
    }

    #[test]
    fn json_round_trip() {
        let r = rat(-22, 7);
        let v = rational_to_json(&r);
        assert_eq!(v, json!(["-22", "7"]));
        assert_eq!(rational_from_json(&v).unwrap(), r);
    }

    #[test]
    fn shorthand_forms_parse() {
        assert_eq!(rational_from_json(&json!(5)).unwrap(), rat_int(5));
        assert_eq!(rational_from_json(&json!("-3/9")).unwrap(), rat(-1, 3));
        assert_eq!(rational_from_json(&json!([2, 4])).unwrap(), rat(1, 2));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(rational_from_json(&json!(["1", "0"])).is_err());
        assert!(rational_from_str("1/0").is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(rational_display(&rat(3, 1)), "3");
        assert_eq!(rational_display(&rat(-1, 2)), "-1/2");
    }
}
