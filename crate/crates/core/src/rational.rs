//! Exact positions and lengths.
//!
//! All geometry is done over `Ratio<i64>`. Arithmetic that can overflow goes
//! through the checked helpers here; comparisons never overflow.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{text}`: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("rational arithmetic overflow")]
pub struct Overflow;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn add(a: &Rational, b: &Rational) -> Result<Rational, Overflow> {
    a.checked_add(b).ok_or(Overflow)
}

pub fn sub(a: &Rational, b: &Rational) -> Result<Rational, Overflow> {
    a.checked_sub(b).ok_or(Overflow)
}

pub fn mul(a: &Rational, b: &Rational) -> Result<Rational, Overflow> {
    a.checked_mul(b).ok_or(Overflow)
}

/// Midpoint of `a` and `b`, exact.
pub fn midpoint(a: &Rational, b: &Rational) -> Result<Rational, Overflow> {
    add(a, b)?.checked_div(&int(2)).ok_or(Overflow)
}

/// Parses `7`, `-3`, `7/2`, `3.25`. Denominators must be positive and
/// everything must fit in `i64` after reduction.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        text: text.to_string(),
        reason,
    };
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(|| err("bad numerator"))?;
        let d = parse_decimal(d.trim()).ok_or_else(|| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return n.checked_div(&d).ok_or_else(|| err("out of range"));
    }
    parse_decimal(t).ok_or_else(|| err("not a number"))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole_val: i64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
    let mut value = Rational::from_integer(whole_val);
    if !frac.is_empty() {
        let frac = frac.trim_end_matches('0');
        if !frac.is_empty() {
            if frac.len() > 18 {
                return None;
            }
            let num: i64 = frac.parse().ok()?;
            let den = 10i64.checked_pow(frac.len() as u32)?;
            value = value.checked_add(&Rational::new(num, den))?;
        }
    }
    Some(if neg { -value } else { value })
}

/// Canonical text: `n` for integers, `n/d` otherwise.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn to_string(r: &Rational) -> String {
    Display(r).to_string()
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

/// Serde adapter: integers serialize as JSON numbers, fractions as `"p/q"`
/// strings. Deserialization accepts numbers or strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        if r.is_integer() {
            s.serialize_i64(*r.numer())
        } else {
            s.serialize_str(&to_string(r))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a number or a string like \"7/2\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            i64::try_from(v)
                .map(int)
                .map_err(|_| E::custom("integer out of range"))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite number"));
            }
            // shortest round-trip text, then exact decimal parse
            parse_rational(&format!("{v}")).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_exactly() {
        assert_eq!(parse_rational("7/2").unwrap(), ratio(7, 2));
        assert_eq!(parse_rational(" 3.25 ").unwrap(), ratio(13, 4));
        assert_eq!(parse_rational("-4").unwrap(), int(-4));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "abc", "1.2.3", "--1", "99999999999999999999", "1/"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(to_string(&ratio(14, 4)), "7/2");
        assert_eq!(to_string(&int(3)), "3");
        assert_eq!(to_string(&ratio(-1, 3)), "-1/3");
    }

    #[test]
    fn checked_ops_report_overflow() {
        let big = int(i64::MAX);
        assert_eq!(add(&big, &int(1)), Err(Overflow));
        assert_eq!(midpoint(&int(2), &int(5)).unwrap(), ratio(7, 2));
    }
}
