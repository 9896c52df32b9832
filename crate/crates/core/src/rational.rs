//! Exact rational scalars and their canonical text form.
//!
//! Every value that crosses a file or report boundary is written as a
//! gcd-reduced `"p/q"` string with `q > 0`; integers drop the denominator.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{literal}`: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d`, reduced. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn vector(values: &[(i64, i64)]) -> Vec<Rational> {
    values.iter().map(|&(n, d)| ratio(n, d)).collect()
}

pub fn ints(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&n| int(n)).collect()
}

/// Canonical form: `"p/q"` reduced with positive denominator, or `"p"` for integers.
pub fn canonical(r: &Rational) -> String {
    // BigRational keeps itself reduced with a positive denominator.
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn canonical_vec(v: &[Rational]) -> Vec<String> {
    v.iter().map(canonical).collect()
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        literal: s.to_string(),
        reason,
    };
    let t = s.trim();
    if t.is_empty() {
        return Err(err("empty"));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| err("numerator is not an integer"))?;
    let d: BigInt = den.parse().map_err(|_| err("denominator is not an integer"))?;
    if d.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(n, d))
}

/// Accepts `"p/q"` / `"p"` strings and JSON integers. Floats are rejected.
pub fn rational_from_json(v: &Value) -> Result<Rational, ParseRationalError> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(BigInt::from(u)))
            } else {
                Err(ParseRationalError {
                    literal: n.to_string(),
                    reason: "floating-point numbers are not accepted; use \"p/q\"",
                })
            }
        }
        other => Err(ParseRationalError {
            literal: other.to_string(),
            reason: "expected a string or an integer",
        }),
    }
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(canonical(r))
}

pub fn vec_to_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational_to_json).collect())
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

/// Display adaptor for a rational vector, `(a, b, c)`.
pub struct Tuple<'a>(pub &'a [Rational]);

impl fmt::Display for Tuple<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", canonical(r))?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical(&ratio(2, 4)), "1/2");
        assert_eq!(canonical(&ratio(3, -6)), "-1/2");
        assert_eq!(canonical(&ratio(4, 2)), "2");
        assert_eq!(canonical(&zero()), "0");
    }

    #[test]
    fn parse_accepts_strings_and_integers() {
        assert_eq!(parse_rational("6/-4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert_eq!(rational_from_json(&serde_json::json!(-3)).unwrap(), int(-3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(rational_from_json(&serde_json::json!(0.5)).is_err());
    }

    proptest! {
        #[test]
        fn canonical_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = ratio(n, d);
            let s = canonical(&r);
            prop_assert_eq!(parse_rational(&s).unwrap(), r.clone());
            prop_assert_eq!(canonical(&parse_rational(&s).unwrap()), s);
        }
    }
}
