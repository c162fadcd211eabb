//! Exact rational scalars and their text forms.
//!
//! Every quantity in the workbench (coordinates, distances, Lipschitz
//! constants, error budgets) is a [`Rational`]. Text input accepts integers,
//! `p/q` fractions and finite decimals such as `0.25`; text output is always
//! `p/q`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// `n/d` as a rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
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

pub fn half() -> Rational {
    rat(1, 2)
}

pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && frac.is_empty())
        {
            return Err(err());
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| err())?
        };
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| err())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::new(w * &scale + f, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Canonical `p/q` form (`p` for integers), used in every serialized file.
pub fn to_pq(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    format!("{}/{}", r.numer(), r.denom())
}

/// Human-facing form: a terminating decimal when one exists, else `p/q`.
pub fn to_display(r: &Rational) -> String {
    Decimal(r).to_string()
}

struct Decimal<'a>(&'a Rational);

impl fmt::Display for Decimal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        if r.is_integer() {
            return write!(f, "{}", r.numer());
        }
        let mut den = r.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0usize, 0usize);
        while (&den % &two).is_zero() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return write!(f, "{}/{}", r.numer(), r.denom());
        }
        let digits = twos.max(fives);
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = (r.abs() * Rational::from_integer(scale.clone())).to_integer();
        let int_part = &scaled / &scale;
        let frac_part = &scaled % &scale;
        let sign = if r.is_negative() { "-" } else { "" };
        write!(f, "{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
    }
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

pub fn max_of<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Option<Rational> {
    items.into_iter().max().cloned()
}

pub fn min_of<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Option<Rational> {
    items.into_iter().min().cloned()
}

pub fn in_unit(r: &Rational) -> bool {
    !r.is_negative() && *r <= one()
}

pub fn clamp01(r: Rational) -> Rational {
    if r.is_negative() {
        zero()
    } else if r > one() {
        one()
    } else {
        r
    }
}

/// Serde adapter for rationals stored as strings.
pub mod serde_pq {
    use super::{parse_rational, to_pq, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_pq(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        value_to_rational(&v).map_err(de::Error::custom)
    }

    pub fn value_to_rational(v: &serde_json::Value) -> Result<Rational, String> {
        match v {
            serde_json::Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
            serde_json::Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| e.to_string()),
            other => Err(format!("expected a rational, found {other}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("3/10").unwrap(), rat(3, 10));
        assert_eq!(parse_rational("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rational(".25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(" 2/4 ").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(to_pq(&rat(4, 5)), "4/5");
        assert_eq!(to_pq(&int(1)), "1");
        assert_eq!(to_display(&rat(4, 5)), "0.8");
        assert_eq!(to_display(&rat(1, 8)), "0.125");
        assert_eq!(to_display(&rat(-3, 20)), "-0.15");
        assert_eq!(to_display(&rat(1, 3)), "1/3");
        assert_eq!(to_display(&int(0)), "0");
    }
}
