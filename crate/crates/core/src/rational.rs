//! Exact rationals and their "p/q" text form.

use alloc::string::{String, ToString};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {text:?}: expected an integer or p/q")]
pub struct ParseRationalError {
    pub text: String,
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d`. Panics on a zero denominator.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    ratio(1, 2)
}

pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / int(2)
}

pub fn in_unit_interval(q: &Rational) -> bool {
    !q.is_negative() && *q <= one()
}

/// Parses `p`, `p/q` or `-p/q`. Surrounding whitespace is ignored.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let t = text.trim();
    let err = || ParseRationalError { text: text.to_string() };
    let valid = |s: &str| {
        let digits = s.strip_prefix('-').unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit())
    };
    match t.split_once('/') {
        Some((p, q)) => {
            if !valid(p) || q.is_empty() || !q.bytes().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            let den = BigInt::from_str(q).map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            let num = BigInt::from_str(p).map_err(|_| err())?;
            Ok(Rational::new(num, den))
        }
        None => {
            if !valid(t) {
                return Err(err());
            }
            Ok(Rational::from_integer(BigInt::from_str(t).map_err(|_| err())?))
        }
    }
}

/// Canonical text: reduced `p/q`, or `p` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// `1 - 2^-k`.
pub fn one_minus_pow2(k: u32) -> Rational {
    one() - Rational::new(BigInt::one(), BigInt::from(2u8).pow(k))
}
