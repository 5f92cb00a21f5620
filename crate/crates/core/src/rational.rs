//! Arbitrary-precision rational scalars. Every identity in this crate is an
//! exact equality of these; floats appear only in the scaling module and in
//! test oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// 2^k for possibly negative k.
pub fn pow2(k: i64) -> Rat {
    let two = BigInt::from(2);
    if k >= 0 {
        Rat::from_integer(two.pow(k as u32))
    } else {
        Rat::new(BigInt::one(), two.pow((-k) as u32))
    }
}

/// Parses "p/q" or a bare integer "p".
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let mk = |t: &str| -> Result<BigInt> {
        t.parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad rational '{s}': {e}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let denom = mk(q)?;
            if denom.is_zero() {
                return Err(Error::Parse(format!(
                    "bad rational '{s}': zero denominator"
                )));
            }
            Ok(Rat::new(mk(p)?, denom))
        }
        None => Ok(Rat::from_integer(mk(s)?)),
    }
}

/// Canonical "p/q" form with an explicit denominator, as used in CSV output.
pub fn format_rat(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Rational square root of `x`, if one exists.
pub fn sqrt_exact(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer().sqrt();
    let den = x.denom().sqrt();
    if &(&num * &num) == x.numer() && &(&den * &den) == x.denom() {
        Some(Rat::new(num, den))
    } else {
        None
    }
}
