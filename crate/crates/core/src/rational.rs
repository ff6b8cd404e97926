//! Exact rationals. Everything that decides a sign goes through these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn half(x: &Rational) -> Rational {
    x / int(2)
}

pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    half(&(a + b))
}

pub fn third() -> Rational {
    frac(1, 3)
}

/// `p/q`, or just `p` for integers.
pub fn format(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(if x.is_positive() { f64::MAX } else { f64::MIN })
}

/// 0, 1, -1, 1/2, -1/2, 2, -2, 1/3, ...: rationals p/q in lowest terms ordered by |p| + q,
/// then by q descending, positive before negative.
pub fn canonical_enumeration(count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(Rational::zero());
    let mut height = 2i64;
    while out.len() < count {
        for q in (1..height).rev() {
            let p = height - q;
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            for x in [frac(p, q), frac(-p, q)] {
                if out.len() < count {
                    out.push(x);
                }
            }
        }
        height += 1;
    }
    out
}

pub fn serde_str<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(x))
}
