//! The base field `Q(sqrt2)`.
//!
//! A [`Scalar`] is an exact element `a + b*sqrt2` with `a`, `b` rational.
//! Field operations are closed (`sqrt2 * sqrt2 = 2`) and the 2-adic
//! valuation of a nonzero element is `min(v2(a), v2(b) + 1/2)`, which is
//! well defined because `v2(a)` is an integer (or infinite) while
//! `v2(b) + 1/2` never is.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Exact rational numbers. Always stored reduced with positive denominator.
pub type Rat = num_rational::BigRational;

/// Parse a rational literal `p` or `p/q`.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n = BigInt::from_str(num).map_err(|_| Error::invalid(format!("bad rational `{s}`")))?;
    let d = match den {
        Some(d) => BigInt::from_str(d).map_err(|_| Error::invalid(format!("bad rational `{s}`")))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(Error::invalid(format!("zero denominator in `{s}`")));
    }
    Ok(Rat::new(n, d))
}

/// Format a rational as `p` or `p/q`.
pub fn rat_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational from an `i64`.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `n/d` from machine integers.
pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// True when the reduced denominator is odd, i.e. the rational lies in `Z_2`.
pub fn rat_in_z2(r: &Rat) -> bool {
    r.denom().bit(0)
}

/// An element `a + b*sqrt2` of `Q(sqrt2)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    a: Rat,
    b: Rat,
}

impl Scalar {
    pub fn new(a: Rat, b: Rat) -> Self {
        Scalar { a, b }
    }

    pub fn from_rat(a: Rat) -> Self {
        Scalar { a, b: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rat(rat_int(n))
    }

    /// `n/d` as a scalar.
    pub fn from_frac(n: i64, d: i64) -> Self {
        Scalar::from_rat(rat_frac(n, d))
    }

    /// The element `sqrt2`.
    pub fn sqrt2() -> Self {
        Scalar { a: Rat::zero(), b: Rat::one() }
    }

    pub fn zero() -> Self {
        Scalar { a: Rat::zero(), b: Rat::zero() }
    }

    pub fn one() -> Self {
        Scalar { a: Rat::one(), b: Rat::zero() }
    }

    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &Rat {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// True when the element lies in `Q` (no `sqrt2` component).
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The rational value, if the element lies in `Q`.
    pub fn as_rat(&self) -> Option<&Rat> {
        self.is_rational().then_some(&self.a)
    }

    /// Field inverse. The norm `a^2 - 2 b^2` vanishes only at zero because
    /// `sqrt2` is irrational.
    pub fn inv(&self) -> Result<Scalar, Error> {
        if self.is_zero() {
            return Err(Error::domain("inverse of zero"));
        }
        if self.b.is_zero() {
            return Ok(Scalar { a: self.a.recip(), b: Rat::zero() });
        }
        let norm = &self.a * &self.a - rat_int(2) * &self.b * &self.b;
        Ok(Scalar { a: &self.a / &norm, b: -(&self.b / &norm) })
    }

    /// Multiply by an integer power of two (`k` may be negative).
    pub fn mul_pow2(&self, k: i64) -> Scalar {
        let p = if k >= 0 {
            Rat::from_integer(BigInt::one() << (k as usize))
        } else {
            Rat::new(BigInt::one(), BigInt::one() << ((-k) as usize))
        };
        Scalar { a: &self.a * &p, b: &self.b * &p }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        // Most series arithmetic stays inside Q; skip the sqrt2 cross terms
        // when a component is zero.
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar { a: &self.a * &rhs.a, b: Rat::zero() };
        }
        if self.b.is_zero() {
            return Scalar { a: &self.a * &rhs.a, b: &self.a * &rhs.b };
        }
        if rhs.b.is_zero() {
            return Scalar { a: &self.a * &rhs.a, b: &self.b * &rhs.a };
        }
        let a = &self.a * &rhs.a + rat_int(2) * (&self.b * &rhs.b);
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Scalar { a, b }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        &*self * &rhs.inv().expect("division by zero scalar")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -&self.a, b: -&self.b }
    }
}

macro_rules! forward_owned {
    ($($t:ident :: $m:ident),*) => {$(
        impl $t for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", rat_string(&self.a));
        }
        let bpart = format!("{}*sqrt2", rat_string(&self.b.abs()));
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{bpart}")
            } else {
                write!(f, "{bpart}")
            }
        } else if self.b.is_negative() {
            write!(f, "{}-{bpart}", rat_string(&self.a))
        } else {
            write!(f, "{}+{bpart}", rat_string(&self.a))
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `a`, `b*sqrt2`, `sqrt2`, and `a+b*sqrt2` / `a-b*sqrt2`,
    /// with `a`, `b` rational literals `p` or `p/q`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::invalid("empty scalar"));
        }
        // Split at a '+' or '-' that is not the leading sign and not part
        // of an exponent-free rational (only the leading char may be a sign).
        let mut split = None;
        for (idx, c) in s.char_indices().skip(1) {
            if c == '+' || c == '-' {
                split = Some(idx);
                break;
            }
        }
        let (first, second) = match split {
            Some(idx) => {
                let (a, b) = s.split_at(idx);
                (a, Some(b))
            }
            None => (s.as_str(), None),
        };
        let parse_term = |t: &str| -> Result<(Rat, bool), Error> {
            // returns (coefficient, is_sqrt2_term)
            let (sign, body) = match t.strip_prefix('-') {
                Some(rest) => (-1i64, rest),
                None => (1, t.strip_prefix('+').unwrap_or(t)),
            };
            if body == "sqrt2" {
                return Ok((rat_int(sign), true));
            }
            if let Some(coeff) = body.strip_suffix("*sqrt2").or_else(|| body.strip_suffix("sqrt2")) {
                let c = parse_rat(coeff)?;
                return Ok((c * rat_int(sign), true));
            }
            let c = parse_rat(body)?;
            Ok((c * rat_int(sign), false))
        };
        let mut a = Rat::zero();
        let mut b = Rat::zero();
        let mut seen_sqrt2 = false;
        let mut seen_rat = false;
        for term in std::iter::once(first).chain(second) {
            let (c, is_s) = parse_term(term)?;
            if is_s {
                if seen_sqrt2 {
                    return Err(Error::invalid(format!("duplicate sqrt2 term in `{s}`")));
                }
                seen_sqrt2 = true;
                b = c;
            } else {
                if seen_rat {
                    return Err(Error::invalid(format!("duplicate rational term in `{s}`")));
                }
                seen_rat = true;
                a = c;
            }
        }
        Ok(Scalar { a, b })
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries = if self.b.is_zero() { 1 } else { 2 };
        let mut map = serializer.serialize_map(Some(entries))?;
        map.serialize_entry("a", &rat_string(&self.a))?;
        if !self.b.is_zero() {
            map.serialize_entry("b", &rat_string(&self.b))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Scalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map {\"a\": \"num/den\", \"b\": \"num/den\"}")
            }
            fn visit_map<M: MapAccess<'de>>(self, mut m: M) -> Result<Scalar, M::Error> {
                let mut a = None;
                let mut b = None;
                while let Some(key) = m.next_key::<String>()? {
                    let v: String = m.next_value()?;
                    let r = parse_rat(&v).map_err(de::Error::custom)?;
                    match key.as_str() {
                        "a" => a = Some(r),
                        "b" => b = Some(r),
                        other => return Err(de::Error::unknown_field(other, &["a", "b"])),
                    }
                }
                Ok(Scalar {
                    a: a.ok_or_else(|| de::Error::missing_field("a"))?,
                    b: b.unwrap_or_else(Rat::zero),
                })
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_closes() {
        let s = Scalar::sqrt2();
        assert_eq!(&s * &s, Scalar::from_int(2));
        let x = Scalar::new(rat_frac(1, 4), rat_frac(1, 4));
        let inv = x.inv().unwrap();
        assert!((&x * &inv).is_one());
    }

    #[test]
    fn parse_roundtrip() {
        for text in ["0", "-1/3", "1/4+1/4*sqrt2", "2-1/2*sqrt2", "sqrt2", "-sqrt2", "3*sqrt2"] {
            let s: Scalar = text.parse().unwrap();
            let again: Scalar = s.to_string().parse().unwrap();
            assert_eq!(s, again, "{text}");
        }
        let s: Scalar = "1/2 + 3/4 * sqrt2".parse().unwrap();
        assert_eq!(s, Scalar::new(rat_frac(1, 2), rat_frac(3, 4)));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
    }

    #[test]
    fn serde_shape() {
        let s = Scalar::new(rat_frac(1, 2), Rat::zero());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"a":"1/2"}"#);
        let t: Scalar = serde_json::from_str(r#"{"a":"2","b":"-1/4"}"#).unwrap();
        assert_eq!(t, Scalar::new(rat_int(2), rat_frac(-1, 4)));
    }
}
