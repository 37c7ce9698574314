//! Exact 2-adic valuation arithmetic.
//!
//! The valuation is normalised so that `v(2) = 1` and `v(0)` is infinite.
//! On `Q(sqrt2)` the valuation of `a + b*sqrt2` is
//! `min(v2(a), v2(b) + 1/2)`: the two candidates can never be equal, so the
//! minimum rule is exact, not merely a lower bound.
//!
//! [`profile`] computes the distance-to-`Z_2` exponent `beta` of a scalar and
//! its piecewise transform `nu`, together with `mu = min(v, 0)` and
//! `lambda = min(v(2x), 0)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::{rat_frac, rat_in_z2, rat_int, rat_string, Rat, Scalar};

/// A 2-adic valuation: either an exact rational or `+infinity` (for zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Val {
    Finite(Rat),
    Infinite,
}

impl Val {
    pub fn finite(r: Rat) -> Self {
        Val::Finite(r)
    }

    pub fn from_int(n: i64) -> Self {
        Val::Finite(rat_int(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Val::Finite(_))
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Val::Finite(r) => Some(r),
            Val::Infinite => None,
        }
    }

    pub fn min(self, other: Val) -> Val {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Infinite, Val::Infinite) => Ordering::Equal,
            (Val::Infinite, Val::Finite(_)) => Ordering::Greater,
            (Val::Finite(_), Val::Infinite) => Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialEq<Rat> for Val {
    fn eq(&self, other: &Rat) -> bool {
        matches!(self, Val::Finite(r) if r == other)
    }
}

impl PartialOrd<Rat> for Val {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        match self {
            Val::Infinite => Some(Ordering::Greater),
            Val::Finite(r) => r.partial_cmp(other),
        }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, rhs: Val) -> Val {
        match (self, rhs) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinite,
        }
    }
}

impl Add<&Rat> for Val {
    type Output = Val;
    fn add(self, rhs: &Rat) -> Val {
        match self {
            Val::Finite(a) => Val::Finite(a + rhs),
            Val::Infinite => Val::Infinite,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(r) => f.write_str(&rat_string(r)),
            Val::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Val {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Val {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "inf" {
            return Ok(Val::Infinite);
        }
        crate::scalar::parse_rat(&text)
            .map(Val::Finite)
            .map_err(serde::de::Error::custom)
    }
}

/// `v2` of a nonzero integer; `None` for zero.
fn v2_bigint(n: &BigInt) -> Option<i64> {
    n.trailing_zeros().map(|z| z as i64)
}

/// `v2` of a rational; `None` for zero.
pub fn v2_rat(r: &Rat) -> Option<i64> {
    let num = v2_bigint(r.numer())?;
    let den = v2_bigint(r.denom()).expect("denominator nonzero");
    Some(num - den)
}

/// The exact 2-adic valuation of a scalar.
pub fn val2(x: &Scalar) -> Val {
    let va = v2_rat(x.rational_part()).map(rat_int);
    let vb = v2_rat(x.sqrt2_part()).map(|v| rat_int(v) + rat_frac(1, 2));
    match (va, vb) {
        (None, None) => Val::Infinite,
        (Some(a), None) => Val::Finite(a),
        (None, Some(b)) => Val::Finite(b),
        (Some(a), Some(b)) => Val::Finite(a.min(b)),
    }
}

/// True when the scalar lies in `Z_2`: rational with odd reduced denominator.
pub fn in_z2(x: &Scalar) -> bool {
    x.is_rational() && rat_in_z2(x.rational_part())
}

/// True when the scalar is a 2-adic unit in `Z_2`.
pub fn is_z2_unit(x: &Scalar) -> bool {
    in_z2(x) && !x.is_zero() && v2_rat(x.rational_part()) == Some(0)
}

/// The valuation profile of a scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicProfile {
    /// `v(x)`.
    pub v: Val,
    /// `beta(x) = sup { v(x - n) : n in Z_2 }`.
    pub beta: Val,
    /// The piecewise transform of `beta`; `nu = 1` when `beta` is infinite.
    pub nu: Rat,
    /// `min(v, 0)`.
    pub mu: Rat,
    /// `min(v(2x), 0)`.
    pub lambda: Rat,
}

impl Serialize for PadicProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PadicProfile", 5)?;
        st.serialize_field("v", &self.v)?;
        st.serialize_field("beta", &self.beta)?;
        st.serialize_field("nu", &rat_string(&self.nu))?;
        st.serialize_field("mu", &rat_string(&self.mu))?;
        st.serialize_field("lambda", &rat_string(&self.lambda))?;
        st.end()
    }
}

/// `nu` as a function of `beta`.
///
/// `nu = beta` for `beta <= 0`; for `n <= beta <= n+1` it is
/// `sum_{k=1}^{n} 2^{-k} + (beta - n) 2^{-(n+1)}`; and `nu = 1` at
/// `beta = +infinity`. The two adjacent formulas agree at every integer
/// breakpoint, so using `n = floor(beta)` is unambiguous.
pub fn nu_of_beta(beta: &Val) -> Rat {
    match beta {
        Val::Infinite => Rat::one(),
        Val::Finite(b) => {
            if !b.is_positive() {
                return b.clone();
            }
            let n = b.floor().to_integer();
            let n_u64: u64 = (&n).try_into().expect("beta overflow");
            let pow = Rat::new(BigInt::one(), BigInt::one() << (n_u64 as usize));
            // 1 - 2^{-n} + (beta - n) * 2^{-(n+1)}
            (Rat::one() - &pow) + (b - Rat::from_integer(n)) * pow / rat_int(2)
        }
    }
}

/// `beta(x)`: the supremum of `v(x - n)` over `n in Z_2`.
///
/// Case analysis on `x = a + b*sqrt2`: integers can approximate `a`
/// arbitrarily well 2-adically exactly when `a in Z_2`, and no integer moves
/// the `sqrt2` component, so:
/// - `b != 0`, `a in Z_2`: `beta = v2(b) + 1/2`;
/// - `b != 0`, `a not in Z_2`: `beta = min(v2(a), v2(b) + 1/2)`;
/// - `b = 0`, `a in Z_2`: `beta` infinite;
/// - `b = 0`, `a not in Z_2`: `beta = v2(a)`.
pub fn beta(x: &Scalar) -> Val {
    let a = x.rational_part();
    let b = x.sqrt2_part();
    if b.is_zero() {
        if rat_in_z2(a) {
            Val::Infinite
        } else {
            Val::from_int(v2_rat(a).expect("a not in Z_2 implies a != 0"))
        }
    } else {
        let vb = rat_int(v2_rat(b).expect("b nonzero")) + rat_frac(1, 2);
        if rat_in_z2(a) {
            Val::Finite(vb)
        } else {
            let va = rat_int(v2_rat(a).expect("a not in Z_2 implies a != 0"));
            Val::Finite(va.min(vb))
        }
    }
}

/// Full valuation profile `(v, beta, nu, mu, lambda)` of a scalar.
pub fn profile(x: &Scalar) -> PadicProfile {
    let v = val2(x);
    let b = beta(x);
    let nu = nu_of_beta(&b);
    let mu = match &v {
        Val::Infinite => Rat::zero(),
        Val::Finite(r) => r.clone().min(Rat::zero()),
    };
    let lambda = match &v {
        Val::Infinite => Rat::zero(),
        Val::Finite(r) => (r + Rat::one()).min(Rat::zero()),
    };
    PadicProfile { v, beta: b, nu, mu, lambda }
}

/// `mu(x) = min(v(x), 0)` as an exact rational.
pub fn mu(x: &Scalar) -> Rat {
    match val2(x) {
        Val::Infinite => Rat::zero(),
        Val::Finite(r) => r.min(Rat::zero()),
    }
}

/// `lambda(x) = min(v(2x), 0)` as an exact rational.
pub fn lambda(x: &Scalar) -> Rat {
    match val2(x) {
        Val::Infinite => Rat::zero(),
        Val::Finite(r) => (r + Rat::one()).min(Rat::zero()),
    }
}

/// `m!` as a big integer.
pub fn factorial_big(m: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=m {
        acc *= k;
    }
    acc
}

/// `v(m!)` by the Legendre sum `floor(m/2) + floor(m/4) + ...`.
pub fn factorial_val(m: u64) -> u64 {
    let mut total = 0;
    let mut m = m;
    while m > 0 {
        m /= 2;
        total += m;
    }
    total
}

/// Exact valuation of the finite product `prod_{t=1}^{N} (x + m + t)`.
pub fn product_val(x: &Scalar, m: i64, n: u64) -> Val {
    let mut total = Val::from_int(0);
    for t in 1..=(n as i64) {
        let term = x + &Scalar::from_int(m + t);
        total = total + val2(&term);
    }
    total
}

/// Companion check for [`product_val`]: asserts the valuation window implied
/// by the `beta` regime of `x`.
///
/// - `beta <= 0`: the valuation is exactly `N * nu`.
/// - `0 < beta < inf`, `N = 2^k >= 2^ceil(beta)`: exactly `N * nu`.
/// - `0 < beta < inf`, any `N`: within `(N*nu - beta, N*nu + beta)`.
/// - `beta = inf`: at least `v(N!)`.
pub fn product_val_window_ok(x: &Scalar, m: i64, n: u64) -> bool {
    let pr = profile(x);
    let pv = product_val(x, m, n);
    let n_nu = rat_int(n as i64) * &pr.nu;
    match &pr.beta {
        Val::Finite(b) if !b.is_positive() => pv == Val::Finite(n_nu),
        Val::Finite(b) => {
            let Val::Finite(v) = &pv else { return false };
            if n.is_power_of_two() {
                let ceil_beta = b.ceil().to_integer();
                let k: u64 = (&ceil_beta).try_into().unwrap_or(u64::MAX);
                if k < 64 && n >= (1u64 << k) && *v != n_nu {
                    return false;
                }
            }
            if n > 0 {
                (v - &n_nu).abs() < *b
            } else {
                v.is_zero()
            }
        }
        Val::Infinite => pv >= rat_int(factorial_val(n) as i64),
    }
}

/// The double inequality `0 < (3 + nu(2s))/12 < 1/2 + mu(s')/6`, verified
/// exactly in rational arithmetic.
///
/// Preconditions (violations are reported as errors, never as `false`):
/// `v(s) > -2`, `2s` not a unit of `Z_2`, and `v(s - s') >= 0`.
pub fn smalldisc_check(s: &Scalar, s_prime: &Scalar) -> Result<bool, Error> {
    if val2(s) <= rat_int(-2) {
        return Err(Error::precondition(format!("v(s) > -2 required, got v(s) = {}", val2(s))));
    }
    let two_s = s + s;
    if is_z2_unit(&two_s) {
        return Err(Error::precondition("2s in Z2^x excluded"));
    }
    let diff = s - s_prime;
    if val2(&diff) < rat_int(0) {
        return Err(Error::precondition(format!(
            "v(s - s') >= 0 required, got {}",
            val2(&diff)
        )));
    }
    let nu2s = profile(&two_s).nu;
    let lhs = (rat_int(3) + nu2s) / rat_int(12);
    let rhs = rat_frac(1, 2) + mu(s_prime) / rat_int(6);
    Ok(lhs.is_positive() && lhs < rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_frac;

    fn sc(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn val2_examples() {
        assert_eq!(val2(&Scalar::from_int(2)), rat_int(1));
        assert_eq!(val2(&Scalar::zero()), Val::Infinite);
        // sqrt2 / 4 has valuation -3/2
        assert_eq!(val2(&sc("1/4*sqrt2")), rat_frac(-3, 2));
        assert_eq!(val2(&Scalar::from_int(3)), rat_int(0));
    }

    #[test]
    fn profile_examples() {
        let p = profile(&sc("1/2"));
        assert_eq!(p.beta, rat_int(-1));
        assert_eq!(p.nu, rat_int(-1));

        let p = profile(&Scalar::zero());
        assert_eq!(p.beta, Val::Infinite);
        assert_eq!(p.nu, rat_int(1));

        let p = profile(&sc("2+2*sqrt2"));
        assert_eq!(p.beta, rat_frac(3, 2));
        assert_eq!(p.nu, rat_frac(5, 8));

        let p = profile(&sc("sqrt2"));
        assert_eq!(p.beta, rat_frac(1, 2));
        assert_eq!(p.nu, rat_frac(1, 4));
    }

    #[test]
    fn factorial_val_examples() {
        assert_eq!(factorial_val(4), 3);
        assert_eq!(factorial_val(1), 0);
        // v(3!) = 1 attains the lower bound (m-1)/2
        assert_eq!(factorial_val(3), 1);
    }

    #[test]
    fn factorial_val_bounds_to_4096() {
        for m in 1..=4096u64 {
            let v = factorial_val(m);
            assert!(2 * v >= m - 1, "lower bound at {m}");
            assert!(v <= m - 1, "upper bound at {m}");
            assert_eq!(v == m - 1, m.is_power_of_two(), "upper equality at {m}");
            assert_eq!(2 * v == m - 1, m == 1 || m == 3, "lower equality at {m}");
        }
    }

    #[test]
    fn factorial_val_pow2_window() {
        // m - v(m!) >= n - t/2 for 0 <= m < 2^n, t = 2^n - m.
        for n in 0..=10u32 {
            let p = 1u64 << n;
            for m in 0..p {
                let t = p - m;
                // multiply by 2 to stay integral
                assert!(2 * (m - factorial_val(m)) as i64 >= 2 * n as i64 - t as i64);
            }
        }
    }

    #[test]
    fn product_val_examples() {
        assert_eq!(product_val(&sc("1/2"), 0, 5), rat_int(-5));
        assert_eq!(product_val(&sc("7"), 3, 0), rat_int(0));
        // part 2 with N = 4 >= 2^ceil(1/2): exactly N*nu = 4 * 1/4 = 1
        assert_eq!(product_val(&Scalar::sqrt2(), 0, 4), rat_int(1));
        assert!(product_val_window_ok(&sc("1/2"), 0, 5));
        assert!(product_val_window_ok(&Scalar::sqrt2(), 0, 4));
        assert!(product_val_window_ok(&sc("3"), -2, 6));
    }

    #[test]
    fn nu_continuity_at_breakpoints() {
        // both adjacent formulas of nu agree at integer beta
        for k in 0..=6i64 {
            let b = rat_int(k);
            let direct = nu_of_beta(&Val::Finite(b.clone()));
            // formula for the interval [k-1, k] evaluated at beta = k
            if k >= 1 {
                let n = k - 1;
                let pow = rat_frac(1, 1 << n);
                let from_below = (Rat::one() - &pow) + (b - rat_int(n)) * pow / rat_int(2);
                assert_eq!(direct, from_below, "breakpoint {k}");
            }
        }
    }

    #[test]
    fn smalldisc_examples() {
        assert_eq!(smalldisc_check(&Scalar::zero(), &Scalar::zero()).unwrap(), true);
        let s = sc("1/4*sqrt2");
        assert_eq!(smalldisc_check(&s, &s).unwrap(), true);
        // 2s a 2-adic unit is a precondition error, not `false`
        assert!(matches!(
            smalldisc_check(&sc("1/2"), &Scalar::zero()),
            Err(Error::Precondition(_))
        ));
    }
}
