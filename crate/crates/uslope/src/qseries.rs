//! Truncated q-expansions over `Q(sqrt2)` and the operators acting on them.
//!
//! A [`QSeries`] stores the coefficients of `q^0 .. q^{prec-1}` exactly.
//! The module provides:
//!
//! - ring arithmetic (`+`, `-`, `*`), inversion of units, and the formal
//!   binomial power `x^s` of a series with constant term `1`;
//! - the operators `U` (`q^n -> q^{n/2}` on even exponents), `V`
//!   (`q^n -> q^{2n}`), the sign involution `W` (`q -> -q`), and
//!   `theta = q d/dq`;
//! - the standard forms built from the Euler product `E(q) = prod (1-q^n)`:
//!   `delta`, the hauptmodul `f`, `h` with its cube and eighth roots,
//!   `g = W(f)`, and the quasi-modular `e2`;
//! - re-expansion of a weight-zero series in powers of `f`
//!   ([`expand_in_f`]) and the closed-form coefficients [`c_coeff`] of the
//!   expansion of `g` in `f`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::{rat_int, Rat, Scalar};
use crate::valuation::{factorial_big, val2, Val};

/// A q-expansion truncated after `q^{prec-1}`.
#[derive(Clone, PartialEq)]
pub struct QSeries {
    coeffs: Vec<Scalar>,
}

impl QSeries {
    /// A series from explicit coefficients; the precision is their count.
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        QSeries { coeffs }
    }

    /// The zero series at the given precision.
    pub fn zero(prec: usize) -> Self {
        QSeries { coeffs: vec![Scalar::zero(); prec.max(1)] }
    }

    /// The constant series `1` at the given precision.
    pub fn one(prec: usize) -> Self {
        let mut s = QSeries::zero(prec);
        s.coeffs[0] = Scalar::one();
        s
    }

    /// Build a series from a coefficient function.
    pub fn from_fn(prec: usize, f: impl FnMut(usize) -> Scalar) -> Self {
        QSeries { coeffs: (0..prec.max(1)).map(f).collect() }
    }

    /// Number of known coefficients.
    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    /// The coefficient of `q^n` (must be within precision).
    pub fn coeff(&self, n: usize) -> &Scalar {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Drop coefficients beyond `prec`.
    pub fn truncate(&self, prec: usize) -> QSeries {
        let prec = prec.max(1).min(self.coeffs.len());
        QSeries { coeffs: self.coeffs[..prec].to_vec() }
    }

    /// Multiply every coefficient by a scalar.
    pub fn scale(&self, c: &Scalar) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Multiply by `q^k` (precision grows by `k`).
    pub fn shift_up(&self, k: usize) -> QSeries {
        let mut coeffs = vec![Scalar::zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        QSeries { coeffs }
    }

    /// Divide by `q^k`; the dropped low coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<QSeries, Error> {
        if self.coeffs.len() <= k {
            return Err(Error::domain("shift_down exhausts precision"));
        }
        if self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::domain(format!("series not divisible by q^{k}")));
        }
        Ok(QSeries { coeffs: self.coeffs[k..].to_vec() })
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn invert(&self) -> Result<QSeries, Error> {
        if self.coeffs[0].is_zero() {
            return Err(Error::domain("inverse of a series with zero constant term"));
        }
        // integer series with unit constant term invert inside Z[[q]]
        if let Some(xs) = int_coeffs(self) {
            if xs[0].is_one() || (-xs[0]).is_one() {
                let prec = self.prec();
                let c0 = xs[0].clone();
                let mut out: Vec<BigInt> = Vec::with_capacity(prec);
                out.push(c0.clone());
                for n in 1..prec {
                    let mut acc = BigInt::ZERO;
                    for k in 1..=n {
                        if !xs[k].is_zero() {
                            acc += xs[k] * &out[n - k];
                        }
                    }
                    out.push(-acc * &c0);
                }
                return Ok(QSeries { coeffs: out.into_iter().map(scalar_from_bigint).collect() });
            }
        }
        let c0_inv = self.coeffs[0].inv()?;
        let prec = self.prec();
        let mut out = Vec::with_capacity(prec);
        out.push(c0_inv.clone());
        for n in 1..prec {
            let mut acc = Scalar::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc = &acc + &(&self.coeffs[k] * &out[n - k]);
                }
            }
            out.push(-&(&acc * &c0_inv));
        }
        Ok(QSeries { coeffs: out })
    }

    /// Integer power by binary exponentiation.
    pub fn pow(&self, mut e: u64) -> QSeries {
        let mut base = self.clone();
        let mut acc = QSeries::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The formal power `self^s` for a series with constant term `1`.
    ///
    /// Uses the first-order recurrence of `y = x^s` from `x y' = s x' y`:
    /// `n b_n = sum_{k=1}^{n} ((s+1)k - n) a_k b_{n-k}`, which keeps every
    /// coefficient in `Q(sqrt2)` with no square roots of series.
    pub fn binom_pow(&self, s: &Scalar) -> Result<QSeries, Error> {
        if !self.coeffs[0].is_one() {
            return Err(Error::domain("binom_pow needs constant term 1"));
        }
        let prec = self.prec();
        let s_plus_1 = s + &Scalar::one();
        let mut out = Vec::with_capacity(prec);
        out.push(Scalar::one());
        for n in 1..prec {
            let mut acc = Scalar::zero();
            for k in 1..=n {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                let w = &(&s_plus_1 * &Scalar::from_int(k as i64)) - &Scalar::from_int(n as i64);
                acc = &acc + &(&(&w * &self.coeffs[k]) * &out[n - k]);
            }
            out.push(&acc * &Scalar::from_frac(1, n as i64));
        }
        Ok(QSeries { coeffs: out })
    }
}

impl Add for &QSeries {
    type Output = QSeries;
    fn add(self, rhs: &QSeries) -> QSeries {
        let prec = self.prec().min(rhs.prec());
        QSeries::from_fn(prec, |n| &self.coeffs[n] + &rhs.coeffs[n])
    }
}

impl Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, rhs: &QSeries) -> QSeries {
        let prec = self.prec().min(rhs.prec());
        QSeries::from_fn(prec, |n| &self.coeffs[n] - &rhs.coeffs[n])
    }
}

/// Borrow the coefficients as plain integers when the whole series lies in
/// `Z[[q]]`; lets the hot convolution loops run on `BigInt` directly.
fn int_coeffs(x: &QSeries) -> Option<Vec<&BigInt>> {
    x.coeffs
        .iter()
        .map(|c| {
            (c.is_rational() && c.rational_part().denom().is_one())
                .then(|| c.rational_part().numer())
        })
        .collect()
}

fn scalar_from_bigint(n: BigInt) -> Scalar {
    Scalar::from_rat(Rat::from_integer(n))
}

impl Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, rhs: &QSeries) -> QSeries {
        let prec = self.prec().min(rhs.prec());
        if let (Some(xs), Some(ys)) = (int_coeffs(self), int_coeffs(rhs)) {
            let mut out = vec![BigInt::ZERO; prec];
            for (i, a) in xs.iter().take(prec).enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in ys.iter().take(prec - i).enumerate() {
                    if !b.is_zero() {
                        out[i + j] += *a * *b;
                    }
                }
            }
            return QSeries { coeffs: out.into_iter().map(scalar_from_bigint).collect() };
        }
        let mut out = vec![Scalar::zero(); prec];
        for (i, a) in self.coeffs.iter().take(prec).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(prec - i).enumerate() {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        QSeries { coeffs: out }
    }
}

impl Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let plain = c.is_rational();
            let (sign, mag) = if plain && c.rational_part().is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let coeff_text = if plain {
                mag.to_string()
            } else {
                format!("({mag})")
            };
            match n {
                0 => write!(f, "{coeff_text}")?,
                _ => {
                    if mag.is_one() {
                        f.write_str("")?;
                    } else {
                        write!(f, "{coeff_text}")?;
                    }
                    if n == 1 {
                        write!(f, "q")?;
                    } else {
                        write!(f, "q^{n}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^{})", self.prec())
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for QSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QSeries", 2)?;
        st.serialize_field("prec", &self.prec())?;
        st.serialize_field("coeffs", &self.coeffs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            prec: usize,
            coeffs: Vec<Scalar>,
        }
        let r = Repr::deserialize(d)?;
        if r.prec != r.coeffs.len() || r.coeffs.is_empty() {
            return Err(de::Error::custom("prec must equal the coefficient count"));
        }
        Ok(QSeries { coeffs: r.coeffs })
    }
}

/// The halving operator: `U(sum a_n q^n) = sum a_{2n} q^n`.
///
/// Precision halves: knowing `a_0 .. a_{p-1}` determines the output up to
/// `q^{ceil(p/2)-1}`.
pub fn hecke_u(x: &QSeries) -> QSeries {
    let out_prec = x.prec().div_ceil(2);
    QSeries::from_fn(out_prec, |n| x.coeffs[2 * n].clone())
}

/// The doubling operator: `V(sum a_n q^n) = sum a_n q^{2n}`.
///
/// Precision doubles: the odd output coefficients vanish identically, so
/// the result is known through `q^{2p-1}`.
pub fn hecke_v(x: &QSeries) -> QSeries {
    let out_prec = 2 * x.prec();
    QSeries::from_fn(out_prec, |n| {
        if n % 2 == 0 {
            x.coeffs[n / 2].clone()
        } else {
            Scalar::zero()
        }
    })
}

/// The sign involution `W(F)(q) = F(-q)`; equals `2VU - id`.
pub fn hecke_w(x: &QSeries) -> QSeries {
    QSeries::from_fn(x.prec(), |n| {
        if n % 2 == 0 {
            x.coeffs[n].clone()
        } else {
            -&x.coeffs[n]
        }
    })
}

/// The Ramanujan derivation `theta = q d/dq`.
pub fn theta(x: &QSeries) -> QSeries {
    QSeries::from_fn(x.prec(), |n| &x.coeffs[n] * &Scalar::from_int(n as i64))
}

/// The Euler product `E(q) = prod_{n>=1} (1 - q^n)` via the pentagonal
/// number expansion `sum_k (-1)^k q^{k(3k-1)/2}`.
fn euler(prec: usize) -> QSeries {
    let mut s = QSeries::zero(prec);
    let mut k: i64 = 0;
    loop {
        let mut hit = false;
        for kk in [k, -k] {
            let e = kk * (3 * kk - 1) / 2;
            if e >= 0 && (e as usize) < prec {
                hit = true;
                let sign = if k % 2 == 0 { 1 } else { -1 };
                s.coeffs[e as usize] = &s.coeffs[e as usize] + &Scalar::from_int(sign);
            }
            if kk == 0 {
                break;
            }
        }
        if !hit && k > 0 {
            break;
        }
        k += 1;
    }
    s
}

/// `E(q^2)` at the given precision.
fn euler_q2(prec: usize) -> QSeries {
    let base = euler(prec.div_ceil(2));
    hecke_v(&base).truncate(prec)
}

/// The quotient `E(q^2)/E(q)` whose 24th power is `f/q`.
fn f_unit_core(prec: usize) -> QSeries {
    &euler_q2(prec) * &euler(prec).invert().expect("E is a unit")
}

/// The quotient `E(q)^2/E(q^2)` whose cube is `h^{1/8}`.
fn h_unit_core(prec: usize) -> QSeries {
    let e = euler(prec);
    &(&e * &e) * &euler_q2(prec).invert().expect("E(q^2) is a unit")
}

/// `delta = q E(q)^24 = q - 24q^2 + 252q^3 - ...`.
pub fn delta(prec: usize) -> QSeries {
    euler(prec.saturating_sub(1).max(1)).pow(24).shift_up(1).truncate(prec)
}

/// The hauptmodul `f = q (E(q^2)/E(q))^24 = q + 24q^2 + 300q^3 + ...`.
pub fn f_form(prec: usize) -> QSeries {
    f_unit_core(prec.saturating_sub(1).max(1)).pow(24).shift_up(1).truncate(prec)
}

/// `h = (E(q)^2/E(q^2))^24 = 1 - 48q + 1104q^2 - ...`; satisfies `h f = delta`.
pub fn h_form(prec: usize) -> QSeries {
    h_unit_core(prec).pow(24)
}

/// The exact eighth root `h^{1/8} = (E(q)^2/E(q^2))^3`.
pub fn h_eighth(prec: usize) -> QSeries {
    h_unit_core(prec).pow(3)
}

/// The exact cube root `h^{1/3} = (E(q)^2/E(q^2))^8`.
pub fn h_third(prec: usize) -> QSeries {
    h_unit_core(prec).pow(8)
}

/// `g = W(f) = f(-q) = -q + 24q^2 - 300q^3 + ...`.
pub fn g_form(prec: usize) -> QSeries {
    hecke_w(&f_form(prec))
}

/// The weight-2 quasi-modular form on level 2:
/// `e2 = 1 + 24 sum sigma_1(n) q^n - 48 sum sigma_1(n) q^{2n}`.
pub fn e2_form(prec: usize) -> QSeries {
    let mut sigma = vec![0i64; prec];
    for d in 1..prec {
        let mut m = d;
        while m < prec {
            sigma[m] += d as i64;
            m += d;
        }
    }
    QSeries::from_fn(prec, |n| {
        if n == 0 {
            return Scalar::one();
        }
        let mut c = 24 * sigma[n];
        if n % 2 == 0 {
            c -= 48 * sigma[n / 2];
        }
        Scalar::from_int(c)
    })
}

/// The formal power `h^s` for a scalar exponent with `v(s) > -3`
/// (the region `|s| < 8`).
///
/// Computed as the binomial power of the integral eighth root:
/// `h^s = (h^{1/8})^{8s}`. The valuation floor keeps the coefficients
/// 2-adically bounded; the computation itself is exact either way, so the
/// bound is enforced as a precondition rather than assumed.
pub fn h_pow(s: &Scalar, prec: usize) -> Result<QSeries, Error> {
    if val2(s) <= Val::Finite(rat_int(-3)) {
        return Err(Error::precondition(format!(
            "v(s) > -3 required for h^s, got v(s) = {}",
            val2(s)
        )));
    }
    h_eighth(prec).binom_pow(&s.mul_pow2(3))
}

/// The coefficients of a weight-zero series re-expanded in powers of `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FExpansion {
    pub coeffs: Vec<Scalar>,
}

impl FExpansion {
    /// The coefficient of `f^i`.
    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Evaluate `sum a_i f^i` back to a q-expansion at precision `prec`.
    pub fn resum(&self, prec: usize) -> QSeries {
        let f = f_form(prec);
        let mut acc = QSeries::zero(prec);
        let mut fpow = QSeries::one(prec);
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                fpow = &fpow * &f;
            }
            if !a.is_zero() {
                acc = &acc + &fpow.scale(a);
            }
        }
        acc
    }
}

/// Re-expand a q-series as `sum_{i} a_i f^i`.
///
/// Since `f = q + O(q^2)`, the map `q^i -> f^i` is triangular: each step
/// reads off the constant term, subtracts it, and divides by `f`. One
/// q-coefficient of precision is consumed per output coefficient, so at
/// most `prec` coefficients can be extracted from a series of precision
/// `prec`.
pub fn expand_in_f(x: &QSeries, terms: usize) -> Result<FExpansion, Error> {
    if terms > x.prec() {
        return Err(Error::precondition(format!(
            "{} f-coefficients requested from a series of precision {}",
            terms,
            x.prec()
        )));
    }
    let f_unit_inv = f_unit_core(x.prec()).pow(24).invert()?;
    let mut coeffs = Vec::with_capacity(terms);
    let mut cur = x.clone();
    for _ in 0..terms {
        let a = cur.coeffs[0].clone();
        coeffs.push(a.clone());
        if cur.prec() == 1 {
            break;
        }
        let mut rest = cur;
        rest.coeffs[0] = Scalar::zero();
        cur = &rest.shift_down(1)? * &f_unit_inv;
    }
    Ok(FExpansion { coeffs })
}

/// The closed-form coefficient `c_i` of `f^i` in the expansion of `g`:
/// `c_i = (-1)^i 2^{4(i-1)} 3 (2i)! / ((i-1)! (i+2)!)` for `i >= 1`.
pub fn c_coeff(i: u64) -> Scalar {
    assert!(i >= 1, "c_i is defined for i >= 1");
    let num = BigInt::from(3) * factorial_big(2 * i) * (BigInt::one() << (4 * (i - 1) as usize));
    let den = factorial_big(i - 1) * factorial_big(i + 2);
    let sign = if i % 2 == 0 { 1 } else { -1 };
    Scalar::from_rat(Rat::new(num * BigInt::from(sign), den))
}

/// The same coefficient as a difference of two central binomial terms:
/// `c_i = (-1)^i 2^{4i-4} ((2i+2)!/((i+1)!(i+2)!) - (2i)!/(i!(i+1)!))`.
pub fn c_coeff_alt(i: u64) -> Scalar {
    assert!(i >= 1, "c_i is defined for i >= 1");
    let t1 = Rat::new(factorial_big(2 * i + 2), factorial_big(i + 1) * factorial_big(i + 2));
    let t2 = Rat::new(factorial_big(2 * i), factorial_big(i) * factorial_big(i + 1));
    let sign = if i % 2 == 0 { 1 } else { -1 };
    let pow = Rat::from_integer(BigInt::one() << ((4 * i - 4) as usize));
    Scalar::from_rat(rat_int(sign) * pow * (t1 - t2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<Scalar> {
        xs.iter().map(|&n| Scalar::from_int(n)).collect()
    }

    #[test]
    fn standard_form_expansions() {
        assert_eq!(delta(5).coeffs(), &ints(&[0, 1, -24, 252, -1472])[..]);
        assert_eq!(f_form(5).coeffs(), &ints(&[0, 1, 24, 300, 2624])[..]);
        assert_eq!(h_form(4).coeffs(), &ints(&[1, -48, 1104, -16192])[..]);
        assert_eq!(g_form(4).coeffs(), &ints(&[0, -1, 24, -300])[..]);
        assert_eq!(e2_form(4).coeffs(), &ints(&[1, 24, 24, 96])[..]);
    }

    #[test]
    fn h_f_is_delta() {
        let p = 60;
        assert_eq!(&h_form(p) * &f_form(p), delta(p));
    }

    #[test]
    fn roots_of_h() {
        let p = 40;
        assert_eq!(h_eighth(p).pow(8), h_form(p));
        assert_eq!(h_third(p).pow(3), h_form(p));
        // the binomial power reproduces the eta-quotient cube root
        assert_eq!(h_pow(&Scalar::from_frac(1, 3), p).unwrap(), h_third(p));
        assert_eq!(h_pow(&Scalar::one(), p).unwrap(), h_form(p));
        assert_eq!(h_pow(&Scalar::zero(), p).unwrap(), QSeries::one(p));
    }

    #[test]
    fn h_pow_group_law() {
        let p = 25;
        let s = Scalar::new(rat_int(1), crate::scalar::rat_frac(1, 4));
        let t = Scalar::from_frac(-1, 3);
        let lhs = &h_pow(&s, p).unwrap() * &h_pow(&t, p).unwrap();
        let rhs = h_pow(&(&s + &t), p).unwrap();
        assert_eq!(lhs, rhs);
        // group law at s = sqrt2/4 (valuation -3/2, inside the region)
        let u = Scalar::new(Rat::zero(), crate::scalar::rat_frac(1, 4));
        let prod = &h_pow(&u, p).unwrap() * &h_pow(&(-&u), p).unwrap();
        assert_eq!(prod, QSeries::one(p));
        // v(1/8) = -3 sits on the boundary and is rejected
        assert!(matches!(h_pow(&Scalar::from_frac(1, 8), p), Err(Error::Precondition(_))));
    }

    #[test]
    fn operator_relations() {
        let p = 50;
        let x = &f_form(p) + &h_form(p).scale(&Scalar::sqrt2());
        // W = 2VU - id
        let w = hecke_w(&x);
        let vu = hecke_v(&hecke_u(&x)).truncate(p);
        let two_vu = vu.scale(&Scalar::from_int(2));
        assert_eq!(&two_vu - &x, w);
        // W is an involution
        assert_eq!(hecke_w(&w), x);
        // U theta = 2 theta U
        let lhs = hecke_u(&theta(&x));
        let rhs = theta(&hecke_u(&x)).scale(&Scalar::from_int(2));
        assert_eq!(lhs, rhs.truncate(lhs.prec()));
    }

    #[test]
    fn theta_f_is_f_e2() {
        let p = 80;
        assert_eq!(theta(&f_form(p)), &f_form(p) * &e2_form(p));
    }

    #[test]
    fn expand_g_in_f_matches_c() {
        let g = g_form(13);
        let exp = expand_in_f(&g, 13).unwrap();
        assert!(exp.coeff(0).is_zero());
        assert_eq!(exp.coeff(1), &Scalar::from_int(-1));
        assert_eq!(exp.coeff(2), &Scalar::from_int(48));
        for i in 1..13u64 {
            assert_eq!(exp.coeff(i as usize), &c_coeff(i), "c_{i}");
            assert_eq!(c_coeff(i), c_coeff_alt(i), "closed forms at {i}");
        }
        // round trip
        assert_eq!(exp.resum(13), g);
    }

    #[test]
    fn degree_16_identity_smoke() {
        // (1 + 48f - 8192 f^2 g)^2 - (1 + 16f)^2 (1 + 64f) = 0
        let p = 40;
        let f = f_form(p);
        let g = g_form(p);
        let one = QSeries::one(p);
        let a = &(&one + &f.scale(&Scalar::from_int(48)))
            - &(&(&f * &f) * &g).scale(&Scalar::from_int(8192));
        let b = &one + &f.scale(&Scalar::from_int(16));
        let c = &one + &f.scale(&Scalar::from_int(64));
        let lhs = &(&a * &a) - &(&(&b * &b) * &c);
        assert!(lhs.is_zero());
    }

    #[test]
    fn invert_and_serde() {
        let h = h_form(30);
        let hi = h.invert().unwrap();
        assert_eq!(&h * &hi, QSeries::one(30));
        let json = serde_json::to_string(&h_form(3)).unwrap();
        assert_eq!(json, r#"{"prec":3,"coeffs":[{"a":"1"},{"a":"-48"},{"a":"1104"}]}"#);
        let back: QSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h_form(3));
    }

    #[test]
    fn display_format() {
        let h = h_form(3);
        assert_eq!(h.to_string(), "1 - 48q + 1104q^2 + O(q^3)");
        assert_eq!(f_form(2).to_string(), "q + O(q^2)");
    }
}
