//! Closed-form operator matrices and their q-expansion oracles.
//!
//! The operators `U` and `W` act on the weight-zero overconvergent space
//! with orthonormal basis `{(2^{12r} f)^j}`. Their matrix entries have
//! closed forms `u_ij(s)` and `eta_ij(s)` — polynomials in the weight
//! parameter `s` times a pure power `2^{12r(j-i)}` — together with the
//! weight-2 twists `u'_ij(s)` and `eta'_ij(s)` in which one linear factor
//! is exchanged.
//!
//! Every entry is kept as a [`MatEntry`] `(coef, exp2)` with the full
//! `r`-dependence isolated in the exponent `exp2 = 12r(j-i)`, so an
//! irrational radius `r` never leaves `Q(sqrt2)`.
//!
//! [`direct_matrix`] recomputes the same matrices with no reference to the
//! closed forms: it applies the operators to actual q-expansions at
//! integer weights `k = -12m` (or `2 - 12m` for the primed kinds) and
//! re-expands in powers of `f`. The two constructions are compared by
//! [`interpolation_check`] and by the test suites.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::qseries::{e2_form, expand_in_f, f_form, hecke_u, hecke_w};
use crate::scalar::{rat_int, Rat, Scalar};
use crate::valuation::{factorial_val, lambda, mu, product_val, val2, Val};

/// Which operator matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    U,
    W,
    Uprime,
    Wprime,
}

impl Kind {
    /// U-kinds are `U` and `Uprime` (zero when `2i < j`); the others are
    /// W-kinds (lower triangular).
    pub fn is_u(self) -> bool {
        matches!(self, Kind::U | Kind::Uprime)
    }

    pub fn is_primed(self) -> bool {
        matches!(self, Kind::Uprime | Kind::Wprime)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::U => "U",
            Kind::W => "W",
            Kind::Uprime => "Uprime",
            Kind::Wprime => "Wprime",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "U" => Ok(Kind::U),
            "W" => Ok(Kind::W),
            "Uprime" => Ok(Kind::Uprime),
            "Wprime" => Ok(Kind::Wprime),
            other => Err(Error::invalid(format!("unknown kind `{other}`"))),
        }
    }
}

impl Serialize for Kind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Kind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A matrix entry `coef * 2^{exp2}` with `coef` in `Q(sqrt2)` and `exp2`
/// an exact rational exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct MatEntry {
    pub coef: Scalar,
    pub exp2: Rat,
}

impl Serialize for MatEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MatEntry", 2)?;
        st.serialize_field("coef", &self.coef)?;
        st.serialize_field("exp2", &crate::scalar::rat_string(&self.exp2))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for MatEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            coef: Scalar,
            exp2: String,
        }
        let r = Repr::deserialize(d)?;
        let exp2 = crate::scalar::parse_rat(&r.exp2).map_err(serde::de::Error::custom)?;
        Ok(MatEntry { coef: r.coef, exp2 })
    }
}

impl MatEntry {
    pub fn zero(exp2: Rat) -> Self {
        MatEntry { coef: Scalar::zero(), exp2 }
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    /// `v(coef) + exp2`.
    pub fn valuation(&self) -> Val {
        val2(&self.coef) + &self.exp2
    }

    /// The entry as a single scalar; requires `exp2` to be an integer.
    pub fn to_scalar(&self) -> Result<Scalar, Error> {
        if !self.exp2.denom().is_one() {
            return Err(Error::domain(format!(
                "entry value 2^{} is irrational",
                crate::scalar::rat_string(&self.exp2)
            )));
        }
        let e: i64 = self
            .exp2
            .numer()
            .try_into()
            .map_err(|_| Error::domain("exponent overflow"))?;
        Ok(self.coef.mul_pow2(e))
    }
}

fn check_s_region(s: &Scalar) -> Result<(), Error> {
    if val2(s) <= rat_int(-3) {
        return Err(Error::precondition(format!(
            "v(s) > -3 required (the region |s| < 8), got v(s) = {}",
            val2(s)
        )));
    }
    Ok(())
}

/// `prod_{t=1}^{count} (x + offset + t)` as an exact scalar.
fn linear_product(x: &Scalar, offset: i64, count: i64) -> Scalar {
    let mut acc = Scalar::one();
    for t in 1..=count {
        acc = &acc * &(x + &Scalar::from_int(offset + t));
    }
    acc
}

/// `n!` as a positive rational.
fn factorial_rat(n: u64) -> Rat {
    Rat::from_integer(crate::valuation::factorial_big(n))
}

/// The closed-form entry at row `i`, column `j`.
///
/// U-kinds vanish for `2i < j` and equal `2^{12ir}` on the half-diagonal
/// `2i = j` (where the product formula below does not apply); otherwise
///
/// `u_ij(s)  = 3 (j + 2s) 2^{8i-4j} / (2 (2i-j)!) * prod (2j - i + t + 3s)`
/// `u'_ij(s) = 3 (i +  s) 2^{8i-4j} / (   (2i-j)!) * prod (2j - i + t + 3s)`
///
/// with `t = 1 .. 2i-j-1`, times `2^{12r(j-i)}`. W-kinds vanish for
/// `i < j`, have diagonal `(-1)^i`, and otherwise
///
/// `eta_ij(s)  = 3 (j + 2s) 2^{4(i-j)} (-1)^i / (i-j)! * prod (i + 2j + t + 6s)`
/// `eta'_ij(s) = 3 (i + 2s) 2^{4(i-j)} (-1)^i / (i-j)! * prod (i + 2j + t + 6s)`
///
/// with `t = 1 .. i-j-1`, times `2^{-12r(i-j)}`. Empty products are `1`.
pub fn entry(kind: Kind, i: usize, j: usize, s: &Scalar, r: &Rat) -> Result<MatEntry, Error> {
    check_s_region(s)?;
    let (i64i, i64j) = (i as i64, j as i64);
    if kind.is_u() {
        let exp2 = rat_int(12) * r * rat_int(i64j - i64i);
        if 2 * i64i < i64j {
            return Ok(MatEntry::zero(exp2));
        }
        if 2 * i64i == i64j {
            // exp2 = 12r(j - i) = 12ri here
            return Ok(MatEntry { coef: Scalar::one(), exp2 });
        }
        let prod = linear_product(&(&(s + s) + s), 2 * i64j - i64i, 2 * i64i - i64j - 1);
        let lead = match kind {
            Kind::U => {
                let js = &Scalar::from_int(i64j) + &(s + s);
                (&js * &Scalar::from_int(3)).mul_pow2(-1)
            }
            _ => &(&Scalar::from_int(i64i) + s) * &Scalar::from_int(3),
        };
        let denom = Scalar::from_rat(factorial_rat((2 * i64i - i64j) as u64));
        let coef = (&(&lead * &prod) / &denom).mul_pow2(8 * i64i - 4 * i64j);
        Ok(MatEntry { coef, exp2 })
    } else {
        let exp2 = rat_int(-12) * r * rat_int(i64i - i64j);
        if i < j {
            return Ok(MatEntry::zero(exp2));
        }
        if i == j {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            return Ok(MatEntry { coef: Scalar::from_int(sign), exp2 });
        }
        let six_s = six(s);
        let prod = linear_product(&six_s, i64i + 2 * i64j, i64i - i64j - 1);
        let lead = match kind {
            Kind::W => &Scalar::from_int(i64j) + &(s + s),
            _ => &Scalar::from_int(i64i) + &(s + s),
        };
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let denom = Scalar::from_rat(factorial_rat((i64i - i64j) as u64));
        let coef = (&(&(&lead * &prod) * &Scalar::from_int(3 * sign)) / &denom)
            .mul_pow2(4 * (i64i - i64j));
        Ok(MatEntry { coef, exp2 })
    }
}

/// The valuation of [`entry`] without materialising the product.
///
/// The valuation is additive over the factors of the closed form, so large
/// indices (deep eta-column scans) cost one small-scalar valuation per
/// linear factor instead of one multi-thousand-digit multiplication.
pub fn entry_valuation(kind: Kind, i: usize, j: usize, s: &Scalar, r: &Rat) -> Result<Val, Error> {
    check_s_region(s)?;
    let (i64i, i64j) = (i as i64, j as i64);
    if kind.is_u() {
        let exp2 = rat_int(12) * r * rat_int(i64j - i64i);
        if 2 * i64i < i64j {
            return Ok(Val::Infinite);
        }
        if 2 * i64i == i64j {
            return Ok(Val::Finite(exp2));
        }
        let prod_v = product_val(&(&(s + s) + s), 2 * i64j - i64i, (2 * i64i - i64j - 1) as u64);
        let lead_v = match kind {
            Kind::U => val2(&(&Scalar::from_int(i64j) + &(s + s))) + &rat_int(-1),
            _ => val2(&(&Scalar::from_int(i64i) + s)),
        };
        let fixed = rat_int(8 * i64i - 4 * i64j)
            - rat_int(factorial_val((2 * i64i - i64j) as u64) as i64)
            + exp2;
        Ok(lead_v + prod_v + &fixed)
    } else {
        let exp2 = rat_int(-12) * r * rat_int(i64i - i64j);
        if i < j {
            return Ok(Val::Infinite);
        }
        if i == j {
            return Ok(Val::Finite(exp2));
        }
        let six_s = six(s);
        let prod_v = product_val(&six_s, i64i + 2 * i64j, (i64i - i64j - 1) as u64);
        let lead_v = match kind {
            Kind::W => val2(&(&Scalar::from_int(i64j) + &(s + s))),
            _ => val2(&(&Scalar::from_int(i64i) + &(s + s))),
        };
        let fixed = rat_int(4 * (i64i - i64j))
            - rat_int(factorial_val((i64i - i64j) as u64) as i64)
            + exp2;
        Ok(lead_v + prod_v + &fixed)
    }
}

/// `6s` as a scalar.
fn six(s: &Scalar) -> Scalar {
    &(s + s) * &Scalar::from_int(3)
}

/// A truncated operator matrix, row-major, indexed from 0.
#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrix {
    pub kind: Kind,
    pub s: Scalar,
    pub r: Rat,
    pub size: usize,
    entries: Vec<MatEntry>,
}

impl OpMatrix {
    pub fn entry(&self, i: usize, j: usize) -> &MatEntry {
        &self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[MatEntry] {
        &self.entries
    }
}

impl Serialize for OpMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct EntryRepr<'a> {
            i: usize,
            j: usize,
            coef: &'a Scalar,
            exp2: String,
        }
        let nz: Vec<EntryRepr> = (0..self.size)
            .flat_map(|i| (0..self.size).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.entry(i, j).is_zero())
            .map(|(i, j)| {
                let e = self.entry(i, j);
                EntryRepr { i, j, coef: &e.coef, exp2: crate::scalar::rat_string(&e.exp2) }
            })
            .collect();
        let mut st = s.serialize_struct("OpMatrix", 5)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("r", &crate::scalar::rat_string(&self.r))?;
        st.serialize_field("size", &self.size)?;
        st.serialize_field("entries", &nz)?;
        st.end()
    }
}

/// Assemble the `size x size` truncation from the closed-form entries.
pub fn closed_matrix(
    kind: Kind,
    s: &Scalar,
    r: &Rat,
    size: usize,
) -> Result<OpMatrix, Error> {
    check_s_region(s)?;
    let mut entries = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            entries.push(entry(kind, i, j, s, r)?);
        }
    }
    Ok(OpMatrix { kind, s: s.clone(), r: r.clone(), size, entries })
}

/// Recompute the matrix at integer parameter `m` directly from
/// q-expansions, with no reference to the closed forms.
///
/// Column `j` applies the operator at weight `k = -12m` (U/W) or
/// `k = 2 - 12m` (primed kinds) through its defining conjugation:
///
/// - `U`-kind: `f^{-m} U(f^{2m} .)`, so the column is the f-expansion of
///   `U(f^{2m+j})` read off from index `i + m`;
/// - `W`-kind: `f^{-2m} W(f^{2m} .)`, read off from index `i + 2m`;
/// - primed kinds: an extra `E_2` inside the operator and `E_2^{-1}`
///   outside.
///
/// Returned at `r = 0`, where the basis scaling is trivial.
pub fn direct_matrix(kind: Kind, m: u64, size: usize, prec: usize) -> Result<OpMatrix, Error> {
    let needed = 2 * (size + 2 * m as usize) + 8;
    if prec < needed {
        return Err(Error::precondition(format!(
            "prec >= {needed} required for size {size}, m = {m}; got {prec}"
        )));
    }
    let f = f_form(prec);
    let e2 = e2_form(prec);
    let e2_inv = e2.invert()?;
    let shift = if kind.is_u() { m as usize } else { 2 * m as usize };
    let mut columns: Vec<Vec<Scalar>> = Vec::with_capacity(size);
    let mut fpow = f.pow(2 * m);
    for j in 0..size {
        if j > 0 {
            fpow = &fpow * &f;
        }
        let inner = if kind.is_primed() { &fpow * &e2 } else { fpow.clone() };
        let image = match kind {
            Kind::U | Kind::Uprime => hecke_u(&inner),
            Kind::W | Kind::Wprime => hecke_w(&inner),
        };
        let image = if kind.is_primed() { &image * &e2_inv } else { image };
        let expansion = expand_in_f(&image, (size + shift).min(image.prec()))?;
        let mut col = Vec::with_capacity(size);
        for i in 0..size {
            let idx = i + shift;
            if idx < expansion.len() {
                col.push(expansion.coeff(idx).clone());
            } else {
                return Err(Error::precondition(format!(
                    "precision exhausted at column {j}, row {i}"
                )));
            }
        }
        columns.push(col);
    }
    let mut entries = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            entries.push(MatEntry { coef: columns[j][i].clone(), exp2: Rat::zero() });
        }
    }
    Ok(OpMatrix {
        kind,
        s: Scalar::from_int(m as i64),
        r: Rat::zero(),
        size,
        entries,
    })
}

/// One violated valuation bound.
#[derive(Clone, Debug, Serialize)]
pub struct BoundViolation {
    pub i: usize,
    pub j: usize,
    pub computed: Val,
    pub required: String,
}

/// Result of an entrywise valuation-bound sweep.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub kind: Kind,
    pub s: Scalar,
    pub r: String,
    pub size: usize,
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
}

impl BoundsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sweep the closed-form lower bounds on entry valuations.
///
/// U-kinds require the admissible radius `0 < r < 1/2 + mu(s)/6` and
/// assert `v(u_ij(s)) >= (3 + mu - 6r)(2i - j) + 6rj` on every nonzero
/// entry. W-kinds require `12r < 3 + lambda(s)` and assert
/// `v(eta_ij(s)) >= (3 - 12r + lambda)(i - j) + 1` strictly below the
/// diagonal (on the diagonal the valuation is `0` and the bound does not
/// apply).
///
/// When `epsilon` is given (U-kinds only, `0 < epsilon < min{r, 1/2 +
/// mu/6 - r}`), the radius-improving margin is asserted as well:
/// `v(u_ij(s)) - 12 epsilon i >= (2i - j)(3 + mu - 6r - 6 epsilon) +
/// 6j(r - epsilon) >= 0`.
pub fn valuation_bounds_report(
    kind: Kind,
    s: &Scalar,
    r: &Rat,
    size: usize,
    epsilon: Option<&Rat>,
) -> Result<BoundsReport, Error> {
    check_s_region(s)?;
    let mu_s = mu(s);
    let lambda_s = lambda(s);
    if kind.is_u() {
        let cap = rat_frac_half() + &mu_s / rat_int(6);
        if !(r > &Rat::zero() && r < &cap) {
            return Err(Error::precondition(format!(
                "0 < r < 1/2 + mu/6 required; r = {}, cap = {}",
                crate::scalar::rat_string(r),
                crate::scalar::rat_string(&cap)
            )));
        }
        if let Some(eps) = epsilon {
            let lim = (r.clone()).min(&cap - r);
            if !(eps > &Rat::zero() && eps < &lim) {
                return Err(Error::precondition(format!(
                    "0 < epsilon < min(r, 1/2 + mu/6 - r) required; epsilon = {}",
                    crate::scalar::rat_string(eps)
                )));
            }
        }
    } else {
        if rat_int(12) * r >= rat_int(3) + &lambda_s {
            return Err(Error::precondition(format!(
                "12r < 3 + lambda required; r = {}, lambda = {}",
                crate::scalar::rat_string(r),
                crate::scalar::rat_string(&lambda_s)
            )));
        }
        if epsilon.is_some() {
            return Err(Error::precondition(
                "the epsilon margin applies to U-kinds only",
            ));
        }
    }
    let mut violations = Vec::new();
    let mut checked = 0;
    for i in 0..size {
        for j in 0..size {
            let v = entry_valuation(kind, i, j, s, r)?;
            let (ri, rj) = (rat_int(i as i64), rat_int(j as i64));
            if kind.is_u() {
                if 2 * i < j {
                    continue;
                }
                checked += 1;
                let two_i_j = rat_int(2) * &ri - &rj;
                let bound =
                    (rat_int(3) + &mu_s - rat_int(6) * r) * &two_i_j + rat_int(6) * r * &rj;
                if v < bound {
                    violations.push(BoundViolation {
                        i,
                        j,
                        computed: v.clone(),
                        required: crate::scalar::rat_string(&bound),
                    });
                }
                if let Some(eps) = epsilon {
                    let mid = &two_i_j * (rat_int(3) + &mu_s - rat_int(6) * r - rat_int(6) * eps)
                        + rat_int(6) * &rj * (r - eps);
                    let lhs_ok = v.clone() + &(-(rat_int(12) * eps * &ri)) >= mid;
                    if !(lhs_ok && !mid.is_negative()) {
                        violations.push(BoundViolation {
                            i,
                            j,
                            computed: v.clone(),
                            required: format!(
                                "margin {} (epsilon = {})",
                                crate::scalar::rat_string(&mid),
                                crate::scalar::rat_string(eps)
                            ),
                        });
                    }
                }
            } else {
                if i <= j {
                    continue;
                }
                checked += 1;
                let bound = (rat_int(3) - rat_int(12) * r + &lambda_s) * (&ri - &rj) + Rat::one();
                if v < bound {
                    violations.push(BoundViolation {
                        i,
                        j,
                        computed: v,
                        required: crate::scalar::rat_string(&bound),
                    });
                }
            }
        }
    }
    Ok(BoundsReport {
        kind,
        s: s.clone(),
        r: crate::scalar::rat_string(r),
        size,
        checked,
        violations,
    })
}

fn rat_frac_half() -> Rat {
    crate::scalar::rat_frac(1, 2)
}

/// The combinatorial identity behind the inductive construction of the
/// W-matrix:
///
/// `sum_{a=j}^{i-1} 3 (2a+j-1)! j (2i-2a)! / ((a-j)! (a+2j)! (i-a-1)! (i-a+2)!)
///  = (2i+j)! (j+1) / ((i-j-1)! (i+2j+2)!)`.
pub fn comb_identity_check(i: u64, j: u64) -> Result<bool, Error> {
    if j < 1 || i < j + 1 {
        return Err(Error::precondition(format!(
            "j >= 1 and i >= j + 1 required, got (i, j) = ({i}, {j})"
        )));
    }
    let fac = crate::valuation::factorial_big;
    let mut lhs = Rat::zero();
    for a in j..i {
        let num = BigInt::from(3) * fac(2 * a + j - 1) * BigInt::from(j) * fac(2 * (i - a));
        let den = fac(a - j) * fac(a + 2 * j) * fac(i - a - 1) * fac(i - a + 2);
        lhs += Rat::new(num, den);
    }
    let rhs = Rat::new(
        fac(2 * i + j) * BigInt::from(j + 1),
        fac(i - j - 1) * fac(i + 2 * j + 2),
    );
    Ok(lhs == rhs)
}

/// Outcome of an interpolation check at one `(i, j)`.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolationReport {
    pub kind: Kind,
    pub i: usize,
    pub j: usize,
    pub checked: Vec<u64>,
    /// First integer weight parameter where closed form and oracle differ.
    pub first_failure: Option<u64>,
}

/// Check that the closed-form entry interpolates the q-expansion oracle:
/// `entry(kind, i, j, m, 0)` must equal the `direct_matrix` entry for
/// every `m` in `m_list`.
pub fn interpolation_check(
    kind: Kind,
    i: usize,
    j: usize,
    m_list: &[u64],
) -> Result<InterpolationReport, Error> {
    let size = i.max(j) + 1;
    let mut first_failure = None;
    for &m in m_list {
        let prec = 2 * (size + 2 * m as usize) + 8;
        let oracle = direct_matrix(kind, m, size, prec)?;
        let closed = entry(kind, i, j, &Scalar::from_int(m as i64), &Rat::zero())?;
        if closed.to_scalar()? != oracle.entry(i, j).coef {
            first_failure = Some(m);
            break;
        }
    }
    Ok(InterpolationReport { kind, i, j, checked: m_list.to_vec(), first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_frac;

    fn s0() -> Scalar {
        Scalar::zero()
    }

    fn r0() -> Rat {
        Rat::zero()
    }

    fn entry_int(kind: Kind, i: usize, j: usize, m: i64) -> Scalar {
        entry(kind, i, j, &Scalar::from_int(m), &r0()).unwrap().to_scalar().unwrap()
    }

    #[test]
    fn u_entry_examples() {
        assert!(entry_int(Kind::U, 0, 0, 0).is_one());
        assert_eq!(entry_int(Kind::U, 1, 1, 0), Scalar::from_int(24));
        assert_eq!(entry_int(Kind::U, 2, 1, 0), Scalar::from_int(2048));
        assert_eq!(entry_int(Kind::U, 1, 1, 1), Scalar::from_int(72));
        // zero patterns
        assert!(entry_int(Kind::U, 0, 1, 1).is_zero());
        assert!(entry_int(Kind::U, 0, 2, 0).is_zero());
        // 2i = j diagonal carries the pure power 2^{12ir}
        let e = entry(Kind::U, 2, 4, &s0(), &rat_frac(1, 12)).unwrap();
        assert!(e.coef.is_one());
        assert_eq!(e.exp2, rat_int(2));
    }

    #[test]
    fn u_integer_zero_pattern() {
        // u_ij(m) = 0 for 2j - i + 3m < 0, equivalently i > 2j + 3m
        for m in 0..3i64 {
            for j in 0..6usize {
                for i in 0..14usize {
                    let e = entry_int(Kind::U, i, j, m);
                    if i as i64 > 2 * j as i64 + 3 * m {
                        assert!(e.is_zero(), "u_{i}{j}({m})");
                    }
                }
            }
        }
    }

    #[test]
    fn w_entry_examples() {
        for i in 0..=20usize {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let e = entry(Kind::W, i, i, &Scalar::sqrt2(), &rat_frac(1, 24)).unwrap();
            assert_eq!(e.coef, Scalar::from_int(sign));
        }
        assert_eq!(entry_int(Kind::W, 3, 2, 0), Scalar::from_int(-96));
        // eta_{i1}(0) = c_i
        for i in 1..=12usize {
            assert_eq!(entry_int(Kind::W, i, 1, 0), crate::qseries::c_coeff(i as u64), "c_{i}");
        }
        assert!(entry_int(Kind::W, 1, 2, 0).is_zero());
    }

    #[test]
    fn entry_valuation_matches_entry() {
        let cases = [
            (s0(), r0()),
            (Scalar::from_int(-1), rat_frac(1, 12)),
            (Scalar::sqrt2(), rat_frac(1, 8)),
            ("1/4*sqrt2".parse().unwrap(), rat_frac(5, 24)),
            ("1+sqrt2".parse().unwrap(), rat_frac(-1, 6)),
        ];
        for kind in [Kind::U, Kind::W, Kind::Uprime, Kind::Wprime] {
            for (s, r) in &cases {
                for i in 0..10usize {
                    for j in 0..10usize {
                        let fast = entry_valuation(kind, i, j, s, r).unwrap();
                        let full = entry(kind, i, j, s, r).unwrap().valuation();
                        assert_eq!(fast, full, "{kind} ({i},{j}) s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn r_dependence_is_pure_power() {
        let s: Scalar = "1/4*sqrt2".parse().unwrap();
        let r = rat_frac(1, 6);
        for kind in [Kind::U, Kind::W, Kind::Uprime, Kind::Wprime] {
            for i in 0..8usize {
                for j in 0..8usize {
                    let at_r = entry(kind, i, j, &s, &r).unwrap();
                    let at_0 = entry(kind, i, j, &s, &r0()).unwrap();
                    assert_eq!(at_r.coef, at_0.coef);
                    let expected = rat_int(12) * &r * rat_int(j as i64 - i as i64);
                    assert_eq!(&at_r.exp2 - &at_0.exp2, expected);
                }
            }
        }
    }

    #[test]
    fn direct_matrix_matches_closed_forms() {
        for kind in [Kind::U, Kind::W] {
            for m in 0..3u64 {
                let size = 8;
                let prec = 2 * (size + 2 * m as usize) + 8;
                let oracle = direct_matrix(kind, m, size, prec).unwrap();
                let s = Scalar::from_int(m as i64);
                for i in 0..size {
                    for j in 0..size {
                        let closed = entry(kind, i, j, &s, &r0()).unwrap().to_scalar().unwrap();
                        assert_eq!(
                            &closed,
                            &oracle.entry(i, j).coef,
                            "{kind} m={m} ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn direct_matrix_matches_primed_closed_forms() {
        for kind in [Kind::Uprime, Kind::Wprime] {
            for m in 0..3u64 {
                let size = 6;
                let prec = 2 * (size + 2 * m as usize) + 8;
                let oracle = direct_matrix(kind, m, size, prec).unwrap();
                let s = Scalar::from_int(m as i64);
                for i in 0..size {
                    for j in 0..size {
                        let closed = entry(kind, i, j, &s, &r0()).unwrap().to_scalar().unwrap();
                        assert_eq!(
                            &closed,
                            &oracle.entry(i, j).coef,
                            "{kind} m={m} ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bounds_sweep_small() {
        let rep =
            valuation_bounds_report(Kind::U, &s0(), &rat_frac(5, 24), 12, Some(&rat_frac(1, 24)))
                .unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        let rep = valuation_bounds_report(
            Kind::W,
            &"1/4*sqrt2".parse().unwrap(),
            &rat_frac(1, 12),
            12,
            None,
        )
        .unwrap();
        assert!(rep.ok(), "{:?}", rep.violations);
        // s = sqrt2/4 gives lambda = -1/2, so 12r = 5/2 sits exactly on the
        // excluded boundary 3 + lambda
        assert!(matches!(
            valuation_bounds_report(
                Kind::W,
                &"1/4*sqrt2".parse().unwrap(),
                &rat_frac(5, 24),
                5,
                None
            ),
            Err(Error::Precondition(_))
        ));
        // boundary r = 1/2 excluded
        assert!(matches!(
            valuation_bounds_report(Kind::U, &s0(), &rat_frac(1, 2), 5, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn comb_identity_examples() {
        // both sides are 1/3 at (2, 1)
        assert!(comb_identity_check(2, 1).unwrap());
        for j in 1..=30u64 {
            assert!(comb_identity_check(j + 1, j).unwrap(), "boundary at j = {j}");
        }
        assert!(matches!(comb_identity_check(2, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn interpolation_spot() {
        let rep = interpolation_check(Kind::U, 3, 2, &[0, 1, 2]).unwrap();
        assert_eq!(rep.first_failure, None);
        let rep = interpolation_check(Kind::Wprime, 4, 1, &[0, 1]).unwrap();
        assert_eq!(rep.first_failure, None);
    }

    #[test]
    fn matrix_json_shape() {
        let m = closed_matrix(Kind::U, &s0(), &r0(), 2).unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["kind"], "U");
        assert_eq!(json["size"], 2);
        let entries = json["entries"].as_array().unwrap();
        // zero entries omitted: (0,1) is zero at s = 0
        assert!(entries.iter().all(|e| e["i"] != 0 || e["j"] != 1));
    }
}
