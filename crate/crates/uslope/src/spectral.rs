//! Characteristic polynomials, Newton polygons and slope tables.
//!
//! The compact operators of interest are approximated by their `N x N`
//! principal truncations. This module computes `det(Id - T M_N)` exactly
//! (division-free Berkowitz recursion over `Z[sqrt2]` after clearing
//! denominators), extracts Newton-polygon slopes, and only ever reports a
//! slope after it survives the `N` versus `2N` stability comparison — the
//! truncation is a finite stand-in for a compact operator and proves
//! nothing beyond the computed sizes.
//!
//! [`finite_slope_extension_demo`] is the finite-truncation echo of
//! "finite slope implies maximal overconvergence": it lifts the smallest
//! positive-slope eigenvalue 2-adically, solves for an exact eigenvector,
//! and exhibits the growth of its coefficient valuations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::Error;
use crate::opmatrices::{entry, Kind};
use crate::scalar::{rat_int, rat_string, Rat, Scalar};
use crate::valuation::{v2_rat, val2, Val};

/// An element of `Z[sqrt2]`, the integral arithmetic used inside the
/// determinant recursion. Multiplication shortcuts the common `b = 0`
/// case so rational parameters never pay for the quadratic extension.
#[derive(Clone, PartialEq)]
struct ZSqrt2 {
    a: BigInt,
    b: BigInt,
}

impl ZSqrt2 {
    fn zero() -> Self {
        ZSqrt2 { a: BigInt::ZERO, b: BigInt::ZERO }
    }

    fn one() -> Self {
        ZSqrt2 { a: BigInt::one(), b: BigInt::ZERO }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn neg(&self) -> Self {
        ZSqrt2 { a: -&self.a, b: -&self.b }
    }

    fn add_assign(&mut self, rhs: &ZSqrt2) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }

    fn mul(&self, rhs: &ZSqrt2) -> Self {
        if self.b.is_zero() && rhs.b.is_zero() {
            return ZSqrt2 { a: &self.a * &rhs.a, b: BigInt::ZERO };
        }
        if self.b.is_zero() {
            return ZSqrt2 { a: &self.a * &rhs.a, b: &self.a * &rhs.b };
        }
        if rhs.b.is_zero() {
            return ZSqrt2 { a: &self.a * &rhs.a, b: &self.b * &rhs.a };
        }
        ZSqrt2 {
            a: &self.a * &rhs.a + 2 * (&self.b * &rhs.b),
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

/// Coefficients of `det(lambda I - mat)`, leading first: index `k` holds
/// the coefficient of `lambda^{n-k}`, so index 0 is always 1.
///
/// Berkowitz recursion: the characteristic vector of the `t x t` leading
/// block is the Toeplitz product of `[1, -d, -R C, -R A C, -R A^2 C, ...]`
/// with the vector of the `(t-1) x (t-1)` block, where `d` is the new
/// diagonal entry, `R`/`C` the new row/column, and `A` the previous block.
/// Entirely division-free, which keeps everything in `Z[sqrt2]`.
fn berkowitz(mat: &[Vec<ZSqrt2>]) -> Vec<ZSqrt2> {
    let n = mat.len();
    let mut p = vec![ZSqrt2::one()];
    for t in 1..=n {
        let d = &mat[t - 1][t - 1];
        let mut q = Vec::with_capacity(t + 1);
        q.push(ZSqrt2::one());
        q.push(d.neg());
        if t >= 2 {
            // w starts as the new column C and is repeatedly hit by A
            let mut w: Vec<ZSqrt2> = (0..t - 1).map(|i| mat[i][t - 1].clone()).collect();
            for k in 2..=t {
                let mut dot = ZSqrt2::zero();
                for (x, y) in mat[t - 1][..t - 1].iter().zip(&w) {
                    if !x.is_zero() && !y.is_zero() {
                        dot.add_assign(&x.mul(y));
                    }
                }
                q.push(dot.neg());
                if k < t {
                    let mut next = vec![ZSqrt2::zero(); t - 1];
                    for (i, row) in mat.iter().take(t - 1).enumerate() {
                        for (x, y) in row[..t - 1].iter().zip(&w) {
                            if !x.is_zero() && !y.is_zero() {
                                next[i].add_assign(&x.mul(y));
                            }
                        }
                    }
                    w = next;
                }
            }
        }
        let mut next_p = vec![ZSqrt2::zero(); t + 1];
        for (a, qa) in q.iter().enumerate() {
            if qa.is_zero() {
                continue;
            }
            for (b, pb) in p.iter().enumerate() {
                if a + b <= t && !pb.is_zero() {
                    next_p[a + b].add_assign(&qa.mul(pb));
                }
            }
        }
        p = next_p;
    }
    p
}

/// `det(Id - T M_N)` with `c_0 = 1`; coefficient `k` is `(-1)^k` times the
/// sum of the `k x k` principal minors.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly {
    pub kind: Kind,
    pub s: Scalar,
    pub r: Rat,
    pub coeffs: Vec<Scalar>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

impl Serialize for CharPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CharPoly", 4)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("r", &rat_string(&self.r))?;
        st.serialize_field("coeffs", &self.coeffs)?;
        st.end()
    }
}

fn require_integral_12r(r: &Rat) -> Result<(), Error> {
    if !(rat_int(12) * r).denom().is_one() {
        return Err(Error::precondition(format!(
            "12r must be an integer so that entries are scalars; r = {}",
            rat_string(r)
        )));
    }
    Ok(())
}

/// The exact characteristic polynomial of the `N x N` truncation.
///
/// Requires `12r` integral (otherwise the basis scaling `2^{12ri}` leaves
/// `Q(sqrt2)`). Denominators are cleared with a single scalar `D`, the
/// Berkowitz recursion runs over `Z[sqrt2]`, and coefficient `k` is
/// descaled by `D^k`.
pub fn charpoly(kind: Kind, s: &Scalar, n: usize, r: &Rat) -> Result<CharPoly, Error> {
    if n < 1 {
        return Err(Error::precondition("N >= 1 required"));
    }
    require_integral_12r(r)?;
    let mut entries = Vec::with_capacity(n * n);
    let mut d = BigInt::one();
    for i in 0..n {
        for j in 0..n {
            let e = entry(kind, i, j, s, r)?.to_scalar()?;
            d = d.lcm(e.rational_part().denom());
            d = d.lcm(e.sqrt2_part().denom());
            entries.push(e);
        }
    }
    let dr = Rat::from_integer(d.clone());
    let mat: Vec<Vec<ZSqrt2>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = &entries[i * n + j];
                    ZSqrt2 {
                        a: (e.rational_part() * &dr).to_integer(),
                        b: (e.sqrt2_part() * &dr).to_integer(),
                    }
                })
                .collect()
        })
        .collect();
    let p = berkowitz(&mat);
    let mut dk = BigInt::one();
    let mut coeffs = Vec::with_capacity(n + 1);
    for zk in &p {
        coeffs.push(Scalar::new(
            Rat::new(zk.a.clone(), dk.clone()),
            Rat::new(zk.b.clone(), dk.clone()),
        ));
        dk *= &d;
    }
    Ok(CharPoly { kind, s: s.clone(), r: r.clone(), coeffs })
}

/// Lower convex hull of `(k, v(c_k))`: slopes with multiplicities,
/// nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonPolygon {
    pub segments: Vec<NewtonSegment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSegment {
    pub slope: Rat,
    pub multiplicity: usize,
}

impl Serialize for NewtonSegment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NewtonSegment", 2)?;
        st.serialize_field("slope", &rat_string(&self.slope))?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.end()
    }
}

impl NewtonPolygon {
    pub fn total_multiplicity(&self) -> usize {
        self.segments.iter().map(|s| s.multiplicity).sum()
    }

    /// Segments with slope at most `bound`.
    pub fn below(&self, bound: &Rat) -> Vec<NewtonSegment> {
        self.segments.iter().filter(|s| &s.slope <= bound).cloned().collect()
    }
}

/// The Newton polygon of a characteristic polynomial.
///
/// Trailing zero coefficients (a singular truncation) are discarded first;
/// zero coefficients in the interior lie above every hull and are skipped.
pub fn newton_slopes(p: &CharPoly) -> Result<NewtonPolygon, Error> {
    let mut deg = p.coeffs.len();
    while deg > 0 && p.coeffs[deg - 1].is_zero() {
        deg -= 1;
    }
    if deg <= 1 {
        return Err(Error::domain("polynomial has degree 0 after trimming"));
    }
    let points: Vec<(usize, Rat)> = p.coeffs[..deg]
        .iter()
        .enumerate()
        .filter_map(|(k, c)| match val2(c) {
            Val::Finite(v) => Some((k, v)),
            Val::Infinite => None,
        })
        .collect();
    // monotone-chain lower hull; points are already sorted by k
    let mut hull: Vec<&(usize, Rat)> = Vec::new();
    for pt in &points {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // pop if (x2,y2) is not strictly below the chord (x1,y1)-(pt)
            let lhs = (y2 - y1) * rat_int((pt.0 - x1) as i64);
            let rhs = (&pt.1 - y1) * rat_int((x2 - x1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut segments: Vec<NewtonSegment> = Vec::new();
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        let slope = (y2 - y1) / rat_int((x2 - x1) as i64);
        match segments.last_mut() {
            Some(last) if last.slope == slope => last.multiplicity += x2 - x1,
            _ => segments.push(NewtonSegment { slope, multiplicity: x2 - x1 }),
        }
    }
    Ok(NewtonPolygon { segments })
}

/// One row of a stability-checked slope table.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeRow {
    pub slope: Rat,
    pub multiplicity: usize,
    pub stable: bool,
}

impl Serialize for SlopeRow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SlopeRow", 3)?;
        st.serialize_field("slope", &rat_string(&self.slope))?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.serialize_field("stable", &self.stable)?;
        st.end()
    }
}

#[derive(Clone, Debug)]
pub struct SlopeTable {
    pub kind: Kind,
    pub s: Scalar,
    pub n: usize,
    pub bound: Rat,
    pub rows: Vec<SlopeRow>,
}

impl Serialize for SlopeTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SlopeTable", 5)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("N", &self.n)?;
        st.serialize_field("bound", &rat_string(&self.bound))?;
        st.serialize_field("rows", &self.rows)?;
        st.end()
    }
}

impl SlopeTable {
    pub fn all_stable(&self) -> bool {
        self.rows.iter().all(|r| r.stable)
    }

    pub fn contains_slope(&self, slope: &Rat) -> bool {
        self.rows.iter().any(|r| &r.slope == slope && r.stable)
    }

    /// CSV rows `kind,s_a,s_b,N,slope_num,slope_den,multiplicity,stable`.
    pub fn csv(&self) -> String {
        let mut out = String::from("kind,s_a,s_b,N,slope_num,slope_den,multiplicity,stable\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                self.kind,
                rat_string(self.s.rational_part()),
                rat_string(self.s.sqrt2_part()),
                self.n,
                row.slope.numer(),
                row.slope.denom(),
                row.multiplicity,
                u8::from(row.stable),
            ));
        }
        out
    }
}

/// Slopes up to `bound` from the size-`N` truncation, each marked stable
/// only when the size-`2N` computation reproduces it exactly (same slope,
/// same multiplicity, same position in the list).
pub fn slope_table(kind: Kind, s: &Scalar, n: usize, bound: &Rat) -> Result<SlopeTable, Error> {
    if n < 4 {
        return Err(Error::precondition("N >= 4 required for a slope table"));
    }
    let r0 = Rat::zero();
    let small = newton_slopes(&charpoly(kind, s, n, &r0)?)?.below(bound);
    let big = newton_slopes(&charpoly(kind, s, 2 * n, &r0)?)?.below(bound);
    let rows = small
        .iter()
        .enumerate()
        .map(|(idx, seg)| {
            let stable = big.get(idx).is_some_and(|b| b == seg);
            SlopeRow { slope: seg.slope.clone(), multiplicity: seg.multiplicity, stable }
        })
        .collect();
    Ok(SlopeTable { kind, s: s.clone(), n, bound: bound.clone(), rows })
}

/// The truncated characteristic polynomial is the same at both radii —
/// the matrices are conjugate by the diagonal `2^{12ri}`.
pub fn r_invariance_check(
    kind: Kind,
    s: &Scalar,
    n: usize,
    r1: &Rat,
    r2: &Rat,
) -> Result<bool, Error> {
    let p1 = charpoly(kind, s, n, r1)?;
    let p2 = charpoly(kind, s, n, r2)?;
    Ok(p1.coeffs == p2.coeffs)
}

/// Truncate a 2-adic rational to `bits` bits: the result `m / 2^e`
/// satisfies `x = m / 2^e mod 2^bits` with `|m| < 2^{bits + e}`.
fn trunc2(x: &Rat, bits: u64) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let den = x.denom();
    let e = den.trailing_zeros().unwrap_or(0);
    let odd = den >> e;
    let modulus = BigInt::one() << (bits + e);
    let inv = modinv_pow2(&odd, &modulus);
    let mut m = (x.numer() * inv) % &modulus;
    if m.is_negative() {
        m += &modulus;
    }
    // symmetric representative keeps the numbers small
    if &m << 1 > modulus {
        m -= &modulus;
    }
    Rat::new(m, BigInt::one() << e)
}

/// Inverse of an odd integer modulo a power of two.
fn modinv_pow2(odd: &BigInt, modulus: &BigInt) -> BigInt {
    let e = odd.extended_gcd(modulus);
    debug_assert!(e.gcd.is_one());
    let mut x = e.x % modulus;
    if x.is_negative() {
        x += modulus;
    }
    x
}

fn poly_eval(coeffs: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_derive(coeffs: &[Rat]) -> Vec<Rat> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * rat_int(k as i64))
        .collect()
}

/// Newton-lift the unique root of valuation `sigma` to `bits` bits.
///
/// `coeffs[k]` is the coefficient of `X^k`. A starting point `w 2^sigma`
/// (odd `|w| < 2^{10}`) with `v(P(x0)) > 2 v(P'(x0))` is located by
/// search; quadratic convergence then doubles the precision each step.
fn hensel_root(coeffs: &[Rat], sigma: i64, bits: u64) -> Result<Rat, Error> {
    let deriv = poly_derive(coeffs);
    // A root of valuation sigma is odd after division by 2^sigma, so its
    // residue mod 2^{sigma+1} is 2^sigma. Extend bit by bit, keeping the
    // candidates with the highest v(P); the branch tracking the true root
    // eventually dominates every stray candidate (whose v(P) stalls once
    // it separates from all roots), after which Newton iteration applies.
    let newton_ready = |x: &Rat| -> bool {
        let fv = poly_eval(coeffs, x);
        let dv = poly_eval(&deriv, x);
        match (v2_rat(&fv), v2_rat(&dv)) {
            (None, _) => true,
            (Some(vf), Some(vd)) => vf > 2 * vd,
            _ => false,
        }
    };
    let mut beam: Vec<BigInt> = vec![BigInt::one() << (sigma as usize)];
    let mut start = None;
    for m in (sigma as u64 + 1)..(sigma as u64 + 400) {
        let mut scored: Vec<(i64, BigInt)> = Vec::new();
        for c in &beam {
            for child in [c.clone(), c + (BigInt::one() << (m as usize))] {
                let x = Rat::from_integer(child.clone());
                match v2_rat(&poly_eval(coeffs, &x)) {
                    None => scored.push((i64::MAX, child)),
                    Some(v) => scored.push((v, child)),
                }
            }
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        scored.truncate(coeffs.len());
        let best = Rat::from_integer(scored[0].1.clone());
        if newton_ready(&best) {
            start = Some(best);
            break;
        }
        beam = scored.into_iter().map(|(_, c)| c).collect();
    }
    let Some(mut x) = start else {
        return Err(Error::domain(format!(
            "no Hensel starting point at slope {sigma}; root may not lie in Q_2"
        )));
    };
    for _ in 0..64 {
        let fv = poly_eval(coeffs, &x);
        if v2_rat(&fv).is_none_or(|v| v >= bits as i64) {
            break;
        }
        let dv = poly_eval(&deriv, &x);
        x = trunc2(&(&x - fv / dv), bits);
    }
    Ok(x)
}

/// Kernel vector of a 2-adically near-singular rational matrix.
///
/// Gaussian elimination with full pivoting on minimal 2-adic valuation;
/// after `N - 1` pivots the remaining column is the near-null direction,
/// its variable is set to 1 and the system back-substituted.
fn near_kernel_vector(mut m: Vec<Vec<Rat>>) -> Result<Vec<Rat>, Error> {
    let n = m.len();
    let mut col_of: Vec<usize> = (0..n).collect();
    for step in 0..n - 1 {
        // minimal-valuation pivot among rows/cols >= step
        let mut best: Option<(usize, usize, i64)> = None;
        for i in step..n {
            for j in step..n {
                if let Some(v) = v2_rat(&m[i][j]) {
                    if best.as_ref().is_none_or(|&(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = best else {
            return Err(Error::domain("matrix rank deficit exceeds 1"));
        };
        m.swap(step, pi);
        for row in &mut m {
            row.swap(step, pj);
        }
        col_of.swap(step, pj);
        let pivot = m[step][step].clone();
        for i in step + 1..n {
            if m[i][step].is_zero() {
                continue;
            }
            let factor = &m[i][step] / &pivot;
            for j in step..n {
                let sub = &factor * &m[step][j];
                m[i][j] = &m[i][j] - &sub;
            }
        }
    }
    // free variable = permuted column n-1, value 1; back-substitute
    let mut x = vec![Rat::zero(); n];
    x[n - 1] = Rat::one();
    for i in (0..n - 1).rev() {
        let mut acc = Rat::zero();
        for j in i + 1..n {
            acc += &m[i][j] * &x[j];
        }
        if m[i][i].is_zero() {
            return Err(Error::domain("zero pivot during back-substitution"));
        }
        x[i] = -acc / &m[i][i];
    }
    let mut out = vec![Rat::zero(); n];
    for (pos, &orig) in col_of.iter().enumerate() {
        out[orig] = x[pos].clone();
    }
    Ok(out)
}

/// Report of [`finite_slope_extension_demo`].
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionDemo {
    pub s: Scalar,
    pub n: usize,
    pub r_small: String,
    pub r_big: String,
    /// The slope of the lifted eigenvalue, when the demo ran.
    pub slope: Option<String>,
    /// `v(b_i) + 12 r_big i` for the eigenvector coordinates `b_i` in the
    /// `r_big` basis.
    pub sigma: Vec<Val>,
    /// Index from which the sigma sequence increases strictly to the end.
    pub tail_start: usize,
    /// True when the strictly increasing tail covers at least the upper
    /// half of the coordinates.
    pub increasing_tail: bool,
    pub skipped: Option<String>,
}

/// Exhibit the overconvergence of a finite-slope eigenvector.
///
/// Works over rational `s` (the eigenvalue is lifted inside `Q_2`): takes
/// the smallest positive stable slope of the size-`N` truncation at
/// `r_small`; requires it simple with integer slope, so the eigenvalue is
/// a `Q_2`-rational root of the characteristic polynomial; Newton-lifts it
/// to 1024 bits; solves for the eigenvector exactly; and reports
/// `sigma_i = v(b_i) + 12 r_big i` where `b_i` are the coordinates in the
/// `r_big` basis. A strictly increasing tail is the truncated analog of
/// "finite slope implies `r_big`-overconvergence".
///
/// A non-simple or non-integral smallest positive slope skips the demo
/// with a reason instead of failing.
pub fn finite_slope_extension_demo(
    s: &Scalar,
    n: usize,
    r_small: &Rat,
    r_big: &Rat,
) -> Result<ExtensionDemo, Error> {
    if r_small > r_big {
        return Err(Error::precondition("r_small <= r_big required"));
    }
    require_integral_12r(r_small)?;
    require_integral_12r(r_big)?;
    let mu = crate::valuation::mu(s);
    let cap = crate::scalar::rat_frac(1, 2) + mu / rat_int(6);
    if !(r_small > &Rat::zero() && r_big < &cap) {
        return Err(Error::precondition(format!(
            "0 < r_small <= r_big < 1/2 + mu/6 = {} required",
            rat_string(&cap)
        )));
    }
    let Some(s_rat) = s.as_rat() else {
        return Err(Error::Unsupported(
            "extension demo requires rational s (eigenvalue lift works in Q_2)".into(),
        ));
    };
    let mut report = ExtensionDemo {
        s: s.clone(),
        n,
        r_small: rat_string(r_small),
        r_big: rat_string(r_big),
        slope: None,
        sigma: Vec::new(),
        tail_start: 0,
        increasing_tail: false,
        skipped: None,
    };
    let p = charpoly(Kind::U, s, n, r_small)?;
    let polygon = newton_slopes(&p)?;
    let Some(seg) = polygon.segments.iter().find(|seg| seg.slope.is_positive()) else {
        report.skipped = Some("no positive slope in the truncation".into());
        return Ok(report);
    };
    if seg.multiplicity != 1 {
        report.skipped = Some(format!(
            "smallest positive slope {} has multiplicity {}, not simple",
            rat_string(&seg.slope),
            seg.multiplicity
        ));
        return Ok(report);
    }
    if !seg.slope.denom().is_one() {
        report.skipped = Some(format!(
            "smallest positive slope {} is not an integer",
            rat_string(&seg.slope)
        ));
        return Ok(report);
    }
    let sigma: i64 = seg.slope.numer().try_into().map_err(|_| Error::domain("slope overflow"))?;
    report.slope = Some(rat_string(&seg.slope));
    // det(XI - M) has coefficient c_k at X^{n-k}
    let monic: Vec<Rat> = (0..=n)
        .rev()
        .map(|k| p.coeffs[k].as_rat().expect("rational s gives rational coeffs").clone())
        .collect();
    let bits = 1024u64;
    let lambda = hensel_root(&monic, sigma, bits)?;
    // assemble M - lambda I at r_small over Q
    let mut m: Vec<Vec<Rat>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let e = entry(Kind::U, i, j, s, r_small)?.to_scalar()?;
            let mut val = e
                .as_rat()
                .expect("rational s gives a rational matrix")
                .clone();
            if i == j {
                val -= &lambda;
            }
            row.push(val);
        }
        m.push(row);
    }
    let _ = s_rat;
    let vec = near_kernel_vector(m)?;
    // b_i in the r_big basis: coordinate_i * 2^{12(r_small - r_big) i};
    // sigma_i = v(b_i) + 12 r_big i = v(coordinate_i) + 12 r_small i
    report.sigma = vec
        .iter()
        .enumerate()
        .map(|(i, c)| match v2_rat(c) {
            Some(v) => Val::Finite(rat_int(v) + rat_int(12) * r_small * rat_int(i as i64)),
            None => Val::Infinite,
        })
        .collect();
    let mut tail_start = report.sigma.len().saturating_sub(1);
    while tail_start > 0 && report.sigma[tail_start - 1] < report.sigma[tail_start] {
        tail_start -= 1;
    }
    report.tail_start = tail_start;
    report.increasing_tail = tail_start <= n / 2;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_frac;

    fn s_int(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn charpoly_spot_values() {
        let p = charpoly(Kind::U, &s_int(0), 1, &Rat::zero()).unwrap();
        assert_eq!(p.coeffs, vec![Scalar::one(), Scalar::from_int(-1)]);
        let p = charpoly(Kind::U, &s_int(0), 2, &Rat::zero()).unwrap();
        assert_eq!(
            p.coeffs,
            vec![Scalar::one(), Scalar::from_int(-25), Scalar::from_int(24)]
        );
    }

    #[test]
    fn charpoly_trace_term() {
        let s: Scalar = "1+sqrt2".parse().unwrap();
        let n = 8;
        let p = charpoly(Kind::U, &s, n, &Rat::zero()).unwrap();
        let mut trace = Scalar::zero();
        for i in 0..n {
            trace = &trace + &entry(Kind::U, i, i, &s, &Rat::zero()).unwrap().to_scalar().unwrap();
        }
        assert_eq!(p.coeffs[1], -&trace);
    }

    #[test]
    fn w_charpoly_is_triangular_product() {
        for n in [5usize, 8] {
            let p = charpoly(Kind::W, &"1/4*sqrt2".parse().unwrap(), n, &rat_frac(1, 12)).unwrap();
            // prod_{i<n} (1 - (-1)^i T)
            let mut expected = vec![Scalar::one()];
            for i in 0..n {
                let root = Scalar::from_int(if i % 2 == 0 { -1 } else { 1 });
                let mut next = vec![Scalar::zero(); expected.len() + 1];
                for (k, c) in expected.iter().enumerate() {
                    next[k] = &next[k] + c;
                    next[k + 1] = &next[k + 1] + &(c * &root);
                }
                expected = next;
            }
            assert_eq!(p.coeffs, expected, "n = {n}");
        }
    }

    #[test]
    fn newton_polygon_examples() {
        let p = charpoly(Kind::U, &s_int(0), 1, &Rat::zero()).unwrap();
        let np = newton_slopes(&p).unwrap();
        assert_eq!(np.segments, vec![NewtonSegment { slope: Rat::zero(), multiplicity: 1 }]);

        let p = charpoly(Kind::U, &s_int(0), 2, &Rat::zero()).unwrap();
        let np = newton_slopes(&p).unwrap();
        assert_eq!(
            np.segments,
            vec![
                NewtonSegment { slope: Rat::zero(), multiplicity: 1 },
                NewtonSegment { slope: rat_int(3), multiplicity: 1 },
            ]
        );

        // 1 + T + 2T^2: hull of (0,0),(1,0),(2,1)
        let p = CharPoly {
            kind: Kind::U,
            s: s_int(0),
            r: Rat::zero(),
            coeffs: vec![Scalar::one(), Scalar::one(), Scalar::from_int(2)],
        };
        let np = newton_slopes(&p).unwrap();
        assert_eq!(
            np.segments,
            vec![
                NewtonSegment { slope: Rat::zero(), multiplicity: 1 },
                NewtonSegment { slope: Rat::one(), multiplicity: 1 },
            ]
        );
    }

    #[test]
    fn r_invariance_small() {
        for (kind, s) in [
            (Kind::U, s_int(0)),
            (Kind::U, "1/4*sqrt2".parse().unwrap()),
            (Kind::W, s_int(0)),
        ] {
            assert!(
                r_invariance_check(kind, &s, 10, &Rat::zero(), &rat_frac(1, 12)).unwrap(),
                "{kind} {s}"
            );
        }
        assert!(matches!(
            charpoly(Kind::U, &s_int(0), 4, &rat_frac(1, 24)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn slope_table_stability() {
        let t = slope_table(Kind::U, &s_int(0), 8, &rat_int(4)).unwrap();
        assert!(t.rows[0].slope.is_zero());
        assert!(t.contains_slope(&rat_int(3)));
        let csv = t.csv();
        assert!(csv.starts_with("kind,s_a,s_b,N,slope_num,slope_den,multiplicity,stable\n"));
        assert!(csv.contains("U,0,0,8,3,1,1,1"), "{csv}");
    }

    #[test]
    fn trunc2_and_hensel() {
        // 1/3 mod 2^8: 3 * 171 = 513 = 1 + 2*256
        let t = trunc2(&rat_frac(1, 3), 8);
        let diff = rat_frac(1, 3) - &t;
        assert!(v2_rat(&diff).unwrap() >= 8);
        // root of X^2 - 25X + 24 = (X-1)(X-24): slope-3 root is 24
        let coeffs = vec![rat_int(24), rat_int(-25), rat_int(1)];
        let root = hensel_root(&coeffs, 3, 128).unwrap();
        let diff = root - rat_int(24);
        assert!(diff.is_zero() || v2_rat(&diff).unwrap() >= 128);
    }

    #[test]
    fn extension_demo_runs() {
        let demo =
            finite_slope_extension_demo(&s_int(0), 12, &rat_frac(1, 12), &rat_frac(5, 12)).unwrap();
        assert_eq!(demo.skipped, None);
        assert_eq!(demo.slope.as_deref(), Some("3"));
        assert!(demo.increasing_tail, "sigma = {:?}", demo.sigma);
        // r_small = r_big: identical coefficients, trivially reported
        let demo =
            finite_slope_extension_demo(&s_int(0), 8, &rat_frac(1, 12), &rat_frac(1, 12)).unwrap();
        assert_eq!(demo.skipped, None);
    }
}
