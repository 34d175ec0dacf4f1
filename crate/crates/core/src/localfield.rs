//! The local field `F = F_ell((w))`, modelled by truncated Laurent series.
//!
//! A [`FieldElement`] stores finitely many digits together with an absolute
//! precision: it represents `sum_i c_i w^(val+i) + O(w^prec)`. Elements that
//! are finite Laurent polynomials are *exact* (`prec = EXACT`), so matrices
//! built from digits and powers of `w` never lose information. Precision is
//! only lost when inverting a non-monomial unit, where the series is cut at a
//! requested relative length.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Sentinel absolute precision of an exact element.
pub const EXACT: i64 = i64::MAX;

/// Default relative length of a series inverse.
pub const DEFAULT_PRECISION: u32 = 12;

/// Three-valued verdict for membership questions asked at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl Tri {
    pub fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            _ => Tri::Unknown,
        }
    }

    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }

    pub fn certain(self, what: &str) -> Result<bool> {
        match self {
            Tri::Yes => Ok(true),
            Tri::No => Ok(false),
            Tri::Unknown => Err(Error::InsufficientPrecision(what.to_string())),
        }
    }
}

fn add_sat(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a + b
    }
}

fn inv_mod(d: u32, ell: u32) -> u32 {
    // ell is prime and small; Fermat.
    let mut acc = 1u64;
    let mut base = d as u64 % ell as u64;
    let mut e = ell - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % ell as u64;
        }
        base = base * base % ell as u64;
        e >>= 1;
    }
    acc as u32
}

/// Element of `F_ell((w))` at tracked precision.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    ell: u32,
    /// Exponent of the first stored digit (meaningless when `digits` is empty).
    val: i64,
    /// Digits from `w^val` upwards; first and last digits are nonzero.
    digits: SmallVec<[u8; 12]>,
    /// Absolute precision; the element is known modulo `w^prec`.
    prec: i64,
}

/// Which standard subset of `F` a membership query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalSet {
    /// The valuation ring `O`.
    Integers,
    /// The units `O^x`.
    Units,
    /// `J_t`: units congruent to 1 modulo `w^t` (`J_0 = O^x`).
    PrincipalUnits(u32),
    /// The ideal `w^k O`.
    Ideal(i64),
}

impl FieldElement {
    fn normalize(ell: u32, val: i64, digits: &[u8], prec: i64) -> Self {
        let mut start = 0;
        while start < digits.len() && digits[start] == 0 {
            start += 1;
        }
        let v = val + start as i64;
        let mut end = digits.len();
        if prec != EXACT {
            let max_len = (prec - v).max(0) as usize;
            end = end.min(start + max_len);
        }
        while end > start && digits[end - 1] == 0 {
            end -= 1;
        }
        if end <= start {
            return FieldElement { ell, val: 0, digits: SmallVec::new(), prec };
        }
        FieldElement { ell, val: v, digits: digits[start..end].into(), prec }
    }

    /// `sum_i digits[i] w^(val+i) + O(w^prec)`; pass [`EXACT`] for no error term.
    pub fn from_digits(ell: u32, val: i64, digits: &[u32], prec: i64) -> Self {
        assert!((2..=251).contains(&ell), "ell must be a prime below 256");
        let d: Vec<u8> = digits.iter().map(|&x| (x % ell) as u8).collect();
        FieldElement::normalize(ell, val, &d, prec)
    }

    pub fn zero(ell: u32) -> Self {
        FieldElement::from_digits(ell, 0, &[], EXACT)
    }

    pub fn one(ell: u32) -> Self {
        FieldElement::from_digits(ell, 0, &[1], EXACT)
    }

    /// The integer `n` viewed in the prime field.
    pub fn from_int(ell: u32, n: i64) -> Self {
        FieldElement::from_digits(ell, 0, &[n.rem_euclid(ell as i64) as u32], EXACT)
    }

    /// `c * w^k` for a residue `c`.
    pub fn monomial(ell: u32, c: u32, k: i64) -> Self {
        FieldElement::from_digits(ell, k, &[c], EXACT)
    }

    /// `w^k`.
    pub fn pi_pow(ell: u32, k: i64) -> Self {
        FieldElement::monomial(ell, 1, k)
    }

    /// An unknown element of `w^prec O`.
    pub fn big_o(ell: u32, prec: i64) -> Self {
        FieldElement::from_digits(ell, 0, &[], prec)
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// Zero at the known precision (no nonzero digit below `prec`).
    pub fn is_apparent_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Exactly `c w^k` for a nonzero residue `c`.
    pub fn is_monomial(&self) -> bool {
        self.is_exact() && self.digits.len() == 1
    }

    pub fn is_exact_zero(&self) -> bool {
        self.digits.is_empty() && self.prec == EXACT
    }

    /// Certified lower bound for the valuation.
    pub fn valuation_lower_bound(&self) -> i64 {
        if self.digits.is_empty() {
            self.prec
        } else {
            self.val
        }
    }

    pub fn valuation(&self) -> Result<i64> {
        if self.digits.is_empty() {
            if self.prec == EXACT {
                return Err(Error::InvalidInput("valuation of zero".into()));
            }
            return Err(Error::InsufficientPrecision(format!(
                "element is O(w^{}) and has no certified valuation",
                self.prec
            )));
        }
        Ok(self.val)
    }

    /// Coefficient of `w^k` (`None` when `k` is at or beyond the precision).
    pub fn digit(&self, k: i64) -> Option<u32> {
        if k >= self.prec {
            return None;
        }
        if self.digits.is_empty() || k < self.val {
            return Some(0);
        }
        let i = (k - self.val) as usize;
        Some(self.digits.get(i).copied().unwrap_or(0) as u32)
    }

    /// Fixes the next unknown digit: `self + d w^prec + O(w^(prec+1))`.
    pub fn lift_digit(&self, d: u32) -> Self {
        assert!(!self.is_exact(), "exact elements have no unknown digits");
        let p = self.prec;
        let lo = if self.digits.is_empty() { p } else { self.val };
        let mut ds: Vec<u8> = (lo..p).map(|e| self.digit(e).unwrap_or(0) as u8).collect();
        ds.push((d % self.ell) as u8);
        FieldElement::normalize(self.ell, lo, &ds, p + 1)
    }

    /// Replaces everything from `w^prec` on by the error term.
    pub fn truncate(&self, prec: i64) -> Self {
        let p = prec.min(self.prec);
        FieldElement::normalize(self.ell, self.val, &self.digits, p)
    }

    pub fn neg(&self) -> Self {
        let d: SmallVec<[u8; 12]> = self
            .digits
            .iter()
            .map(|&x| ((self.ell - x as u32) % self.ell) as u8)
            .collect();
        FieldElement { ell: self.ell, val: self.val, digits: d, prec: self.prec }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.ell, o.ell);
        let prec = self.prec.min(o.prec);
        if self.digits.is_empty() {
            return o.truncate(prec);
        }
        if o.digits.is_empty() {
            return self.truncate(prec);
        }
        let lo = self.val.min(o.val);
        let mut hi = (self.val + self.digits.len() as i64).max(o.val + o.digits.len() as i64);
        if prec != EXACT {
            hi = hi.min(prec);
        }
        if hi <= lo {
            return FieldElement::big_o(self.ell, prec);
        }
        let mut out = vec![0u8; (hi - lo) as usize];
        for (src, v) in [(&self.digits, self.val), (&o.digits, o.val)] {
            for (i, &d) in src.iter().enumerate() {
                let k = v + i as i64 - lo;
                if k < 0 || k >= out.len() as i64 {
                    continue;
                }
                let slot = &mut out[k as usize];
                *slot = ((*slot as u32 + d as u32) % self.ell) as u8;
            }
        }
        FieldElement::normalize(self.ell, lo, &out, prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.ell, o.ell);
        let prec = add_sat(self.valuation_lower_bound(), o.prec)
            .min(add_sat(o.valuation_lower_bound(), self.prec));
        if self.digits.is_empty() || o.digits.is_empty() {
            return FieldElement::big_o(self.ell, prec);
        }
        let v = self.val + o.val;
        let mut len = self.digits.len() + o.digits.len() - 1;
        if prec != EXACT {
            len = len.min((prec - v).max(0) as usize);
        }
        let ell = self.ell;
        let mut acc = vec![0u32; len];
        for (i, &a) in self.digits.iter().enumerate() {
            if a == 0 || i >= len {
                continue;
            }
            for (j, &b) in o.digits.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                acc[i + j] += a as u32 * b as u32;
                if acc[i + j] >= 1 << 24 {
                    acc[i + j] %= ell;
                }
            }
        }
        let d: Vec<u8> = acc.into_iter().map(|x| (x % ell) as u8).collect();
        FieldElement::normalize(ell, v, &d, prec)
    }

    /// Multiplication by `w^k`.
    pub fn shift(&self, k: i64) -> Self {
        FieldElement {
            ell: self.ell,
            val: self.val + k,
            digits: self.digits.clone(),
            prec: add_sat(self.prec, k),
        }
    }

    /// Inverse, with series cut at relative length `rel_prec` when the input
    /// is not a monomial.
    pub fn inv_prec(&self, rel_prec: u32) -> Result<Self> {
        if self.digits.is_empty() {
            return Err(Error::InsufficientPrecision(
                "inversion of an element indistinguishable from zero".into(),
            ));
        }
        let ell = self.ell;
        let c0inv = inv_mod(self.digits[0] as u32, ell);
        if self.is_exact() && self.digits.len() == 1 {
            return Ok(FieldElement::monomial(ell, c0inv, -self.val));
        }
        let rel_known = if self.is_exact() { i64::MAX } else { self.prec - self.val };
        let rp = rel_known.min(rel_prec as i64).max(1) as usize;
        let mut c = vec![0u32; rp];
        c[0] = c0inv;
        for k in 1..rp {
            let mut s = 0u32;
            for j in 1..=k {
                let dj = self.digits.get(j).copied().unwrap_or(0) as u32;
                s = (s + dj * c[k - j]) % ell;
            }
            c[k] = (ell - s) % ell * c0inv % ell;
        }
        Ok(FieldElement::from_digits(ell, -self.val, &c, -self.val + rp as i64))
    }

    pub fn inv(&self) -> Result<Self> {
        self.inv_prec(DEFAULT_PRECISION)
    }

    /// Membership in `O`, `O^x`, `J_t` or `w^k O`, three-valued.
    pub fn member_tri(&self, set: LocalSet) -> Tri {
        match set {
            LocalSet::Integers => self.member_tri(LocalSet::Ideal(0)),
            LocalSet::Ideal(k) => {
                let lb = self.valuation_lower_bound();
                if lb >= k {
                    Tri::Yes
                } else if !self.digits.is_empty() {
                    Tri::No
                } else {
                    Tri::Unknown
                }
            }
            LocalSet::Units => {
                if self.digits.is_empty() {
                    if self.prec >= 1 {
                        Tri::No
                    } else {
                        Tri::Unknown
                    }
                } else {
                    Tri::from_bool(self.val == 0)
                }
            }
            LocalSet::PrincipalUnits(t) => {
                if t == 0 {
                    return self.member_tri(LocalSet::Units);
                }
                // x in J_t iff x - 1 in w^t O
                let d = self.sub(&FieldElement::one(self.ell));
                d.member_tri(LocalSet::Ideal(t as i64))
            }
        }
    }

    /// Membership verdict; errors rather than guessing.
    pub fn member(&self, set: LocalSet) -> Result<bool> {
        self.member_tri(set).certain(&format!("membership of {self} in {set:?}"))
    }

    /// 1 if the element is integral, 0 otherwise.
    pub fn integrality_indicator(&self) -> Result<u8> {
        Ok(self.member(LocalSet::Integers)? as u8)
    }

    /// Parses `w^-1 + 1 + 2*w^3 + O(w^11)`; without an `O(..)` term the
    /// element is exact.
    pub fn parse(ell: u32, s: &str) -> Result<Self> {
        let err = |m: &str| Error::Parse(format!("{m} in {s:?}"));
        let cleaned = s.replace(' ', "");
        if cleaned.is_empty() {
            return Err(err("empty input"));
        }
        let mut prec = EXACT;
        let mut acc = FieldElement::zero(ell);
        // split into signed terms
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut depth = 0;
        for ch in cleaned.chars() {
            match ch {
                '(' => {
                    depth += 1;
                    cur.push(ch);
                }
                ')' => {
                    depth -= 1;
                    cur.push(ch);
                }
                '+' | '-' if depth == 0 && !cur.is_empty() && !cur.ends_with('^') => {
                    terms.push((neg, std::mem::take(&mut cur)));
                    neg = ch == '-';
                }
                '-' if depth == 0 && cur.is_empty() => neg = !neg,
                '+' if depth == 0 && cur.is_empty() => {}
                _ => cur.push(ch),
            }
        }
        if !cur.is_empty() {
            terms.push((neg, cur));
        }
        for (neg, t) in terms {
            if let Some(inner) = t.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
                let e = parse_w_power(inner).ok_or_else(|| err("bad O-term"))?;
                prec = prec.min(e);
                continue;
            }
            let (coef, power) = match t.split_once('*') {
                Some((c, w)) => (
                    c.parse::<i64>().map_err(|_| err("bad coefficient"))?,
                    parse_w_power(w).ok_or_else(|| err("bad power of w"))?,
                ),
                None => match t.parse::<i64>() {
                    Ok(c) => (c, 0),
                    Err(_) => (1, parse_w_power(&t).ok_or_else(|| err("bad term"))?),
                },
            };
            let c = if neg { -coef } else { coef };
            let term = FieldElement::monomial(ell, c.rem_euclid(ell as i64) as u32, power);
            acc = acc.add(&term);
        }
        Ok(acc.truncate(prec))
    }
}

fn parse_w_power(s: &str) -> Option<i64> {
    if s == "w" {
        return Some(1);
    }
    s.strip_prefix("w^").and_then(|e| e.parse().ok())
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, &d) in self.digits.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let k = self.val + i as i64;
            let w = match k {
                0 => String::new(),
                1 => "w".to_string(),
                k => format!("w^{k}"),
            };
            parts.push(match (d, w.is_empty()) {
                (d, true) => d.to_string(),
                (1, false) => w,
                (d, false) => format!("{d}*{w}"),
            });
        }
        if self.prec != EXACT {
            parts.push(format!("O(w^{})", self.prec));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        FieldElement::add(self, o)
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        FieldElement::sub(self, o)
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        FieldElement::mul(self, o)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(ell: u32, k: i64) -> FieldElement {
        FieldElement::pi_pow(ell, k)
    }

    #[test]
    fn geometric_series() {
        let ell = 3;
        let x = FieldElement::one(ell).add(&w(ell, 1));
        let y = x.inv_prec(6).unwrap();
        // 1 - w + w^2 - ... = 1 + 2w + w^2 + 2w^3 + ...
        for k in 0..6 {
            assert_eq!(y.digit(k), Some(if k % 2 == 0 { 1 } else { 2 }));
        }
        assert_eq!(y.precision(), 6);
        let one = x.mul(&y);
        assert_eq!(one.truncate(6), FieldElement::one(ell).truncate(6));
    }

    #[test]
    fn valuations() {
        let ell = 2;
        assert_eq!(w(ell, 2).add(&w(ell, 3)).valuation().unwrap(), 2);
        assert_eq!(w(ell, 1).mul(&w(ell, -1)), FieldElement::one(ell));
        assert_eq!(FieldElement::from_int(ell, 1).valuation().unwrap(), 0);
        assert!(matches!(
            FieldElement::big_o(ell, 4).valuation(),
            Err(Error::InsufficientPrecision(_))
        ));
        assert!(FieldElement::big_o(ell, 4).inv().is_err());
    }

    #[test]
    fn memberships() {
        let ell = 5;
        let one = FieldElement::one(ell);
        assert!(one.add(&w(ell, 3)).member(LocalSet::PrincipalUnits(2)).unwrap());
        assert!(!w(ell, 1).member(LocalSet::Units).unwrap());
        assert!(!one.add(&w(ell, 1)).member(LocalSet::PrincipalUnits(2)).unwrap());
        assert!(w(ell, 3).member(LocalSet::Ideal(2)).unwrap());
        let vague = one.add(&FieldElement::big_o(ell, 1));
        assert!(vague.member(LocalSet::PrincipalUnits(2)).is_err());
        assert!(vague.member(LocalSet::PrincipalUnits(1)).unwrap());
    }

    #[test]
    fn integrality_indicator() {
        let ell = 3;
        assert_eq!(w(ell, -1).integrality_indicator().unwrap(), 0);
        assert_eq!(FieldElement::zero(ell).integrality_indicator().unwrap(), 1);
        assert_eq!(w(ell, 1).integrality_indicator().unwrap(), 1);
    }

    #[test]
    fn precision_propagates() {
        let ell = 3;
        let a = FieldElement::one(ell).add(&FieldElement::big_o(ell, 4));
        let b = w(ell, -2);
        let p = a.mul(&b);
        assert_eq!(p.precision(), 2);
        let s = a.add(&w(ell, 7));
        assert_eq!(s.precision(), 4);
    }

    #[test]
    fn parse_and_render() {
        let ell = 3;
        let s = "w^-1 + 1 + 2*w^3 + O(w^11)";
        let x = FieldElement::parse(ell, s).unwrap();
        assert_eq!(x.to_string(), s);
        assert_eq!(x.valuation().unwrap(), -1);
        let y = FieldElement::parse(ell, "-w^2").unwrap();
        assert_eq!(y.to_string(), "2*w^2");
        assert!(FieldElement::parse(ell, "w^x").is_err());
    }
}
