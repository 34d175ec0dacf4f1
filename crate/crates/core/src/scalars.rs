//! The exact coefficient ring.
//!
//! A [`Scalar`] is a Laurent polynomial in the Satake variables `A1..An`,
//! `B1..B(n+1)` and `T` whose coefficients live in `Q(z)[r]`, where `z` is a
//! primitive `ell`-th root of unity and `r` is a formal square root of `ell`
//! (so `r^2 = ell`, and `r` is invertible with `r^-1 = r/ell`).
//!
//! Canonical form: the cyclotomic part is written in the basis
//! `1, z, .., z^(ell-2)`, the `r`-exponent is 0 or 1, and terms with a zero
//! coefficient are dropped. Two scalars are equal iff their canonical forms
//! coincide.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A formal variable of the Satake ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Satake parameter of the `GL_n` factor (1-based).
    A(u8),
    /// Satake parameter of the `GL_{n+1}` factor (1-based).
    B(u8),
    /// Satake parameter of the rank-one factor.
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::A(i) => write!(f, "A{i}"),
            Var::B(i) => write!(f, "B{i}"),
            Var::T => write!(f, "T"),
        }
    }
}

/// A Laurent monomial, stored as sorted `(variable, nonzero exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(SmallVec<[(Var, i32); 6]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var, e: i32) -> Self {
        let mut m = SmallVec::new();
        if e != 0 {
            m.push((v, e));
        }
        Monomial(m)
    }

    /// Builds a monomial from arbitrary pairs; repeated variables are merged.
    pub fn from_pairs<I: IntoIterator<Item = (Var, i32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<Var, i32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e != 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: Var) -> i32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn pairs(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: SmallVec<[(Var, i32); 6]> = SmallVec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|&(v, e)| (v, -e)).collect())
    }

    /// Replaces every variable by `f(var)` (used for permutations of variables).
    pub fn map_vars(&self, f: impl Fn(Var) -> Var) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|&(v, e)| (f(v), e)))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Element of `Q(z)`, `z` a primitive `ell`-th root of unity, in the basis
/// `1, z, .., z^(ell-2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Cyclo(Vec<BigRational>);

impl Cyclo {
    fn zero(ell: u32) -> Self {
        Cyclo(vec![BigRational::zero(); (ell - 1) as usize])
    }

    fn from_rational(ell: u32, q: BigRational) -> Self {
        let mut c = Cyclo::zero(ell);
        c.0[0] = q;
        c
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Reduces a length-`ell` vector (coefficients of `1..z^(ell-1)`).
    fn reduce_full(mut full: Vec<BigRational>) -> Self {
        let top = full.pop().expect("nonempty");
        for c in full.iter_mut() {
            *c -= &top;
        }
        Cyclo(full)
    }

    fn power_of_zeta(ell: u32, k: i64) -> Self {
        let k = k.rem_euclid(ell as i64) as usize;
        let mut full = vec![BigRational::zero(); ell as usize];
        full[k] = BigRational::one();
        Cyclo::reduce_full(full)
    }

    fn add(&self, o: &Cyclo) -> Cyclo {
        Cyclo(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn sub(&self, o: &Cyclo) -> Cyclo {
        Cyclo(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    fn neg(&self) -> Cyclo {
        Cyclo(self.0.iter().map(|a| -a).collect())
    }

    fn scale(&self, q: &BigRational) -> Cyclo {
        Cyclo(self.0.iter().map(|a| a * q).collect())
    }

    fn mul(&self, o: &Cyclo, ell: u32) -> Cyclo {
        let l = ell as usize;
        let mut full = vec![BigRational::zero(); l];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                full[(i + j) % l] += a * b;
            }
        }
        Cyclo::reduce_full(full)
    }

    /// Galois conjugate `z -> z^k`.
    fn conjugate(&self, k: u32, ell: u32) -> Cyclo {
        let l = ell as usize;
        let mut full = vec![BigRational::zero(); l];
        for (i, a) in self.0.iter().enumerate() {
            full[(i * k as usize) % l] += a;
        }
        Cyclo::reduce_full(full)
    }

    fn as_rational(&self) -> Option<&BigRational> {
        if self.0[1..].iter().all(Zero::is_zero) {
            Some(&self.0[0])
        } else {
            None
        }
    }

    /// Inverse through the norm: `a^-1 = prod_{k != 1} sigma_k(a) / N(a)`.
    fn inverse(&self, ell: u32) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        let mut others = Cyclo::from_rational(ell, BigRational::one());
        for k in 2..ell {
            others = others.mul(&self.conjugate(k, ell), ell);
        }
        let norm = self.mul(&others, ell);
        let n = norm.as_rational()?.clone();
        if n.is_zero() {
            return None;
        }
        Some(others.scale(&n.recip()))
    }
}

/// Coefficient `p + q*r` with `p, q` in `Q(z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Coeff {
    p: Cyclo,
    q: Cyclo,
}

impl Coeff {
    fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    fn add(&self, o: &Coeff) -> Coeff {
        Coeff { p: self.p.add(&o.p), q: self.q.add(&o.q) }
    }

    fn neg(&self) -> Coeff {
        Coeff { p: self.p.neg(), q: self.q.neg() }
    }

    fn mul(&self, o: &Coeff, ell: u32) -> Coeff {
        let ellq = BigRational::from_integer(BigInt::from(ell));
        let pp = self.p.mul(&o.p, ell);
        let qq = self.q.mul(&o.q, ell).scale(&ellq);
        let pq = self.p.mul(&o.q, ell);
        let qp = self.q.mul(&o.p, ell);
        Coeff { p: pp.add(&qq), q: pq.add(&qp) }
    }

    fn inverse(&self, ell: u32) -> Option<Coeff> {
        // (p + q r)(p - q r) = p^2 - ell q^2
        let ellq = BigRational::from_integer(BigInt::from(ell));
        let d = self.p.mul(&self.p, ell).sub(&self.q.mul(&self.q, ell).scale(&ellq));
        let dinv = d.inverse(ell)?;
        Some(Coeff { p: self.p.mul(&dinv, ell), q: self.q.neg().mul(&dinv, ell) })
    }
}

/// An element of the coefficient ring. See the module docs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    ell: u32,
    terms: BTreeMap<Monomial, Coeff>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Scalar {
    pub fn zero(ell: u32) -> Self {
        assert!(ell >= 2, "residue characteristic must be a prime >= 2");
        Scalar { ell, terms: BTreeMap::new() }
    }

    pub fn one(ell: u32) -> Self {
        Scalar::from_int(ell, 1)
    }

    pub fn from_int(ell: u32, n: i64) -> Self {
        Scalar::from_rational(ell, rat(n))
    }

    pub fn from_bigint(ell: u32, n: BigInt) -> Self {
        Scalar::from_rational(ell, BigRational::from_integer(n))
    }

    pub fn from_ratio(ell: u32, num: i64, den: i64) -> Self {
        Scalar::from_rational(ell, BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(ell: u32, q: BigRational) -> Self {
        let mut s = Scalar::zero(ell);
        let c = Coeff { p: Cyclo::from_rational(ell, q), q: Cyclo::zero(ell) };
        if !c.is_zero() {
            s.terms.insert(Monomial::one(), c);
        }
        s
    }

    /// `z^k` for the fixed primitive `ell`-th root of unity.
    pub fn zeta_pow(ell: u32, k: i64) -> Self {
        let mut s = Scalar::zero(ell);
        s.terms.insert(
            Monomial::one(),
            Coeff { p: Cyclo::power_of_zeta(ell, k), q: Cyclo::zero(ell) },
        );
        s
    }

    /// The formal square root `r` of `ell`.
    pub fn sqrt_ell(ell: u32) -> Self {
        let mut s = Scalar::zero(ell);
        s.terms.insert(
            Monomial::one(),
            Coeff { p: Cyclo::zero(ell), q: Cyclo::from_rational(ell, BigRational::one()) },
        );
        s
    }

    /// `ell^(k/2)` for any integer `k`.
    pub fn ell_half_power(ell: u32, k: i64) -> Self {
        let half = k.div_euclid(2);
        let base = BigRational::from_integer(BigInt::from(ell));
        let q = if half >= 0 {
            num_traits::pow(base, half as usize)
        } else {
            num_traits::pow(base, (-half) as usize).recip()
        };
        let s = Scalar::from_rational(ell, q);
        if k.rem_euclid(2) == 1 {
            &s * &Scalar::sqrt_ell(ell)
        } else {
            s
        }
    }

    pub fn var(ell: u32, v: Var) -> Self {
        Scalar::monomial(ell, Monomial::var(v, 1))
    }

    pub fn monomial(ell: u32, m: Monomial) -> Self {
        let mut s = Scalar::zero(ell);
        s.terms.insert(m, Coeff { p: Cyclo::from_rational(ell, rat(1)), q: Cyclo::zero(ell) });
        s
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        *self == Scalar::one(self.ell)
    }

    /// True when no Satake variable occurs.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The rational value, when the scalar is a rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if !m.is_one() || !c.q.is_zero() {
            return None;
        }
        c.p.as_rational().cloned()
    }

    /// Monomials occurring with nonzero coefficient.
    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    /// Coefficient of a monomial, as a constant scalar.
    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        let mut s = Scalar::zero(self.ell);
        if let Some(c) = self.terms.get(m) {
            s.terms.insert(Monomial::one(), c.clone());
        }
        s
    }

    /// Splits into `(monomial, constant coefficient)` pairs.
    pub fn terms(&self) -> Vec<(Monomial, Scalar)> {
        self.terms
            .keys()
            .map(|m| (m.clone(), self.coefficient(m)))
            .collect()
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.pairs().iter().map(|&(v, _)| v))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    fn check_ell(&self, o: &Scalar) {
        assert_eq!(self.ell, o.ell, "scalars over different residue characteristics");
    }

    fn insert_add(&mut self, m: Monomial, c: Coeff) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Multiplies by `monomial * self`-style scaling with a constant scalar.
    pub fn scale_monomial(&self, m: &Monomial) -> Scalar {
        Scalar {
            ell: self.ell,
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    /// Inverse of a unit: a single monomial with invertible coefficient.
    pub fn inverse(&self) -> Result<Scalar> {
        if self.terms.len() != 1 {
            return Err(Error::NonUnitDivisor(self.to_string()));
        }
        let (m, c) = self.terms.iter().next().expect("one term");
        let inv = c
            .inverse(self.ell)
            .ok_or_else(|| Error::NonUnitDivisor(self.to_string()))?;
        let mut s = Scalar::zero(self.ell);
        s.terms.insert(m.inverse(), inv);
        Ok(s)
    }

    pub fn checked_div(&self, d: &Scalar) -> Result<Scalar> {
        Ok(self * &d.inverse()?)
    }

    /// Integer power; negative exponents require a unit.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Scalar::one(self.ell);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            k >>= 1;
            if k > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Evaluates the variables. Every variable present must be assigned and
    /// every assigned value used with a negative exponent must be a unit.
    pub fn substitute(&self, assignment: &HashMap<Var, Scalar>) -> Result<Scalar> {
        let mut out = Scalar::zero(self.ell);
        let mut pow_cache: HashMap<(Var, i32), Scalar> = HashMap::new();
        for (m, c) in &self.terms {
            let mut term = Scalar::zero(self.ell);
            term.terms.insert(Monomial::one(), c.clone());
            for &(v, e) in m.pairs() {
                let val = assignment
                    .get(&v)
                    .ok_or_else(|| Error::MissingVariable(v.to_string()))?;
                let p = match pow_cache.get(&(v, e)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = val.pow(e as i64)?;
                        pow_cache.insert((v, e), p.clone());
                        p
                    }
                };
                term = &term * &p;
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Replaces every Satake variable by its inverse; `z` and `r` are fixed.
    pub fn invert_variables(&self) -> Scalar {
        Scalar {
            ell: self.ell,
            terms: self.terms.iter().map(|(m, c)| (m.inverse(), c.clone())).collect(),
        }
    }

    /// Applies a renaming of variables to every monomial.
    pub fn map_vars(&self, f: impl Fn(Var) -> Var + Copy) -> Scalar {
        let mut out = Scalar::zero(self.ell);
        for (m, c) in &self.terms {
            out.insert_add(m.map_vars(f), c.clone());
        }
        out
    }

    /// Whether a constant lies in `Z[z][1/ell]` (denominators powers of `ell`,
    /// no odd power of `r`).
    pub fn in_ell_integral(&self) -> Result<bool> {
        if !self.is_constant() {
            return Err(Error::VariablePresent(self.to_string()));
        }
        let Some(c) = self.terms.get(&Monomial::one()) else {
            return Ok(true);
        };
        if !c.q.is_zero() {
            return Ok(false);
        }
        let ell = BigInt::from(self.ell);
        Ok(c.p.0.iter().all(|q| {
            let mut d = q.denom().clone();
            while (&d % &ell).is_zero() {
                d /= &ell;
            }
            d.is_one()
        }))
    }

    /// Drops all terms whose `T`-exponent exceeds `max_deg`.
    pub fn truncate_t_degree(&self, max_deg: i32) -> Scalar {
        Scalar {
            ell: self.ell,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exponent(Var::T) <= max_deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Atomic pieces used by the canonical rendering:
    /// (monomial, r-exponent, z-exponent, rational).
    fn atoms(&self) -> Vec<(&Monomial, u8, usize, &BigRational)> {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            for (re, part) in [(0u8, &c.p), (1u8, &c.q)] {
                for (zi, q) in part.0.iter().enumerate() {
                    if !q.is_zero() {
                        out.push((m, re, zi, q));
                    }
                }
            }
        }
        out
    }
}

impl Scalar {
    /// Parses the rendering produced by `Display`.
    pub fn parse(ell: u32, s: &str) -> Result<Scalar> {
        let s = s.trim();
        if s == "0" {
            return Ok(Scalar::zero(ell));
        }
        let mut acc = Scalar::zero(ell);
        for atom in s.replace(" - ", " + -").split(" + ") {
            let (neg, body) = match atom.trim().strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, atom.trim()),
            };
            let mut term = Scalar::one(ell);
            for f in body.split('*') {
                term = &term * &parse_factor(ell, f.trim())?;
            }
            acc = if neg { &acc - &term } else { &acc + &term };
        }
        Ok(acc)
    }
}

fn parse_factor(ell: u32, f: &str) -> Result<Scalar> {
    let bad = || Error::Parse(format!("bad scalar factor {f:?}"));
    let (head, exp) = match f.split_once('^') {
        Some((h, e)) => (h, e.parse::<i64>().map_err(|_| bad())?),
        None => (f, 1),
    };
    match head {
        "z" => return Ok(Scalar::zeta_pow(ell, exp)),
        "r" => return Ok(Scalar::ell_half_power(ell, exp)),
        "T" => return Ok(Scalar::monomial(ell, Monomial::var(Var::T, exp as i32))),
        _ => {}
    }
    if let Some(idx) = head.strip_prefix('A') {
        let i: u8 = idx.parse().map_err(|_| bad())?;
        return Ok(Scalar::monomial(ell, Monomial::var(Var::A(i), exp as i32)));
    }
    if let Some(idx) = head.strip_prefix('B') {
        let i: u8 = idx.parse().map_err(|_| bad())?;
        return Ok(Scalar::monomial(ell, Monomial::var(Var::B(i), exp as i32)));
    }
    if exp != 1 {
        return Err(bad());
    }
    let q: BigRational = head.parse().map_err(|_| bad())?;
    Ok(Scalar::from_rational(ell, q))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms = self.atoms();
        if atoms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, re, zi, q)) in atoms.into_iter().enumerate() {
            let neg = q.is_negative();
            let a = q.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() {
                factors.push(a.to_string());
            }
            match zi {
                0 => {}
                1 => factors.push("z".into()),
                k => factors.push(format!("z^{k}")),
            }
            if re == 1 {
                factors.push("r".into());
            }
            if !m.is_one() {
                factors.push(m.to_string());
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar[{}]({})", self.ell, self)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.check_ell(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self.check_ell(o);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(m.clone(), c.neg());
        }
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        self.check_ell(o);
        let mut out = Scalar::zero(self.ell);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert_add(m1.mul(m2), c1.mul(c2, self.ell));
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            ell: self.ell,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(mut iter: I) -> Scalar {
        let first = iter.next().expect("sum of an empty scalar iterator has no ell");
        iter.fold(first, |a, b| &a + &b)
    }
}
