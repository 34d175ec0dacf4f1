use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::cosetfun::{lattice_multiplicities, CosetSum, HeckeTerm, Piece, Space};
use crate::error::{Error, Result};
use crate::matgrp::{smith_normal_form, Mat, SubgroupDesc};
use crate::scalars::{Monomial, Scalar, Var};

use super::cosets::{bounded_compositions, double_coset_reps, double_coset_reps_by_torus};

/// `(lam, mu, k)`: the double coset `K w^lam K x K w^mu K x w^k O^x`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub small: Vec<i64>,
    pub big: Vec<i64>,
    pub k: i64,
}

impl Label {
    pub fn new(small: &[i64], big: &[i64], k: i64) -> Result<Label> {
        let dominant = |v: &[i64]| v.windows(2).all(|w| w[0] >= w[1]);
        if !dominant(small) || !dominant(big) {
            return Err(Error::InvalidInput(format!("labels must be non-increasing: {small:?} {big:?}")));
        }
        if small.len() + 1 != big.len() {
            return Err(Error::InvalidInput("label sizes must be n and n+1".into()));
        }
        Ok(Label { small: small.to_vec(), big: big.to_vec(), k })
    }

    pub fn unit(n: usize) -> Label {
        Label { small: vec![0; n], big: vec![0; n + 1], k: 0 }
    }

    /// Label of the inverse double coset.
    pub fn inverse(&self) -> Label {
        let neg_rev = |v: &[i64]| v.iter().rev().map(|x| -x).collect::<Vec<_>>();
        Label { small: neg_rev(&self.small), big: neg_rev(&self.big), k: -self.k }
    }
}

#[derive(Debug, Clone)]
pub struct SatakeConfig {
    /// Largest number of coset candidates enumerated per double coset.
    pub budget: u64,
    /// Largest number of basis elements produced by the triangular solve.
    pub max_terms: usize,
}

impl Default for SatakeConfig {
    fn default() -> Self {
        SatakeConfig { budget: 1 << 22, max_terms: 4096 }
    }
}

/// Finite linear combination of double coset indicators.
#[derive(Clone, PartialEq, Eq)]
pub struct HeckeElt {
    pub ell: u32,
    pub n: usize,
    terms: BTreeMap<Label, Scalar>,
}

/// Invariance under the transpositions of `A1..An` and of `B1..B(n+1)`.
pub fn is_symmetric(p: &Scalar, n: usize) -> bool {
    let swaps = (1..n as u8)
        .map(|i| (Var::A(i), Var::A(i + 1)))
        .chain((1..=n as u8).map(|j| (Var::B(j), Var::B(j + 1))));
    for (x, y) in swaps {
        let q = p.map_vars(|v| {
            if v == x {
                y
            } else if v == y {
                x
            } else {
                v
            }
        });
        if &q != p {
            return false;
        }
    }
    true
}

fn var_monomial(var: impl Fn(u8) -> Var, a: &[i64]) -> Monomial {
    Monomial::from_pairs(a.iter().enumerate().map(|(i, &e)| (var(i as u8 + 1), e as i32)))
}

/// Satake image of one matrix factor `1[K w^lam K]` in variables `var`.
fn satake_factor(ell: u32, lam: &[i64], var: impl Fn(u8) -> Var + Copy, budget: u64) -> Result<Scalar> {
    let m = lam.len() as i64;
    let mut acc = Scalar::zero(ell);
    for (a, reps) in double_coset_reps_by_torus(ell, lam, budget)? {
        let twice_rho: i64 = a.iter().enumerate().map(|(i, &x)| (m - 1 - 2 * i as i64) * x).sum();
        let w = Scalar::ell_half_power(ell, -twice_rho);
        let c = Scalar::from_int(ell, reps.len() as i64);
        acc = &acc + &(&(&c * &w) * &Scalar::monomial(ell, var_monomial(var, &a)));
    }
    Ok(acc)
}

/// Structure constants of one factor: `1[K w^a K] * 1[K w^b K] = sum c_nu 1[K w^nu K]`.
fn convolve_factor(ell: u32, a: &[i64], b: &[i64], budget: u64) -> Result<Vec<(Vec<i64>, i64)>> {
    let m = a.len();
    let lo = a[m - 1] + b[m - 1];
    let hi = a[0] + b[0];
    let total: i64 = a.iter().sum::<i64>() + b.iter().sum::<i64>();
    let reps = double_coset_reps(ell, a, budget)?;
    let invs = reps.iter().map(|u| u.inverse()).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for nu in bounded_compositions(m, lo, hi, total) {
        if !nu.windows(2).all(|w| w[0] >= w[1]) {
            continue;
        }
        let t = Mat::diag_pi(ell, &nu);
        let mut c = 0i64;
        for ui in &invs {
            if smith_normal_form(&ui.mul(&t))? == b {
                c += 1;
            }
        }
        if c != 0 {
            out.push((nu, c));
        }
    }
    Ok(out)
}

impl HeckeElt {
    pub fn zero(ell: u32, n: usize) -> Self {
        HeckeElt { ell, n, terms: BTreeMap::new() }
    }

    /// The unit `1[K]`.
    pub fn one(ell: u32, n: usize) -> Self {
        HeckeElt::basis(ell, Label::unit(n))
    }

    pub fn basis(ell: u32, label: Label) -> Self {
        let n = label.small.len();
        let mut terms = BTreeMap::new();
        terms.insert(label, Scalar::one(ell));
        HeckeElt { ell, n, terms }
    }

    /// `1[w O^x]` on the rank-one factor.
    pub fn t_operator(ell: u32, n: usize, k: i64) -> Self {
        HeckeElt::basis(ell, Label { k, ..Label::unit(n) })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Label, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, l: &Label) -> Scalar {
        self.terms.get(l).cloned().unwrap_or_else(|| Scalar::zero(self.ell))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, l: Label, c: Scalar) {
        let e = self.terms.entry(l.clone()).or_insert_with(|| Scalar::zero(c.ell()));
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&l);
        }
    }

    pub fn add(&self, o: &HeckeElt) -> HeckeElt {
        let mut out = self.clone();
        for (l, c) in &o.terms {
            out.add_term(l.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> HeckeElt {
        let mut out = HeckeElt::zero(self.ell, self.n);
        for (l, x) in &self.terms {
            out.add_term(l.clone(), x * c);
        }
        out
    }

    /// `f -> (g -> f(g^{-1}))`.
    pub fn involution(&self) -> HeckeElt {
        let mut out = HeckeElt::zero(self.ell, self.n);
        for (l, c) in &self.terms {
            out.add_term(l.inverse(), c.clone());
        }
        out
    }

    pub fn satake(&self, cfg: &SatakeConfig) -> Result<Scalar> {
        let mut small: HashMap<Vec<i64>, Scalar> = HashMap::new();
        let mut big: HashMap<Vec<i64>, Scalar> = HashMap::new();
        let mut acc = Scalar::zero(self.ell);
        for (l, c) in &self.terms {
            if !small.contains_key(&l.small) {
                small.insert(l.small.clone(), satake_factor(self.ell, &l.small, Var::A, cfg.budget)?);
            }
            if !big.contains_key(&l.big) {
                big.insert(l.big.clone(), satake_factor(self.ell, &l.big, Var::B, cfg.budget)?);
            }
            let t = Scalar::monomial(self.ell, Monomial::var(Var::T, l.k as i32));
            acc = &acc + &(&(c * &small[&l.small]) * &(&big[&l.big] * &t));
        }
        Ok(acc)
    }

    /// Preimage of a symmetric Laurent polynomial, by peeling off the
    /// lexicographically largest dominant exponent.
    pub fn inverse_satake(ell: u32, n: usize, p: &Scalar, cfg: &SatakeConfig) -> Result<HeckeElt> {
        if !is_symmetric(p, n) {
            return Err(Error::NotSymmetric(p.to_string()));
        }
        let mut rest = p.clone();
        let mut out = HeckeElt::zero(ell, n);
        while !rest.is_zero() {
            if out.len() >= cfg.max_terms {
                return Err(Error::BudgetExceeded(format!("more than {} Hecke basis elements", cfg.max_terms)));
            }
            let lead = rest
                .monomials()
                .map(|m| dominant_label(m, n))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .expect("nonzero polynomial has a monomial");
            let basis = HeckeElt::basis(ell, lead.clone());
            let s = basis.satake(cfg)?;
            for m in s.monomials() {
                if dominant_label(m, n)? > lead {
                    return Err(Error::Inconsistent(format!("Satake image of {lead:?} is not triangular")));
                }
            }
            let dm = label_monomial(&lead);
            let c = rest.coefficient(&dm).checked_div(&s.coefficient(&dm))?;
            rest = &rest - &(&c * &s);
            out.add_term(lead, c);
        }
        Ok(out)
    }

    pub fn convolve(&self, o: &HeckeElt, cfg: &SatakeConfig) -> Result<HeckeElt> {
        let mut out = HeckeElt::zero(self.ell, self.n);
        for (l1, c1) in &self.terms {
            for (l2, c2) in &o.terms {
                let s = convolve_factor(self.ell, &l1.small, &l2.small, cfg.budget)?;
                let b = convolve_factor(self.ell, &l1.big, &l2.big, cfg.budget)?;
                let c = c1 * c2;
                for (nu_s, a) in &s {
                    for (nu_b, bb) in &b {
                        let l = Label { small: nu_s.clone(), big: nu_b.clone(), k: l1.k + l2.k };
                        out.add_term(l, &c * &Scalar::from_int(self.ell, a * bb));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `f . phi`, `x -> int f(g) phi(x g) dg`, for `phi` invariant under the
    /// hyperspecial subgroup.
    pub fn act_on(&self, phi: &CosetSum, cfg: &SatakeConfig) -> Result<CosetSum> {
        if phi.space != Space::Quotient || phi.n != self.n || phi.ell != self.ell {
            return Err(Error::InvalidInput("Hecke operators act on sums on the quotient".into()));
        }
        let hyp = SubgroupDesc::hyperspecial(self.n, 0);
        for t in phi.terms() {
            if !t.is_invariant_under(&hyp) {
                return Err(Error::NotInvariant(format!("term {t} under the hyperspecial subgroup")));
            }
        }
        let inner = Arc::new(phi.clone());
        let mut out = CosetSum::zero(self.ell, self.n, Space::Quotient);
        for (l, c) in &self.terms {
            if *l == Label::unit(self.n) {
                out = out.add(&phi.scale(c))?;
                continue;
            }
            let small_reps = double_coset_reps(self.ell, &l.small, cfg.budget)?;
            let inv = l.inverse();
            out.push(Piece::Hecke(HeckeTerm {
                coeff: c.clone(),
                label: (l.small.clone(), l.big.clone(), l.k),
                small_lattices: Arc::new(lattice_multiplicities(&small_reps)?),
                small_reps: Arc::new(small_reps),
                big_reps: Arc::new(double_coset_reps(self.ell, &l.big, cfg.budget)?),
                small_point_reps: Arc::new(double_coset_reps(self.ell, &inv.small, cfg.budget)?),
                big_point_reps: Arc::new(double_coset_reps(self.ell, &inv.big, cfg.budget)?),
                inner: inner.clone(),
            }));
        }
        Ok(out)
    }

    /// Parses lines `lam | mu | k | coeff` with comma separated tuples.
    pub fn parse(ell: u32, n: usize, s: &str) -> Result<HeckeElt> {
        let mut out = HeckeElt::zero(ell, n);
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let f: Vec<&str> = line.split(" | ").collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("expected `lam | mu | k | coeff` in {line:?}")));
            }
            let tuple = |t: &str| -> Result<Vec<i64>> {
                t.split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad tuple {t:?}"))))
                    .collect()
            };
            let k: i64 = f[2].trim().parse().map_err(|_| Error::Parse(format!("bad k in {line:?}")))?;
            let l = Label::new(&tuple(f[0])?, &tuple(f[1])?, k)?;
            if l.small.len() != n {
                return Err(Error::Parse(format!("label size differs from n = {n}")));
            }
            out.add_term(l, Scalar::parse(ell, f[3])?);
        }
        Ok(out)
    }
}

/// Sorted exponents of a monomial in the Satake variables.
fn dominant_label(m: &Monomial, n: usize) -> Result<Label> {
    let mut small = vec![0i64; n];
    let mut big = vec![0i64; n + 1];
    let mut k = 0i64;
    for &(v, e) in m.pairs() {
        match v {
            Var::A(i) if (1..=n as u8).contains(&i) => small[i as usize - 1] = e as i64,
            Var::B(j) if (1..=n as u8 + 1).contains(&j) => big[j as usize - 1] = e as i64,
            Var::T => k = e as i64,
            other => return Err(Error::InvalidInput(format!("variable {other} outside the Satake variables"))),
        }
    }
    small.sort_unstable_by(|a, b| b.cmp(a));
    big.sort_unstable_by(|a, b| b.cmp(a));
    Ok(Label { small, big, k })
}

fn label_monomial(l: &Label) -> Monomial {
    var_monomial(Var::A, &l.small)
        .mul(&var_monomial(Var::B, &l.big))
        .mul(&Monomial::var(Var::T, l.k as i32))
}

impl fmt::Display for HeckeElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        for (l, c) in &self.terms {
            writeln!(f, "{} | {} | {} | {}", join(&l.small), join(&l.big), l.k, c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for HeckeElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
