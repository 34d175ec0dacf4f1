//! Solving `{h in GL_n : (h, diag(h,1), det h) x in b P g}`.
//!
//! Writing `x' = x g^{-1}` and `h = b_n k x'_n^{-1}`, membership becomes a
//! condition on `k in P_n` alone:
//!
//! * `B embed(k) Z in P_{n+1}` with `B = b_{n+1}^{-1} embed(b_n)` and
//!   `Z = embed(x'_n)^{-1} x'_{n+1}`;
//! * `c det(k) in J_t` with `c = det(b_n) x'_u / (b_u det x'_n)`.
//!
//! The solution set is open and closed in `P_n`, so it is found by refining
//! the digits of `k` one entry at a time, deciding each digit box with
//! precision-tracked arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, LocalSet, Tri};
use crate::matgrp::{gl_fraction, GroupElt, Mat, Pattern, SubgroupDesc};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Stop at the first solution; the result is 1 or 0.
    Exists,
    /// Haar measure of the solution set with `GL_n(O)` of volume 1.
    Measure,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Relative precision of inverses of non-monomial units.
    pub rel_prec: u32,
    /// Maximum number of digit boxes visited per solve.
    pub max_nodes: u64,
    /// Deepest digit position that may be resolved.
    pub max_level: i64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rel_prec: 40, max_nodes: 2_000_000, max_level: 30 }
    }
}

struct Problem<'a> {
    ell: u32,
    n: usize,
    p1: &'a Pattern,
    p2: &'a Pattern,
    t: u32,
    bmat: Mat,
    z: Mat,
    c: FieldElement,
    iw1: bool,
    iw2: bool,
}

/// Measure (or existence) of the solution set. `rinv` is the inverse of the
/// right translate `g`.
pub fn solve(
    x: &GroupElt,
    base: &GroupElt,
    p: &SubgroupDesc,
    rinv: &GroupElt,
    mode: Mode,
    cfg: &SolverConfig,
) -> Result<BigRational> {
    let ell = x.ell();
    let n = x.n();
    let xp = x.mul(rinv);
    let b2inv = base.big.inverse_prec(cfg.rel_prec)?;
    let bmat = b2inv.mul(&base.small.embed());
    let dx = xp.small.det();
    if dx.is_exact_zero() {
        return Err(Error::Singular);
    }
    let dxinv = dx.inv_prec(cfg.rel_prec)?;
    let z = xp.small.adjugate().embed_scaled(&dxinv).mul(&xp.big);
    let c = base
        .small
        .det()
        .mul(&xp.u)
        .mul(&base.u.inv_prec(cfg.rel_prec)?)
        .mul(&dxinv);
    let prob = Problem {
        ell,
        n,
        p1: &p.small,
        p2: &p.big,
        t: p.j,
        iw1: p.small.is_iwahori_type(),
        iw2: p.big.is_iwahori_type(),
        bmat,
        z,
        c,
    };
    if let Some(r) = prob.fast_path()? {
        if mode == Mode::Exists && !r.is_zero() {
            return Ok(BigRational::one());
        }
        return Ok(r);
    }
    prob.search(mode, cfg)
}

/// Membership of a point in `b P g` on the product group.
pub fn member_translate(x: &GroupElt, base: &GroupElt, p: &SubgroupDesc, rinv: &GroupElt, rel_prec: u32) -> Result<bool> {
    let y = base.inverse_prec(rel_prec)?.mul(x).mul(rinv);
    p.member(&y)
}

fn rat_pow(ell: u32, e: i64) -> BigRational {
    let l = BigInt::from(ell);
    if e >= 0 {
        BigRational::from_integer(num_traits::pow(l, e as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(l, (-e) as usize))
    }
}

impl<'a> Problem<'a> {
    /// When `B` is a diagonal monomial matrix and `B embed(P_n) B^{-1}`
    /// lies in `P_{n+1}`, the second condition no longer depends on `k`.
    fn fast_path(&self) -> Result<Option<BigRational>> {
        let beta = match self.bmat.diagonal_monomial_exponents() {
            Some(b) => b,
            None => return Ok(None),
        };
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if i != j && self.p1.bound(i, j) + beta[i] - beta[j] < self.p2.bound(i, j) {
                    return Ok(None);
                }
            }
            if self.p2.depth(i) > self.p1.depth(i) {
                return Ok(None);
            }
            if self.iw2 && !self.iw1 {
                return Ok(None);
            }
        }
        let dstar = (0..n).map(|i| self.p1.depth(i)).min().unwrap_or(0);
        if dstar > 1 && (0..n).any(|i| (0..n).any(|j| i != j && self.p1.bound(i, j) < dstar as i64)) {
            return Ok(None);
        }
        let y = self.bmat.mul(&self.z);
        if !self.p2.member(&y)? {
            return Ok(Some(BigRational::zero()));
        }
        let vol = self.p1.volume(self.ell);
        if self.t <= dstar {
            let ok = self.c.member(LocalSet::PrincipalUnits(self.t))?;
            return Ok(Some(if ok { vol } else { BigRational::zero() }));
        }
        let ok = self.c.member(LocalSet::PrincipalUnits(dstar))?;
        if !ok {
            return Ok(Some(BigRational::zero()));
        }
        let idx = super::reps::j_index(self.ell, dstar, self.t);
        Ok(Some(vol / BigRational::from_integer(BigInt::from(idx))))
    }

    fn search(&self, mode: Mode, cfg: &SolverConfig) -> Result<BigRational> {
        let n = self.n;
        let ell = self.ell;
        let mut k = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let e = if i != j {
                    FieldElement::big_o(ell, self.p1.bound(i, j))
                } else {
                    match self.p1.depth(i) {
                        0 => FieldElement::big_o(ell, 0),
                        d => FieldElement::one(ell).add(&FieldElement::big_o(ell, d as i64)),
                    }
                };
                k.push(e);
            }
        }
        let mut st = SearchState { nodes: 0, found: false, acc: BTreeMap::new() };
        self.dfs(&mut k, mode, cfg, &mut st)?;
        // box measures are (ell-1)^a ell^-e in the additive normalization
        let mut total = BigRational::zero();
        for ((a, e), cnt) in st.acc {
            let term = rat_pow(ell, -e)
                * BigRational::from_integer(num_traits::pow(BigInt::from(ell - 1), a as usize))
                * BigRational::from_integer(BigInt::from(cnt));
            total += term;
        }
        match mode {
            Mode::Exists => Ok(if st.found { BigRational::one() } else { BigRational::zero() }),
            Mode::Measure => Ok(total / gl_fraction(ell, n)),
        }
    }

    fn box_measure(&self, k: &[FieldElement]) -> (u32, i64) {
        let n = self.n;
        let mut a = 0u32;
        let mut e = 0i64;
        for i in 0..n {
            for j in 0..n {
                let x = &k[i * n + j];
                let lvl = x.precision();
                if i == j && self.iw1 && self.p1.depth(i) == 0 && lvl == 0 {
                    // unknown unit: measure 1 - 1/ell
                    a += 1;
                    e += 1;
                } else {
                    e += lvl;
                }
            }
        }
        (a, e)
    }

    /// Verdict on the box and, when undecided, the entry of `k` to refine.
    fn decide(&self, k: &[FieldElement]) -> (Tri, Option<usize>) {
        let n = self.n;
        let ell = self.ell;
        let kmat = Mat::from_fn(ell, n, |i, j| k[i * n + j].clone());
        let mut verdict = Tri::Yes;
        let mut pick: Option<usize> = None;
        let mut pick_prec = i64::MAX;
        let mut note = |idx: usize, p: i64, pick: &mut Option<usize>| {
            if p < pick_prec {
                pick_prec = p;
                *pick = Some(idx);
            }
        };
        // determinant conditions on k
        let dk = kmat.det();
        if !self.iw1 {
            let t = dk.member_tri(LocalSet::Units);
            if t == Tri::No {
                return (Tri::No, None);
            }
            if t == Tri::Unknown {
                verdict = Tri::Unknown;
            }
        }
        let cj = self.c.mul(&dk).member_tri(LocalSet::PrincipalUnits(self.t));
        if cj == Tri::No {
            return (Tri::No, None);
        }
        if cj == Tri::Unknown || verdict == Tri::Unknown {
            verdict = Tri::Unknown;
            for idx in 0..n * n {
                note(idx, k[idx].precision() - self.base_level(idx), &mut pick);
            }
        }
        // the condition in the larger factor, entry by entry
        let m = n + 1;
        let bk = self.bmat.mul(&kmat.embed());
        let y = bk.mul(&self.z);
        for r in 0..m {
            for s in 0..m {
                let v = y.get(r, s);
                let t = if r != s {
                    v.member_tri(LocalSet::Ideal(self.p2.bound(r, s)))
                } else {
                    match self.p2.depth(r) {
                        0 if self.iw2 => v.member_tri(LocalSet::Units),
                        0 => v.member_tri(LocalSet::Integers),
                        d => v.member_tri(LocalSet::PrincipalUnits(d)),
                    }
                };
                match t {
                    Tri::No => return (Tri::No, None),
                    Tri::Yes => {}
                    Tri::Unknown => {
                        verdict = Tri::Unknown;
                        // the k entry whose contribution limits the precision
                        for p in 0..n {
                            for q in 0..n {
                                let b = self.bmat.get(r, p);
                                let zz = self.z.get(q, s);
                                if b.is_exact_zero() || zz.is_exact_zero() {
                                    continue;
                                }
                                let prec = b.valuation_lower_bound()
                                    .saturating_add(k[p * n + q].precision())
                                    .saturating_add(zz.valuation_lower_bound());
                                note(p * n + q, prec, &mut pick);
                            }
                        }
                    }
                }
            }
        }
        if !self.iw2 && verdict != Tri::No {
            let t = y.det().member_tri(LocalSet::Units);
            if t == Tri::No {
                return (Tri::No, None);
            }
            if t == Tri::Unknown {
                verdict = Tri::Unknown;
                for idx in 0..n * n {
                    note(idx, k[idx].precision() - self.base_level(idx), &mut pick);
                }
            }
        }
        (verdict, if verdict == Tri::Unknown { pick } else { None })
    }

    fn base_level(&self, idx: usize) -> i64 {
        let n = self.n;
        let (i, j) = (idx / n, idx % n);
        if i != j {
            self.p1.bound(i, j)
        } else {
            self.p1.depth(i) as i64
        }
    }

    fn dfs(&self, k: &mut Vec<FieldElement>, mode: Mode, cfg: &SolverConfig, st: &mut SearchState) -> Result<()> {
        if st.found && mode == Mode::Exists {
            return Ok(());
        }
        st.nodes += 1;
        if st.nodes > cfg.max_nodes {
            return Err(Error::BudgetExceeded(format!("solver visited more than {} boxes", cfg.max_nodes)));
        }
        let (verdict, pick) = self.decide(k);
        match verdict {
            Tri::No => Ok(()),
            Tri::Yes => {
                st.found = true;
                let key = self.box_measure(k);
                *st.acc.entry(key).or_insert(0) += 1;
                Ok(())
            }
            Tri::Unknown => {
                let idx = pick.expect("undecided box names an entry");
                let old = k[idx].clone();
                let lvl = old.precision();
                if lvl >= cfg.max_level {
                    return Err(Error::InsufficientPrecision(format!(
                        "solver needs digits beyond w^{}",
                        cfg.max_level
                    )));
                }
                let n = self.n;
                let unit_lead = idx / n == idx % n && self.iw1 && self.p1.depth(idx / n) == 0 && lvl == 0;
                let start = if unit_lead { 1 } else { 0 };
                for d in start..self.ell {
                    k[idx] = old.lift_digit(d);
                    self.dfs(k, mode, cfg, st)?;
                    if st.found && mode == Mode::Exists {
                        break;
                    }
                }
                k[idx] = old;
                Ok(())
            }
        }
    }
}

struct SearchState {
    nodes: u64,
    found: bool,
    acc: BTreeMap<(u32, i64), u64>,
}
