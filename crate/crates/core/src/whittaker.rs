//! Spherical Whittaker functions over the symbolic Satake ring, the Birch
//! sum and the unramified zeta integral.
//!
//! The spherical function is given by the Casselman-Shalika formula: at
//! `w^a` it is `delta_B^{1/2}(w^a) s_a(X)` for dominant `a` and 0 otherwise,
//! with `s_a` the Schur polynomial in the Satake variables of the factor.
//! With this normalization `1[K w^lam K]` acts on it by its Satake image.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, EXACT};
use crate::matgrp::{iwasawa, Mat, Pattern};
use crate::scalars::{Monomial, Scalar, Var};

/// `psi(x) = z^(c * x_{-1})`, `x_{-1}` the digit of `x` at `w^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdditiveCharacter {
    pub ell: u32,
    scale: u32,
}

impl AdditiveCharacter {
    pub fn new(ell: u32) -> Self {
        AdditiveCharacter { ell, scale: 1 }
    }

    /// `x -> psi(c x)` for a nonzero residue `c`.
    pub fn scaled(ell: u32, c: u32) -> Result<Self> {
        if c % ell == 0 {
            return Err(Error::InvalidInput("scaling must be a unit".into()));
        }
        Ok(AdditiveCharacter { ell, scale: c % ell })
    }

    pub fn inverse(&self) -> Self {
        AdditiveCharacter { ell: self.ell, scale: self.ell - self.scale }
    }

    /// Exponent `e` with `psi(x) = z^e`.
    pub fn exponent(&self, x: &FieldElement) -> Result<u32> {
        let d = x
            .digit(-1)
            .ok_or_else(|| Error::InsufficientPrecision(format!("digit at w^-1 of {x}")))?;
        Ok(d * self.scale % self.ell)
    }

    pub fn eval(&self, x: &FieldElement) -> Result<Scalar> {
        Ok(Scalar::zeta_pow(self.ell, self.exponent(x)? as i64))
    }
}

/// Semistandard tableaux count by content: `s_lam(x_1..x_m)` for a partition
/// `lam` (non-negative, non-increasing), as exponent vectors with multiplicity.
fn ssyt_contents(lam: &[i64], m: usize) -> HashMap<Vec<i64>, i64> {
    fn fill(
        lam: &[i64],
        m: usize,
        row: usize,
        col: usize,
        prev: &[Vec<usize>],
        cur: &mut Vec<usize>,
        content: &mut Vec<i64>,
        out: &mut HashMap<Vec<i64>, i64>,
    ) {
        if row == lam.len() || lam[row] == 0 {
            *out.entry(content.clone()).or_insert(0) += 1;
            return;
        }
        if col == lam[row] as usize {
            let mut rows = prev.to_vec();
            rows.push(std::mem::take(cur));
            fill(lam, m, row + 1, 0, &rows, &mut Vec::new(), content, out);
            *cur = rows.pop().expect("row just pushed");
            return;
        }
        let left = if col > 0 { cur[col - 1] } else { 0 };
        let above = if row > 0 { prev[row - 1][col] + 1 } else { 0 };
        for v in left.max(above)..m {
            cur.push(v);
            content[v] += 1;
            fill(lam, m, row, col + 1, prev, cur, content, out);
            content[v] -= 1;
            cur.pop();
        }
    }
    let mut out = HashMap::new();
    fill(lam, m, 0, 0, &[], &mut Vec::new(), &mut vec![0; m], &mut out);
    out
}

/// Schur polynomial `s_lam` in `var(1)..var(m)` for a dominant `lam`
/// (entries may be negative: `s_lam = (x_1..x_m)^{lam_m} s_{lam - lam_m}`).
pub fn schur(ell: u32, lam: &[i64], var: fn(u8) -> Var) -> Scalar {
    let m = lam.len();
    let Some(&last) = lam.last() else { return Scalar::one(ell) };
    let shifted: Vec<i64> = lam.iter().map(|x| x - last).collect();
    let mut acc = Scalar::zero(ell);
    for (content, c) in ssyt_contents(&shifted, m) {
        let mono = Monomial::from_pairs(content.iter().enumerate().map(|(i, &e)| (var(i as u8 + 1), (e + last) as i32)));
        acc = &acc + &(&Scalar::from_int(ell, c) * &Scalar::monomial(ell, mono));
    }
    acc
}

/// `<a, rho>` doubled: `sum_i (m - 1 - 2i) a_i` with `i` zero-based.
fn twice_rho(a: &[i64]) -> i64 {
    let m = a.len() as i64;
    a.iter().enumerate().map(|(i, &x)| (m - 1 - 2 * i as i64) * x).sum()
}

/// The spherical Whittaker function of `GL_m` with `W(1) = 1`.
#[derive(Debug, Clone)]
pub struct SphericalWhittaker {
    pub ell: u32,
    pub m: usize,
    pub psi: AdditiveCharacter,
    pub var: fn(u8) -> Var,
}

impl SphericalWhittaker {
    pub fn new(m: usize, psi: AdditiveCharacter, var: fn(u8) -> Var) -> Self {
        SphericalWhittaker { ell: psi.ell, m, psi, var }
    }

    /// The `GL_n` factor: character `psi^{-1}`, variables `A_i`.
    pub fn small(n: usize, psi: AdditiveCharacter) -> Self {
        SphericalWhittaker::new(n, psi.inverse(), Var::A)
    }

    /// The `GL_{n+1}` factor: character `psi`, variables `B_j`.
    pub fn big(n: usize, psi: AdditiveCharacter) -> Self {
        SphericalWhittaker::new(n + 1, psi, Var::B)
    }

    pub fn cs_value(&self, a: &[i64]) -> Scalar {
        if a.len() != self.m || !a.windows(2).all(|w| w[0] >= w[1]) {
            return Scalar::zero(self.ell);
        }
        &Scalar::ell_half_power(self.ell, -twice_rho(a)) * &schur(self.ell, a, self.var)
    }

    /// Torus part and character exponent of `g = u w^a k`.
    pub fn iwasawa_data(&self, g: &Mat) -> Result<(Vec<i64>, u32)> {
        if g.size() != self.m {
            return Err(Error::InvalidInput(format!("expected a {0}x{0} matrix", self.m)));
        }
        let d = iwasawa(g)?;
        let mut e = 0u32;
        for i in 0..self.m.saturating_sub(1) {
            e = (e + self.psi.exponent(d.u.get(i, i + 1))?) % self.ell;
        }
        Ok((d.a, e))
    }

    pub fn eval(&self, g: &Mat) -> Result<Scalar> {
        let (a, e) = self.iwasawa_data(g)?;
        let v = self.cs_value(&a);
        if v.is_zero() {
            return Ok(v);
        }
        Ok(&Scalar::zeta_pow(self.ell, e as i64) * &v)
    }
}

/// Representatives of `phi^{-1} N_m(O) phi / N_m(O)`: entry `(i, j)`, `i < j`,
/// runs over `shift + sum_{e = i-j}^{-1} c_e w^e`, paired with the number
/// `s` of integral superdiagonal entries.
pub fn unipotent_representatives(ell: u32, m: usize, shift: u32) -> Vec<(Mat, u32)> {
    let slots: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut out = vec![(Mat::identity(ell, m), 0u32)];
    for &(i, j) in &slots {
        let len = (j - i) as u32;
        let mut next = Vec::with_capacity(out.len() * (ell as usize).pow(len));
        for code in 0..(ell as usize).pow(len) {
            let mut c = code;
            let mut digits: Vec<u32> = (0..len)
                .map(|_| {
                    let d = (c % ell as usize) as u32;
                    c /= ell as usize;
                    d
                })
                .collect();
            let integral = code == 0;
            // the last digit sits at w^0 and carries the shift
            digits.push(shift % ell);
            let x = FieldElement::from_digits(ell, i as i64 - j as i64, &digits, EXACT);
            for (g, s) in &out {
                let mut g = g.clone();
                g.set(i, j, x.clone());
                next.push((g, s + u32::from(integral && j == i + 1)));
            }
        }
        out = next;
    }
    out
}

/// `(-1)^n l^{n(n+1)(n+2)/6}`.
pub fn birch_constant(ell: u32, n: usize) -> Scalar {
    let e = (n * (n + 1) * (n + 2) / 6) as i64;
    let v = Scalar::ell_half_power(ell, 2 * e);
    if n % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `sum_eta (1 - l)^{s(eta)} W(diag(h, 1) eta)` over the representatives
/// with integral shift `shift`.
pub fn birch_sum(w: &SphericalWhittaker, h: &Mat, shift: u32) -> Result<Scalar> {
    let ell = w.ell;
    if h.size() + 1 != w.m {
        return Err(Error::InvalidInput("birch_sum needs W on GL_{n+1} and h in GL_n".into()));
    }
    let g = h.embed();
    let reps = unipotent_representatives(ell, w.m, shift);
    let tally = reps
        .par_iter()
        .map(|(eta, s)| -> Result<HashMap<(Vec<i64>, u32), i64>> {
            let (a, e) = w.iwasawa_data(&g.mul(eta))?;
            let mut m = HashMap::new();
            if a.windows(2).all(|p| p[0] >= p[1]) {
                m.insert((a, e), (1 - ell as i64).pow(*s));
            }
            Ok(m)
        })
        .try_reduce(HashMap::new, |mut x, y| {
            for (k, v) in y {
                *x.entry(k).or_insert(0) += v;
            }
            Ok(x)
        })?;
    let mut keys: Vec<_> = tally.into_iter().filter(|(_, c)| *c != 0).collect();
    keys.sort();
    let mut acc = Scalar::zero(ell);
    for ((a, e), c) in keys {
        let z = &Scalar::zeta_pow(ell, e as i64) * &Scalar::from_int(ell, c);
        acc = &acc + &(&z * &w.cs_value(&a));
    }
    Ok(acc)
}

/// Matrices with entries `sum_{e < depth} c_e w^e` and unit determinant: a
/// transversal of `GL_n(O) / (1 + w^depth M_n(O))`.
pub fn residue_transversal(ell: u32, n: usize, depth: u32, budget: u64) -> Result<Vec<Mat>> {
    let per = (ell as u64).pow(depth);
    let total = (per as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(format!("{total} residue matrices")));
    }
    let entries: Vec<FieldElement> = (0..per)
        .map(|code| {
            let mut c = code;
            let digits: Vec<u32> = (0..depth)
                .map(|_| {
                    let d = (c % ell as u64) as u32;
                    c /= ell as u64;
                    d
                })
                .collect();
            FieldElement::from_digits(ell, 0, &digits, EXACT)
        })
        .collect();
    let mut out = Vec::new();
    for code in 0..total as u64 {
        let mut c = code;
        let g = Mat::from_fn(ell, n, |_, _| {
            let e = entries[(c % per) as usize].clone();
            c /= per;
            e
        });
        if g.det().valuation_lower_bound() == 0 && !g.det().is_apparent_zero() {
            out.push(g);
        }
    }
    Ok(out)
}

/// Truncations through `T`-degree `cutoff` of `sum_lam s_lam(A) s_lam(B) (T l^{-1/2})^{|lam|}`
/// and of `prod (1 - A_i B_j T l^{-1/2})^{-1}`.
pub fn zeta_truncated(ell: u32, n: usize, cutoff: u32) -> (Scalar, Scalar) {
    let z = &Scalar::var(ell, Var::T) * &Scalar::ell_half_power(ell, -1);
    let mut schur_side = Scalar::zero(ell);
    for size in 0..=cutoff as i64 {
        let zs = z.pow(size).expect("nonnegative power");
        for lam in partitions(size, n) {
            let mut big = lam.clone();
            big.push(0);
            let term = &(&schur(ell, &lam, Var::A) * &schur(ell, &big, Var::B)) * &zs;
            schur_side = &schur_side + &term;
        }
    }
    let mut product = Scalar::one(ell);
    for i in 1..=n as u8 {
        for j in 1..=n as u8 + 1 {
            let x = &(&Scalar::var(ell, Var::A(i)) * &Scalar::var(ell, Var::B(j))) * &z;
            let mut geo = Scalar::zero(ell);
            for k in 0..=cutoff as i64 {
                geo = &geo + &x.pow(k).expect("nonnegative power");
            }
            product = (&product * &geo).truncate_t_degree(cutoff as i32);
        }
    }
    (schur_side, product)
}

/// All of `[-b, b]^n`.
fn torus_box(n: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (-b..=b).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Partitions of `size` with at most `parts` parts, padded with zeros.
fn partitions(size: i64, parts: usize) -> Vec<Vec<i64>> {
    fn go(rest: i64, max: i64, parts: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == parts {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in (0..=max.min(rest)).rev() {
            cur.push(x);
            go(rest - x, x, parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(size, size, parts, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct ZetaConfig {
    /// Torus parts `w^a`, `|a_i| <= a_bound`, included in the Iwasawa sum.
    pub a_bound: i64,
    /// Level of the congruence subgroup used to discretize `GL_n(O)`; the
    /// integrand is right invariant under it once `depth >= 2n`.
    pub depth: u32,
    pub budget: u64,
    pub psi: Option<AdditiveCharacter>,
}

impl ZetaConfig {
    pub fn for_rank(n: usize) -> Self {
        ZetaConfig { a_bound: 0, depth: 2 * n as u32, budget: 1 << 20, psi: None }
    }
}

/// `z(pi(delta') W)`: the integral over `N_n \ GL_n` of
/// `mu(K^phi)^{-1} W_n(h) sum_eta (1 - l)^{s(eta)} W_{n+1}(diag(h, 1) eta) T^{v(det h)}`,
/// computed with `dh = delta_B(w^a)^{-1} da dk` over the configured torus
/// parts and the residue transversal of `GL_n(O)`.
pub fn zeta_of_delta_prime(ell: u32, n: usize, cfg: &ZetaConfig) -> Result<Scalar> {
    let psi = cfg.psi.unwrap_or_else(|| AdditiveCharacter::new(ell));
    let small = SphericalWhittaker::small(n, psi);
    let big = SphericalWhittaker::big(n, psi);
    let ks = residue_transversal(ell, n, cfg.depth, cfg.budget)?;
    let inv_count = Scalar::from_rational(ell, BigRational::new(BigInt::from(1), BigInt::from(ks.len())));
    let mut acc = Scalar::zero(ell);
    let b = cfg.a_bound;
    for a in torus_box(n, b) {
        let t = Mat::diag_pi(ell, &a);
        let parts = ks
            .par_iter()
            .map(|k| -> Result<Scalar> {
                let h = t.mul(k);
                let wn = small.eval(&h)?;
                if wn.is_zero() {
                    return Ok(wn);
                }
                Ok(&wn * &birch_sum(&big, &h, 0)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sum = Scalar::zero(ell);
        for p in &parts {
            sum = &sum + p;
        }
        let det_t = Scalar::monomial(ell, Monomial::var(Var::T, a.iter().sum::<i64>() as i32));
        let modulus = Scalar::ell_half_power(ell, 2 * twice_rho(&a));
        acc = &acc + &(&(&sum * &inv_count) * &(&modulus * &det_t));
    }
    let vol = Scalar::from_rational(ell, Pattern::iwahori_phi(n).volume(ell));
    acc.checked_div(&vol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(ell: u32, s: &str) -> Mat {
        Mat::parse(ell, s).unwrap()
    }

    #[test]
    fn casselman_shalika_values() {
        for ell in [2u32, 3] {
            let w = SphericalWhittaker::new(2, AdditiveCharacter::new(ell), Var::B);
            assert_eq!(w.cs_value(&[0, 0]), Scalar::one(ell));
            let want = &Scalar::ell_half_power(ell, -1) * &(&Scalar::var(ell, Var::B(1)) + &Scalar::var(ell, Var::B(2)));
            assert_eq!(w.cs_value(&[1, 0]), want);
            assert!(w.cs_value(&[0, 1]).is_zero());
        }
    }

    #[test]
    fn character_and_evaluation() {
        let ell = 3;
        let psi = AdditiveCharacter::new(ell);
        assert!(!psi.eval(&FieldElement::pi_pow(ell, -1)).unwrap().is_one());
        assert!(psi.eval(&FieldElement::parse(ell, "2 + w").unwrap()).unwrap().is_one());
        let w = SphericalWhittaker::new(3, psi, Var::B);
        assert!(w.eval(&m(ell, "1, 2, w; 0, 1, 1; w, 0, 2")).unwrap().is_one());
        let u = m(ell, "1, w^-1, 0; 0, 1, 0; 0, 0, 1");
        assert_eq!(w.eval(&u).unwrap(), Scalar::zeta_pow(ell, 1));
        let k = m(ell, "2, 1, 0; w, 1, 1; 0, 0, 1");
        let g = m(ell, "w^2, w^-1, 1; 0, w, 2; 0, 0, 1");
        assert_eq!(w.eval(&g.mul(&k)).unwrap(), w.eval(&g).unwrap());
    }

    #[test]
    fn schur_small_cases() {
        let ell = 2;
        let a = |i| Scalar::var(ell, Var::A(i));
        assert_eq!(schur(ell, &[1, 1], Var::A), &a(1) * &a(2));
        assert_eq!(schur(ell, &[2, 0], Var::A), &(&(&a(1) * &a(1)) + &(&a(1) * &a(2))) + &(&a(2) * &a(2)));
        assert_eq!(schur(ell, &[0, -1], Var::A), &(&a(1) + &a(2)) * &(&a(1) * &a(2)).inverse().unwrap());
    }

    #[test]
    fn representatives_count() {
        for (ell, n) in [(2u32, 1usize), (2, 2), (3, 2), (2, 3)] {
            let e = (n * (n + 1) * (n - 1) / 6) as u32;
            assert_eq!(unipotent_representatives(ell, n, 0).len(), ell.pow(e) as usize);
        }
    }

    #[test]
    fn birch_rank_one() {
        let ell = 2;
        let w = SphericalWhittaker::big(1, AdditiveCharacter::new(ell));
        assert_eq!(birch_sum(&w, &Mat::identity(ell, 1), 0).unwrap(), Scalar::from_int(ell, -2));
        assert!(birch_sum(&w, &Mat::diag_pi(ell, &[1]), 0).unwrap().is_zero());
    }

    #[test]
    fn cauchy_truncations() {
        let ell = 3;
        let (a, b) = zeta_truncated(ell, 1, 0);
        assert!(a.is_one() && b.is_one());
        let (a, b) = zeta_truncated(ell, 1, 1);
        let x = &(&Scalar::var(ell, Var::A(1)) * &(&Scalar::var(ell, Var::B(1)) + &Scalar::var(ell, Var::B(2))))
            * &(&Scalar::var(ell, Var::T) * &Scalar::ell_half_power(ell, -1));
        assert_eq!(a, &Scalar::one(ell) + &x);
        assert_eq!(b, a);
    }

    #[test]
    fn zeta_rank_one() {
        for ell in [2u32, 3] {
            let z = zeta_of_delta_prime(ell, 1, &ZetaConfig::for_rank(1)).unwrap();
            assert_eq!(z, Scalar::from_int(ell, -(ell as i64)));
        }
    }
}
