use crate::error::{Error, Result};
use crate::localfield::{FieldElement, DEFAULT_PRECISION, EXACT};

use super::matrix::Mat;

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Certified minimum valuation of a family of elements.
fn certified_min(xs: impl IntoIterator<Item = FieldElement>) -> Result<Option<i64>> {
    let mut best: Option<i64> = None;
    let mut vague = EXACT;
    for x in xs {
        if x.is_exact_zero() {
            continue;
        }
        match x.valuation() {
            Ok(v) => best = Some(best.map_or(v, |b| b.min(v))),
            Err(_) => vague = vague.min(x.precision()),
        }
    }
    match best {
        Some(b) if b < vague => Ok(Some(b)),
        None if vague == EXACT => Ok(None),
        _ => Err(Error::InsufficientPrecision("minimal valuation is ambiguous".into())),
    }
}

/// Elementary divisor exponents of `g`, non-increasing: `g` lies in
/// `GL_m(O) diag(w^lambda) GL_m(O)` exactly for this `lambda`.
///
/// The `k`-th determinantal divisor is the minimal valuation of the `k x k`
/// minors, so no division is needed.
pub fn smith_normal_form(g: &Mat) -> Result<Vec<i64>> {
    let m = g.size();
    let mut prev = 0i64;
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        let idx = combinations(m, k);
        let mut minors = Vec::with_capacity(idx.len() * idx.len());
        for r in &idx {
            for c in &idx {
                minors.push(g.minor(r, c));
            }
        }
        let d = certified_min(minors)?.ok_or(Error::Singular)?;
        out.push(d - prev);
        prev = d;
    }
    out.reverse();
    Ok(out)
}

/// Canonical representative of the coset `g GL_m(O)`: upper triangular,
/// diagonal `w^a_i`, and entry `(i, j)` carrying only powers below `a_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hnf {
    pub mat: Mat,
    pub diag: Vec<i64>,
}

/// Column reduction of `g` to upper triangular form with monomial diagonal.
/// Returns the triangular matrix and its diagonal exponents.
fn triangularize(g: &Mat, rel_prec: u32) -> Result<(Mat, Vec<i64>)> {
    let m = g.size();
    let ell = g.ell();
    let mut y = g.clone();
    let mut diag = vec![0i64; m];
    for i in (0..m).rev() {
        // pivot: minimal valuation in row i among columns 0..=i, preferring i
        let cand: Vec<FieldElement> = (0..=i).map(|j| y.get(i, j).clone()).collect();
        let v = certified_min(cand.iter().cloned())?.ok_or(Error::Singular)?;
        let piv = if y.get(i, i).valuation().ok() == Some(v) {
            i
        } else {
            (0..i).find(|&j| y.get(i, j).valuation().ok() == Some(v)).expect("pivot exists")
        };
        if piv != i {
            for r in 0..m {
                let a = y.get(r, piv).clone();
                let b = y.get(r, i).clone();
                y.set(r, piv, b);
                y.set(r, i, a);
            }
        }
        let p = y.get(i, i).clone();
        let unit_inv = p.shift(-v).inv_prec(rel_prec)?;
        if !(unit_inv.is_monomial() && unit_inv.digit(0) == Some(1)) {
            for r in 0..=i {
                let x = y.get(r, i).mul(&unit_inv);
                y.set(r, i, x);
            }
        }
        y.set(i, i, FieldElement::pi_pow(ell, v));
        diag[i] = v;
        for j in 0..i {
            let a = y.get(i, j).clone();
            if a.is_exact_zero() {
                continue;
            }
            let q = a.shift(-v);
            for r in 0..i {
                let x = y.get(r, j).sub(&y.get(r, i).mul(&q));
                y.set(r, j, x);
            }
            y.set(i, j, FieldElement::zero(ell));
        }
    }
    Ok((y, diag))
}

pub fn hnf_right_prec(g: &Mat, rel_prec: u32) -> Result<Hnf> {
    let m = g.size();
    let (mut y, diag) = triangularize(g, rel_prec)?;
    for j in 1..m {
        for i in (0..j).rev() {
            let a = y.get(i, j).clone();
            let ai = diag[i];
            if a.precision() < ai {
                return Err(Error::InsufficientPrecision(format!(
                    "entry ({i},{j}) known only to O(w^{}) but needed to w^{ai}",
                    a.precision()
                )));
            }
            // split a = low + w^ai * q with low carrying powers below ai
            let low = exact_part_below(&a, ai);
            let q = a.sub(&low).shift(-ai);
            if !q.is_apparent_zero() {
                for r in 0..i {
                    let x = y.get(r, j).sub(&y.get(r, i).mul(&q));
                    y.set(r, j, x);
                }
            }
            y.set(i, j, low);
        }
    }
    debug_assert!((0..m).all(|i| (0..m).all(|j| y.get(i, j).is_exact())));
    Ok(Hnf { mat: y, diag })
}

/// Canonical form of `g GL_m(O)`.
pub fn hnf_right(g: &Mat) -> Result<Hnf> {
    hnf_right_prec(g, 3 * DEFAULT_PRECISION)
}

/// The exact Laurent polynomial made of the digits of `a` below `w^k`.
fn exact_part_below(a: &FieldElement, k: i64) -> FieldElement {
    let ell = a.ell();
    if a.is_apparent_zero() {
        return FieldElement::zero(ell);
    }
    let v = a.valuation_lower_bound();
    if v >= k {
        return FieldElement::zero(ell);
    }
    let digits: Vec<u32> = (v..k).map(|e| a.digit(e).unwrap_or(0)).collect();
    FieldElement::from_digits(ell, v, &digits, EXACT)
}

/// Iwasawa decomposition `g = u t k` with `u` upper unipotent, `t = w^a`
/// diagonal and `k` in `GL_m(O)`.
#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub u: Mat,
    pub a: Vec<i64>,
    pub k: Mat,
}

pub fn iwasawa_prec(g: &Mat, rel_prec: u32) -> Result<Iwasawa> {
    let ell = g.ell();
    let (y, a) = triangularize(g, rel_prec)?;
    let tinv = Mat::diag_pi(ell, &a.iter().map(|x| -x).collect::<Vec<_>>());
    let u = y.mul(&tinv);
    // u is unipotent, so its inverse is exact in terms of u
    let uinv = u.inverse_prec(rel_prec)?;
    let k = tinv.mul(&uinv).mul(g);
    Ok(Iwasawa { u, a, k })
}

pub fn iwasawa(g: &Mat) -> Result<Iwasawa> {
    iwasawa_prec(g, 3 * DEFAULT_PRECISION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgrp::subgroup::Pattern;

    fn m(ell: u32, s: &str) -> Mat {
        Mat::parse(ell, s).unwrap()
    }

    #[test]
    fn snf_examples() {
        assert_eq!(smith_normal_form(&Mat::diag_pi(3, &[1, 0])).unwrap(), vec![1, 0]);
        assert_eq!(smith_normal_form(&m(3, "0, w^-1; w^2, 0")).unwrap(), vec![2, -1]);
        assert_eq!(smith_normal_form(&m(2, "1, 1; 1, 1 + w^3")).unwrap(), vec![3, 0]);
        assert_eq!(smith_normal_form(&m(2, "1, 1; 1, 1")), Err(Error::Singular));
        assert!(smith_normal_form(&m(2, "1, 1; 1, 1 + O(w^3)")).is_err());
    }

    #[test]
    fn snf_is_double_coset_invariant() {
        let ell = 3;
        let g = m(ell, "w, 1, 0; 0, w^2, w^-1; 1, 0, w");
        let k1 = m(ell, "1, 2, w; 0, 1, 1; w, 0, 2");
        let k2 = m(ell, "0, 1, 0; 1, w, 0; 2, 0, 1");
        assert!(Pattern::hyperspecial(3).member(&k1).unwrap());
        assert!(Pattern::hyperspecial(3).member(&k2).unwrap());
        let a = smith_normal_form(&g).unwrap();
        assert_eq!(smith_normal_form(&k1.mul(&g).mul(&k2)).unwrap(), a);
        assert_eq!(a.iter().sum::<i64>(), g.det().valuation().unwrap());
    }

    #[test]
    fn hnf_is_right_coset_invariant() {
        let ell = 2;
        let g = m(ell, "w, 1, 0; 0, w^2, w^-1; 1, 0, w");
        let k = m(ell, "1, 1, w; 0, 1, 1; w, 0, 1");
        let h1 = hnf_right(&g).unwrap();
        let h2 = hnf_right(&g.mul(&k)).unwrap();
        assert_eq!(h1, h2);
        assert!(h1.mat.is_exact());
        // the representative generates the same coset
        let q = h1.mat.inverse_prec(30).unwrap().mul(&g);
        assert_eq!(Pattern::hyperspecial(3).member(&q).unwrap(), true);
        let other = hnf_right(&m(ell, "w, 0, 0; 0, 1, 0; 0, 0, 1")).unwrap();
        assert_ne!(h1, other);
    }

    #[test]
    fn iwasawa_examples() {
        let ell = 3;
        let k = m(ell, "1, 2; w, 1 + w");
        let d = iwasawa(&k).unwrap();
        assert_eq!(d.a, vec![0, 0]);
        let u0 = m(ell, "1, w^-2 + 1; 0, 1");
        let g = u0.mul(&Mat::diag_pi(ell, &[3, -1]));
        let d = iwasawa(&g).unwrap();
        assert_eq!(d.u, u0);
        assert_eq!(d.a, vec![3, -1]);
        assert_eq!(d.k, Mat::identity(ell, 2));
        let g = m(ell, "w, 1, 0; 0, w^2, w^-1; 1, 0, w");
        let d = iwasawa(&g).unwrap();
        let back = d.u.mul(&Mat::diag_pi(ell, &d.a)).mul(&d.k);
        assert!(back.agrees_with(&g));
        assert!(Pattern::hyperspecial(3).member(&d.k).unwrap());
    }
}
