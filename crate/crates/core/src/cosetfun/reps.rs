//! Transversals `K / K'` for pattern subgroups.

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, Tri, EXACT};
use crate::matgrp::{GroupElt, Mat, Pattern, SubgroupDesc};

/// Relative precision used for inverses inside equivalence tests.
const REP_PREC: u32 = 24;

/// Exact index `[K : K']` as an integer, from the ratio of volumes.
pub fn pattern_index(ell: u32, k: &Pattern, kp: &Pattern) -> Result<u64> {
    if !k.contains(kp) {
        return Err(Error::NotContained(format!("{kp:?} is not inside {k:?}")));
    }
    ratio_to_u64(k.volume(ell) / kp.volume(ell))
}

fn ratio_to_u64(r: BigRational) -> Result<u64> {
    if !r.is_integer() {
        return Err(Error::Inconsistent(format!("non-integral index {r}")));
    }
    r.to_integer().to_u64().ok_or_else(|| Error::BudgetExceeded("index too large".into()))
}

/// `[J_a : J_b]`.
pub fn j_index(ell: u32, a: u32, b: u32) -> u64 {
    assert!(a <= b);
    if a == b {
        return 1;
    }
    let l = ell as u64;
    if a == 0 {
        (l - 1) * l.pow(b - 1)
    } else {
        l.pow(b - a)
    }
}

/// Index of `K'` in `K` for descriptors on the product group.
pub fn subgroup_index(ell: u32, k: &SubgroupDesc, kp: &SubgroupDesc) -> Result<u64> {
    if kp.j < k.j {
        return Err(Error::NotContained("J level decreases".into()));
    }
    Ok(pattern_index(ell, &k.small, &kp.small)?
        * pattern_index(ell, &k.big, &kp.big)?
        * j_index(ell, k.j, kp.j))
}

/// All Laurent polynomials `sum_{e in lo..hi} c_e w^e`.
fn digit_polys(ell: u32, lo: i64, hi: i64) -> Vec<FieldElement> {
    let len = (hi - lo).max(0) as usize;
    let total = (ell as usize).pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut d = vec![0u32; len];
    for _ in 0..total {
        out.push(FieldElement::from_digits(ell, lo, &d, EXACT));
        for x in d.iter_mut() {
            *x += 1;
            if *x < ell {
                break;
            }
            *x = 0;
        }
    }
    out
}

/// Candidate values for entry `(i, j)` of `K`, resolved down to `levels(i, j)`.
fn entry_candidates(ell: u32, k: &Pattern, levels: &dyn Fn(usize, usize) -> i64, i: usize, j: usize) -> Vec<FieldElement> {
    if i != j {
        return digit_polys(ell, k.bound(i, j), levels(i, j));
    }
    let top = levels(i, i);
    match k.depth(i) {
        0 if k.is_iwahori_type() && top == 0 => vec![FieldElement::one(ell)],
        0 if k.is_iwahori_type() => {
            // leading unit digit, then free digits
            let mut out = Vec::new();
            for c in 1..ell {
                for rest in digit_polys(ell, 1, top) {
                    out.push(FieldElement::from_int(ell, c as i64).add(&rest));
                }
            }
            out
        }
        0 => digit_polys(ell, 0, top.max(1)),
        d => digit_polys(ell, d as i64, top)
            .into_iter()
            .map(|x| x.add(&FieldElement::one(ell)))
            .collect(),
    }
}

fn cartesian(ell: u32, m: usize, cands: &[Vec<FieldElement>], budget: u64) -> Result<Vec<Mat>> {
    let total: u128 = cands.iter().map(|c| c.len() as u128).product();
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(format!("{total} candidate representatives")));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; cands.len()];
    for _ in 0..total {
        out.push(Mat::from_fn(ell, m, |i, j| cands[i * m + j][idx[i * m + j]].clone()));
        for (t, x) in idx.iter_mut().enumerate() {
            *x += 1;
            if *x < cands[t].len() {
                break;
            }
            *x = 0;
        }
    }
    Ok(out)
}

/// Greedy selection of pairwise inequivalent candidates until `index` are found.
fn select(kp: &Pattern, candidates: Vec<Mat>, k: &Pattern, index: u64) -> Result<Option<Vec<Mat>>> {
    let mut reps: Vec<Mat> = Vec::new();
    let mut invs: Vec<Mat> = Vec::new();
    for c in candidates {
        if reps.len() as u64 == index {
            break;
        }
        match k.member_tri(&c) {
            Tri::Yes => {}
            Tri::No => continue,
            Tri::Unknown => return Err(Error::InsufficientPrecision("candidate membership".into())),
        }
        let mut fresh = true;
        for r in &invs {
            match kp.member_tri(&r.mul(&c)) {
                Tri::Yes => {
                    fresh = false;
                    break;
                }
                Tri::No => {}
                Tri::Unknown => {
                    return Err(Error::InsufficientPrecision("coset equivalence test".into()))
                }
            }
        }
        if fresh {
            invs.push(c.inverse_prec(REP_PREC)?);
            reps.push(c);
        }
    }
    Ok((reps.len() as u64 == index).then_some(reps))
}

/// A transversal of `K / K'` (left cosets `gamma K'`). Candidates are first
/// drawn from the digit box between the two patterns; if that box misses
/// cosets, all residues of `K` modulo the smallest uniform level below `K'`
/// are used.
pub fn pattern_coset_reps(ell: u32, k: &Pattern, kp: &Pattern, budget: u64) -> Result<Vec<Mat>> {
    let index = pattern_index(ell, k, kp)?;
    let m = k.size();
    if index == 1 {
        return Ok(vec![Mat::identity(ell, m)]);
    }
    let iw = k.intersect(&Pattern::iwahori(m));
    if !k.is_iwahori_type() && iw != *k && iw != *kp && iw.contains(kp) {
        // K / (K cap Iw) from residues, then the Iwahori-type box below it
        let top = pattern_coset_reps(ell, k, &iw, budget)?;
        let bottom = pattern_coset_reps(ell, &iw, kp, budget)?;
        if (top.len() as u128) * (bottom.len() as u128) > budget as u128 {
            return Err(Error::BudgetExceeded(format!("{index} coset representatives")));
        }
        return Ok(top.iter().flat_map(|a| bottom.iter().map(move |b| a.mul(b))).collect());
    }
    if k.is_iwahori_type() {
        let levels = |i: usize, j: usize| {
            if i == j {
                kp.depth(i) as i64
            } else {
                kp.bound(i, j)
            }
        };
        let cands: Vec<Vec<FieldElement>> = (0..m * m)
            .map(|t| entry_candidates(ell, k, &levels, t / m, t % m))
            .collect();
        let all = cartesian(ell, m, &cands, budget)?;
        if let Some(r) = select(kp, all, k, index)? {
            return Ok(r);
        }
    }
    // uniform level: K(lvl) = {bound_K + lvl, depth lvl} must sit inside K'
    let mut lvl: i64 = 1;
    for i in 0..m {
        for j in 0..m {
            if i == j {
                lvl = lvl.max(kp.depth(i) as i64);
            } else {
                lvl = lvl.max(kp.bound(i, j) - k.bound(i, j));
            }
        }
    }
    let levels = |i: usize, j: usize| if i == j { lvl } else { k.bound(i, j) + lvl };
    let cands: Vec<Vec<FieldElement>> = (0..m * m)
        .map(|t| entry_candidates(ell, k, &levels, t / m, t % m))
        .collect();
    let all = cartesian(ell, m, &cands, budget)?;
    select(kp, all, k, index)?
        .ok_or_else(|| Error::Inconsistent(format!("could not realize index {index} for {kp:?} in {k:?}")))
}

/// Transversal of `J_a / J_b`: residues `c + digits` with `c` constant.
pub fn j_coset_reps(ell: u32, a: u32, b: u32) -> Vec<FieldElement> {
    if a == b {
        return vec![FieldElement::one(ell)];
    }
    if a == 0 {
        let mut out = Vec::new();
        for c in 1..ell {
            for rest in digit_polys(ell, 1, b as i64) {
                out.push(FieldElement::from_int(ell, c as i64).add(&rest));
            }
        }
        out
    } else {
        digit_polys(ell, a as i64, b as i64)
            .into_iter()
            .map(|x| x.add(&FieldElement::one(ell)))
            .collect()
    }
}

/// Transversal of `K / K'` in the product group.
pub fn coset_reps(ell: u32, k: &SubgroupDesc, kp: &SubgroupDesc, budget: u64) -> Result<Vec<GroupElt>> {
    if !k.contains(kp) {
        return Err(Error::NotContained(format!("{kp:?} is not inside {k:?}")));
    }
    let s = pattern_coset_reps(ell, &k.small, &kp.small, budget)?;
    let b = pattern_coset_reps(ell, &k.big, &kp.big, budget)?;
    let u = j_coset_reps(ell, k.j, kp.j);
    let total = s.len() as u128 * b.len() as u128 * u.len() as u128;
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(format!("{total} coset representatives")));
    }
    let mut out = Vec::with_capacity(total as usize);
    for x in &s {
        for y in &b {
            for z in &u {
                out.push(GroupElt { small: x.clone(), big: y.clone(), u: z.clone() });
            }
        }
    }
    Ok(out)
}

/// Field element class in `O^x / J_t`, usable as a hash key.
pub fn unit_class(x: &FieldElement, t: u32) -> Result<(i64, Vec<u32>)> {
    let v = x.valuation()?;
    let digits = (v..v + t as i64)
        .map(|e| x.digit(e).ok_or_else(|| Error::InsufficientPrecision("unit class".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok((v, digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl2_mod_congruence() {
        let r = pattern_coset_reps(2, &Pattern::hyperspecial(2), &Pattern::congruence(2, 1), 1 << 20).unwrap();
        assert_eq!(r.len(), 6);
        let r = pattern_coset_reps(3, &Pattern::hyperspecial(2), &Pattern::iwahori(2), 1 << 20).unwrap();
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn iwahori_mod_congruence() {
        for ell in [2u32, 3] {
            let r = pattern_coset_reps(ell, &Pattern::iwahori(2), &Pattern::congruence(2, 1), 1 << 20).unwrap();
            let l = ell as usize;
            assert_eq!(r.len(), (l - 1) * (l - 1) * l);
        }
    }

    #[test]
    fn j_quotients() {
        assert_eq!(j_coset_reps(5, 0, 1).len(), 4);
        assert_eq!(j_index(5, 0, 1), 4);
        assert_eq!(j_coset_reps(3, 1, 3).len(), 9);
        assert_eq!(j_index(3, 0, 2), 6);
    }

    #[test]
    fn unipotent_quotient() {
        // Iwahori / (Iwahori cap its conjugate by a dominant torus element)
        let k = Pattern::iwahori(3);
        let kp = k.intersect(&k.conjugate_by_diag(&[-2, -1, 0]));
        let r = pattern_coset_reps(3, &k, &kp, 1 << 20).unwrap();
        assert_eq!(r.len(), 81);
    }

    #[test]
    fn not_contained_is_error() {
        let e = pattern_coset_reps(2, &Pattern::iwahori(2), &Pattern::hyperspecial(2), 100);
        assert!(matches!(e, Err(Error::NotContained(_))));
    }
}
