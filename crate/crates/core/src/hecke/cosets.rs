use crate::error::{Error, Result};
use crate::localfield::{FieldElement, EXACT};
use crate::matgrp::{smith_normal_form, Mat};

fn sorted_desc(v: &[i64]) -> Vec<i64> {
    let mut s = v.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

/// Integer vectors of length `m` with entries in `lo..=hi` summing to `total`.
pub(crate) fn bounded_compositions(m: usize, lo: i64, hi: i64, total: i64) -> Vec<Vec<i64>> {
    fn go(m: usize, lo: i64, hi: i64, total: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == m {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let left = (m - cur.len() - 1) as i64;
        for x in lo..=hi {
            let rest = total - x;
            if rest < left * lo || rest > left * hi {
                continue;
            }
            cur.push(x);
            go(m, lo, hi, rest, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, lo, hi, total, &mut Vec::new(), &mut out);
    out
}

/// Upper triangular matrices with diagonal `w^a` whose entry `(i, j)` has
/// digits in `lo..a_i`, i.e. the canonical forms of right `GL_m(O)`-cosets
/// with Iwasawa torus part `a` and all entries of valuation at least `lo`.
fn triangular_box(ell: u32, a: &[i64], lo: i64, budget: u64) -> Result<Vec<Mat>> {
    let m = a.len();
    let slots: Vec<(usize, usize, i64)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter_map(|(i, j)| (a[i] > lo).then(|| (i, j, a[i] - lo)))
        .collect();
    let digits: i64 = slots.iter().map(|s| s.2).sum();
    let total = (ell as u128).checked_pow(digits as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(format!("{total} triangular coset candidates")));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut code = vec![0u32; digits as usize];
    for _ in 0..total {
        let mut g = Mat::diag_pi(ell, a);
        let mut pos = 0usize;
        for &(i, j, len) in &slots {
            let d = &code[pos..pos + len as usize];
            g.set(i, j, FieldElement::from_digits(ell, lo, d, EXACT));
            pos += len as usize;
        }
        out.push(g);
        for x in code.iter_mut() {
            *x += 1;
            if *x < ell {
                break;
            }
            *x = 0;
        }
    }
    Ok(out)
}

/// The right cosets `u K` in `K w^lam K` (`K = GL_m(O)`), grouped by the
/// torus part `a` of their canonical upper triangular representative.
pub fn double_coset_reps_by_torus(ell: u32, lam: &[i64], budget: u64) -> Result<Vec<(Vec<i64>, Vec<Mat>)>> {
    let lam = sorted_desc(lam);
    let m = lam.len();
    if m == 0 {
        return Ok(vec![(vec![], vec![Mat::identity(ell, 0)])]);
    }
    let (hi, lo) = (lam[0], lam[m - 1]);
    let mut out = Vec::new();
    let mut used = 0u64;
    for a in bounded_compositions(m, lo, hi, lam.iter().sum()) {
        let mut reps = Vec::new();
        for g in triangular_box(ell, &a, lo, budget.saturating_sub(used))? {
            if smith_normal_form(&g)? == lam {
                reps.push(g);
            }
        }
        used += reps.len() as u64;
        if !reps.is_empty() {
            out.push((a, reps));
        }
    }
    shell_check(ell, &lam)?;
    Ok(out)
}

/// Entries of elements of `K w^lam K` have valuation at least `min lam`:
/// asserts that a single entry one step below that bound leaves the double
/// coset, so the enumeration box cannot miss cosets.
fn shell_check(ell: u32, lam: &[i64]) -> Result<()> {
    let m = lam.len();
    let lo = lam[m - 1];
    for i in 0..m {
        for j in i + 1..m {
            let mut g = Mat::diag_pi(ell, lam);
            g.set(i, j, FieldElement::pi_pow(ell, lo - 1));
            if smith_normal_form(&g)? == lam {
                return Err(Error::Inconsistent(format!("coset enumeration box too small for {lam:?}")));
            }
        }
    }
    Ok(())
}

/// All right cosets `u K` in `K w^lam K`.
pub fn double_coset_reps(ell: u32, lam: &[i64], budget: u64) -> Result<Vec<Mat>> {
    Ok(double_coset_reps_by_torus(ell, lam, budget)?.into_iter().flat_map(|(_, r)| r).collect())
}

/// `#(K w^lam K / K)` by the closed formula `l^{<lam, 2 rho>} W(1/l) / W_lam(1/l)`
/// with `W` the Poincare polynomials of `S_m` and of the stabilizer of `lam`.
pub fn double_coset_size(ell: u32, lam: &[i64]) -> u128 {
    let lam = sorted_desc(lam);
    let m = lam.len();
    let l = ell as u128;
    let mut e: i64 = 0;
    for (i, x) in lam.iter().enumerate() {
        e += (m as i64 - 1 - 2 * i as i64) * x;
    }
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && lam[j] == lam[i] {
            j += 1;
        }
        blocks.push(j - i);
        i = j;
    }
    let qfact = |k: usize| -> u128 { (1..=k as u32).map(|t| (l.pow(t) - 1) / (l - 1)).product() };
    let num = qfact(m);
    let den: u128 = blocks.iter().map(|&b| qfact(b)).product();
    let pairs = (m * (m - 1) / 2) as i64 - blocks.iter().map(|&b| (b * (b - 1) / 2) as i64).sum::<i64>();
    l.pow((e - pairs) as u32) * num / den
}
