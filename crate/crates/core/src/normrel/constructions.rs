use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cosetfun::{CosetSum, Space, Term};
use crate::error::Result;
use crate::localfield::FieldElement;
use crate::matgrp::{embed_delta_tilde, tau_pow, xi_open_orbit, GroupElt, Mat, Pattern, SubgroupDesc};
use crate::scalars::Scalar;
use crate::whittaker::{residue_transversal, unipotent_representatives};

/// `1[x tau^t (K^Iw x J_t)]` on the quotient, `x` the open-orbit point.
pub fn delta_t(ell: u32, n: usize, t: u32) -> CosetSum {
    let base = xi_open_orbit(ell, n).mul(&tau_pow(ell, n, t as i64));
    CosetSum::single(Space::Quotient, Term::new(Scalar::one(ell), base, SubgroupDesc::iwahori(n, t)))
}

pub(crate) fn twist(ell: u32, n: usize, eta: &Mat) -> GroupElt {
    GroupElt::new(Mat::identity(ell, n), eta.clone(), FieldElement::one(ell)).expect("unipotent twist is invertible")
}

fn inverse_volume_kphi(ell: u32, n: usize) -> Scalar {
    Scalar::from_rational(ell, Pattern::iwahori_phi(n).volume(ell).recip())
}

/// `sum_eta mu(K_H^phi)^{-1} (1 - l)^{s(eta)} 1[(1, eta) K_G x O^x]` on the
/// group, `eta` over the unipotent representatives of `GL_{n+1}`.
pub fn delta_prime(ell: u32, n: usize) -> CosetSum {
    let c = inverse_volume_kphi(ell, n);
    let k = SubgroupDesc::hyperspecial(n, 0);
    let mut out = CosetSum::zero(ell, n, Space::Group);
    for (eta, s) in unipotent_representatives(ell, n + 1, 0) {
        let w = &c * &Scalar::from_int(ell, (1 - ell as i64).pow(s));
        out = out.add(&CosetSum::single(Space::Group, Term::new(w, twist(ell, n, &eta), k.clone()))).expect("same space");
    }
    out
}

/// Whether every superdiagonal entry has digit 0 or 1 at `w^-1`.
fn is_normalized(eta: &Mat) -> bool {
    (0..eta.size() - 1).all(|i| matches!(eta.get(i, i + 1).digit(-1), Some(0 | 1)))
}

/// `sum_eta' mu(K_H^phi)^{-1} (-1)^{s(eta')} (l - 1)^n 1[(1, eta') K_G x J_1]`
/// over normalized representatives `eta'`.
pub fn delta_prime_1(ell: u32, n: usize) -> CosetSum {
    let c = &inverse_volume_kphi(ell, n) * &Scalar::from_int(ell, (ell as i64 - 1).pow(n as u32));
    let k = SubgroupDesc::hyperspecial(n, 1);
    let mut out = CosetSum::zero(ell, n, Space::Group);
    for (eta, s) in unipotent_representatives(ell, n + 1, 0) {
        if !is_normalized(&eta) {
            continue;
        }
        let w = &c * &Scalar::from_int(ell, if s % 2 == 0 { 1 } else { -1 });
        out = out.add(&CosetSum::single(Space::Group, Term::new(w, twist(ell, n, &eta), k.clone()))).expect("same space");
    }
    out
}

fn inv_mod(a: u64, ell: u64) -> u64 {
    let mut acc = 1;
    let mut b = a % ell;
    let mut e = ell - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % ell;
        }
        b = b * b % ell;
        e >>= 1;
    }
    acc
}

/// Rescales `eta` by `diag(d) eta diag(d)^{-1}` with residue constants `d`
/// so that its superdiagonal digits become 0 or 1.
pub(crate) fn project(ell: u32, eta: &Mat) -> Mat {
    let m = eta.size();
    let l = ell as u64;
    let mut d = vec![1u64; m];
    for i in 0..m - 1 {
        let c = eta.get(i, i + 1).digit(-1).unwrap_or(0) as u64;
        d[i + 1] = if c == 0 { d[i] } else { d[i] * c % l };
    }
    Mat::from_fn(ell, m, |i, j| {
        let r = d[i] * inv_mod(d[j], l) % l;
        eta.get(i, j).mul(&FieldElement::from_int(ell, r as i64))
    })
}

/// For each normalized representative: its twist, `s`, and the number of
/// representatives projecting to it.
pub fn projection_fibres(ell: u32, n: usize) -> Vec<(Mat, u32, usize)> {
    let reps = unipotent_representatives(ell, n + 1, 0);
    let mut fibres: BTreeMap<String, (Mat, u32, usize)> = BTreeMap::new();
    for (eta, s) in reps {
        let p = project(ell, &eta);
        let e = fibres.entry(p.to_string()).or_insert((p, s, 0));
        e.2 += 1;
    }
    fibres.into_values().collect()
}

/// `mu_H(H cap g K g^{-1})` by counting `h` in `GL_n(O / w^m)`; valid when
/// `g` lies in the hyperspecial group and `K` contains the level-`m`
/// principal congruence subgroup.
pub fn stabilizer_volume_by_counting(g: &GroupElt, k: &SubgroupDesc, m: u32, budget: u64) -> Result<BigRational> {
    let ell = g.ell();
    let gi = g.inverse()?;
    let hs = residue_transversal(ell, g.n(), m, budget)?;
    let mut hits = 0usize;
    for h in &hs {
        if k.member(&gi.mul(&embed_delta_tilde(h)?).mul(g))? {
            hits += 1;
        }
    }
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(hs.len())))
}
