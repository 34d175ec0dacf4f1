use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::json;

use crate::cosetfun::{coset_reps, volume_h, x_equal};
use crate::hecke::u_operator;
use crate::matgrp::{tau_pow, xi_open_orbit, SubgroupDesc};

use super::constructions::delta_t;
use super::report::{mismatch, run, witness_of, CheckConfig, VerificationReport};

/// `Tr_{K^Iw x J_t}^{K^Iw x J_{t+1}} delta(t+1) = U delta(t)`.
pub fn wild_check(cfg: &CheckConfig) -> VerificationReport {
    run("wild", cfg, &[], || {
        let (ell, n, t) = (cfg.ell, cfg.n, cfg.t);
        let k = SubgroupDesc::iwahori(n, t);
        let lhs = delta_t(ell, n, t + 1).trace(&k, &SubgroupDesc::iwahori(n, t + 1), cfg.budget_card)?;
        let rhs = u_operator(&delta_t(ell, n, t), t, cfg.budget_card)?;
        let c = x_equal(&lhs, &rhs, &k, &cfg.eval())?;
        Ok(witness_of(&c, "trace of delta(t+1) against U delta(t)"))
    })
}

fn tau_exponents(ell: u32, n: usize) -> (Vec<i64>, Vec<i64>) {
    tau_pow(ell, n, 1).diagonal_monomial_exponents().expect("tau is a diagonal power")
}

/// `tau^s (K^Iw x J_j) tau^{-s}`.
fn conj_iwahori(ell: u32, n: usize, s: i64, j: u32) -> SubgroupDesc {
    let (a, b) = tau_exponents(ell, n);
    let sa: Vec<i64> = a.iter().map(|x| s * x).collect();
    let sb: Vec<i64> = b.iter().map(|x| s * x).collect();
    SubgroupDesc::iwahori(n, j).conjugate_by_diag(&sa, &sb)
}

/// The two index factors of the wild relation's proof, each of which must
/// be 1, and the identification of the Hecke index with a unipotent index.
pub fn stab_factor_check(cfg: &CheckConfig) -> VerificationReport {
    run("stab-factors", cfg, &[], || {
        let (ell, n, t) = (cfg.ell, cfg.n, cfg.t as i64);
        let solver = cfg.solver();
        let x = xi_open_orbit(ell, n);
        let vol = |k: &SubgroupDesc| volume_h(&x, k, &solver);

        // [Stab_{tau^{t+1} K tau^{-t-1} x J_t}(x) : Stab_{... x J_{t+1}}(x)]
        let left = vol(&conj_iwahori(ell, n, t + 1, t as u32))? / vol(&conj_iwahori(ell, n, t + 1, t as u32 + 1))?;
        if !left.is_one() {
            return Ok(Err(mismatch("left stabilizer index", left, 1)));
        }

        let k = SubgroupDesc::iwahori(n, t as u32);
        let kt = conj_iwahori(ell, n, -1, t as u32);
        let inter = k.intersect(&kt);
        let hecke_index = coset_reps(ell, &kt, &inter, cfg.budget_card)?.len() as u64;
        let stab = vol(&conj_iwahori(ell, n, t, t as u32))? / vol(&conj_iwahori(ell, n, t + 1, t as u32))?;
        let right = BigRational::from_integer(BigInt::from(hecke_index)) / stab.clone();
        if !right.is_one() {
            return Ok(Err(json!({
                "comparison": "right index ratio",
                "hecke_index": hecke_index,
                "stabilizer_index": stab.to_string(),
            })));
        }

        let (a, b) = tau_exponents(ell, n);
        let mut e = 0i64;
        for c in [&a, &b] {
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    e += c[i] - c[j];
                }
            }
        }
        let unipotent_index = (ell as u64).pow(e as u32);
        if unipotent_index != hecke_index {
            return Ok(Err(mismatch("unipotent index", unipotent_index, hecke_index)));
        }
        Ok(Ok(()))
    })
}
