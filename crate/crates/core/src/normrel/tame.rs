use serde_json::json;

use crate::cosetfun::{x_equal, CosetSum, Space, Term};
use crate::error::Result;
use crate::hecke::ell_operator;
use crate::matgrp::{Pattern, SubgroupDesc};
use crate::scalars::Scalar;
use crate::whittaker::{birch_constant, unipotent_representatives, zeta_of_delta_prime, zeta_truncated, ZetaConfig};

use super::constructions::{delta_prime, delta_prime_1, project, projection_fibres, twist};
use super::report::{mismatch, run, witness_of, CheckConfig, Verdict, VerificationReport};

/// `L^vee . 1[H (K_G x O^x)]`.
fn l_dual_delta_zero(cfg: &CheckConfig) -> Result<CosetSum> {
    let l = ell_operator(cfg.ell, cfg.n, &cfg.satake())?;
    l.involution().act_on(&CosetSum::delta_zero(cfg.ell, cfg.n), &cfg.satake())
}

/// `(-1)^n l^{-n(n+1)(n+2)/6}`.
fn normalizer(ell: u32, n: usize) -> Scalar {
    birch_constant(ell, n).inverse().expect("nonzero constant")
}

/// `(-1)^n l^{-N} I_H(delta') = L^vee . delta_0`, through the zeta functional
/// (symbolic in the Satake parameters, series truncated at `cutoff`) and
/// through pointwise comparison on the quotient.
pub fn prop45_check(cfg: &CheckConfig) -> VerificationReport {
    run("prop45", cfg, &[], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let zcfg = ZetaConfig { budget: cfg.budget_card, ..ZetaConfig::for_rank(n) };
        let lhs = &normalizer(ell, n) * &zeta_of_delta_prime(ell, n, &zcfg)?;
        let (schur_side, product_side) = zeta_truncated(ell, n, cfg.cutoff);
        if schur_side != product_side {
            return Ok(Err(mismatch("Cauchy truncation", schur_side, product_side)));
        }
        // z(L^vee . W) = Tr pi(L) z(W) with z(W) = L(1/2) as a series in T
        let trace_l = ell_operator(ell, n, &cfg.satake())?.satake(&cfg.satake())?;
        let rhs = (&trace_l * &product_side).truncate_t_degree(cfg.cutoff as i32);
        if lhs != rhs {
            return Ok(Err(mismatch("zeta functional", lhs, rhs)));
        }
        let ih = delta_prime(ell, n).coinvariants(&cfg.solver())?.scale(&normalizer(ell, n));
        let c = x_equal(&ih, &l_dual_delta_zero(cfg)?, &SubgroupDesc::hyperspecial(n, 0), &cfg.eval())?;
        Ok(witness_of(&c, "normalized I_H(delta') against L^vee delta_0"))
    })
}

fn integrality_body(cfg: &CheckConfig) -> Result<Verdict> {
    let (ell, n) = (cfg.ell, cfg.n);
    let solver = cfg.solver();
    let kphi = Pattern::iwahori_phi(n).volume(ell);
    let kphi1 = Pattern::iwahori_phi_1(n).volume(ell);
    let units = num_rational::BigRational::from_integer((ell as i64 - 1).pow(n as u32).into());
    if kphi != &kphi1 * &units {
        return Ok(Err(mismatch("volume of K^phi against (l-1)^n K^phi_1", kphi, kphi1 * units)));
    }
    for (eta, s, size) in projection_fibres(ell, n) {
        let want = (ell as usize - 1).pow(n as u32 - s);
        if size != want {
            return Ok(Err(json!({ "comparison": "fibre size", "eta": eta.to_string(), "size": size, "expected": want })));
        }
    }
    // each fibre average has the same H-orbit integral as its image
    let k0 = SubgroupDesc::hyperspecial(n, 0);
    let reps = unipotent_representatives(ell, n + 1, 0);
    for (eta, s, size) in projection_fibres(ell, n) {
        let one = Scalar::one(ell);
        let mut bracket = CosetSum::single(Space::Group, Term::new(one.clone(), twist(ell, n, &eta), k0.clone()));
        let w = Scalar::from_ratio(ell, -1, size as i64);
        for (e, _) in reps.iter().filter(|(e, _)| project(ell, e) == eta) {
            bracket.push(crate::cosetfun::Piece::Coset(Term::new(w.clone(), twist(ell, n, e), k0.clone())));
        }
        let zero = CosetSum::zero(ell, n, Space::Quotient);
        let c = x_equal(&bracket.coinvariants(&solver)?, &zero, &k0, &cfg.eval())?;
        if !c.equal {
            let mut v = witness_of(&c, "fibre bracket").unwrap_err();
            v["eta"] = json!(eta.to_string());
            v["s"] = json!(s);
            return Ok(Err(v));
        }
    }
    let ih1 = delta_prime_1(ell, n).coinvariants(&solver)?;
    for t in ih1.terms() {
        if !t.coeff.in_ell_integral()? {
            return Ok(Err(json!({ "comparison": "l-integrality", "term": t.to_string() })));
        }
    }
    let traced = ih1.trace(&k0, &SubgroupDesc::hyperspecial(n, 1), cfg.budget_card)?;
    let ih = delta_prime(ell, n).coinvariants(&solver)?;
    let c = x_equal(&traced, &ih, &k0, &cfg.eval())?;
    Ok(witness_of(&c, "trace of I_H(delta'_1) against I_H(delta')"))
}

/// `I_H(delta'_1)` has coefficients in `Z[1/l]` and traces to `I_H(delta')`.
pub fn integrality_check(cfg: &CheckConfig) -> VerificationReport {
    run("integrality", cfg, &[], || integrality_body(cfg))
}

/// `Tr_{K_G x J_0}^{K_G x J_1} delta = L^vee . 1[H (K_G x J_0)]` with
/// `delta = (-1)^n l^{-N} I_H(delta'_1)`.
pub fn tame_check(cfg: &CheckConfig) -> VerificationReport {
    run("tame", cfg, &[], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let k0 = SubgroupDesc::hyperspecial(n, 0);
        let delta = delta_prime_1(ell, n).coinvariants(&cfg.solver())?.scale(&normalizer(ell, n));
        let lhs = delta.trace(&k0, &SubgroupDesc::hyperspecial(n, 1), cfg.budget_card)?;
        let c = x_equal(&lhs, &l_dual_delta_zero(cfg)?, &k0, &cfg.eval())?;
        Ok(witness_of(&c, "trace of delta against L^vee delta_0"))
    })
}
