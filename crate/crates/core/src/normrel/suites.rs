use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cosetfun::{coset_reps, subgroup_index, x_equal, CosetSum, Space, Term};
use crate::hecke::{ell_operator, euler_factor, euler_factor_from_satake, l_factor_polynomial, HeckeElt, Label};
use crate::localfield::FieldElement;
use crate::matgrp::{embed_big, xi_open_orbit, GroupElt, Mat, Pattern, SubgroupDesc};
use crate::scalars::{Scalar, Var};
use crate::whittaker::{birch_constant, birch_sum, residue_transversal, AdditiveCharacter, SphericalWhittaker};

use super::constructions::stabilizer_volume_by_counting;
use super::report::{mismatch, run, witness_of, CheckConfig, VerificationReport};

fn random_point(rng: &mut ChaCha8Rng, ell: u32, n: usize) -> GroupElt {
    let mut g = if rng.gen_bool(0.5) { xi_open_orbit(ell, n) } else { GroupElt::identity(ell, n) };
    for _ in 0..2 {
        let i = rng.gen_range(0..n + 1);
        let j = rng.gen_range(0..n + 1);
        if i == j {
            continue;
        }
        let c = rng.gen_range(0..ell);
        let e = rng.gen_range(0..2);
        let u = Mat::from_fn(ell, n + 1, |a, b| {
            if a == b {
                FieldElement::one(ell)
            } else if (a, b) == (i, j) {
                FieldElement::monomial(ell, c, e)
            } else {
                FieldElement::zero(ell)
            }
        });
        g = g.mul(&embed_big(&u));
    }
    g
}

fn random_pattern(rng: &mut ChaCha8Rng, m: usize) -> Pattern {
    match rng.gen_range(0..4) {
        0 => Pattern::hyperspecial(m),
        1 => Pattern::iwahori(m),
        2 => Pattern::iwahori_phi(m),
        _ => Pattern::congruence(m, 1),
    }
}

/// Draws with `[K : K']` above this are redrawn.
const MAX_SAMPLE_INDEX: u64 = 5000;

/// Trace lemma on `samples` random nested triples `K' <= K'' <= K`: the trace
/// of `1[x K'']` equals `1[x K] [K'':K'] [Stab_K(x):Stab_{K''}(x)]`, with the
/// index counted from a transversal and the stabilizer volumes counted
/// modulo `w^2`. Triples with `[K : K'] > 5000` are redrawn.
pub fn lemma21_check(cfg: &CheckConfig, samples: usize) -> VerificationReport {
    run("lemma21", cfg, &[("samples", json!(samples))], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut done = 0;
        while done < samples {
            let x = random_point(&mut rng, ell, n);
            let big = if rng.gen_bool(0.5) { Pattern::hyperspecial(n + 1) } else { Pattern::iwahori(n + 1) };
            let k = SubgroupDesc::new(Pattern::hyperspecial(n), big, 0);
            let kpp = k.intersect(&SubgroupDesc::new(
                random_pattern(&mut rng, n),
                random_pattern(&mut rng, n + 1),
                rng.gen_range(0..2),
            ));
            let kp = kpp.intersect(&SubgroupDesc::new(Pattern::iwahori(n), Pattern::iwahori(n + 1), rng.gen_range(0..2)));
            if subgroup_index(ell, &k, &kp)? > MAX_SAMPLE_INDEX {
                continue;
            }
            done += 1;
            let f = CosetSum::single(Space::Quotient, Term::new(Scalar::one(ell), x.clone(), kpp.clone()));
            let traced = f.trace(&k, &kp, cfg.budget_card)?;
            let index = coset_reps(ell, &kpp, &kp, cfg.budget_card)?.len();
            let stab = stabilizer_volume_by_counting(&x, &k, 2, cfg.budget_card)?
                / stabilizer_volume_by_counting(&x, &kpp, 2, cfg.budget_card)?;
            let c = Scalar::from_rational(ell, BigRational::from_integer(BigInt::from(index)) * stab);
            let want = CosetSum::single(Space::Quotient, Term::new(c, x.clone(), k.clone()));
            let cmp = x_equal(&traced, &want, &k, &cfg.eval())?;
            if !cmp.equal {
                let mut w = witness_of(&cmp, "trace against closed form").unwrap_err();
                w["x"] = json!(format!("[{}] [{}] {}", x.small, x.big, x.u));
                w["K''"] = json!(crate::cosetfun::sum::subgroup_tag(&kpp));
                w["K'"] = json!(crate::cosetfun::sum::subgroup_tag(&kp));
                return Ok(Err(w));
            }
        }
        Ok(Ok(()))
    })
}

/// Birch sum at `w^a k`, `|a_i| <= 2`, `k` over `GL_n(O / w^2)`, against the
/// case split of the lemma; every seventh matching point is re-run with
/// shifted representatives and with a rescaled character.
pub fn birch_check(cfg: &CheckConfig) -> VerificationReport {
    run("birch", cfg, &[], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let psi = AdditiveCharacter::new(ell);
        let w = SphericalWhittaker::big(n, psi);
        let w_scaled = SphericalWhittaker::big(n, AdditiveCharacter::scaled(ell, ell - 1)?);
        let kphi = Pattern::iwahori_phi(n);
        let c = birch_constant(ell, n);
        let ks = residue_transversal(ell, n, 2, cfg.budget_card)?;
        let side = 5i64;
        let mut spot = 0usize;
        for code in 0..side.pow(n as u32) {
            let a: Vec<i64> = (0..n).map(|i| (code / side.pow(i as u32)) % side - 2).collect();
            let t = Mat::diag_pi(ell, &a);
            for k in &ks {
                let h = t.mul(k);
                let want = if a.iter().all(|&x| x == 0) && kphi.member(k)? { c.clone() } else { Scalar::zero(ell) };
                let got = birch_sum(&w, &h, 0)?;
                if got != want {
                    return Ok(Err(json!({ "a": a, "k": k.to_string(), "lhs": got.to_string(), "rhs": want.to_string() })));
                }
                spot += 1;
                if spot % 7 == 0 {
                    for (label, v) in [("shifted", birch_sum(&w, &h, 1)?), ("rescaled", birch_sum(&w_scaled, &h, 0)?)] {
                        if v != want {
                            return Ok(Err(json!({ "variant": label, "a": a, "k": k.to_string(), "lhs": v.to_string(), "rhs": want.to_string() })));
                        }
                    }
                }
            }
        }
        Ok(Ok(()))
    })
}

fn dominant_tuples(m: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::new();
        for v in &out {
            let top = v.last().copied().unwrap_or(hi);
            for x in lo..=top {
                let mut w: Vec<i64> = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn random_label(rng: &mut ChaCha8Rng, n: usize) -> Label {
    let mut pick = |m: usize| {
        let mut v: Vec<i64> = (0..m).map(|_| rng.gen_range(-1..=1)).collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    };
    let s = pick(n);
    let b = pick(n + 1);
    Label::new(&s, &b, rng.gen_range(-1..=1)).expect("sorted labels")
}

/// Multiplicativity on 20 random pairs, compatibility with the involution,
/// and `inverse_satake(satake(f)) = f` on basis elements with
/// `sum |lam_i|, sum |mu_j| <= 3`.
pub fn satake_check(cfg: &CheckConfig) -> VerificationReport {
    run("satake", cfg, &[], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let sc = cfg.satake();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..20 {
            let f = HeckeElt::basis(ell, random_label(&mut rng, n));
            let g = HeckeElt::basis(ell, random_label(&mut rng, n));
            let lhs = f.convolve(&g, &sc)?.satake(&sc)?;
            let rhs = &f.satake(&sc)? * &g.satake(&sc)?;
            if lhs != rhs {
                return Ok(Err(json!({ "comparison": "homomorphism", "f": f.to_string(), "g": g.to_string() })));
            }
            let inv = f.involution().satake(&sc)?;
            if inv != f.satake(&sc)?.invert_variables() {
                return Ok(Err(json!({ "comparison": "involution", "f": f.to_string() })));
            }
        }
        let small = |v: &Vec<i64>| v.iter().map(|x| x.abs()).sum::<i64>() <= 3;
        for s in dominant_tuples(n, -3, 3).into_iter().filter(small) {
            for b in dominant_tuples(n + 1, -3, 3).into_iter().filter(small) {
                let f = HeckeElt::basis(ell, Label::new(&s, &b, 0)?);
                let back = HeckeElt::inverse_satake(ell, n, &f.satake(&sc)?, &sc)?;
                if back != f {
                    return Ok(Err(mismatch("round trip", back, f)));
                }
            }
        }
        Ok(Ok(()))
    })
}

/// The Satake image of `L` is `prod (1 - A_i B_j T l^{-1/2})`.
pub fn ell_op_check(cfg: &CheckConfig) -> VerificationReport {
    run("ell-op", cfg, &[], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let l = ell_operator(ell, n, &cfg.satake())?;
        let got = l.satake(&cfg.satake())?;
        let want = l_factor_polynomial(ell, n);
        if got != want {
            return Ok(Err(mismatch("Satake image of L", got, want)));
        }
        Ok(Ok(()))
    })
}

/// `Sat(L^vee)` with `T^{-1} -> X` is `prod (1 - a_i^{-1} b_j^{-1} l^{-1/2} X)`,
/// symbolically and at seeded rational parameters.
pub fn euler_factor_check(cfg: &CheckConfig) -> VerificationReport {
    run("euler-factor", cfg, &[], || {
        let (ell, n) = (cfg.ell, cfg.n);
        let sat = ell_operator(ell, n, &cfg.satake())?.involution().satake(&cfg.satake())?;
        let alpha: Vec<Scalar> = (1..=n as u8).map(|i| Scalar::var(ell, Var::A(i))).collect();
        let beta: Vec<Scalar> = (1..=n as u8 + 1).map(|j| Scalar::var(ell, Var::B(j))).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut rational = |k: usize| -> Vec<Scalar> {
            (0..k).map(|_| Scalar::from_ratio(ell, rng.gen_range(1..9), rng.gen_range(1..9))).collect()
        };
        let numeric = (rational(n), rational(n + 1));
        for (a, b) in [(alpha, beta), numeric] {
            let direct = euler_factor(ell, &a, &b)?;
            let from_sat = euler_factor_from_satake(&sat, &a, &b)?;
            if direct.len() != n * (n + 1) + 1 || direct != from_sat {
                let show = |p: &[Scalar]| p.iter().map(|c| c.to_string()).collect::<Vec<_>>();
                return Ok(Err(json!({ "comparison": "Euler factor", "lhs": show(&from_sat), "rhs": show(&direct) })));
            }
        }
        Ok(Ok(()))
    })
}
