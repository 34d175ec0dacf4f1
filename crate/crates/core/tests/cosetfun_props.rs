use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use local_harmonic::cosetfun::{coset_reps, subgroup_index, volume_h, x_equal, CosetSum, EvalConfig, SolverConfig, Space, Term};
use local_harmonic::matgrp::{embed_big, embed_delta_tilde, xi_open_orbit, GroupElt, Mat, Pattern, SubgroupDesc};
use local_harmonic::{FieldElement, Scalar};

/// All matrices with entries `sum_{e < m} c_e w^e`, as exact elements.
fn residue_matrices(ell: u32, n: usize, m: u32) -> Vec<Mat> {
    let per = (ell as usize).pow(m);
    let entries: Vec<FieldElement> = (0..per)
        .map(|code| {
            let mut c = code;
            let digits: Vec<u32> = (0..m)
                .map(|_| {
                    let d = (c % ell as usize) as u32;
                    c /= ell as usize;
                    d
                })
                .collect();
            FieldElement::from_digits(ell, 0, &digits, i64::MAX)
        })
        .collect();
    let total = per.pow((n * n) as u32);
    (0..total)
        .map(|code| {
            let mut c = code;
            Mat::from_fn(ell, n, |_, _| {
                let e = entries[c % per].clone();
                c /= per;
                e
            })
        })
        .collect()
}

/// `mu_H(H cap g K g^{-1})` by counting residues modulo `w^m`, for `g` in the
/// hyperspecial subgroup and `K` containing its level-`m` congruence subgroup.
fn volume_by_counting(g: &GroupElt, k: &SubgroupDesc, m: u32) -> BigRational {
    let ell = g.ell();
    let n = g.n();
    let gi = g.inverse().unwrap();
    let mut hits = 0i64;
    let mut units = 0i64;
    for h in residue_matrices(ell, n, m) {
        if !h.det().member(local_harmonic::LocalSet::Units).unwrap() {
            continue;
        }
        units += 1;
        let y = gi.mul(&embed_delta_tilde(&h).unwrap()).mul(g);
        if k.member(&y).unwrap() {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(units))
}

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

#[test]
fn h_volume_matches_residue_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = SolverConfig::default();
    for (ell, n) in [(2u32, 1usize), (3, 1), (2, 2)] {
        for _ in 0..6 {
            let g = random_point(&mut rng, ell, n);
            let k = SubgroupDesc::new(random_pattern(&mut rng, n), random_pattern(&mut rng, n + 1), rng.gen_range(0..2));
            let want = volume_by_counting(&g, &k, 2);
            assert_eq!(volume_h(&g, &k, &cfg).unwrap(), want, "g = {g}, K = {k:?}");
        }
    }
}

#[test]
fn coset_reps_count_matches_index() {
    let k = SubgroupDesc::hyperspecial(1, 0);
    let kp = SubgroupDesc::new(Pattern::iwahori(1), Pattern::iwahori_phi_1(2), 1);
    for ell in [2u32, 3] {
        let reps = coset_reps(ell, &k, &kp, 1 << 16).unwrap();
        assert_eq!(reps.len() as u64, subgroup_index(ell, &k, &kp).unwrap());
        for (a, x) in reps.iter().enumerate() {
            assert!(k.member(x).unwrap());
            let xi = x.inverse().unwrap();
            for y in &reps[a + 1..] {
                assert!(!kp.member(&xi.mul(y)).unwrap());
            }
        }
    }
}

/// Trace of `1[H x K'']` from `K'` up to `K`, for `K' <= K'' <= K`, against
/// the closed form with the index `[K'':K']` and the stabilizer volume ratio.
#[test]
fn trace_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let solver = SolverConfig::default();
    let cfg = EvalConfig::default();
    let mut nontrivial = 0;
    for (ell, n) in [(2u32, 1usize), (3, 1), (2, 2)] {
        for _ in 0..5 {
            let x = random_point(&mut rng, ell, n);
            let k = SubgroupDesc::new(
                Pattern::hyperspecial(n),
                if rng.gen_bool(0.5) { Pattern::hyperspecial(n + 1) } else { Pattern::iwahori(n + 1) },
                0,
            );
            let kpp = k.intersect(&SubgroupDesc::new(
                random_pattern(&mut rng, n),
                random_pattern(&mut rng, n + 1),
                rng.gen_range(0..2),
            ));
            let kp = kpp.intersect(&SubgroupDesc::new(
                Pattern::iwahori(n),
                Pattern::iwahori(n + 1),
                rng.gen_range(0..2),
            ));
            let f = CosetSum::single(Space::Quotient, Term::new(Scalar::one(ell), x.clone(), kpp.clone()));
            let tr = f.trace(&k, &kp, 1 << 16).unwrap();
            let idx = BigRational::from_integer(subgroup_index(ell, &kpp, &kp).unwrap().into());
            let stab = volume_by_counting(&x, &k, 2) / volume_by_counting(&x, &kpp, 2);
            assert_eq!(stab, volume_h(&x, &k, &solver).unwrap() / volume_h(&x, &kpp, &solver).unwrap());
            let c = Scalar::from_rational(ell, idx * stab);
            let want = CosetSum::single(Space::Quotient, Term::new(c, x.clone(), k.clone()));
            let cmp = x_equal(&tr, &want, &k, &cfg).unwrap();
            assert!(cmp.equal, "x = {x}, K = {k:?}, K'' = {kpp:?}, witness {:?}", cmp.witness);
            if tr.len() > 1 {
                nontrivial += 1;
            }
        }
    }
    assert!(nontrivial > 3);
}

#[test]
fn coinvariants_commute_with_translation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let solver = SolverConfig::default();
    let cfg = EvalConfig::default();
    for (ell, n) in [(2u32, 1usize), (3, 1), (2, 2)] {
        let k = SubgroupDesc::iwahori(n, 0);
        let x = random_point(&mut rng, ell, n);
        let f = CosetSum::single(Space::Group, Term::new(Scalar::one(ell), x, k.clone()));
        // an element of K followed by a torus element
        let g = random_point(&mut rng, ell, n);
        let g = if k.member(&g).unwrap() { g } else { GroupElt::identity(ell, n) };
        let t = embed_delta_tilde(&Mat::diag_pi(ell, &(0..n as i64).collect::<Vec<_>>())).unwrap();
        for h in [g, t] {
            let lhs = f.act(&h).unwrap().coinvariants(&solver).unwrap();
            let rhs = f.coinvariants(&solver).unwrap().act(&h).unwrap();
            // h . 1[x K] is invariant under h K h^{-1}
            let common = match h.diagonal_monomial_exponents() {
                Some((a, b)) => k.conjugate_by_diag(&a, &b),
                None => k.clone(),
            };
            assert!(x_equal(&lhs, &rhs, &common, &cfg).unwrap().equal);
        }
    }
}
