use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use local_harmonic::cosetfun::{x_equal, CosetSum, EvalConfig};
use local_harmonic::hecke::{
    double_coset_reps, double_coset_size, ell_operator, euler_factor, euler_factor_from_satake, l_factor_polynomial,
    u_operator, HeckeElt, Label, SatakeConfig,
};
use local_harmonic::matgrp::SubgroupDesc;
use local_harmonic::{Scalar, Var};

fn dominant(m: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
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
    Label::new(&s, &b, rng.gen_range(-1..=1)).unwrap()
}

#[test]
fn satake_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SatakeConfig::default();
    for case in 0..12 {
        let (ell, n) = if case < 8 { ([2u32, 3][case % 2], 1) } else { (2, 2) };
        let f = HeckeElt::basis(ell, random_label(&mut rng, n)).add(&HeckeElt::basis(ell, random_label(&mut rng, n)));
        let g = HeckeElt::basis(ell, random_label(&mut rng, n));
        let lhs = f.convolve(&g, &cfg).unwrap().satake(&cfg).unwrap();
        let rhs = &f.satake(&cfg).unwrap() * &g.satake(&cfg).unwrap();
        assert_eq!(lhs, rhs, "f = {f:?}, g = {g:?}");
    }
}

#[test]
fn involution_inverts_variables() {
    let cfg = SatakeConfig::default();
    for ell in [2u32, 3] {
        for s in dominant(2, -1, 1) {
            let f = HeckeElt::basis(ell, Label::new(&s, &[1, 0, -1], 2).unwrap());
            assert_eq!(f.involution().satake(&cfg).unwrap(), f.satake(&cfg).unwrap().invert_variables());
        }
    }
}

#[test]
fn round_trip_on_basis() {
    let cfg = SatakeConfig::default();
    let ell = 2;
    for n in [1usize, 2] {
        for s in dominant(n, -3, 3).into_iter().filter(|v| v.iter().map(|x| x.abs()).sum::<i64>() <= 3) {
            for b in dominant(n + 1, -3, 3).into_iter().filter(|v| v.iter().map(|x| x.abs()).sum::<i64>() <= 3) {
                let f = HeckeElt::basis(ell, Label::new(&s, &b, 1).unwrap());
                let p = f.satake(&cfg).unwrap();
                assert_eq!(HeckeElt::inverse_satake(ell, n, &p, &cfg).unwrap(), f);
            }
        }
    }
}

#[test]
fn double_coset_sizes() {
    for lam in [vec![2, 0], vec![1, 0, -1], vec![2, 1, 1]] {
        let ell = 3;
        let reps = double_coset_reps(ell, &lam, 1 << 22).unwrap();
        assert_eq!(reps.len() as u128, double_coset_size(ell, &lam));
    }
}

#[test]
fn l_operator_image() {
    let cfg = SatakeConfig::default();
    for (ell, n) in [(2u32, 1usize), (3, 1), (2, 2)] {
        let l = ell_operator(ell, n, &cfg).unwrap();
        assert_eq!(l.satake(&cfg).unwrap(), l_factor_polynomial(ell, n));
        let want: Scalar = {
            let c = Scalar::ell_half_power(ell, -1);
            let mut acc = Scalar::one(ell);
            for i in 1..=n as u8 {
                for j in 1..=n as u8 + 1 {
                    let x = Scalar::monomial(
                        ell,
                        local_harmonic::Monomial::from_pairs([(Var::A(i), -1), (Var::B(j), -1), (Var::T, -1)]),
                    );
                    acc = &acc * &(&Scalar::one(ell) - &(&x * &c));
                }
            }
            acc
        };
        assert_eq!(l.involution().satake(&cfg).unwrap(), want);
    }
}

#[test]
fn euler_factor_matches_satake() {
    let cfg = SatakeConfig::default();
    let ell = 2;
    let r = |a, b| Scalar::from_ratio(ell, a, b);
    let one = Scalar::one(ell);
    let p = euler_factor(ell, &[one.clone()], &[one.clone(), one.clone()]).unwrap();
    let c = Scalar::ell_half_power(ell, -1);
    assert_eq!(p, vec![one.clone(), &Scalar::from_int(ell, -2) * &c, &c * &c]);
    for n in [1usize, 2] {
        let sat = ell_operator(ell, n, &cfg).unwrap().involution().satake(&cfg).unwrap();
        let alpha: Vec<Scalar> = (0..n as i64).map(|i| r(i + 2, 3)).collect();
        let beta: Vec<Scalar> = (0..=n as i64).map(|j| r(5, j + 1)).collect();
        let direct = euler_factor(ell, &alpha, &beta).unwrap();
        assert_eq!(direct.len(), n * (n + 1) + 1);
        assert_eq!(euler_factor_from_satake(&sat, &alpha, &beta).unwrap(), direct);
    }
    assert!(euler_factor(ell, &[Scalar::zero(ell)], &[one.clone(), one]).is_err());
}

#[test]
fn module_action() {
    let cfg = SatakeConfig::default();
    let ecfg = EvalConfig::default();
    let ell = 2;
    let k = SubgroupDesc::hyperspecial(1, 0);
    let phi = CosetSum::delta_zero(ell, 1);
    let one = HeckeElt::one(ell, 1);
    assert!(x_equal(&one.act_on(&phi, &cfg).unwrap(), &phi, &k, &ecfg).unwrap().equal);

    let f1 = HeckeElt::basis(ell, Label::new(&[1], &[0, 0], 0).unwrap());
    let f2 = HeckeElt::basis(ell, Label::new(&[0], &[1, 0], 1).unwrap());
    let lhs = f1.convolve(&f2, &cfg).unwrap().act_on(&phi, &cfg).unwrap();
    let inner = f2.act_on(&phi, &cfg).unwrap();
    let sum = f1.add(&f2).act_on(&phi, &cfg).unwrap();
    let parts = f1.act_on(&phi, &cfg).unwrap().add(&inner).unwrap();
    assert!(x_equal(&sum, &parts, &k, &ecfg).unwrap().equal);
    let rhs = f1.act_on(&inner, &cfg).unwrap();
    assert!(x_equal(&lhs, &rhs, &k, &ecfg).unwrap().equal);
}

#[test]
fn u_operator_rank_one() {
    let ell = 2;
    let phi = CosetSum::parse(ell, 1, local_harmonic::cosetfun::Space::Quotient, "1 | [1] [1, 0; 0, 1] 1 | K x Iw x J0").unwrap();
    let u = u_operator(&phi, 0, 1 << 16).unwrap().simplify();
    assert_eq!(u.len(), 2, "{u}");
}
