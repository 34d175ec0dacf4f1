use local_harmonic::normrel::*;

fn cfg(n: usize, ell: u32, t: u32) -> CheckConfig {
    CheckConfig { n, ell, t, fixed_clock: true, ..CheckConfig::default() }
}

fn assert_pass(r: &VerificationReport) {
    assert_eq!(r.status, Status::Pass, "{}", r.to_json());
}

#[test]
fn wild_relation_positive_levels() {
    for (n, ell, t) in [(1, 2, 1), (1, 2, 2), (1, 3, 1), (2, 2, 1)] {
        assert_pass(&wild_check(&cfg(n, ell, t)));
        assert_pass(&stab_factor_check(&cfg(n, ell, t)));
    }
}

#[test]
fn wild_relation_fails_at_level_zero() {
    for ell in [2, 3] {
        let r = wild_check(&cfg(1, ell, 0));
        assert_eq!(r.status, Status::Fail);
        let w = r.witness.unwrap();
        assert_eq!((w["lhs"].as_str(), w["rhs"].as_str()), (Some("0"), Some("1")));

        let s = stab_factor_check(&cfg(1, ell, 0));
        assert_eq!(s.status, Status::Fail);
        let w = s.witness.unwrap();
        assert_eq!(w["hecke_index"].as_u64(), Some(ell as u64));
        assert_eq!(w["stabilizer_index"].as_str(), Some((ell - 1).to_string().as_str()));
    }
}

#[test]
fn tame_relation_small_rank() {
    for ell in [2, 3] {
        let c = cfg(1, ell, 0);
        assert_pass(&prop45_check(&c));
        assert_pass(&integrality_check(&c));
        assert_pass(&tame_check(&c));
    }
}

#[test]
fn twisting_element_sizes() {
    for ell in [2u32, 3] {
        assert_eq!(delta_prime(ell, 1).len(), ell as usize);
        assert_eq!(delta_prime(ell, 2).len(), ell.pow(4) as usize);
        assert_eq!(delta_prime_1(ell, 1).len(), 2);
        assert_eq!(delta_prime_1(ell, 2).len(), 4 * ell.pow(2) as usize);
        let fibres = projection_fibres(ell, 2);
        assert!(fibres.iter().all(|(_, s, size)| *size == ((ell - 1) as usize).pow(2 - s)));
    }
}

#[test]
fn algebraic_suites() {
    for ell in [2, 3] {
        let c = cfg(1, ell, 0);
        assert_pass(&lemma21_check(&c, 25));
        assert_pass(&birch_check(&c));
        assert_pass(&satake_check(&c));
        assert_pass(&ell_op_check(&c));
        assert_pass(&euler_factor_check(&c));
    }
}

#[test]
fn fixed_clock_reports_are_reproducible() {
    let c = cfg(1, 3, 0);
    assert_eq!(tame_check(&c).to_json(), tame_check(&c).to_json());
    assert_eq!(lemma21_check(&c, 10).to_json(), lemma21_check(&c, 10).to_json());
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let c = CheckConfig { budget_card: 4, ..cfg(1, 3, 0) };
    assert_eq!(tame_check(&c).status, Status::Inconclusive);
}
