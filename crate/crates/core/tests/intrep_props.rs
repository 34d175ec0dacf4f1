use std::collections::BTreeMap;

use local_harmonic::intrep::*;
use local_harmonic::normrel::{CheckConfig, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Laurent = BTreeMap<Vec<i64>, i64>;

fn mul(a: &Laurent, b: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn add(a: &Laurent, b: &Laurent, sign: i64) -> Laurent {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_insert(0) += sign * c;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn monomial(e: Vec<i64>) -> Laurent {
    Laurent::from([(e, 1)])
}

/// Complete homogeneous symmetric polynomial `h_k` in `m` variables.
fn complete(m: usize, k: i64) -> Laurent {
    let mut out = Laurent::new();
    if k < 0 {
        return out;
    }
    let mut stack = vec![(0usize, vec![0i64; m], k)];
    while let Some((i, e, left)) = stack.pop() {
        if i == m - 1 {
            let mut e = e;
            e[i] = left;
            out.insert(e, 1);
            continue;
        }
        for x in 0..=left {
            let mut e = e.clone();
            e[i] = x;
            stack.push((i + 1, e, left - x));
        }
    }
    out
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..m {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

fn sign(p: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// Schur polynomial by Jacobi-Trudi, `lam` non-negative of length `m`.
fn schur(lam: &[i64]) -> Laurent {
    let m = lam.len();
    let mut out = Laurent::new();
    for p in permutations(m) {
        let mut term = monomial(vec![0; m]);
        for i in 0..m {
            term = mul(&term, &complete(m, lam[i] - i as i64 + p[i] as i64));
        }
        out = add(&out, &term, sign(&p));
    }
    out
}

/// `(1/n!) CT[ conj(s_a) * s_b|_{x_{n+1} = 1} * prod_{i != j} (1 - x_i / x_j) ]`.
fn inner_product_oracle(a: &[i64], b: &[i64]) -> i64 {
    let n = a.len();
    let sa: Laurent = schur(a).into_iter().map(|(e, c)| (e.iter().map(|x| -x).collect(), c)).collect();
    let mut sb = Laurent::new();
    for (e, c) in schur(b) {
        *sb.entry(e[..n].to_vec()).or_insert(0) += c;
    }
    let mut weyl = monomial(vec![0; n]);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut e = vec![0; n];
                e[i] = 1;
                e[j] = -1;
                weyl = mul(&weyl, &add(&monomial(vec![0; n]), &monomial(e), -1));
            }
        }
    }
    let ct = mul(&mul(&sa, &sb), &weyl).get(&vec![0; n]).copied().unwrap_or(0);
    let fact: i64 = (1..=n as i64).product();
    assert_eq!(ct % fact, 0);
    ct / fact
}

fn hw(v: &[i64]) -> HighestWeight {
    HighestWeight::new(v).unwrap()
}

#[test]
fn branching_agrees_with_character_oracle() {
    for n in 1..=2 {
        for b in dominant_weights(n + 1, 0, 3) {
            for a in dominant_weights(n, 0, 3) {
                let want = inner_product_oracle(a.entries(), b.entries());
                assert_eq!(branching_multiplicity(&a, &b, 1 << 20).unwrap() as i64, want, "{a:?} {b:?}");
                assert_eq!(want == 1, interlaces(&a, &b));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (as_, bs) = (dominant_weights(3, 0, 4), dominant_weights(4, 0, 4));
    let mut seen = 0;
    while seen < 20 {
        let a = &as_[rng.gen_range(0..as_.len())];
        let b = &bs[rng.gen_range(0..bs.len())];
        if interlaces(a, b) {
            continue;
        }
        seen += 1;
        assert_eq!(inner_product_oracle(a.entries(), b.entries()), 0);
        assert_eq!(branching_multiplicity(a, b, 1 << 20).unwrap(), 0);
    }
}

#[test]
fn tensor_square_of_standard() {
    let std = character(&hw(&[1, 0, 0]), 100).unwrap();
    let mut square = Character::new();
    for (w1, k1) in &std {
        for (w2, k2) in &std {
            let w: Vec<i64> = w1.iter().zip(w2).map(|(x, y)| x + y).collect();
            *square.entry(w).or_insert(0) += k1 * k2;
        }
    }
    let parts = decompose(square, 100).unwrap();
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[&hw(&[2, 0, 0])], 1);
    assert_eq!(parts[&hw(&[1, 1, 0])], 1);
}

#[test]
fn branching_suite_passes() {
    for n in 1..=3 {
        let r = branching_check(&CheckConfig { n, ..CheckConfig::default() });
        assert_eq!(r.status, Status::Pass, "{}", r.to_json());
    }
}

#[test]
fn lattice_examples() {
    for p in [2, 3] {
        let cfg = CheckConfig { ell: p, ..CheckConfig::default() };
        assert_eq!(lattice_integrality_check(&hw(&[0, 0]), &[0, 1], &cfg).status, Status::Pass);
        assert_eq!(lattice_integrality_check(&hw(&[1, 0]), &[0, 1], &cfg).status, Status::Pass);
        assert_eq!(lattice_integrality_check(&hw(&[2, 0]), &[0, 2], &cfg).status, Status::Pass);
        assert_eq!(lattice_integrality_check(&hw(&[2, 1, -1]), &[0, 1, 2], &cfg).status, Status::Pass);

        let neg = lattice_integrality_check(&hw(&[2, 0]), &[1, 0], &cfg);
        assert_eq!(neg.status, Status::Fail);
        assert!(neg.witness.unwrap()["valuation"].as_i64().unwrap() < 0);
    }
}

#[test]
fn lattice_grid_rank_two() {
    for ell in [2, 3] {
        let r = lattice_grid_check(&CheckConfig { n: 1, ell, ..CheckConfig::default() });
        assert_eq!(r.status, Status::Pass, "{}", r.to_json());
    }
}

#[test]
fn invariant_line_is_one_dimensional_and_primitive() {
    for n in 1..=2 {
        for b in dominant_weights(n + 1, 0, 2) {
            for a in dominant_weights(n, 0, 2) {
                let inv = invariant_vectors(&a, &b, 2, 1 << 24).unwrap();
                assert_eq!(inv.len() as u64, branching_multiplicity(&a, &b, 1 << 20).unwrap(), "{a:?} {b:?}");
                for v in inv {
                    assert_eq!(v.iter().filter_map(|x| valuation(x, 2)).min(), Some(0));
                }
            }
        }
    }
}
