//! Algebraic representations: the interlacing branching rule and integral
//! lattices under antidominant torus elements.

mod branching;
mod lattice;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub use branching::{branching_multiplicity, character, decompose, interlaces, Character, HighestWeight};
pub use lattice::{invariant_vectors, is_antidominant, iwahori_generators, torus, valuation, WeylModule};

use crate::normrel::report::run;
use crate::normrel::{CheckConfig, VerificationReport};

/// Dominant weights of `GL_m` with entries in `lo..=hi`.
pub fn dominant_weights(m: usize, lo: i64, hi: i64) -> Vec<HighestWeight> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                let top = v.last().copied().unwrap_or(hi);
                (lo..=top).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.iter().map(|v| HighestWeight::new(v).expect("built non-increasing")).collect()
}

/// Multiplicity one on every interlacing pair `(a, b)` with entries in
/// `[0, 4]`, and zero on 20 seeded non-interlacing pairs.
pub fn branching_check(cfg: &CheckConfig) -> VerificationReport {
    run("branching", cfg, &[], || {
        let n = cfg.n;
        let budget = cfg.budget_card;
        let bs = dominant_weights(n + 1, 0, 4);
        let as_ = dominant_weights(n, 0, 4);
        for b in &bs {
            for a in as_.iter().filter(|a| interlaces(a, b)) {
                let k = branching_multiplicity(a, b, budget)?;
                if k != 1 {
                    return Ok(Err(json!({ "a": a.entries(), "b": b.entries(), "multiplicity": k, "expected": 1 })));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut sampled = 0;
        while sampled < 20 {
            let a = &as_[rng.gen_range(0..as_.len())];
            let b = &bs[rng.gen_range(0..bs.len())];
            if interlaces(a, b) {
                continue;
            }
            sampled += 1;
            let k = branching_multiplicity(a, b, budget)?;
            if k != 0 {
                return Ok(Err(json!({ "a": a.entries(), "b": b.entries(), "multiplicity": k, "expected": 0 })));
            }
        }
        Ok(Ok(()))
    })
}

/// Integrality of `p^{-<mu, c>} xi_mu(diag(p^c))` on the lattice of `V_mu`
/// (with `p = cfg.ell`), together with the Iwahori generators and products
/// `k a k'`.
pub fn lattice_integrality_check(weight: &HighestWeight, c: &[i64], cfg: &CheckConfig) -> VerificationReport {
    let extra = [("weight", json!(weight.entries())), ("torus", json!(c))];
    run("lattice-int", cfg, &extra, || {
        let module = WeylModule::new(weight, cfg.ell, cfg.budget_card)?;
        lattice::integrality_verdict(&module, &module.iwahori_images(), c, cfg.budget_card)
    })
}

/// Antidominant exponent vectors `0 = c_1 <= ... <= c_m <= 2`.
fn antidominant_grid(m: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![0]];
    for _ in 1..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                let last = *v.last().expect("nonempty");
                (last..=2).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every weight of `GL_m`, `m` in `{n, n + 1}` with `m >= 2`, with entries in
/// `[-3, 3]` passes on the antidominant grid; for each non-scalar weight the
/// dominant element `diag(p, 1, ..., 1)` must produce a non-integral entry.
pub fn lattice_grid_check(cfg: &CheckConfig) -> VerificationReport {
    run("lattice-int", cfg, &[], || {
        for m in [cfg.n, cfg.n + 1].into_iter().filter(|&m| m >= 2) {
            let mut control = vec![0i64; m];
            control[0] = 1;
            for w in dominant_weights(m, -3, 3) {
                let module = WeylModule::new(&w, cfg.ell, cfg.budget_card)?;
                let gens = module.iwahori_images();
                for c in antidominant_grid(m) {
                    if let Err(e) = lattice::integrality_verdict(&module, &gens, &c, cfg.budget_card)? {
                        return Ok(Err(json!({ "weight": w.entries(), "torus": c, "detail": e })));
                    }
                }
                let scalar = w.entries().iter().all(|&x| x == w.entries()[0]);
                let verdict = lattice::integrality_verdict(&module, &gens, &control, cfg.budget_card)?;
                if !scalar && verdict.is_ok() {
                    return Ok(Err(json!({ "comparison": "negative control stayed integral", "weight": w.entries(), "torus": control })));
                }
            }
        }
        Ok(Ok(()))
    })
}
