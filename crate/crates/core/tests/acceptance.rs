//! Acceptance run: one PASS/FAIL line per criterion, all comparisons exact.
//!
//! Lines go straight to stdout so they show up under the default test
//! harness capture. The wild relation and its stabilizer factors fail at
//! t = 0 (see the README); the test asserts that this is the only failure.

use std::io::Write;
use std::time::Instant;

use local_harmonic::intrep::{branching_check, lattice_grid_check};
use local_harmonic::normrel::{
    birch_check, ell_op_check, euler_factor_check, integrality_check, lemma21_check, prop45_check, satake_check,
    stab_factor_check, tame_check, wild_check, CheckConfig, Status, VerificationReport,
};

const LEMMA21_SAMPLES: usize = 25;

fn cfg(n: usize, ell: u32, t: u32) -> CheckConfig {
    CheckConfig { n, ell, t, fixed_clock: true, ..CheckConfig::default() }
}

fn grid() -> Vec<(usize, u32)> {
    vec![(1, 2), (1, 3), (2, 2), (2, 3)]
}

/// `(n, l, t)` for the wild relation, the full grid including `n = 2, t = 2`.
fn wild_grid() -> Vec<(usize, u32, u32)> {
    grid().into_iter().flat_map(|(n, ell)| (0..=2).map(move |t| (n, ell, t))).collect()
}

struct Outcome {
    id: u32,
    title: &'static str,
    reports: Vec<VerificationReport>,
    seconds: f64,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.status == Status::Pass)
    }

    fn failing(&self) -> Vec<&VerificationReport> {
        self.reports.iter().filter(|r| r.status != Status::Pass).collect()
    }
}

fn criterion(id: u32, title: &'static str, body: impl FnOnce() -> Vec<VerificationReport>) -> Outcome {
    let start = Instant::now();
    let reports = body();
    Outcome { id, title, reports, seconds: start.elapsed().as_secs_f64() }
}

fn lemma21() -> Vec<VerificationReport> {
    grid().into_iter().map(|(n, ell)| lemma21_check(&cfg(n, ell, 0), LEMMA21_SAMPLES)).collect()
}

fn wild() -> Vec<VerificationReport> {
    wild_grid().into_iter().map(|(n, ell, t)| wild_check(&cfg(n, ell, t))).collect()
}

fn stab() -> Vec<VerificationReport> {
    wild_grid().into_iter().map(|(n, ell, t)| stab_factor_check(&cfg(n, ell, t))).collect()
}

fn birch() -> Vec<VerificationReport> {
    grid().into_iter().map(|(n, ell)| birch_check(&cfg(n, ell, 0))).collect()
}

fn satake() -> Vec<VerificationReport> {
    (1..=2).map(|n| satake_check(&cfg(n, 2, 0))).collect()
}

fn ell_op() -> Vec<VerificationReport> {
    (1..=2).map(|n| ell_op_check(&cfg(n, 2, 0))).collect()
}

fn prop45() -> Vec<VerificationReport> {
    (1..=2).map(|n| prop45_check(&cfg(n, 2, 0))).collect()
}

fn integrality() -> Vec<VerificationReport> {
    grid().into_iter().map(|(n, ell)| integrality_check(&cfg(n, ell, 0))).collect()
}

fn tame() -> Vec<VerificationReport> {
    [(1, 2), (1, 3), (2, 2)].into_iter().map(|(n, ell)| tame_check(&cfg(n, ell, 0))).collect()
}

fn euler() -> Vec<VerificationReport> {
    (1..=2).map(|n| euler_factor_check(&cfg(n, 2, 0))).collect()
}

fn branching() -> Vec<VerificationReport> {
    (1..=3).map(|n| branching_check(&cfg(n, 2, 0))).collect()
}

fn lattice() -> Vec<VerificationReport> {
    [2, 3].into_iter().map(|p| lattice_grid_check(&cfg(2, p, 0))).collect()
}

/// The cheaper criteria, rerun with the same seeds.
fn repeatable() -> Vec<VerificationReport> {
    let mut out = Vec::new();
    out.extend([(1, 2), (1, 3)].map(|(n, ell)| lemma21_check(&cfg(n, ell, 0), LEMMA21_SAMPLES)));
    out.extend([0, 1].map(|t| wild_check(&cfg(1, 3, t))));
    out.extend([1, 2].map(|t| stab_factor_check(&cfg(1, 2, t))));
    out.push(birch_check(&cfg(1, 3, 0)));
    out.extend(satake());
    out.extend(ell_op());
    out.push(integrality_check(&cfg(1, 3, 0)));
    out.push(tame_check(&cfg(1, 2, 0)));
    out.extend(euler());
    out.push(branching_check(&cfg(2, 2, 0)));
    out
}

fn json_lines(reports: &[VerificationReport]) -> String {
    reports.iter().map(|r| r.to_json() + "\n").collect()
}

fn determinism() -> Vec<VerificationReport> {
    let first = json_lines(&repeatable());
    let second = json_lines(&repeatable());
    let witness = (first != second).then(|| {
        let at = first.lines().zip(second.lines()).position(|(a, b)| a != b);
        serde_json::json!({ "first differing line": at })
    });
    vec![VerificationReport {
        check: "determinism".into(),
        params: serde_json::json!({ "records": first.lines().count() }),
        status: if witness.is_some() { Status::Fail } else { Status::Pass },
        witness,
        seconds: 0.0,
    }]
}

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn wild_case(r: &VerificationReport) -> (u64, u64, u64) {
    let p = &r.params;
    let get = |k: &str| p[k].as_u64().expect("integer param");
    (get("n"), get("ell"), get("t"))
}

#[test]
fn acceptance_criteria() {
    type Job = (u32, &'static str, fn() -> Vec<VerificationReport>);
    let jobs: Vec<Job> = vec![
        (1, "trace lemma, 100 random instances", lemma21),
        (2, "wild norm relation", wild),
        (3, "stabilizer factors of the wild relation", stab),
        (4, "local Birch lemma", birch),
        (5, "Satake homomorphism, involution, round trip", satake),
        (6, "inverse L-factor operator", ell_op),
        (7, "zeta functional identity", prop45),
        (8, "integrality of the tame twisting element", integrality),
        (9, "tame norm relation", tame),
        (10, "Euler factor", euler),
        (11, "branching multiplicities", branching),
        (12, "lattice integrality", lattice),
        (13, "determinism", determinism),
    ];
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|(id, title, f)| s.spawn(move || criterion(id, title, f)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });

    emit("");
    for o in &outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        emit(&format!(
            "criterion {:>2} {status}  {} ({} runs, {:.1}s)",
            o.id,
            o.title,
            o.reports.len(),
            o.seconds
        ));
        for r in o.failing() {
            emit(&format!("              {}", r.to_json()));
        }
    }
    emit("");

    // the wild relation fails at t = 0 and only there
    for o in &outcomes {
        match o.id {
            2 | 3 => {
                for r in &o.reports {
                    let (_, _, t) = wild_case(r);
                    let want = if t == 0 { Status::Fail } else { Status::Pass };
                    assert_eq!(r.status, want, "criterion {}: {}", o.id, r.to_json());
                }
            }
            _ => assert!(o.passed(), "criterion {} failed: {:?}", o.id, o.failing().iter().map(|r| r.to_json()).collect::<Vec<_>>()),
        }
    }
}
