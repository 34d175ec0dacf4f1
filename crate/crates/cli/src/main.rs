mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use local_harmonic::intrep::{branching_check, lattice_grid_check};
use local_harmonic::normrel::*;

use config::{Layer, RunConfig, CHECKS};

/// Samples drawn by the trace-lemma suite.
const LEMMA21_SAMPLES: usize = 25;

#[derive(Parser, Debug)]
#[command(name = "verify", about = "Run exact verifications of the local norm relations")]
struct Cli {
    /// One of lemma21, wild, stab-factors, birch, satake, ell-op, prop45,
    /// integrality, tame, euler-factor, branching, lattice-int, all.
    check: String,
    /// Rank of the small group GL_n.
    #[arg(long)]
    n: Option<usize>,
    /// Residue characteristic, a prime.
    #[arg(long)]
    ell: Option<u32>,
    /// Relative precision of truncated inverses.
    #[arg(long)]
    prec: Option<u32>,
    /// A level `k` or an inclusive range `a..b`.
    #[arg(long)]
    t: Option<String>,
    /// Degree cutoff for truncated series.
    #[arg(long)]
    cutoff: Option<u32>,
    /// Deepest residue level the coset solver may resolve.
    #[arg(long = "budget-m")]
    budget_m: Option<i64>,
    /// Largest enumeration allowed before reporting inconclusive.
    #[arg(long = "budget-card")]
    budget_card: Option<u64>,
    /// Seed for the randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// One JSON record per line instead of text.
    #[arg(long)]
    json: bool,
    /// Report `seconds` as 0 so output is byte-identical across runs.
    #[arg(long = "fixed-clock")]
    fixed_clock: bool,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

const USAGE_ERROR: u8 = 64;

fn run_one(name: &str, cfg: &CheckConfig) -> VerificationReport {
    match name {
        "lemma21" => lemma21_check(cfg, LEMMA21_SAMPLES),
        "wild" => wild_check(cfg),
        "stab-factors" => stab_factor_check(cfg),
        "birch" => birch_check(cfg),
        "satake" => satake_check(cfg),
        "ell-op" => ell_op_check(cfg),
        "prop45" => prop45_check(cfg),
        "integrality" => integrality_check(cfg),
        "tame" => tame_check(cfg),
        "euler-factor" => euler_factor_check(cfg),
        "branching" => branching_check(cfg),
        "lattice-int" => lattice_grid_check(cfg),
        _ => unreachable!("check names are validated"),
    }
}

fn depends_on_t(name: &str) -> bool {
    matches!(name, "wild" | "stab-factors")
}

fn emit(r: &VerificationReport, json: bool) {
    let mut out = std::io::stdout().lock();
    if json {
        let _ = writeln!(out, "{}", r.to_json());
    } else {
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        };
        let _ = writeln!(out, "{status:<12} {:<13} {} ({:.2}s)", r.check, r.params, r.seconds);
        if let Some(w) = &r.witness {
            let _ = writeln!(out, "             witness: {w}");
        }
    }
    let _ = out.flush();
}

fn reports(name: &str, run: &RunConfig, aggregate: bool) -> Vec<VerificationReport> {
    if !depends_on_t(name) {
        return vec![run_one(name, &run.check)];
    }
    let parts: Vec<VerificationReport> = run
        .t_range
        .clone()
        .map(|t| run_one(name, &CheckConfig { t, ..run.check.clone() }))
        .collect();
    if aggregate && parts.len() > 1 {
        let mut params = run.check.params();
        params["t"] = serde_json::json!(format!("{}..{}", run.t_range.start(), run.t_range.end()));
        vec![VerificationReport::aggregate(name, params, parts)]
    } else {
        parts
    }
}

fn usage_error(msg: &str) -> ExitCode {
    use clap::CommandFactory;
    eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
    ExitCode::from(USAGE_ERROR)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            use clap::CommandFactory;
            let _ = e.print();
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(USAGE_ERROR);
        }
    };
    let file = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match Layer::from_file_text(&text) {
                Ok(l) => l,
                Err(e) => return usage_error(&format!("{}: {e}", path.display())),
            },
            Err(e) => return usage_error(&format!("{}: {e}", path.display())),
        },
        None => Layer::default(),
    };
    let flags = Layer {
        n: cli.n,
        ell: cli.ell,
        prec: cli.prec,
        t: cli.t.clone(),
        cutoff: cli.cutoff,
        budget_m: cli.budget_m,
        budget_card: cli.budget_card,
        seed: cli.seed,
        json: cli.json.then_some(true),
        fixed_clock: cli.fixed_clock.then_some(true),
    };
    let run = match flags.over(file).resolve() {
        Ok(r) => r,
        Err(e) => return usage_error(&e),
    };
    let names: Vec<&str> = match cli.check.as_str() {
        "all" => CHECKS.to_vec(),
        c if CHECKS.contains(&c) => vec![c],
        c => return usage_error(&format!("unknown check {c:?}; expected one of {} or all", CHECKS.join(", "))),
    };
    let aggregate = names.len() > 1;
    let mut worst = Status::Pass;
    for name in names {
        for r in reports(name, &run, aggregate) {
            emit(&r, run.json);
            worst = match (worst, r.status) {
                (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
                (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
                _ => Status::Pass,
            };
        }
    }
    match worst {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(2),
        Status::Inconclusive => ExitCode::from(3),
    }
}
