use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cosetfun::{Comparison, EvalConfig, SolverConfig};
use crate::error::{Error, Result};
use crate::hecke::SatakeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// One JSON record per check.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: Value,
    pub status: Status,
    pub witness: Option<Value>,
    pub seconds: f64,
}

/// Parameters shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub n: usize,
    pub ell: u32,
    /// Relative precision of truncated inverses.
    pub prec: u32,
    pub t: u32,
    /// Degree cutoff for truncated series.
    pub cutoff: u32,
    /// Deepest residue level the digit solver may resolve.
    pub budget_m: i64,
    /// Largest enumeration (transversals, test points, coset candidates).
    pub budget_card: u64,
    pub seed: u64,
    /// Report `seconds` as 0 so repeated runs are byte-identical.
    pub fixed_clock: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            n: 1,
            ell: 2,
            prec: 40,
            t: 0,
            cutoff: 6,
            budget_m: 30,
            budget_card: 1 << 22,
            seed: 0,
            fixed_clock: false,
        }
    }
}

impl CheckConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig { rel_prec: self.prec, max_nodes: self.budget_card, max_level: self.budget_m }
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig { solver: self.solver(), rep_budget: self.budget_card }
    }

    pub fn satake(&self) -> SatakeConfig {
        SatakeConfig { budget: self.budget_card, ..SatakeConfig::default() }
    }

    pub fn params(&self) -> Value {
        json!({
            "n": self.n,
            "ell": self.ell,
            "prec": self.prec,
            "t": self.t,
            "cutoff": self.cutoff,
            "budget_m": self.budget_m,
            "budget_card": self.budget_card,
            "seed": self.seed,
        })
    }
}

/// Outcome of a check body: `Err(witness)` on failure.
pub(crate) type Verdict = std::result::Result<(), Value>;

pub(crate) fn witness_of(c: &Comparison, what: &str) -> Verdict {
    match &c.witness {
        None if c.equal => Ok(()),
        None => Err(json!({ "comparison": what })),
        Some((x, a, b)) => Err(json!({
            "comparison": what,
            "point": format!("[{}] [{}] {}", x.small, x.big, x.u),
            "lhs": a.to_string(),
            "rhs": b.to_string(),
        })),
    }
}

pub(crate) fn mismatch(what: &str, lhs: impl ToString, rhs: impl ToString) -> Value {
    json!({ "comparison": what, "lhs": lhs.to_string(), "rhs": rhs.to_string() })
}

/// Runs `body`, turning budget and precision errors into an inconclusive
/// report and any other error into a failure that records the message.
pub(crate) fn run(name: &str, cfg: &CheckConfig, extra: &[(&str, Value)], body: impl FnOnce() -> Result<Verdict>) -> VerificationReport {
    let start = Instant::now();
    let outcome = body();
    let seconds = if cfg.fixed_clock { 0.0 } else { start.elapsed().as_secs_f64() };
    let mut params = cfg.params();
    if let Value::Object(m) = &mut params {
        for (k, v) in extra {
            m.insert((*k).to_string(), v.clone());
        }
    }
    let (status, witness) = match outcome {
        Ok(Ok(())) => (Status::Pass, None),
        Ok(Err(w)) => (Status::Fail, Some(w)),
        Err(e @ (Error::BudgetExceeded(_) | Error::InsufficientPrecision(_))) => {
            (Status::Inconclusive, Some(json!({ "reason": e.to_string() })))
        }
        Err(e) => (Status::Fail, Some(json!({ "error": e.to_string() }))),
    };
    VerificationReport { check: name.to_string(), params, status, witness, seconds }
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    /// Combines sub-reports: fail dominates inconclusive, which dominates pass.
    pub fn aggregate(name: &str, params: Value, parts: Vec<VerificationReport>) -> VerificationReport {
        let status = if parts.iter().any(|p| p.status == Status::Fail) {
            Status::Fail
        } else if parts.iter().any(|p| p.status == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        let witness = parts.iter().find(|p| p.status == status && p.witness.is_some()).map(|p| {
            let mut m = Map::new();
            m.insert("case".into(), p.params.clone());
            m.insert("detail".into(), p.witness.clone().unwrap_or(Value::Null));
            Value::Object(m)
        });
        let seconds = parts.iter().map(|p| p.seconds).sum();
        VerificationReport { check: name.to_string(), params, status, witness, seconds }
    }
}
