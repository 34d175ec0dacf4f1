use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use local_harmonic::normrel::CheckConfig;

/// Every check, in output order.
pub const CHECKS: [&str; 12] = [
    "lemma21",
    "wild",
    "stab-factors",
    "birch",
    "satake",
    "ell-op",
    "prop45",
    "integrality",
    "tame",
    "euler-factor",
    "branching",
    "lattice-int",
];

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub check: CheckConfig,
    pub t_range: RangeInclusive<u32>,
    pub json: bool,
}

/// Settings that may come from flags or from a config file; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layer {
    pub n: Option<usize>,
    pub ell: Option<u32>,
    pub prec: Option<u32>,
    pub t: Option<String>,
    pub cutoff: Option<u32>,
    pub budget_m: Option<i64>,
    pub budget_card: Option<u64>,
    pub seed: Option<u64>,
    pub json: Option<bool>,
    pub fixed_clock: Option<bool>,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid value {v:?} for {key}"))
}

impl Layer {
    /// `key = value` lines; `#` starts a comment. Keys use the flag names.
    pub fn from_file_text(text: &str) -> Result<Layer, String> {
        let mut seen = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
            seen.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        let mut out = Layer::default();
        for (k, v) in &seen {
            match k.as_str() {
                "n" => out.n = Some(parse(k, v)?),
                "ell" => out.ell = Some(parse(k, v)?),
                "prec" => out.prec = Some(parse(k, v)?),
                "t" => out.t = Some(v.clone()),
                "cutoff" => out.cutoff = Some(parse(k, v)?),
                "budget-m" => out.budget_m = Some(parse(k, v)?),
                "budget-card" => out.budget_card = Some(parse(k, v)?),
                "seed" => out.seed = Some(parse(k, v)?),
                "json" => out.json = Some(parse(k, v)?),
                "fixed-clock" => out.fixed_clock = Some(parse(k, v)?),
                _ => return Err(format!("unknown config key {k:?}")),
            }
        }
        Ok(out)
    }

    /// Fields of `self` win over `below`.
    pub fn over(self, below: Layer) -> Layer {
        Layer {
            n: self.n.or(below.n),
            ell: self.ell.or(below.ell),
            prec: self.prec.or(below.prec),
            t: self.t.or(below.t),
            cutoff: self.cutoff.or(below.cutoff),
            budget_m: self.budget_m.or(below.budget_m),
            budget_card: self.budget_card.or(below.budget_card),
            seed: self.seed.or(below.seed),
            json: self.json.or(below.json),
            fixed_clock: self.fixed_clock.or(below.fixed_clock),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, String> {
        let d = CheckConfig::default();
        let t_range = parse_t(self.t.as_deref().unwrap_or("0"))?;
        let check = CheckConfig {
            n: self.n.unwrap_or(d.n),
            ell: self.ell.unwrap_or(d.ell),
            prec: self.prec.unwrap_or(d.prec),
            t: *t_range.start(),
            cutoff: self.cutoff.unwrap_or(d.cutoff),
            budget_m: self.budget_m.unwrap_or(d.budget_m),
            budget_card: self.budget_card.unwrap_or(d.budget_card),
            seed: self.seed.unwrap_or(d.seed),
            fixed_clock: self.fixed_clock.unwrap_or(false),
        };
        if !is_prime(check.ell) {
            return Err(format!("ell = {} is not prime", check.ell));
        }
        if check.n == 0 {
            return Err("n must be at least 1".into());
        }
        let floor = min_precision(check.n, *t_range.end());
        if check.prec < floor {
            return Err(format!("prec = {} is below the minimum {floor} for n = {}, t = {}", check.prec, check.n, t_range.end()));
        }
        if check.budget_m < 1 || check.budget_card == 0 {
            return Err("budgets must be positive".into());
        }
        Ok(RunConfig { check, t_range, json: self.json.unwrap_or(false) })
    }
}

/// Smallest relative precision accepted: the deepest digit any construction
/// reads is `w^{-n}` against levels up to `w^{2n + t + 1}`.
pub fn min_precision(n: usize, t: u32) -> u32 {
    3 * n as u32 + t + 2
}

/// `"k"` or an inclusive range `"a..b"`.
pub fn parse_t(s: &str) -> Result<RangeInclusive<u32>, String> {
    let bad = || format!("invalid t range {s:?}");
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok(a..=b)
        }
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            Ok(k..=k)
        }
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_ranges() {
        assert_eq!(parse_t("0..1").unwrap(), 0..=1);
        assert_eq!(parse_t("2").unwrap(), 2..=2);
        assert!(parse_t("2..1").is_err());
        assert!(parse_t("x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = Layer::from_file_text("# comment\nn = 2\nell=3\nbudget_card = 99\n").unwrap();
        let flags = Layer { ell: Some(5), ..Layer::default() };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!((cfg.check.n, cfg.check.ell, cfg.check.budget_card), (2, 5, 99));
        assert_eq!(cfg.check.prec, CheckConfig::default().prec);
    }

    #[test]
    fn invalid_settings() {
        assert!(Layer::from_file_text("colour = red").is_err());
        assert!(Layer::from_file_text("n 2").is_err());
        assert!(Layer { ell: Some(4), ..Layer::default() }.resolve().is_err());
        assert!(Layer { prec: Some(3), n: Some(2), ..Layer::default() }.resolve().is_err());
    }
}
