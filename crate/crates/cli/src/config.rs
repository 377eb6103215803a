//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! law = two-sided-log-pareto(p=1/3, theta0=0.5, theta1=0.5, xm=1)
//! n = 1e12            # integer, scientific notation or exp(x)
//! trials = 100000
//! seed = 7
//! ```
//!
//! Numbers accept decimal, scientific and `a/b` forms. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use sieve_core::{PairLaw, WFamily, WLaw};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Which simulator produces `L_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Simulator {
    Thinning,
    Direct,
    Kernel,
    GeomRep,
    Poissonized,
}

impl Simulator {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "thinning" => Simulator::Thinning,
            "direct" => Simulator::Direct,
            "kernel" => Simulator::Kernel,
            "geomrep" => Simulator::GeomRep,
            "poissonized" => Simulator::Poissonized,
            other => return err(format!("unknown simulator '{other}'")),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Simulator::Thinning => "thinning",
            Simulator::Direct => "direct",
            Simulator::Kernel => "kernel",
            Simulator::GeomRep => "geomrep",
            Simulator::Poissonized => "poissonized",
        }
    }
}

/// Centering used for `L_n` in normal regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    B,
    BPrime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub law: Option<String>,
    pub pair: Option<String>,
    pub n: Option<u64>,
    pub t: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub threads: usize,
    pub simulator: Simulator,
    pub centering: Centering,
    pub threshold: f64,
    pub limit_samples: u64,
    pub escalate_n: Option<u64>,
    pub moment_tolerance: f64,
    pub mean_tolerance: f64,
    pub variance_tolerance: f64,
    pub a: Option<f64>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            law: None,
            pair: None,
            n: None,
            t: None,
            trials: 1000,
            seed: 1,
            threads: 1,
            simulator: Simulator::Thinning,
            centering: Centering::BPrime,
            threshold: 1e-3,
            limit_samples: 0,
            escalate_n: None,
            moment_tolerance: 0.1,
            mean_tolerance: 0.1,
            variance_tolerance: 0.2,
            a: None,
            k: None,
            out: None,
            report: None,
            plot_data: None,
        }
    }
}

/// Keys accepted in config files and through `--set`.
pub const KEYS: &[&str] = &[
    "law",
    "pair",
    "n",
    "t",
    "trials",
    "seed",
    "threads",
    "simulator",
    "centering",
    "threshold",
    "limit_samples",
    "escalate_n",
    "moment_tolerance",
    "mean_tolerance",
    "variance_tolerance",
    "a",
    "k",
    "out",
    "report",
    "plot_data",
];

/// Keys that do not change numeric output and stay out of the config hash.
const UNHASHED: &[&str] = &["threads", "out", "report", "plot_data"];

impl ExperimentConfig {
    /// Parses config-file text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", lineno + 1));
            };
            cfg.set(key.trim(), value.trim())
                .map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "law" => {
                parse_law(value)?;
                self.law = Some(value.to_string());
            }
            "pair" => {
                parse_pair(value)?;
                self.pair = Some(value.to_string());
            }
            "n" => self.n = Some(parse_count(value)?),
            "t" => self.t = Some(parse_positive(value, "t")?),
            "trials" => self.trials = parse_count(value)?,
            "seed" => self.seed = parse_u64(value)?,
            "threads" => self.threads = parse_count(value)?.max(1) as usize,
            "simulator" => self.simulator = Simulator::parse(value)?,
            "centering" => {
                self.centering = match value {
                    "b" => Centering::B,
                    "b_prime" => Centering::BPrime,
                    other => return err(format!("centering must be b or b_prime, got '{other}'")),
                }
            }
            "threshold" => {
                let v = parse_number(value)?;
                if !(0.0..1.0).contains(&v) {
                    return err(format!("threshold must lie in [0, 1), got {v}"));
                }
                self.threshold = v;
            }
            "limit_samples" => self.limit_samples = parse_count(value)?,
            "escalate_n" => self.escalate_n = Some(parse_count(value)?),
            "moment_tolerance" => self.moment_tolerance = parse_positive(value, "moment_tolerance")?,
            "mean_tolerance" => self.mean_tolerance = parse_positive(value, "mean_tolerance")?,
            "variance_tolerance" => self.variance_tolerance = parse_positive(value, "variance_tolerance")?,
            "a" => self.a = Some(parse_number(value)?),
            "k" => self.k = Some(parse_count(value)? as usize),
            "out" => self.out = Some(PathBuf::from(value)),
            "report" => self.report = Some(PathBuf::from(value)),
            "plot_data" => self.plot_data = Some(PathBuf::from(value)),
            other => return err(format!("unknown key '{other}' (accepted: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k, v);
            }
        };
        put("law", self.law.as_ref().map(|s| normalize_spec(s)));
        put("pair", self.pair.as_ref().map(|s| normalize_spec(s)));
        put("n", self.n.map(|v| v.to_string()));
        put("t", self.t.map(|v| format!("{v:e}")));
        put("trials", Some(self.trials.to_string()));
        put("seed", Some(self.seed.to_string()));
        put("threads", Some(self.threads.to_string()));
        put("simulator", Some(self.simulator.name().to_string()));
        put(
            "centering",
            Some(match self.centering {
                Centering::B => "b".to_string(),
                Centering::BPrime => "b_prime".to_string(),
            }),
        );
        put("threshold", Some(format!("{:e}", self.threshold)));
        put("limit_samples", Some(self.limit_samples.to_string()));
        put("escalate_n", self.escalate_n.map(|v| v.to_string()));
        put("moment_tolerance", Some(format!("{:e}", self.moment_tolerance)));
        put("mean_tolerance", Some(format!("{:e}", self.mean_tolerance)));
        put("variance_tolerance", Some(format!("{:e}", self.variance_tolerance)));
        put("a", self.a.map(|v| format!("{v:e}")));
        put("k", self.k.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("report", self.report.as_ref().map(|p| p.display().to_string()));
        put("plot_data", self.plot_data.as_ref().map(|p| p.display().to_string()));
        m
    }

    /// SHA-256 over the canonical lines that affect numeric output.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical() {
            if !UNHASHED.contains(&k) {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn w_law(&self) -> Result<WLaw, ConfigError> {
        match &self.law {
            Some(s) => parse_law(s),
            None => err("missing key 'law'"),
        }
    }

    pub fn pair_law(&self) -> Result<PairLaw, ConfigError> {
        match &self.pair {
            Some(s) => parse_pair(s),
            None => err("missing key 'pair'"),
        }
    }

    pub fn require_n(&self) -> Result<u64, ConfigError> {
        self.n.ok_or_else(|| ConfigError("missing key 'n'".into()))
    }

    pub fn require_t(&self) -> Result<f64, ConfigError> {
        self.t.ok_or_else(|| ConfigError("missing key 't'".into()))
    }
}

fn normalize_spec(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Decimal, scientific or `a/b`.
pub fn parse_number(s: &str) -> Result<f64, ConfigError> {
    let s = s.trim();
    let v = if let Some((a, b)) = s.split_once('/') {
        let (a, b) = (parse_number(a)?, parse_number(b)?);
        if b == 0.0 {
            return err(format!("division by zero in '{s}'"));
        }
        a / b
    } else {
        s.parse::<f64>()
            .map_err(|_| ConfigError(format!("not a number: '{s}'")))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        err(format!("not a finite number: '{s}'"))
    }
}

fn parse_positive(s: &str, what: &str) -> Result<f64, ConfigError> {
    let v = parse_number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        err(format!("{what} must be positive, got {v}"))
    }
}

fn parse_u64(s: &str) -> Result<u64, ConfigError> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| ConfigError(format!("not a nonnegative integer: '{s}'")))
}

/// Integer count: `100`, `1e12`, `2.5e3` or `exp(30)` (rounded to nearest).
pub fn parse_count(s: &str) -> Result<u64, ConfigError> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v = if let Some(inner) = s.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        parse_number(inner)?.exp()
    } else {
        parse_number(s)?
    };
    if !(0.0..1.8e19).contains(&v) {
        return err(format!("count out of range: '{s}'"));
    }
    if s.starts_with("exp(") {
        Ok(v.round() as u64)
    } else if v.fract() != 0.0 {
        err(format!("not an integer: '{s}'"))
    } else {
        Ok(v as u64)
    }
}

/// Splits `name(k=v, ...)` into the name and its arguments; nested
/// parentheses stay inside one argument.
fn split_call(spec: &str) -> Result<(String, Vec<(String, String)>), ConfigError> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    if !spec.ends_with(')') {
        return err(format!("unbalanced parentheses in '{spec}'"));
    }
    let name = spec[..open].trim().to_string();
    let body = &spec[open + 1..spec.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in body.chars().chain(std::iter::once(',')) {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                let piece = cur.trim();
                if !piece.is_empty() {
                    let Some((k, v)) = piece.split_once('=') else {
                        return err(format!("argument '{piece}' in '{spec}' is not key=value"));
                    };
                    args.push((k.trim().to_string(), v.trim().to_string()));
                }
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return err(format!("unbalanced parentheses in '{spec}'"));
    }
    Ok((name, args))
}

struct Args {
    spec: String,
    values: Vec<(String, String)>,
}

impl Args {
    fn take(&mut self, key: &str) -> Result<String, ConfigError> {
        match self.values.iter().position(|(k, _)| k == key) {
            Some(i) => Ok(self.values.remove(i).1),
            None => err(format!("'{}' needs argument '{key}'", self.spec)),
        }
    }

    fn num(&mut self, key: &str) -> Result<f64, ConfigError> {
        parse_number(&self.take(key)?)
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        if self.values.iter().any(|(k, _)| k == key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.values.first() {
            Some((k, _)) => err(format!("unknown argument '{k}' in '{}'", self.spec)),
            None => Ok(()),
        }
    }
}

/// `uniform`, `beta(a=, b=)`, `point-mass(x=)`, `right-log-pareto(beta=, xm=1)`,
/// `right-log-log-tail(c0=)`, `two-sided-log-pareto(p=, theta0=, theta1=, xm=1)`.
pub fn parse_law(spec: &str) -> Result<WLaw, ConfigError> {
    let (name, values) = split_call(spec)?;
    let mut a = Args {
        spec: spec.to_string(),
        values,
    };
    let family = match name.as_str() {
        "uniform" => WFamily::Uniform01,
        "beta" => WFamily::Beta {
            a: a.num("a")?,
            b: a.num("b")?,
        },
        "point-mass" => WFamily::PointMass { x: a.num("x")? },
        "right-log-pareto" => WFamily::RightLogPareto {
            beta: a.num("beta")?,
            xm: a.num_or("xm", 1.0)?,
        },
        "right-log-log-tail" => WFamily::RightLogLogTail { c0: a.num("c0")? },
        "two-sided-log-pareto" => WFamily::TwoSidedLogPareto {
            p: a.num("p")?,
            theta0: a.num("theta0")?,
            theta1: a.num("theta1")?,
            xm: a.num_or("xm", 1.0)?,
        },
        other => return err(format!("unknown law family '{other}'")),
    };
    a.finish()?;
    WLaw::new(family).map_err(|e| ConfigError(e.to_string()))
}

/// `exp-pareto(rate=, beta=, xm=1)`, `pareto-pareto(alpha=, beta=, xm=1)`,
/// `common-shock(base=<pair>, shock=)`.
pub fn parse_pair(spec: &str) -> Result<PairLaw, ConfigError> {
    let (name, values) = split_call(spec)?;
    let mut a = Args {
        spec: spec.to_string(),
        values,
    };
    let law = match name.as_str() {
        "exp-pareto" => PairLaw::exp_pareto(a.num("rate")?, a.num("beta")?, a.num_or("xm", 1.0)?),
        "pareto-pareto" => PairLaw::pareto_pareto(a.num("alpha")?, a.num("beta")?, a.num_or("xm", 1.0)?),
        "common-shock" => {
            let base = parse_pair(&a.take("base")?)?;
            PairLaw::common_shock(base, a.num("shock")?)
        }
        other => return err(format!("unknown pair family '{other}'")),
    };
    a.finish()?;
    law.map_err(|e| ConfigError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("100").unwrap(), 100);
        assert_eq!(parse_count("1e12").unwrap(), 1_000_000_000_000);
        assert_eq!(parse_count("exp(30)").unwrap(), 30f64.exp().round() as u64);
        assert!(parse_count("2.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn laws() {
        let l = parse_law("two-sided-log-pareto(p=1/3, theta0=0.5, theta1=0.5, xm=1)").unwrap();
        assert_eq!(
            *l.family(),
            WFamily::TwoSidedLogPareto {
                p: 1.0 / 3.0,
                theta0: 0.5,
                theta1: 0.5,
                xm: 1.0
            }
        );
        assert_eq!(*parse_law("uniform").unwrap().family(), WFamily::Uniform01);
        assert!(parse_law("beta(a=1)").is_err());
        assert!(parse_law("beta(a=1, b=2, c=3)").is_err());
        assert!(parse_law("right-log-pareto(beta=1.5)").is_err());
        assert!(parse_law("gamma(k=1)").is_err());
        let p = parse_pair("common-shock(base=exp-pareto(rate=1, beta=0.5), shock=0.25)").unwrap();
        assert!(matches!(p.family(), sieve_core::PairFamily::CommonShock { .. }));
    }

    #[test]
    fn file_and_unknown_keys() {
        let cfg = ExperimentConfig::parse("law = uniform\nn = 100 # balls\n\ntrials=10\nseed=7\n").unwrap();
        assert_eq!(cfg.n, Some(100));
        assert_eq!(cfg.trials, 10);
        let e = ExperimentConfig::parse("law = uniform\nnn = 3\n").unwrap_err();
        assert!(e.0.contains("unknown key 'nn'"), "{e}");
        assert!(ExperimentConfig::parse("law uniform").is_err());
    }

    #[test]
    fn hash_ignores_outputs_and_threads() {
        let mut a = ExperimentConfig::parse("law = uniform\nn = 100\n").unwrap();
        let h = a.hash();
        a.threads = 4;
        a.out = Some("x.csv".into());
        assert_eq!(a.hash(), h);
        a.seed = 2;
        assert_ne!(a.hash(), h);
        let b = ExperimentConfig::parse("law = uniform\nn = 1e2\n").unwrap();
        assert_eq!(b.hash(), h);
    }
}
