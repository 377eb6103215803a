//! Subcommand implementations. Each returns the per-trial CSV, an optional
//! plot-data CSV and a JSON-serializable report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sieve_core::asymptotics::{centering_b, centering_b_prime, LimitLaw, NormingPlan};
use sieve_core::distributions::geometric_moments;
use sieve_core::renewal::{
    deterministic_centering, shot_noise_v, shot_noise_verdict, stable_limit, stable_norming, ShotNoiseVerdict,
};
use sieve_core::rng::{purpose, TrialStreams};
use sieve_core::sieve::chain::{simulate_zero_decrements, simulate_zero_decrements_geomrep, KernelSpec};
use sieve_core::sieve::{simulate_poissonized, simulate_sieve_direct, simulate_sieve_thinning};
use sieve_core::stats::{
    chisq_geometric, histogram, jitter, ks_one_sample_normal, ks_two_sample, shape_check, summarize, Summary,
    TestReport,
};
use sieve_core::{RegimeCase, WLaw};

use crate::config::{Centering, ConfigError, ExperimentConfig, Simulator};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// The law sits in a regime without a known limit.
    Open(String),
    Runtime(sieve_core::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Open(msg) => write!(f, "unsupported regime: {msg}"),
            RunError::Runtime(e) => write!(f, "runtime error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<sieve_core::Error> for RunError {
    fn from(e: sieve_core::Error) -> Self {
        match e {
            sieve_core::Error::OpenRegime(msg) => RunError::Open(msg),
            sieve_core::Error::InvalidParameter(msg) => RunError::Config(ConfigError(msg)),
            other => RunError::Runtime(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Open(_) => 3,
            RunError::Runtime(_) => 1,
        }
    }
}

/// One line of the report's `tests` array.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TestEntry {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    /// Only gating entries decide the exit status.
    pub gating: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestEntry {
    fn from_report(name: &str, r: &TestReport, gating: bool) -> Self {
        TestEntry {
            name: name.to_string(),
            statistic: r.statistic,
            p_value: Some(r.p_value),
            threshold: r.threshold,
            pass: r.pass,
            gating,
            note: None,
        }
    }

    /// `|observed / target - 1| <= tolerance`.
    fn relative(name: &str, observed: f64, target: f64, tolerance: f64) -> Self {
        let err = (observed / target - 1.0).abs();
        TestEntry {
            name: name.to_string(),
            statistic: err,
            p_value: None,
            threshold: tolerance,
            pass: err <= tolerance,
            gating: true,
            note: Some(format!("observed {observed}, target {target}")),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize, Default, PartialEq)]
pub struct CenteringValues {
    pub b_n: Option<f64>,
    pub b_prime_n: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Default, PartialEq)]
pub struct NormingValues {
    pub a_n: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: BTreeMap<&'static str, String>,
    pub regime: Option<String>,
    pub centering: CenteringValues,
    pub norming: NormingValues,
    pub tests: Vec<TestEntry>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub pass: bool,
    pub runtime_seconds: f64,
}

impl Report {
    fn new(command: &str, cfg: &ExperimentConfig) -> Self {
        Report {
            command: command.to_string(),
            version: VERSION.to_string(),
            config_hash: cfg.hash(),
            config: cfg.canonical(),
            regime: None,
            centering: CenteringValues::default(),
            norming: NormingValues::default(),
            tests: Vec::new(),
            summary: BTreeMap::new(),
            pass: true,
            runtime_seconds: 0.0,
        }
    }

    fn finish(mut self, started: Instant) -> Self {
        self.pass = self.tests.iter().filter(|t| t.gating).all(|t| t.pass);
        self.runtime_seconds = started.elapsed().as_secs_f64();
        self
    }

    pub fn test(&self, name: &str) -> Option<&TestEntry> {
        self.tests.iter().find(|t| t.name == name)
    }

    fn put(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable summary"),
        );
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub plot_data: Option<String>,
    pub report: Report,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            0
        } else {
            1
        }
    }
}

/// `L` plus `(K, M)` when the simulator produces them.
#[derive(Debug, Clone, Copy)]
struct TrialValue {
    km: Option<(u64, u64)>,
    l: u64,
}

fn one_trial(
    law: &WLaw,
    kernel: Option<&KernelSpec>,
    sim: Simulator,
    n: u64,
    t: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> sieve_core::Result<TrialValue> {
    let sieve = |o: sieve_core::SieveOutcome| TrialValue {
        km: Some((o.k_occupied, o.m_range)),
        l: o.l_empty,
    };
    Ok(match sim {
        Simulator::Thinning => sieve(simulate_sieve_thinning(law, n, rng)?),
        Simulator::Direct => sieve(simulate_sieve_direct(law, n, rng)?),
        Simulator::Poissonized => sieve(simulate_poissonized(law, t.unwrap_or(n as f64), rng)?),
        Simulator::Kernel => TrialValue {
            km: None,
            l: simulate_zero_decrements(kernel.expect("kernel built"), n, rng)?,
        },
        Simulator::GeomRep => TrialValue {
            km: None,
            l: simulate_zero_decrements_geomrep(kernel.expect("kernel built"), n, rng)?,
        },
    })
}

fn run_trials(cfg: &ExperimentConfig, law: &WLaw, n: u64, stream_purpose: u64) -> Result<Vec<TrialValue>, RunError> {
    let kernel = match cfg.simulator {
        Simulator::Kernel | Simulator::GeomRep => Some(KernelSpec::sieve(law)?),
        _ => None,
    };
    let streams = TrialStreams::new(cfg.seed);
    let t = if cfg.simulator == Simulator::Poissonized {
        Some(cfg.require_t()?)
    } else {
        None
    };
    Ok(streams.run(stream_purpose, cfg.trials, |_, rng| {
        one_trial(law, kernel.as_ref(), cfg.simulator, n, t, rng)
    })?)
}

fn summary_json(s: &Summary) -> serde_json::Value {
    serde_json::json!({
        "n": s.n, "mean": s.mean, "variance": s.variance, "skewness": s.skewness, "median": s.median,
        "mean_ci95": [s.mean_ci.0, s.mean_ci.1],
        "variance_ci95": [s.variance_ci.0, s.variance_ci.1],
        "skewness_ci95": [s.skewness_ci.0, s.skewness_ci.1],
    })
}

fn bootstrap_seed(cfg: &ExperimentConfig) -> u64 {
    TrialStreams::new(cfg.seed).stream(purpose::BOOTSTRAP, 0).random()
}

fn jitter_seed(cfg: &ExperimentConfig, index: u64) -> u64 {
    TrialStreams::new(cfg.seed).stream(purpose::JITTER, index).random()
}

fn with_threads<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| RunError::Config(ConfigError(format!("thread pool: {e}"))))?;
    Ok(pool.install(f))
}

/// `simulate`: one CSV row per trial plus summaries of `K`, `M`, `L`.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let started = Instant::now();
    let law = cfg.w_law()?;
    let n = match cfg.simulator {
        Simulator::Poissonized => 0,
        _ => cfg.require_n()?,
    };
    let values = with_threads(cfg, || run_trials(cfg, &law, n, purpose::TRIALS))??;
    let mut report = Report::new("simulate", cfg);
    report.regime = Some(sieve_core::classify_regime(&law).label());
    let mut csv = String::new();
    let has_km = values.first().is_some_and(|v| v.km.is_some());
    csv.push_str(if has_km { "trial,K,M,L\n" } else { "trial,L\n" });
    for (i, v) in values.iter().enumerate() {
        match v.km {
            Some((k, m)) => writeln!(csv, "{i},{k},{m},{}", v.l),
            None => writeln!(csv, "{i},{}", v.l),
        }
        .expect("writing to a String");
    }
    let seed = bootstrap_seed(cfg);
    let ls: Vec<f64> = values.iter().map(|v| v.l as f64).collect();
    report.put("L", summary_json(&summarize(&ls, seed)?));
    if has_km {
        let ks: Vec<f64> = values.iter().map(|v| v.km.expect("sieve simulator").0 as f64).collect();
        let ms: Vec<f64> = values.iter().map(|v| v.km.expect("sieve simulator").1 as f64).collect();
        report.put("K", summary_json(&summarize(&ks, seed)?));
        report.put("M", summary_json(&summarize(&ms, seed)?));
    }
    Ok(RunOutput {
        csv,
        plot_data: None,
        report: report.finish(started),
    })
}

fn ecdf_series(name: &str, xs: &[f64], out: &mut String) {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    for (i, x) in v.iter().enumerate() {
        writeln!(out, "{name},{x},{}", (i + 1) as f64 / n).expect("writing to a String");
    }
}

fn limit_draws(cfg: &ExperimentConfig, limit: &sieve_core::LimitIntegral) -> Result<Vec<f64>, RunError> {
    let count = if cfg.limit_samples > 0 {
        cfg.limit_samples
    } else {
        cfg.trials
    };
    let streams = TrialStreams::new(cfg.seed);
    with_threads(cfg, || {
        streams.run(purpose::LIMIT_LAW, count, |_, rng| {
            Ok::<f64, RunError>(limit.sample(rng))
        })
    })?
}

/// KS against limit draws, the shape fallback and the gating combination.
fn stable_tests(
    report: &mut Report,
    cfg: &ExperimentConfig,
    raw: &[f64],
    jittered: &[f64],
    limit: &[f64],
) -> Result<(), RunError> {
    let ks_raw = ks_two_sample(raw, limit, cfg.threshold)?;
    let ks = ks_two_sample(jittered, limit, cfg.threshold)?;
    let shape = shape_check(jittered, limit)?;
    report
        .tests
        .push(TestEntry::from_report("ks_limit_raw", &ks_raw, false));
    report.tests.push(TestEntry::from_report("ks_limit", &ks, false));
    report.tests.push(
        TestEntry {
            name: "shape_fallback".into(),
            statistic: shape.skewness,
            p_value: None,
            threshold: 0.0,
            pass: shape.pass,
            gating: false,
            note: None,
        }
        .with_note(format!(
            "skewness {} < 0 and median {} within limit IQR [{}, {}]",
            shape.skewness, shape.median, shape.limit_iqr.0, shape.limit_iqr.1
        )),
    );
    report.tests.push(TestEntry {
        name: "limit_law".into(),
        statistic: ks.statistic,
        p_value: Some(ks.p_value),
        threshold: cfg.threshold,
        pass: ks.pass || shape.pass,
        gating: true,
        note: Some(
            if ks.pass {
                "ks passed"
            } else if shape.pass {
                "ks failed; shape fallback passed"
            } else {
                "ks and shape fallback failed"
            }
            .into(),
        ),
    });
    Ok(())
}

struct LimitRun {
    n: u64,
    values: Vec<TrialValue>,
}

/// `limit-check`: classify the law, simulate `L_n` and test the regime's limit.
pub fn cmd_limit_check(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let started = Instant::now();
    let law = cfg.w_law()?;
    let n = cfg.require_n()?;
    let plan = NormingPlan::new(&law);
    let case = plan.case();
    if case.is_open() {
        return Err(RunError::Open(format!(
            "{}: no limit law is known for this boundary case",
            case.label()
        )));
    }
    let limit = plan.limit()?;
    let mut report = Report::new("limit-check", cfg);
    report.regime = Some(case.label());
    let mut plot = String::from("series,x,y\n");
    let seed = bootstrap_seed(cfg);

    let first = LimitRun {
        n,
        values: with_threads(cfg, || run_trials(cfg, &law, n, purpose::TRIALS))??,
    };
    let mut runs = vec![first];

    match limit {
        LimitLaw::Geometric { a } => {
            let mut tests = geometric_tests(cfg, &runs[0], a)?;
            if !tests.iter().all(|t| t.pass) {
                if let Some(bigger) = cfg.escalate_n.filter(|&m| m > n) {
                    let values = with_threads(cfg, || run_trials(cfg, &law, bigger, purpose::AUX))??;
                    let run = LimitRun { n: bigger, values };
                    for t in tests.iter_mut() {
                        t.gating = false;
                        t.name = format!("{}@n={}", t.name, n);
                    }
                    report.tests.extend(tests);
                    tests = geometric_tests(cfg, &run, a)?;
                    runs.push(run);
                }
            }
            report.tests.extend(tests);
            let last = runs.last().expect("at least one run");
            let h = histogram(&last.values.iter().map(|v| v.l).collect::<Vec<_>>());
            let total = last.values.len() as f64;
            for (m, &c) in h.iter().enumerate() {
                writeln!(plot, "empirical_pmf,{m},{}", c as f64 / total).expect("writing to a String");
                writeln!(plot, "geometric_pmf,{m},{}", a * (1.0 - a).powi(m as i32)).expect("writing to a String");
            }
            report.put("geometric_parameter", a);
        }
        LimitLaw::StandardNormal | LimitLaw::StableIntegral(_) => {
            let nf = n as f64;
            let b = centering_b(&law, nf)?;
            let bp = centering_b_prime(&law, nf)?;
            report.centering = CenteringValues {
                b_n: Some(b),
                b_prime_n: Some(bp),
            };
            let center = match cfg.centering {
                Centering::B => b,
                Centering::BPrime => bp,
            };
            let a_n = match case {
                RegimeCase::CaseA | RegimeCase::CaseB1 | RegimeCase::CaseC1 => center.sqrt(),
                _ => plan.a_n(nf)?,
            };
            report.norming = NormingValues { a_n: Some(a_n) };
            let ls: Vec<f64> = runs[0].values.iter().map(|v| v.l as f64).collect();
            let raw: Vec<f64> = ls.iter().map(|l| (l - center) / a_n).collect();
            let jittered: Vec<f64> = jitter(&ls, jitter_seed(cfg, 0))
                .iter()
                .map(|l| (l - center) / a_n)
                .collect();
            let summary = summarize(&ls, seed)?;
            match &limit {
                LimitLaw::StandardNormal => {
                    let ks_raw = ks_one_sample_normal(&raw, cfg.threshold)?;
                    let ks = ks_one_sample_normal(&jittered, cfg.threshold)?;
                    report
                        .tests
                        .push(TestEntry::from_report("ks_normal_raw", &ks_raw, false));
                    report.tests.push(TestEntry::from_report("ks_normal", &ks, true));
                    report.tests.push(TestEntry::relative(
                        "mean_vs_centering",
                        summary.mean,
                        center,
                        cfg.mean_tolerance,
                    ));
                    if matches!(case, RegimeCase::CaseA | RegimeCase::CaseB1 | RegimeCase::CaseC1) {
                        report.tests.push(TestEntry::relative(
                            "variance_vs_norming",
                            summary.variance,
                            a_n * a_n,
                            cfg.variance_tolerance,
                        ));
                    }
                    ecdf_series("normalized", &jittered, &mut plot);
                }
                LimitLaw::StableIntegral(li) => {
                    report.put("limit_scale_factor", li.scale_factor());
                    let draws = limit_draws(cfg, li)?;
                    stable_tests(&mut report, cfg, &raw, &jittered, &draws)?;
                    ecdf_series("normalized", &jittered, &mut plot);
                    ecdf_series("limit", &draws, &mut plot);
                }
                _ => unreachable!("matched above"),
            }
            report.put("normalized", summary_json(&summarize(&jittered, seed)?));
        }
        LimitLaw::Zero | LimitLaw::Unspecified => {
            let last = &runs[0];
            let zero = last.values.iter().filter(|v| v.l == 0).count() as f64 / last.values.len() as f64;
            report.put("fraction_L_zero", zero);
        }
    }

    let last = runs.last().expect("at least one run");
    let ls: Vec<f64> = last.values.iter().map(|v| v.l as f64).collect();
    report.put("L", summary_json(&summarize(&ls, seed)?));
    report.put("n_used", last.n);
    let mut csv = String::from("trial,L\n");
    for (i, v) in last.values.iter().enumerate() {
        writeln!(csv, "{i},{}", v.l).expect("writing to a String");
    }
    Ok(RunOutput {
        csv,
        plot_data: Some(plot),
        report: report.finish(started),
    })
}

fn geometric_tests(cfg: &ExperimentConfig, run: &LimitRun, a: f64) -> Result<Vec<TestEntry>, RunError> {
    let ls: Vec<u64> = run.values.iter().map(|v| v.l).collect();
    let chi = chisq_geometric(&histogram(&ls), a, cfg.threshold)?;
    let mut out = vec![TestEntry::from_report("chisq_geometric", &chi, true).with_note(format!("n = {}", run.n))];
    let target = geometric_moments(a, 3)?;
    let count = ls.len() as f64;
    for (j, m) in target.iter().enumerate() {
        let power = j as i32 + 1;
        let emp = ls.iter().map(|&l| (l as f64).powi(power)).sum::<f64>() / count;
        out.push(TestEntry::relative(
            &format!("moment_{power}"),
            emp,
            *m,
            cfg.moment_tolerance,
        ));
    }
    Ok(out)
}

/// `shotnoise`: `V(t)` with random and deterministic centerings.
pub fn cmd_shotnoise(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let started = Instant::now();
    let pair = cfg.pair_law()?;
    let t = cfg.require_t()?;
    let streams = TrialStreams::new(cfg.seed);
    let samples = with_threads(cfg, || {
        streams.run(purpose::TRIALS, cfg.trials, |_, rng| shot_noise_v(&pair, t, rng))
    })??;
    let verdict = shot_noise_verdict(&pair);
    let mut report = Report::new("shotnoise", cfg);
    report.regime = Some(match &verdict {
        ShotNoiseVerdict::Replaceable => "Replaceable".to_string(),
        ShotNoiseVerdict::StableLimit { alpha, beta } => format!("StableLimit(alpha={alpha}, beta={beta})"),
        ShotNoiseVerdict::Undetermined(why) => format!("Undetermined({why})"),
    });
    let mut csv = String::from("trial,V,R,renewals\n");
    for (i, s) in samples.iter().enumerate() {
        let r = s.r_center.map_or(String::new(), |r| r.to_string());
        writeln!(csv, "{i},{},{r},{}", s.v_count, s.renewals).expect("writing to a String");
    }
    let mut plot = String::from("series,x,y\n");
    let seed = bootstrap_seed(cfg);
    let vs: Vec<f64> = samples.iter().map(|s| s.v_count as f64).collect();
    report.put("V", summary_json(&summarize(&vs, seed)?));

    match deterministic_centering(&pair, t) {
        Ok(det) => {
            report.centering = CenteringValues {
                b_n: Some(det),
                b_prime_n: None,
            };
            report.put("deterministic_centering", det);
            let scale = det.sqrt();
            let z_random: Vec<f64> = samples
                .iter()
                .map(|s| (s.v_count as f64 - s.r_center.expect("closed-form mark tail")) / scale)
                .collect();
            let ks = ks_one_sample_normal(&z_random, cfg.threshold)?;
            report
                .tests
                .push(TestEntry::from_report("ks_normal_random_centering", &ks, true));
            ecdf_series("random_centering", &z_random, &mut plot);
            let jittered = jitter(&vs, jitter_seed(cfg, 0));
            match &verdict {
                ShotNoiseVerdict::Replaceable => {
                    report.norming = NormingValues { a_n: Some(scale) };
                    let raw: Vec<f64> = vs.iter().map(|v| (v - det) / scale).collect();
                    let z: Vec<f64> = jittered.iter().map(|v| (v - det) / scale).collect();
                    let ks_raw = ks_one_sample_normal(&raw, cfg.threshold)?;
                    let ks = ks_one_sample_normal(&z, cfg.threshold)?;
                    report
                        .tests
                        .push(TestEntry::from_report("ks_normal_deterministic_raw", &ks_raw, false));
                    report
                        .tests
                        .push(TestEntry::from_report("ks_normal_deterministic", &ks, true));
                    ecdf_series("deterministic_centering", &z, &mut plot);
                }
                ShotNoiseVerdict::StableLimit { .. } => {
                    let norm = stable_norming(&pair, t)?;
                    report.norming = NormingValues { a_n: Some(norm) };
                    let li = stable_limit(&pair)?;
                    report.put("limit_scale_factor", li.scale_factor());
                    let raw: Vec<f64> = vs.iter().map(|v| (v - det) / norm).collect();
                    let z: Vec<f64> = jittered.iter().map(|v| (v - det) / norm).collect();
                    let draws = limit_draws(cfg, &li)?;
                    stable_tests(&mut report, cfg, &raw, &z, &draws)?;
                    ecdf_series("deterministic_centering", &z, &mut plot);
                    ecdf_series("limit", &draws, &mut plot);
                }
                ShotNoiseVerdict::Undetermined(_) => {}
            }
        }
        Err(e) => {
            report.put("centering_unavailable", e.to_string());
        }
    }
    Ok(RunOutput {
        csv,
        plot_data: Some(plot),
        report: report.finish(started),
    })
}

/// `moments`: `m_1..m_k` of `geom(a)`.
pub fn cmd_moments(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let started = Instant::now();
    let a = cfg.a.ok_or_else(|| ConfigError("missing key 'a'".into()))?;
    let k = cfg.k.ok_or_else(|| ConfigError("missing key 'k'".into()))?;
    let ms = geometric_moments(a, k)?;
    let mut csv = String::from("j,m_j\n");
    for (j, m) in ms.iter().enumerate() {
        writeln!(csv, "{},{m}", j + 1).expect("writing to a String");
    }
    let mut report = Report::new("moments", cfg);
    report.put("moments", &ms);
    Ok(RunOutput {
        csv,
        plot_data: None,
        report: report.finish(started),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn moments_csv() {
        let out = cmd_moments(&cfg("a = 0.5\nk = 3\n")).unwrap();
        assert_eq!(out.csv, "j,m_j\n1,1\n2,3\n3,13\n");
    }

    #[test]
    fn simulate_is_deterministic_across_threads() {
        let mut c = cfg("law = uniform\nn = 100\ntrials = 10\nseed = 7\n");
        let a = cmd_simulate(&c).unwrap();
        c.threads = 3;
        let b = cmd_simulate(&c).unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.csv.lines().count(), 11);
        assert_eq!(a.report.config_hash, b.report.config_hash);
    }

    #[test]
    fn kernel_simulator_reports_l_only() {
        let out = cmd_simulate(&cfg("law = beta(a=2, b=3)\nn = 50\ntrials = 5\nsimulator = kernel\n")).unwrap();
        assert!(out.csv.starts_with("trial,L\n"));
        let e = cmd_simulate(&cfg(
            "law = right-log-pareto(beta=0.5)\nn = 50\ntrials = 5\nsimulator = kernel\n",
        ));
        assert!(matches!(e, Err(RunError::Runtime(_))));
    }

    #[test]
    fn open_case_refused() {
        let e = cmd_limit_check(&cfg(
            "law = two-sided-log-pareto(p=0.5, theta0=1.5, theta1=1/3)\nn = 1000\n",
        ))
        .unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("CaseC3Open"));
    }

    #[test]
    fn missing_keys_are_config_errors() {
        assert_eq!(cmd_simulate(&cfg("n = 10\n")).unwrap_err().exit_code(), 2);
        assert_eq!(
            cmd_shotnoise(&cfg("pair = exp-pareto(rate=1, beta=0.5)\n"))
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn comparable_limit_check_small() {
        let out = cmd_limit_check(&cfg(
            "law = two-sided-log-pareto(p=1/3, theta0=0.5, theta1=0.5)\nn = 1e12\ntrials = 2000\nthreshold = 1e-4\n",
        ))
        .unwrap();
        assert_eq!(out.report.regime.as_deref(), Some("Comparable(c=2)"));
        assert!(out.report.test("chisq_geometric").is_some());
        let a = out.report.summary["geometric_parameter"].as_f64().unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shotnoise_report_shape() {
        let out = cmd_shotnoise(&cfg("pair = exp-pareto(rate=1, beta=0.5)\nt = 200\ntrials = 300\n")).unwrap();
        assert!(out.report.test("ks_normal_random_centering").is_some());
        assert!(out.report.test("ks_normal_deterministic").is_some());
        let shocked = cmd_shotnoise(&cfg(
            "pair = common-shock(base=exp-pareto(rate=1, beta=0.5), shock=1)\nt = 50\ntrials = 20\n",
        ))
        .unwrap();
        assert!(shocked.report.tests.is_empty());
        assert!(shocked.report.summary.contains_key("centering_unavailable"));
    }
}
