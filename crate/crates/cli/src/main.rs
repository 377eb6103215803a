use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use sieve_lab::{cmd_limit_check, cmd_moments, cmd_shotnoise, cmd_simulate, ExperimentConfig, RunError, RunOutput};

#[derive(Parser, Debug)]
#[command(
    name = "sieve-lab",
    version,
    about = "Bernoulli sieve and renewal shot-noise experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate (K_n, M_n, L_n) trials
    Simulate(Common),
    /// Classify the law and test the limit theorem of its regime
    LimitCheck(Common),
    /// Random and deterministic centerings of V(t)
    Shotnoise(Common),
    /// Moments of geom(a)
    Moments(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Config file of key = value lines
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Ball count: integer, scientific notation or exp(x)
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Per-trial CSV (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report (stderr when absent)
    #[arg(long)]
    report: Option<PathBuf>,
    /// (x, y) series for external plotting
    #[arg(long = "plot-data")]
    plot_data: Option<PathBuf>,
    /// Any other config key, as key=value (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

type Runner = fn(&ExperimentConfig) -> Result<RunOutput, RunError>;

fn load(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let flags = [
        ("seed", &common.seed),
        ("trials", &common.trials),
        ("n", &common.n),
        ("t", &common.t),
        ("threads", &common.threads),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects key=value, got '{kv}'"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(p) = &common.out {
        cfg.out = Some(p.clone());
    }
    if let Some(p) = &common.report {
        cfg.report = Some(p.clone());
    }
    if let Some(p) = &common.plot_data {
        cfg.plot_data = Some(p.clone());
    }
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, out: &RunOutput) -> anyhow::Result<()> {
    match &cfg.out {
        Some(p) => fs::write(p, &out.csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", out.csv),
    }
    let json = serde_json::to_string_pretty(&out.report)?;
    match &cfg.report {
        Some(p) => fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => eprintln!("{json}"),
    }
    if let (Some(p), Some(data)) = (&cfg.plot_data, &out.plot_data) {
        fs::write(p, data).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (run, common): (Runner, &Common) = match &cli.command {
        Command::Simulate(c) => (cmd_simulate, c),
        Command::LimitCheck(c) => (cmd_limit_check, c),
        Command::Shotnoise(c) => (cmd_shotnoise, c),
        Command::Moments(c) => (cmd_moments, c),
    };
    let cfg = match load(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = run(&cfg);
    match result {
        Ok(out) => match emit(&cfg, &out) {
            Ok(()) => ExitCode::from(out.exit_code() as u8),
            Err(e) => {
                eprintln!("output error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_exit_codes() {
        assert_eq!(RunError::Open("x".into()).exit_code(), 3);
    }
}
