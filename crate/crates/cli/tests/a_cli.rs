use std::fs;
use std::process::{Command, Output};

fn sieve_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sieve-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn moments_to_stdout() {
    let out = sieve_lab(&["moments", "--set", "a=0.5", "--set", "k=3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "j,m_j\n1,1\n2,3\n3,13\n");
    let report: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# uniform sieve\nlaw = uniform\nn = 100\ntrials = 10\nseed = 7\n").unwrap();
    let csv = dir.path().join("a.csv");
    let report = dir.path().join("a.json");
    let run = |threads: &str, csv: &std::path::Path| {
        let out = sieve_lab(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            csv.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(csv).unwrap()
    };
    let first = run("1", &csv);
    let second = run("2", &dir.path().join("b.csv"));
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("trial,K,M,L\n"));
    assert_eq!(text.lines().count(), 11);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["regime"], "FiniteFinite");

    let seeded = sieve_lab(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(seeded.stdout, text.as_bytes());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.cfg");
    fs::write(&cfg, "law = uniform\ntrails = 10\n").unwrap();
    let out = sieve_lab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trails"));
    assert_eq!(
        sieve_lab(&["simulate", "--set", "law=beta(a=-1, b=2)", "--n", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sieve_lab(&["simulate", "--set", "law=uniform", "--n", "ten"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(sieve_lab(&["launch"]).status.code(), Some(2));
}

#[test]
fn open_regime_exit_3() {
    let out = sieve_lab(&[
        "limit-check",
        "--set",
        "law=two-sided-log-pareto(p=0.5, theta0=1.5, theta1=1/3)",
        "--n",
        "1e6",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CaseC3Open"));
}

#[test]
fn limit_check_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.csv");
    let out = sieve_lab(&[
        "limit-check",
        "--set",
        "law=two-sided-log-pareto(p=1/3, theta0=0.5, theta1=0.5)",
        "--n",
        "1e12",
        "--trials",
        "3000",
        "--plot-data",
        plot.to_str().unwrap(),
        "--out",
        dir.path().join("l.csv").to_str().unwrap(),
    ]);
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let report: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["regime"], "Comparable(c=2)");
    for test in report["tests"].as_array().unwrap() {
        for key in ["name", "statistic", "p_value", "threshold", "pass"] {
            assert!(test.get(key).is_some(), "missing {key}");
        }
    }
    let data = fs::read_to_string(plot).unwrap();
    assert!(data.starts_with("series,x,y\n"));
    assert!(data.contains("geometric_pmf,0,0.333"));
}

#[test]
fn shotnoise_csv_columns() {
    let out = sieve_lab(&[
        "shotnoise",
        "--set",
        "pair=pareto-pareto(alpha=1.5, beta=0.2)",
        "--t",
        "100",
        "--trials",
        "50",
    ]);
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("trial,V,R,renewals\n"));
    assert_eq!(text.lines().count(), 51);
}
