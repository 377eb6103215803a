//! Goodness-of-fit tests and sample summaries.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    /// Sample sizes (one entry for one-sample tests).
    pub sample_sizes: Vec<usize>,
    /// Degrees of freedom for chi-square tests.
    pub dof: Option<usize>,
    pub p_value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl TestReport {
    fn new(
        name: &str,
        statistic: f64,
        sample_sizes: Vec<usize>,
        dof: Option<usize>,
        p_value: f64,
        threshold: f64,
    ) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestReport {
            name: name.to_string(),
            statistic,
            sample_sizes,
            dof,
            p_value,
            threshold,
            pass: p_value > threshold,
        }
    }

    /// Same test under another name.
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `P{K > λ}` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = (1..=20)
            .map(|k| (-((2 * k - 1) as f64).powi(2) * pi2 / (8.0 * lambda * lambda)).exp())
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        2.0 * s
    }
    .clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov test; tied values are stepped over together.
pub fn ks_two_sample(xs: &[f64], ys: &[f64], threshold: f64) -> Result<TestReport> {
    let a = sorted(xs)?;
    let b = sorted(ys)?;
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    Ok(TestReport::new(
        "ks_two_sample",
        d,
        vec![n, m],
        None,
        kolmogorov_survival(ne * d),
        threshold,
    ))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov test against `N(0, 1)`.
pub fn ks_one_sample_normal(xs: &[f64], threshold: f64) -> Result<TestReport> {
    let a = sorted(xs)?;
    let n = a.len() as f64;
    let d = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(TestReport::new(
        "ks_one_sample_normal",
        d,
        vec![a.len()],
        None,
        kolmogorov_survival(n.sqrt() * d),
        threshold,
    ))
}

/// Minimum number of observations for [`chisq_geometric`].
pub const CHISQ_MIN_OBSERVATIONS: usize = 100;
const CHISQ_MIN_EXPECTED: f64 = 5.0;

/// Pearson test of a histogram (`counts[m]` = number of observations equal
/// to `m`) against `geom(a)`, pooling bins until each expects at least 5.
pub fn chisq_geometric(counts: &[u64], a: f64, threshold: f64) -> Result<TestReport> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric parameter must lie in (0, 1), got {a}"
        )));
    }
    let total: u64 = counts.iter().sum();
    if (total as usize) < CHISQ_MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            got: total as usize,
            need: CHISQ_MIN_OBSERVATIONS,
        });
    }
    let nt = total as f64;
    let q = 1.0 - a;
    // bin starts; the last bin is the open tail
    let mut starts = vec![0usize];
    let mut acc = 0.0;
    let mut m = 0usize;
    loop {
        let tail_from_next = nt * q.powi(m as i32 + 1);
        acc += nt * a * q.powi(m as i32);
        m += 1;
        if acc >= CHISQ_MIN_EXPECTED {
            if tail_from_next < CHISQ_MIN_EXPECTED {
                break;
            }
            starts.push(m);
            acc = 0.0;
        }
    }
    let bins = starts.len();
    let observed_in = |k: usize| -> f64 {
        let lo = starts[k];
        let hi = if k + 1 < bins {
            starts[k + 1]
        } else {
            counts.len().max(lo)
        };
        counts.iter().skip(lo).take(hi.saturating_sub(lo)).sum::<u64>() as f64
    };
    let expected_in = |k: usize| -> f64 {
        let lo = starts[k] as i32;
        if k + 1 < bins {
            nt * (q.powi(lo) - q.powi(starts[k + 1] as i32))
        } else {
            nt * q.powi(lo)
        }
    };
    let stat: f64 = (0..bins)
        .map(|k| {
            let (o, e) = (observed_in(k), expected_in(k));
            (o - e).powi(2) / e
        })
        .sum();
    let dof = bins - 1;
    let p = if dof == 0 {
        1.0
    } else {
        gamma_ur(dof as f64 / 2.0, stat / 2.0)
    };
    Ok(TestReport::new(
        "chisq_geometric",
        stat,
        vec![total as usize],
        Some(dof),
        p,
        threshold,
    ))
}

/// Histogram of nonnegative integer observations.
pub fn histogram(values: &[u64]) -> Vec<u64> {
    let len = values.iter().max().map_or(0, |&m| m as usize + 1);
    let mut h = vec![0u64; len];
    for &v in values {
        h[v as usize] += 1;
    }
    h
}

/// `n^{-1} Σ e^{i u x_j}`.
pub fn empirical_cf(xs: &[f64], u: f64) -> Result<Complex64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let (mut re, mut im) = (0.0, 0.0);
    for &x in xs {
        let (s, c) = (u * x).sin_cos();
        re += c;
        im += s;
    }
    let n = xs.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

/// Adds seeded `U(-1/2, 1/2)` noise, which breaks ties of integer-valued
/// statistics before a continuous-data test.
pub fn jitter(xs: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    xs.iter().map(|&x| x + rng.random::<f64>() - 0.5).collect()
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    let (m2, m3) = (m2 / n, m3 / n);
    let variance = if xs.len() > 1 { m2 * n / (n - 1.0) } else { 0.0 };
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    (mean, variance, skewness)
}

/// Sample skewness `m3 / m2^{3/2}` (0 for a constant sample).
pub fn skewness(xs: &[f64]) -> Result<f64> {
    Ok(moments(&sorted(xs)?).2)
}

/// Number of bootstrap resamples in [`summarize`].
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub median: f64,
    /// 95% percentile bootstrap intervals.
    pub mean_ci: (f64, f64),
    pub variance_ci: (f64, f64),
    pub skewness_ci: (f64, f64),
}

/// Moments, median and seeded bootstrap intervals.
pub fn summarize(xs: &[f64], seed: u64) -> Result<Summary> {
    let data = sorted(xs)?;
    let (mean, variance, skew) = moments(&data);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = data.len();
    let mut boot = [
        Vec::with_capacity(BOOTSTRAP_RESAMPLES),
        Vec::with_capacity(BOOTSTRAP_RESAMPLES),
        Vec::with_capacity(BOOTSTRAP_RESAMPLES),
    ];
    let mut resample = vec![0.0; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for r in resample.iter_mut() {
            *r = data[rng.random_range(0..n)];
        }
        let (a, b, c) = moments(&resample);
        boot[0].push(a);
        boot[1].push(b);
        boot[2].push(c);
    }
    let ci = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (quantile_sorted(v, 0.025), quantile_sorted(v, 0.975))
    };
    let [mut bm, mut bv, mut bs] = boot;
    Ok(Summary {
        n,
        mean,
        variance,
        skewness: skew,
        median: quantile_sorted(&data, 0.5),
        mean_ci: ci(&mut bm),
        variance_ci: ci(&mut bv),
        skewness_ci: ci(&mut bs),
    })
}

/// Shape checks for a spectrally negative limit: negative sample skewness and
/// a median inside the interquartile range of the limit sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCheck {
    pub skewness: f64,
    pub median: f64,
    pub limit_iqr: (f64, f64),
    pub pass: bool,
}

pub fn shape_check(sample: &[f64], limit: &[f64]) -> Result<ShapeCheck> {
    let s = sorted(sample)?;
    let l = sorted(limit)?;
    let skewness = moments(&s).2;
    let median = quantile_sorted(&s, 0.5);
    let limit_iqr = (quantile_sorted(&l, 0.25), quantile_sorted(&l, 0.75));
    let pass = skewness < 0.0 && median >= limit_iqr.0 && median <= limit_iqr.1;
    Ok(ShapeCheck {
        skewness,
        median,
        limit_iqr,
        pass,
    })
}
