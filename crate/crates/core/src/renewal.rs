//! Random walks `S_k`, renewal counts, and renewal shot-noise sums.

use std::cell::RefCell;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};

use crate::asymptotics::PhiTable;
use crate::distributions::{LimitIntegral, PairLaw, StepTail, WFamily, WLaw};
use crate::error::{Error, Result};
use crate::numerics::{self, log_complement};
use crate::sieve::ROUND_CAP;

/// Law of the walk increments.
#[derive(Debug, Clone)]
pub enum IncrementSource {
    /// `|log W|` for `W` drawn from the law.
    LogW(WLaw),
    /// The step `ξ` of a pair law (the mark is discarded).
    Xi(PairLaw),
}

impl IncrementSource {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            IncrementSource::LogW(law) => law.sample(rng).neg_log_w,
            IncrementSource::Xi(pair) => pair.sample(rng).0,
        }
    }
}

/// Partial sums up to a horizon plus the first sum beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPath {
    points: Vec<f64>,
    horizon: f64,
}

impl WalkPath {
    /// Sums `≤ horizon`, in order.
    pub fn within(&self) -> &[f64] {
        &self.points[..self.points.len() - 1]
    }

    /// The first sum beyond the horizon.
    pub fn overshoot(&self) -> f64 {
        *self.points.last().expect("path always holds the overshooting sum")
    }

    pub fn all_points(&self) -> &[f64] {
        &self.points
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `N(t) = #{k ≥ 0 : S_k ≤ t}` at the horizon.
    pub fn count(&self) -> u64 {
        self.points.len() as u64 - 1
    }
}

/// Walk started at 0 and run past `t`.
pub fn simulate_walk<R: Rng + ?Sized>(source: &IncrementSource, t: f64, rng: &mut R) -> Result<WalkPath> {
    simulate_walk_from(source, 0.0, t, rng)
}

/// Walk started at `start` and run past `t`.
pub fn simulate_walk_from<R: Rng + ?Sized>(
    source: &IncrementSource,
    start: f64,
    t: f64,
    rng: &mut R,
) -> Result<WalkPath> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be a finite nonnegative real, got {t}"
        )));
    }
    let mut points = vec![start];
    let mut s = start;
    while s <= t {
        if points.len() as u64 > ROUND_CAP {
            return Err(Error::RoundCap(ROUND_CAP));
        }
        s += source.sample(rng);
        points.push(s);
    }
    Ok(WalkPath { points, horizon: t })
}

/// Sampler for the integrated-tail law
/// `P{Ŝ_0 ≤ x} = μ^{-1} ∫_0^x P{|log W| > y} dy`.
#[derive(Debug, Clone)]
pub struct StationaryDelay {
    kind: DelayKind,
}

#[derive(Debug, Clone)]
enum DelayKind {
    Exponential,
    Uniform(f64),
    Grid(Arc<DelayGrid>),
}

#[derive(Debug)]
struct DelayGrid {
    law: WLaw,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    /// `P{|log W| > x} = coef · x^{-theta}` beyond the last node.
    pareto_tail: Option<(f64, f64)>,
    total: f64,
}

const DELAY_CELLS_PER_SEGMENT: usize = 256;
const DELAY_TOL: f64 = 1e-10;

impl StationaryDelay {
    pub fn new(law: &WLaw) -> Result<Self> {
        let mu = law.mu();
        if !mu.is_finite() {
            return Err(Error::NoStationaryVersion);
        }
        let kind = match *law.family() {
            WFamily::Uniform01 => DelayKind::Exponential,
            WFamily::PointMass { x } => DelayKind::Uniform(-x.ln()),
            _ => DelayKind::Grid(Arc::new(DelayGrid::build(law)?)),
        };
        Ok(StationaryDelay { kind })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match &self.kind {
            DelayKind::Exponential => Ok(Exp1.sample(rng)),
            DelayKind::Uniform(c) => Ok(c * Distribution::<f64>::sample(&Open01, rng)),
            DelayKind::Grid(g) => g.invert(Open01.sample(rng)),
        }
    }

    /// `P{Ŝ_0 ≤ x}`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            DelayKind::Exponential => Ok(-(-x).exp_m1()),
            DelayKind::Uniform(c) => Ok((x / c).min(1.0)),
            DelayKind::Grid(g) => g.cdf(x),
        }
    }
}

impl DelayGrid {
    fn build(law: &WLaw) -> Result<Self> {
        let (upper, pareto_tail) = match *law.family() {
            WFamily::RightLogPareto { xm, .. } => (log_complement(xm), None),
            WFamily::RightLogLogTail { c0 } => (log_complement(c0.exp() - std::f64::consts::E), None),
            WFamily::TwoSidedLogPareto { p, theta0, xm, .. } => {
                // beyond both kinks only the Pareto branch remains
                (xm.max(log_complement(xm)), Some((p * xm.powf(theta0), theta0)))
            }
            _ => {
                let mut x = 1.0;
                while law.log_tail_left(x) > 1e-17 {
                    x *= 2.0;
                }
                (x, None)
            }
        };
        let mut segment_ends = numerics::breakpoints(0.0, upper, &law.left_tail_kinks());
        segment_ends.dedup();
        let mut nodes = vec![0.0];
        for w in segment_ends.windows(2) {
            let step = (w[1] - w[0]) / DELAY_CELLS_PER_SEGMENT as f64;
            for i in 1..=DELAY_CELLS_PER_SEGMENT {
                nodes.push(if i == DELAY_CELLS_PER_SEGMENT {
                    w[1]
                } else {
                    w[0] + step * i as f64
                });
            }
        }
        let mut cumulative = vec![0.0];
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += numerics::integrate(|y| law.log_tail_left(y), w[0], w[1])?;
            cumulative.push(acc);
        }
        let mut total = acc;
        if let Some((coef, theta)) = pareto_tail {
            total += coef * upper.powf(1.0 - theta) / (theta - 1.0);
        }
        Ok(DelayGrid {
            law: *law,
            nodes,
            cumulative,
            pareto_tail,
            total,
        })
    }

    fn cdf(&self, x: f64) -> Result<f64> {
        let last = *self.nodes.last().expect("grid has nodes");
        if x >= last {
            return Ok(match self.pareto_tail {
                Some((coef, theta)) => {
                    let beyond = coef * (last.powf(1.0 - theta) - x.powf(1.0 - theta)) / (theta - 1.0);
                    (self.cumulative[self.cumulative.len() - 1] + beyond) / self.total
                }
                None => 1.0,
            });
        }
        let cell = self.nodes.partition_point(|&v| v <= x) - 1;
        let partial = numerics::integrate(|y| self.law.log_tail_left(y), self.nodes[cell], x)?;
        Ok((self.cumulative[cell] + partial) / self.total)
    }

    fn invert(&self, u: f64) -> Result<f64> {
        let target = u * self.total;
        let grid_mass = *self.cumulative.last().expect("grid has nodes");
        let last = *self.nodes.last().expect("grid has nodes");
        if target >= grid_mass {
            return Ok(match self.pareto_tail {
                Some((coef, theta)) => {
                    let rest = (target - grid_mass) * (theta - 1.0) / coef;
                    (last.powf(1.0 - theta) - rest)
                        .max(0.0)
                        .powf(1.0 / (1.0 - theta))
                        .min(f64::MAX)
                }
                None => last,
            });
        }
        let cell = self.cumulative.partition_point(|&c| c <= target).saturating_sub(1);
        let (lo, hi) = (self.nodes[cell], self.nodes[cell + 1]);
        let need = target - self.cumulative[cell];
        let failure = RefCell::new(None);
        let root = numerics::bisect(
            |x| match numerics::integrate(|y| self.law.log_tail_left(y), lo, x) {
                Ok(v) => v - need,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            DELAY_TOL,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(root),
        }
    }
}

/// `C(t) = Σ φ(t - S_k)` over the points `S_k ≤ t` of a frozen path.
pub fn c_on_path(path: &WalkPath, phi: &PhiTable) -> f64 {
    let t = path.horizon();
    path.within().iter().map(|&s| phi.eval(t - s)).sum()
}

/// One draw of `C(t)`, or of `Ĉ(t)` when `stationary` (walk delayed by `Ŝ_0`).
pub fn shot_noise_c<R: Rng + ?Sized>(
    law: &WLaw,
    phi: &PhiTable,
    delay: Option<&StationaryDelay>,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if phi.horizon() < t {
        return Err(Error::InvalidParameter(format!(
            "φ table covers [0, {}], need {t}",
            phi.horizon()
        )));
    }
    let start = match delay {
        Some(d) => d.sample(rng)?,
        None => 0.0,
    };
    let path = simulate_walk_from(&IncrementSource::LogW(*law), start, t, rng)?;
    Ok(c_on_path(&path, phi))
}

/// One draw of `V(t)` and its random centering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoiseSample {
    /// `V(t)`.
    pub v_count: u64,
    /// `Σ Ḡ(t - S̃_{k-1})` over `S̃_{k-1} ≤ t`; `None` when `Ḡ` has no closed form.
    pub r_center: Option<f64>,
    /// Number of epochs `S̃_{k-1} ≤ t`.
    pub renewals: u64,
    pub t: f64,
}

pub fn shot_noise_v<R: Rng + ?Sized>(pair: &PairLaw, t: f64, rng: &mut R) -> Result<ShotNoiseSample> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let centered = pair.mark_tail(0.0).is_ok();
    let mut epoch = 0.0;
    let mut v = 0u64;
    let mut r = 0.0;
    let mut renewals = 0u64;
    while epoch <= t {
        renewals += 1;
        if renewals > ROUND_CAP {
            return Err(Error::RoundCap(ROUND_CAP));
        }
        let (xi, eta) = pair.sample(rng);
        let age = t - epoch;
        if eta > age {
            v += 1;
        }
        if centered {
            r += pair.mark_tail(age)?;
        }
        epoch += xi;
    }
    Ok(ShotNoiseSample {
        v_count: v,
        r_center: centered.then_some(r),
        renewals,
        t,
    })
}

/// `m^{-1} ∫_0^t Ḡ(y) dy`.
pub fn deterministic_centering(pair: &PairLaw, t: f64) -> Result<f64> {
    Ok(pair.integrated_mark_tail(t)? / pair.step_mean())
}

/// Whether `V(t)` may be centered by `m^{-1} ∫_0^t Ḡ` instead of the random sum.
#[derive(Debug, Clone, PartialEq)]
pub enum ShotNoiseVerdict {
    /// Normal limit with the deterministic centering and the same norming.
    Replaceable,
    /// Limit `∫ v^{-β} dZ(v)` under the norming `m^{-1-1/α} c(t) Ḡ(t)`.
    StableLimit { alpha: f64, beta: f64 },
    /// Boundary or unsupported configuration; no claim.
    Undetermined(String),
}

pub fn shot_noise_verdict(pair: &PairLaw) -> ShotNoiseVerdict {
    let beta = match pair.mark_index() {
        Ok(b) => b,
        Err(e) => return ShotNoiseVerdict::Undetermined(e.to_string()),
    };
    match pair.step_tail() {
        StepTail::FiniteVariance => ShotNoiseVerdict::Replaceable,
        StepTail::Pareto { alpha, .. } => {
            // Ḡ(x) c²(x) / x behaves like x^{2/α - 1 - β}
            let edge = 2.0 / alpha - 1.0;
            if (beta - edge).abs() <= 1e-12 {
                ShotNoiseVerdict::Undetermined(format!("beta = 2/alpha - 1 = {edge} is the boundary case"))
            } else if beta > edge {
                ShotNoiseVerdict::Replaceable
            } else {
                ShotNoiseVerdict::StableLimit { alpha, beta }
            }
        }
    }
}

/// `c(t)` for the step law: `t ℓ̃(c) / c^α = 1` with `P{ξ > x} = ℓ̃ x^{-α}`.
pub fn step_norming_c(pair: &PairLaw, t: f64) -> Result<f64> {
    match pair.step_tail() {
        StepTail::Pareto { alpha, coef } => Ok((coef * t.max(0.0)).powf(1.0 / alpha)),
        StepTail::FiniteVariance => Err(Error::Unsupported("the step law has finite variance".into())),
    }
}

/// Norming `m^{-1-1/α} c(t) Ḡ(t)` of the stable-limit regime.
pub fn stable_norming(pair: &PairLaw, t: f64) -> Result<f64> {
    let StepTail::Pareto { alpha, .. } = pair.step_tail() else {
        return Err(Error::Unsupported("the step law has finite variance".into()));
    };
    Ok(pair.step_mean().powf(-1.0 - 1.0 / alpha) * step_norming_c(pair, t)? * pair.mark_tail(t)?)
}

/// Limit law sampler of the stable regime.
pub fn stable_limit(pair: &PairLaw) -> Result<LimitIntegral> {
    match shot_noise_verdict(pair) {
        ShotNoiseVerdict::StableLimit { alpha, beta } => LimitIntegral::new(alpha, beta),
        other => Err(Error::Unsupported(format!("no stable limit: {other:?}"))),
    }
}

/// Monte Carlo estimate of `E Σ_{k ≥ 0} (1 - exp(-t e^{-S_k}))`, the mean
/// range of the poissonized sieve; returns `(mean, standard error)`.
pub fn expected_range_series<R: Rng + ?Sized>(law: &WLaw, t: f64, paths: usize, rng: &mut R) -> Result<(f64, f64)> {
    if paths < 2 {
        return Err(Error::TooFewObservations { got: paths, need: 2 });
    }
    // terms beyond S_k > ln t + 40 are below 1e-17
    let cutoff = t.ln().max(0.0) + 40.0;
    let source = IncrementSource::LogW(*law);
    let mut values = Vec::with_capacity(paths);
    for _ in 0..paths {
        let path = simulate_walk(&source, cutoff, rng)?;
        values.push(path.within().iter().map(|&s| -(-t * (-s).exp()).exp_m1()).sum::<f64>());
    }
    let n = paths as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
