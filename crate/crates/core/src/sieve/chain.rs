//! Nonincreasing Markov chains on `{M, M+1, ...}` absorbed at `M`, and their
//! zero-decrement counts `Z_n`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Open01};

use crate::distributions::{WFamily, WLaw};
use crate::error::{Error, Result};

use super::ROUND_CAP;

/// Row `i` as `[π_{i,0}, ..., π_{i,i}]`.
pub type RowFn = Arc<dyn Fn(u64) -> Vec<f64> + Send + Sync>;
/// Draws the next state from state `i`.
pub type StepFn = Arc<dyn Fn(u64, &mut dyn RngCore) -> u64 + Send + Sync>;
/// A per-state probability such as `π_{i,i}`.
pub type ProbFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// States checked when a kernel is built.
pub const VALIDATION_DEPTH: u64 = 64;
const ROW_SUM_TOL: f64 = 1e-9;
/// Largest state for which the sieve kernel materializes a row.
pub const MAX_ROW_STATE: u64 = 10_000_000;

#[derive(Clone)]
pub enum Transitions {
    Rows(RowFn),
    Sampler {
        step: StepFn,
        delay: ProbFn,
        absorb: ProbFn,
    },
}

/// Transition description of a nonincreasing chain.
#[derive(Clone)]
pub struct KernelSpec {
    absorbing: u64,
    transitions: Transitions,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.transitions {
            Transitions::Rows(_) => "rows",
            Transitions::Sampler { .. } => "sampler",
        };
        f.debug_struct("KernelSpec")
            .field("absorbing", &self.absorbing)
            .field("kind", &kind)
            .finish()
    }
}

impl KernelSpec {
    /// Kernel given by analytic rows. Rows of states `M+1 ..= M+64` are
    /// checked here; later rows are checked when first used.
    pub fn from_rows(absorbing: u64, rows: RowFn) -> Result<Self> {
        let k = KernelSpec {
            absorbing,
            transitions: Transitions::Rows(rows),
        };
        for i in absorbing + 1..=absorbing + VALIDATION_DEPTH {
            k.row(i)?;
        }
        Ok(k)
    }

    /// Kernel given by a next-state sampler plus the delay and absorption
    /// probabilities.
    pub fn from_sampler(absorbing: u64, step: StepFn, delay: ProbFn, absorb: ProbFn) -> Result<Self> {
        for i in absorbing + 1..=absorbing + VALIDATION_DEPTH {
            check_delay(i, delay(i))?;
            let a = absorb(i);
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidKernel {
                    state: i,
                    reason: format!("absorption probability {a}"),
                });
            }
        }
        Ok(KernelSpec {
            absorbing,
            transitions: Transitions::Sampler { step, delay, absorb },
        })
    }

    /// Remaining-balls kernel of the sieve, `π_{i,j} = C(i,j) E W^j (1-W)^{i-j}`,
    /// for laws where the mixed moments are closed form.
    pub fn sieve(law: &WLaw) -> Result<Self> {
        // ratio π_{i,j+1} / π_{i,j} without the binomial factor (i-j)/(j+1)
        let moment_ratio: Arc<dyn Fn(u64, u64) -> f64 + Send + Sync> = match *law.family() {
            WFamily::Uniform01 => Arc::new(|i, j| (j + 1) as f64 / (i - j) as f64),
            WFamily::Beta { a, b } => Arc::new(move |i, j| (a + j as f64) / (b + (i - j) as f64 - 1.0)),
            WFamily::PointMass { x } => {
                let odds = x / (1.0 - x);
                Arc::new(move |_, _| odds)
            }
            _ => {
                return Err(Error::Unsupported(
                    "closed-form sieve kernel needs a uniform, beta or point-mass law".into(),
                ))
            }
        };
        let rows: RowFn = Arc::new(move |i| binomial_mixture_row(i, &*moment_ratio));
        KernelSpec::from_rows(0, rows)
    }

    pub fn absorbing(&self) -> u64 {
        self.absorbing
    }

    pub fn transitions(&self) -> &Transitions {
        &self.transitions
    }

    /// Validated row of state `i > M` (rows kernels only).
    pub fn row(&self, i: u64) -> Result<Vec<f64>> {
        let Transitions::Rows(rows) = &self.transitions else {
            return Err(Error::Unsupported("sampler kernels have no explicit rows".into()));
        };
        let row = rows(i);
        if row.len() as u64 != i + 1 {
            return Err(Error::InvalidKernel {
                state: i,
                reason: format!("row has {} entries", row.len()),
            });
        }
        let mut sum = 0.0;
        for (j, &p) in row.iter().enumerate() {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::InvalidKernel {
                    state: i,
                    reason: format!("entry {j} is {p}"),
                });
            }
            if (j as u64) < self.absorbing && p > 0.0 {
                return Err(Error::InvalidKernel {
                    state: i,
                    reason: format!("mass below the absorbing state at {j}"),
                });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidKernel {
                state: i,
                reason: format!("row sums to {sum}"),
            });
        }
        check_delay(i, row[i as usize])?;
        Ok(row)
    }

    /// `π_{i,i}`.
    pub fn delay_probability(&self, i: u64) -> Result<f64> {
        if i == self.absorbing {
            return Ok(1.0);
        }
        match &self.transitions {
            Transitions::Rows(_) => Ok(self.row(i)?[i as usize]),
            Transitions::Sampler { delay, .. } => Ok(delay(i)),
        }
    }

    /// `π_{i,M}`.
    pub fn absorption_probability(&self, i: u64) -> Result<f64> {
        if i == self.absorbing {
            return Ok(1.0);
        }
        match &self.transitions {
            Transitions::Rows(_) => Ok(self.row(i)?[self.absorbing as usize]),
            Transitions::Sampler { absorb, .. } => Ok(absorb(i)),
        }
    }
}

fn check_delay(i: u64, d: f64) -> Result<()> {
    // a state that is left with positive probability makes absorption certain
    if !(0.0..1.0).contains(&d) {
        return Err(Error::InvalidKernel {
            state: i,
            reason: format!("delay probability {d} must lie in [0, 1)"),
        });
    }
    Ok(())
}

/// Row of a binomial mixture built from successive ratios and normalized.
fn binomial_mixture_row(i: u64, moment_ratio: &dyn Fn(u64, u64) -> f64) -> Vec<f64> {
    const RESCALE_AT: f64 = 1e250;
    if i > MAX_ROW_STATE {
        return Vec::new();
    }
    let mut row = Vec::with_capacity(i as usize + 1);
    let mut v = 1.0f64;
    row.push(v);
    for j in 0..i {
        v *= (i - j) as f64 / (j + 1) as f64 * moment_ratio(i, j);
        if v > RESCALE_AT {
            row.iter_mut().for_each(|p| *p /= RESCALE_AT);
            v /= RESCALE_AT;
        }
        row.push(v);
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    row
}

/// Index `j` in `lo..=hi` where the running sum of `weight(j)`, taken from
/// `hi` downwards, first exceeds `target`.
fn invert_descending(row: &[f64], lo: usize, hi: usize, target: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = lo;
    let mut found = None;
    for j in (lo..=hi).rev() {
        if row[j] > 0.0 {
            last_positive = j;
        }
        acc += row[j];
        if target < acc {
            found = Some(j);
            break;
        }
    }
    // rounding can leave the target past the accumulated mass
    found.unwrap_or(last_positive)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Runs the chain from `n` and counts the steps `I_{k+1} = I_k > M`.
pub fn simulate_zero_decrements<R: Rng>(kernel: &KernelSpec, n: u64, rng: &mut R) -> Result<u64> {
    let m = kernel.absorbing;
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "start {n} lies below the absorbing state {m}"
        )));
    }
    let mut state = n;
    let mut zeros = 0u64;
    let mut steps = 0u64;
    let mut cached: Option<(u64, Vec<f64>)> = None;
    while state > m {
        steps += 1;
        if steps > ROUND_CAP {
            return Err(Error::RoundCap(ROUND_CAP));
        }
        let next = match &kernel.transitions {
            Transitions::Rows(_) => {
                if cached.as_ref().map(|c| c.0) != Some(state) {
                    cached = Some((state, kernel.row(state)?));
                }
                let row = &cached.as_ref().expect("row cached above").1;
                invert_descending(row, m as usize, state as usize, uniform(rng)) as u64
            }
            Transitions::Sampler { step, .. } => {
                let j = step(state, rng);
                if j > state || j < m {
                    return Err(Error::InvalidKernel {
                        state,
                        reason: format!("sampler moved to {j}"),
                    });
                }
                j
            }
        };
        if next == state {
            zeros += 1;
        }
        state = next;
    }
    Ok(zeros)
}

/// `geom(1 - d)` on `{0, 1, ...}`: failures before the first success.
fn geometric_dwell<R: Rng + ?Sized>(d: f64, rng: &mut R) -> u64 {
    if d <= 0.0 {
        return 0;
    }
    (uniform(rng).ln() / d.ln()).floor() as u64
}

/// Same law as [`simulate_zero_decrements`] through the strictly decreasing
/// chain with rows `π_{i,j} / (1 - π_{i,i})` plus independent
/// `geom(1 - π_{j,j})` dwell counts at each visited state above `M`.
pub fn simulate_zero_decrements_geomrep<R: Rng>(kernel: &KernelSpec, n: u64, rng: &mut R) -> Result<u64> {
    let m = kernel.absorbing;
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "start {n} lies below the absorbing state {m}"
        )));
    }
    let mut state = n;
    let mut zeros = 0u64;
    let mut steps = 0u64;
    while state > m {
        steps += 1;
        if steps > ROUND_CAP {
            return Err(Error::RoundCap(ROUND_CAP));
        }
        match &kernel.transitions {
            Transitions::Rows(_) => {
                let row = kernel.row(state)?;
                let d = row[state as usize];
                zeros += geometric_dwell(d, rng);
                let target = uniform(rng) * (1.0 - d);
                state = invert_descending(&row, m as usize, state as usize - 1, target) as u64;
            }
            Transitions::Sampler { step, delay, .. } => {
                let d = delay(state);
                check_delay(state, d)?;
                zeros += geometric_dwell(d, rng);
                let mut tries = 0u64;
                state = loop {
                    let j = step(state, rng);
                    if j > state || j < m {
                        return Err(Error::InvalidKernel {
                            state,
                            reason: format!("sampler moved to {j}"),
                        });
                    }
                    if j < state {
                        break j;
                    }
                    tries += 1;
                    if tries > ROUND_CAP {
                        return Err(Error::RoundCap(ROUND_CAP));
                    }
                };
            }
        }
    }
    Ok(zeros)
}
