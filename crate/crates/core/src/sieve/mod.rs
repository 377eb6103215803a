//! The Bernoulli sieve: balls allocated over boxes `(T_k, T_{k-1}]` of a
//! multiplicative random walk `T_k = W_1 ⋯ W_k`.
//!
//! Three simulators produce the same law of `(K_n, M_n, L_n)`:
//! round-by-round binomial thinning (any `n` up to ~1e15), direct allocation of
//! `n` explicit balls (bounded `n`, used as a cross-check), and the
//! zero-decrement count of the remaining-balls chain in [`chain`].

pub mod chain;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1, Poisson};

use crate::distributions::{WLaw, WSample};
use crate::error::{Error, Result};

/// A trial aborts after this many rounds.
pub const ROUND_CAP: u64 = 10_000_000;
/// Largest ball count accepted by [`simulate_sieve_direct`].
pub const DIRECT_MAX_BALLS: u64 = 1_000_000;

/// Occupancy summary of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SieveOutcome {
    /// `K_n`, occupied boxes.
    pub k_occupied: u64,
    /// `M_n`, index of the last occupied box.
    pub m_range: u64,
    /// `L_n = M_n - K_n`, empty boxes inside the occupancy range.
    pub l_empty: u64,
}

impl SieveOutcome {
    fn from_range(m_range: u64, l_empty: u64) -> Self {
        SieveOutcome {
            k_occupied: m_range - l_empty,
            m_range,
            l_empty,
        }
    }
}

/// Number of `remaining` balls that pass box `k`, `Binomial(remaining, W_k)`.
fn survivors<R: Rng + ?Sized>(remaining: u64, w: &WSample, rng: &mut R) -> u64 {
    // hand the binomial the smaller of W, 1-W so tiny probabilities stay exact
    if w.neg_log_w >= std::f64::consts::LN_2 {
        Binomial::new(remaining, w.value())
            .expect("probability in [0, 1]")
            .sample(rng)
    } else {
        remaining
            - Binomial::new(remaining, w.complement())
                .expect("probability in [0, 1]")
                .sample(rng)
    }
}

/// Round `k` drops each remaining ball into box `k` with probability
/// `1 - W_k`, so box `k` has frequency `W_1 ⋯ W_{k-1}(1 - W_k)` and the
/// remaining count follows the kernel `C(i,j) E W^j (1-W)^{i-j}`.
pub fn simulate_sieve_thinning<R: Rng + ?Sized>(law: &WLaw, n: u64, rng: &mut R) -> Result<SieveOutcome> {
    let mut remaining = n;
    let mut rounds = 0u64;
    let mut empty = 0u64;
    while remaining > 0 {
        rounds += 1;
        if rounds > ROUND_CAP {
            return Err(Error::RoundCap(ROUND_CAP));
        }
        let w = law.sample(rng);
        let left = survivors(remaining, &w, rng);
        if left == remaining {
            empty += 1;
        }
        remaining = left;
    }
    Ok(SieveOutcome::from_range(rounds, empty))
}

/// Allocates `n` explicit uniform balls over the boxes of the multiplicative
/// walk.
pub fn simulate_sieve_direct<R: Rng + ?Sized>(law: &WLaw, n: u64, rng: &mut R) -> Result<SieveOutcome> {
    if n > DIRECT_MAX_BALLS {
        return Err(Error::TooManyBalls {
            n,
            max: DIRECT_MAX_BALLS,
        });
    }
    // ball U lies in (T_k, T_{k-1}] iff -ln U lies in [S_{k-1}, S_k)
    let mut depths: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    depths.sort_unstable_by(f64::total_cmp);
    allocate_sorted(&depths, || law.sample(rng))
}

/// Walks the boxes `[S_{k-1}, S_k)` over sorted ball depths `-ln U_i`.
pub(crate) fn allocate_sorted<F: FnMut() -> WSample>(depths: &[f64], mut next_w: F) -> Result<SieveOutcome> {
    let mut idx = 0usize;
    let mut level = 0.0f64;
    let mut boxes = 0u64;
    let mut empty = 0u64;
    while idx < depths.len() {
        boxes += 1;
        if boxes > ROUND_CAP {
            return Err(Error::RoundCap(ROUND_CAP));
        }
        level += next_w().neg_log_w;
        let start = idx;
        while idx < depths.len() && depths[idx] < level {
            idx += 1;
        }
        if idx == start {
            empty += 1;
        }
    }
    Ok(SieveOutcome::from_range(boxes, empty))
}

/// Poissonized sieve: a Poisson(t) number of balls.
pub fn simulate_poissonized<R: Rng + ?Sized>(law: &WLaw, t: f64, rng: &mut R) -> Result<SieveOutcome> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let balls: f64 = Poisson::new(t)
        .map_err(|e| Error::InvalidParameter(format!("poisson mean {t}: {e}")))?
        .sample(rng);
    simulate_sieve_thinning(law, balls as u64, rng)
}
