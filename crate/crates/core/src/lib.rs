//! Simulation and verification toolkit for the Bernoulli sieve.
//!
//! `n` balls are thrown on `[0, 1]` split into boxes of sizes
//! `W_1 ⋯ W_{k-1}(1 - W_k)`. The crate simulates the resulting counts
//! `K_n` (occupied boxes), `M_n` (last occupied box) and `L_n = M_n - K_n`,
//! the related nonincreasing Markov chains, renewal shot-noise processes, and
//! the centering and norming constants of their limit theorems.

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod numerics;
pub mod renewal;
pub mod rng;
pub mod sieve;
pub mod stats;

pub use asymptotics::{classify_regime, NormingPlan, RegimeCase};
pub use distributions::{LimitIntegral, PairFamily, PairLaw, StableSpec, WFamily, WLaw, WSample};
pub use error::{Error, Result};
pub use renewal::{IncrementSource, ShotNoiseSample, WalkPath};
pub use rng::TrialStreams;
pub use sieve::chain::KernelSpec;
pub use sieve::SieveOutcome;
pub use stats::TestReport;
