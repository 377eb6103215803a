//! Deterministic per-trial random streams.
//!
//! Every trial gets its own ChaCha8 stream. The 256-bit key is derived from
//! the 64-bit master seed and a purpose tag with SplitMix64; the ChaCha stream
//! id is the trial index. Trial `i` therefore sees the same numbers no matter
//! how trials are batched or scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Purpose tags keep independent experiment phases on disjoint keys.
pub mod purpose {
    pub const TRIALS: u64 = 0x5452_4941_4c53;
    pub const LIMIT_LAW: u64 = 0x004c_494d_4954;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
    pub const JITTER: u64 = 0x4a49_5454_4552;
    pub const AUX: u64 = 0x0041_5558;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    master: u64,
}

impl TrialStreams {
    pub fn new(master: u64) -> Self {
        TrialStreams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Stream for trial `index` within the phase tagged `purpose`.
    pub fn stream(&self, purpose: u64, index: u64) -> ChaCha8Rng {
        let mut state = self.master ^ purpose.rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }

    pub fn trial(&self, index: u64) -> ChaCha8Rng {
        self.stream(purpose::TRIALS, index)
    }

    /// Runs `f(i, stream_i)` for `i in 0..count` on the current rayon pool
    /// and returns the results in index order.
    pub fn run<T, E, F>(&self, purpose: u64, count: u64, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(u64, &mut ChaCha8Rng) -> Result<T, E> + Sync,
    {
        (0..count)
            .into_par_iter()
            .map(|i| f(i, &mut self.stream(purpose, i)))
            .collect()
    }
}
