//! Samplers and analytic tail/moment functions.

mod moments;
mod pair;
mod stable;
mod wlaw;

pub use moments::{geometric_moments, MAX_MOMENT_ORDER};
pub use pair::{PairFamily, PairLaw, StepTail};
pub use stable::{sample_limit_integral, sample_stable_z1, LimitIntegral, StableSpec};
pub use wlaw::{WFamily, WLaw, WSample};
