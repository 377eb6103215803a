//! Spectrally negative α-stable laws with finite mean, and the stochastic
//! integral `∫_{[0,1]} v^{-β} dZ(v)`.
//!
//! `Z(1)` has characteristic function
//!
//! ```text
//! u ↦ exp{-|u|^α Γ(1-α) (cos(πα/2) + i sin(πα/2) sgn u)},   α ∈ (1, 2).
//! ```
//!
//! Writing `Γ(1-α)(cos(πα/2) + i sin(πα/2) sgn u)` as
//! `Γ(1-α) cos(πα/2) (1 + i tan(πα/2) sgn u)` and comparing with the standard
//! one-parametrization `exp{-σ^α |u|^α (1 - i β' tan(πα/2) sgn u)}` gives
//! `β' = -1` and `σ^α = Γ(1-α) cos(πα/2)`. For α in (1, 2) both `Γ(1-α)` and
//! `cos(πα/2)` are negative, so `σ > 0`. Draws use the Chambers–Mallows–Stuck
//! transform of a uniform angle and a standard exponential.
//!
//! For `β ∈ [0, 1/α)` the integral `∫ v^{-β} dZ(v)` equals `(1-αβ)^{-1/α} Z(1)`
//! in law. With α = 2, `Z` is standard Brownian motion.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, Uniform};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSpec {
    alpha: f64,
    scale: f64,
}

impl StableSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "stable index must lie in (1, 2), got {alpha}"
            )));
        }
        let scale = (gamma(1.0 - alpha) * (PI * alpha / 2.0).cos()).powf(1.0 / alpha);
        Ok(StableSpec { alpha, scale })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `σ = (Γ(1-α) cos(πα/2))^{1/α}`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let alpha = self.alpha;
        let v = Uniform::new(-FRAC_PI_2, FRAC_PI_2).expect("finite bounds").sample(rng);
        let e: f64 = Exp1.sample(rng);
        // skewness -1
        let t = -(PI * alpha / 2.0).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
        let shifted = alpha * (v + b);
        let x = s * shifted.sin() / v.cos().powf(1.0 / alpha) * ((v - shifted).cos() / e).powf((1.0 - alpha) / alpha);
        self.scale * x
    }

    /// The target characteristic function at `u`.
    pub fn characteristic_function(&self, u: f64) -> Complex64 {
        let alpha = self.alpha;
        let half = PI * alpha / 2.0;
        let coeff = Complex64::new(half.cos(), half.sin() * u.signum());
        let exponent = -u.abs().powf(alpha) * gamma(1.0 - alpha) * coeff;
        if u == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            exponent.exp()
        }
    }
}

pub fn sample_stable_z1<R: Rng + ?Sized>(spec: &StableSpec, rng: &mut R) -> f64 {
    spec.sample(rng)
}

/// Law of `∫_{[0,1]} v^{-β} dZ(v)` for α ∈ (1, 2] and β ∈ [0, 1/α).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitIntegral {
    alpha: f64,
    beta: f64,
    stable: Option<StableSpec>,
}

impl LimitIntegral {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (1, 2], got {alpha}"
            )));
        }
        if !(beta >= 0.0 && beta < 1.0 / alpha) {
            return Err(Error::InvalidParameter(format!(
                "integral not defined: beta must lie in [0, 1/alpha) = [0, {}), got {beta}",
                1.0 / alpha
            )));
        }
        let stable = if alpha < 2.0 {
            Some(StableSpec::new(alpha)?)
        } else {
            None
        };
        Ok(LimitIntegral { alpha, beta, stable })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(1 - αβ)^{-1/α}`.
    pub fn scale_factor(&self) -> f64 {
        (1.0 - self.alpha * self.beta).powf(-1.0 / self.alpha)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z1 = match &self.stable {
            Some(spec) => spec.sample(rng),
            None => StandardNormal.sample(rng),
        };
        self.scale_factor() * z1
    }
}

pub fn sample_limit_integral<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    Ok(LimitIntegral::new(alpha, beta)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scale_at_three_halves() {
        // Γ(-1/2) = -2√π, cos(3π/4) = -1/√2
        let expected = (2.0 * PI.sqrt() / 2f64.sqrt()).powf(2.0 / 3.0);
        let spec = StableSpec::new(1.5).unwrap();
        assert!((spec.scale() - expected).abs() < 1e-12);
        assert!((spec.scale() - 1.845).abs() < 1e-3);
    }

    #[test]
    fn scale_positive_across_range() {
        for k in 1..100 {
            let a = 1.0 + k as f64 / 100.0;
            let s = StableSpec::new(a).unwrap().scale();
            assert!(s.is_finite() && s > 0.0, "alpha={a}");
        }
        assert!(StableSpec::new(2.0).is_err());
        assert!(StableSpec::new(1.0).is_err());
    }

    #[test]
    fn mean_is_zero() {
        let spec = StableSpec::new(1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn characteristic_function_matches() {
        let spec = StableSpec::new(1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 400_000;
        let xs: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng)).collect();
        for &u in &[-1.0, -0.5, 0.5, 1.0] {
            let (re, im) = xs
                .iter()
                .fold((0.0, 0.0), |(r, i), &x| (r + (u * x).cos(), i + (u * x).sin()));
            let target = spec.characteristic_function(u);
            assert!((re / n as f64 - target.re).abs() < 4.0 / (n as f64).sqrt());
            assert!((im / n as f64 - target.im).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn limit_integral_factors() {
        let li = LimitIntegral::new(1.5, 0.2).unwrap();
        assert!((li.scale_factor() - 0.7f64.powf(-2.0 / 3.0)).abs() < 1e-14);
        assert!((li.scale_factor() - 1.268).abs() < 1e-3);
        assert_eq!(LimitIntegral::new(1.5, 0.0).unwrap().scale_factor(), 1.0);
        let bm = LimitIntegral::new(2.0, 0.3).unwrap();
        assert!((bm.scale_factor() - 2.5f64.sqrt()).abs() < 1e-14);
        assert!(LimitIntegral::new(1.5, 1.0 / 1.5).is_err());
        assert!(LimitIntegral::new(1.5, 0.9).is_err());
    }

    #[test]
    fn beta_zero_reproduces_z1_stream() {
        let li = LimitIntegral::new(1.5, 0.0).unwrap();
        let spec = StableSpec::new(1.5).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert_eq!(li.sample(&mut r1), spec.sample(&mut r2));
        }
    }
}
