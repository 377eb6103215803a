//! Joint laws of `(ξ, η)`: renewal step and attached mark.

use rand::Rng;
use rand_distr::{Distribution, Exp, Open01};

use crate::error::{Error, Result};

use super::wlaw::pareto_tail;

#[derive(Debug, Clone, PartialEq)]
pub enum PairFamily {
    /// `ξ` exponential with `rate`, `η` Pareto(beta, xm), independent.
    IndependentExpPareto { rate: f64, beta: f64, xm: f64 },
    /// `ξ` Pareto(alpha, xm), `η` Pareto(beta, xm), independent.
    IndependentParetoPareto { alpha: f64, beta: f64, xm: f64 },
    /// `(ξ, η + shock·ξ)` with `(ξ, η)` drawn from `base`.
    CommonShock { base: Box<PairLaw>, shock: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairLaw {
    family: PairFamily,
}

/// Tail behaviour of the renewal step `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepTail {
    /// `E ξ² < ∞`.
    FiniteVariance,
    /// `P{ξ > x} = coef · x^{-alpha}` beyond some point, alpha ∈ (1, 2].
    Pareto { alpha: f64, coef: f64 },
}

fn pareto<R: Rng + ?Sized>(theta: f64, xm: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    (xm * u.powf(-1.0 / theta)).min(f64::MAX)
}

impl PairLaw {
    pub fn new(family: PairFamily) -> Result<Self> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::InvalidParameter(msg)) };
        match &family {
            PairFamily::IndependentExpPareto { rate, beta, xm } => {
                check(
                    rate.is_finite() && *rate > 0.0,
                    format!("rate must be positive, got {rate}"),
                )?;
                check(
                    *beta > 0.0 && *beta < 1.0,
                    format!("beta must lie in (0, 1), got {beta}"),
                )?;
                check(xm.is_finite() && *xm > 0.0, format!("xm must be positive, got {xm}"))?;
            }
            PairFamily::IndependentParetoPareto { alpha, beta, xm } => {
                check(
                    *alpha > 1.0 && *alpha < 2.0,
                    format!("alpha must lie in (1, 2), got {alpha}"),
                )?;
                check(
                    *beta > 0.0 && *beta < 1.0,
                    format!("beta must lie in (0, 1), got {beta}"),
                )?;
                check(xm.is_finite() && *xm > 0.0, format!("xm must be positive, got {xm}"))?;
            }
            PairFamily::CommonShock { shock, .. } => {
                check(
                    shock.is_finite() && *shock >= 0.0,
                    format!("shock must be nonnegative, got {shock}"),
                )?;
            }
        }
        Ok(PairLaw { family })
    }

    pub fn exp_pareto(rate: f64, beta: f64, xm: f64) -> Result<Self> {
        Self::new(PairFamily::IndependentExpPareto { rate, beta, xm })
    }

    pub fn pareto_pareto(alpha: f64, beta: f64, xm: f64) -> Result<Self> {
        Self::new(PairFamily::IndependentParetoPareto { alpha, beta, xm })
    }

    pub fn common_shock(base: PairLaw, shock: f64) -> Result<Self> {
        Self::new(PairFamily::CommonShock {
            base: Box::new(base),
            shock,
        })
    }

    pub fn family(&self) -> &PairFamily {
        &self.family
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match &self.family {
            PairFamily::IndependentExpPareto { rate, beta, xm } => {
                let xi = Exp::new(*rate).expect("validated").sample(rng);
                // Exp can return exactly 0 with negligible probability
                (xi.max(f64::MIN_POSITIVE), pareto(*beta, *xm, rng))
            }
            PairFamily::IndependentParetoPareto { alpha, beta, xm } => {
                (pareto(*alpha, *xm, rng), pareto(*beta, *xm, rng))
            }
            PairFamily::CommonShock { base, shock } => {
                let (xi, eta) = base.sample(rng);
                (xi, eta + shock * xi)
            }
        }
    }

    /// `m = E ξ`.
    pub fn step_mean(&self) -> f64 {
        match &self.family {
            PairFamily::IndependentExpPareto { rate, .. } => 1.0 / rate,
            PairFamily::IndependentParetoPareto { alpha, xm, .. } => alpha * xm / (alpha - 1.0),
            PairFamily::CommonShock { base, .. } => base.step_mean(),
        }
    }

    pub fn step_tail(&self) -> StepTail {
        match &self.family {
            PairFamily::IndependentExpPareto { .. } => StepTail::FiniteVariance,
            PairFamily::IndependentParetoPareto { alpha, xm, .. } => StepTail::Pareto {
                alpha: *alpha,
                coef: xm.powf(*alpha),
            },
            PairFamily::CommonShock { base, .. } => base.step_tail(),
        }
    }

    /// `(β, xm)` of the mark's Pareto tail when `Ḡ` is known in closed form.
    fn mark_pareto(&self) -> Option<(f64, f64)> {
        match &self.family {
            PairFamily::IndependentExpPareto { beta, xm, .. }
            | PairFamily::IndependentParetoPareto { beta, xm, .. } => Some((*beta, *xm)),
            PairFamily::CommonShock { base, shock } if *shock == 0.0 => base.mark_pareto(),
            PairFamily::CommonShock { .. } => None,
        }
    }

    fn no_closed_form(&self) -> Error {
        Error::Unsupported(format!("no closed-form mark tail for {:?}", self.family))
    }

    /// `Ḡ(x) = P{η > x}`.
    pub fn mark_tail(&self, x: f64) -> Result<f64> {
        let (beta, xm) = self.mark_pareto().ok_or_else(|| self.no_closed_form())?;
        Ok(if x < 0.0 { 1.0 } else { pareto_tail(x, beta, xm) })
    }

    /// Regular-variation index of `Ḡ`.
    pub fn mark_index(&self) -> Result<f64> {
        self.mark_pareto().map(|(b, _)| b).ok_or_else(|| self.no_closed_form())
    }

    /// `∫_0^t Ḡ(y) dy`, piecewise closed form.
    pub fn integrated_mark_tail(&self, t: f64) -> Result<f64> {
        let (beta, xm) = self.mark_pareto().ok_or_else(|| self.no_closed_form())?;
        let t = t.max(0.0);
        Ok(if t <= xm {
            t
        } else {
            xm + xm.powf(beta) * (t.powf(1.0 - beta) - xm.powf(1.0 - beta)) / (1.0 - beta)
        })
    }
}
