//! Centering and norming constants for `L_n` and the regime classifier.
//!
//! `ψ(s) = E e^{-s(1-W)}` and `φ(t) = ψ(e^t)`. With `Y = |log(1-W)|` and an
//! independent standard Gumbel `G`, `e^{-e^{t-Y}} = P{G ≤ Y - t | Y}`, so
//! `φ(t) = E P{Y > t + G}`: a one-dimensional integral of the right log-tail
//! against the Gumbel density, which is how `φ` is evaluated for families
//! without a closed form.

use std::cell::RefCell;

use crate::distributions::{LimitIntegral, WFamily, WLaw};
use crate::error::{Error, Result};
use crate::numerics;

/// Gumbel integration window; the mass outside is below 1e-19.
const GUMBEL_LO: f64 = -4.0;
const GUMBEL_HI: f64 = 45.0;

fn gumbel_cdf(g: f64) -> f64 {
    (-(-g).exp()).exp()
}

fn gumbel_density(g: f64) -> f64 {
    (-g - (-g).exp()).exp()
}

/// `φ(t) = ψ(e^t)`, `t ∈ ℝ`.
pub fn phi(law: &WLaw, t: f64) -> Result<f64> {
    match *law.family() {
        WFamily::Uniform01 => Ok(uniform_psi(t.exp())),
        WFamily::PointMass { x } => Ok((-t.exp() * (1.0 - x)).exp()),
        _ => {
            // P{Y > t + g} = 1 for g < -t
            let flat_end = (-t).clamp(GUMBEL_LO, GUMBEL_HI);
            let flat = gumbel_cdf(flat_end) - gumbel_cdf(GUMBEL_LO);
            let kinks: Vec<f64> = law.right_tail_kinks().iter().map(|k| k - t).collect();
            let pts = numerics::breakpoints(flat_end, GUMBEL_HI, &kinks);
            let rest = numerics::integrate_with_breaks(|g| law.log_tail_right(t + g) * gumbel_density(g), &pts)?;
            Ok((flat + rest).clamp(0.0, 1.0))
        }
    }
}

fn uniform_psi(s: f64) -> f64 {
    if s < 1e-8 {
        1.0 - 0.5 * s
    } else {
        -(-s).exp_m1() / s
    }
}

/// `ψ(s) = E e^{-s(1-W)}`, `s ≥ 0`.
pub fn psi(law: &WLaw, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("psi needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    match *law.family() {
        WFamily::Uniform01 => Ok(uniform_psi(s)),
        WFamily::PointMass { x } => Ok((-s * (1.0 - x)).exp()),
        _ => phi(law, s.ln()),
    }
}

/// Break points for integrals of `φ` over `[0, t]`.
fn log_spaced_breaks(t: f64) -> Vec<f64> {
    let mut inner = vec![];
    let mut x = 1.0;
    while x < t {
        inner.push(x);
        x *= 4.0;
    }
    numerics::breakpoints(0.0, t, &inner)
}

/// `k(t) = ∫_0^t φ(y) dy`.
pub fn k_of(law: &WLaw, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("k(t) needs t >= 0, got {t}")));
    }
    let failure = RefCell::new(None);
    let value = numerics::integrate_with_breaks(
        |y| match phi(law, y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &log_spaced_breaks(t),
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => value,
    }
}

/// `m(x) = ∫_0^x P{|log(1-W)| > y} dy`.
pub fn m_of(law: &WLaw, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("m(x) needs x >= 0, got {x}")));
    }
    match *law.family() {
        WFamily::Uniform01 => Ok(-(-x).exp_m1()),
        WFamily::PointMass { x: w } => Ok(x.min(-(-w).ln_1p())),
        WFamily::RightLogPareto { beta, xm } => Ok(integrated_pareto_tail(x, beta, xm)),
        _ => {
            let mut inner = law.right_tail_kinks();
            inner.extend(log_spaced_breaks(x));
            numerics::integrate_with_breaks(|y| law.log_tail_right(y), &numerics::breakpoints(0.0, x, &inner))
        }
    }
}

/// `∫_0^x (y/xm ∨ 1)^{-β} dy`.
fn integrated_pareto_tail(x: f64, beta: f64, xm: f64) -> f64 {
    if x <= xm {
        x
    } else {
        xm + xm.powf(beta) * (x.powf(1.0 - beta) - xm.powf(1.0 - beta)) / (1.0 - beta)
    }
}

fn finite_mu(law: &WLaw) -> Result<f64> {
    let mu = law.mu();
    if mu.is_finite() {
        Ok(mu)
    } else {
        Err(Error::InfiniteMoment {
            quantity: "mu = E|log W|",
        })
    }
}

fn check_n(n: f64) -> Result<()> {
    if n >= 1.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "n must be a finite real >= 1, got {n}"
        )))
    }
}

/// `b_n = μ^{-1} ∫_1^n ψ(z)/z dz = μ^{-1} k(log n)`.
pub fn centering_b(law: &WLaw, n: f64) -> Result<f64> {
    check_n(n)?;
    Ok(k_of(law, n.ln())? / finite_mu(law)?)
}

/// `b'_n = μ^{-1} m(log n)`.
pub fn centering_b_prime(law: &WLaw, n: f64) -> Result<f64> {
    check_n(n)?;
    Ok(m_of(law, n.ln())? / finite_mu(law)?)
}

/// Governing limit regime of `L_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeCase {
    /// `μ < ∞`, `ν < ∞`: `L_n` converges without normalization.
    FiniteFinite,
    /// `μ = ∞`, `ν < ∞`: `L_n → 0`.
    MuInfNuFin,
    /// `σ² < ∞`, `ν = ∞`: normal limit with `a_n = √b_n`.
    CaseA,
    CaseB1,
    CaseB2,
    CaseC1,
    CaseC2,
    CaseB3Open,
    CaseC3Open,
    /// `μ = ν = ∞` with `P{1-W ≤ x} / P{W ≤ x} → c`: geometric limit.
    Comparable(f64),
    /// `μ = ν = ∞` with that ratio tending to 0 or ∞.
    AsymInfZero,
    /// `|log W|` is lattice.
    Lattice,
}

impl RegimeCase {
    pub fn label(&self) -> String {
        match self {
            RegimeCase::Comparable(c) => format!("Comparable(c={})", (c * 1e9).round() / 1e9),
            other => format!("{other:?}"),
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self, RegimeCase::CaseB3Open | RegimeCase::CaseC3Open)
    }
}

impl std::fmt::Display for RegimeCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

const BOUNDARY_TOL: f64 = 1e-12;

/// Classifies from the family's exact tail exponents.
pub fn classify_regime(law: &WLaw) -> RegimeCase {
    match *law.family() {
        WFamily::PointMass { .. } => RegimeCase::Lattice,
        WFamily::Uniform01 | WFamily::Beta { .. } => RegimeCase::FiniteFinite,
        // |log W| is bounded and ν = ∞
        WFamily::RightLogPareto { .. } | WFamily::RightLogLogTail { .. } => RegimeCase::CaseA,
        WFamily::TwoSidedLogPareto { p, theta0, theta1, .. } => {
            if theta0 <= 1.0 {
                if theta1 > 1.0 {
                    RegimeCase::MuInfNuFin
                } else if theta0 == theta1 {
                    RegimeCase::Comparable((1.0 - p) / p)
                } else {
                    RegimeCase::AsymInfZero
                }
            } else if theta1 > 1.0 {
                RegimeCase::FiniteFinite
            } else if theta0 > 2.0 {
                RegimeCase::CaseA
            } else if theta0 == 2.0 {
                // ℓ* grows like √log, so P{|log(1-W)| > x} ℓ*² → 0 for θ1 > 0
                RegimeCase::CaseB1
            } else {
                let edge = 2.0 / theta0 - 1.0;
                if (theta1 - edge).abs() <= BOUNDARY_TOL {
                    RegimeCase::CaseC3Open
                } else if theta1 < edge {
                    RegimeCase::CaseC2
                } else {
                    RegimeCase::CaseC1
                }
            }
        }
    }
}

/// `c(x)` solving `x ℓ̃(c) / c^α = 1` in cases (b) and (c).
pub fn norming_c(law: &WLaw, x: f64) -> Result<f64> {
    let case = classify_regime(law);
    let WFamily::TwoSidedLogPareto { p, theta0, xm, .. } = *law.family() else {
        return Err(Error::Unsupported(format!(
            "c(x) is defined in cases (b) and (c); law is {case}"
        )));
    };
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("c(x) needs x >= 0, got {x}")));
    }
    match case {
        RegimeCase::CaseC1 | RegimeCase::CaseC2 | RegimeCase::CaseC3Open => {
            // P{|log W| > x} = p xm^α x^{-α} for large x, so ℓ̃ is constant
            Ok((p * xm.powf(theta0) * x).powf(1.0 / theta0))
        }
        RegimeCase::CaseB1 | RegimeCase::CaseB2 | RegimeCase::CaseB3Open => {
            // truncated second moment ℓ̃(c) = 2 p xm² ln(c / xm); c²/ℓ̃(c) increases beyond xm √e
            let scale = 2.0 * p * xm * xm;
            let lo = xm.ln() + 0.5;
            let target = (scale * x).ln();
            let g = |u: f64| 2.0 * u - (u - xm.ln()).ln() - target;
            if g(lo) >= 0.0 {
                return Ok(lo.exp());
            }
            let mut hi = lo + 1.0;
            while g(hi) < 0.0 {
                hi = lo + 2.0 * (hi - lo);
            }
            Ok(numerics::bisect(g, lo, hi, 1e-15).exp())
        }
        other => Err(Error::Unsupported(format!(
            "c(x) is defined in cases (b) and (c); law is {other}"
        ))),
    }
}

/// `ℓ̃(c)` matching [`norming_c`], so that `x ℓ̃(c(x)) / c(x)^α = 1`.
pub fn slowly_varying_tilde(law: &WLaw, c: f64) -> Result<(f64, f64)> {
    let WFamily::TwoSidedLogPareto { p, theta0, xm, .. } = *law.family() else {
        return Err(Error::Unsupported(
            "slowly varying factor needs a two-sided log-Pareto law".into(),
        ));
    };
    if theta0 == 2.0 {
        Ok((2.0 * p * xm * xm * (c / xm).ln(), 2.0))
    } else {
        Ok((p * xm.powf(theta0), theta0))
    }
}

/// `a_n` of the regime.
pub fn scaling_a(law: &WLaw, n: f64, case: RegimeCase) -> Result<f64> {
    check_n(n)?;
    match case {
        RegimeCase::CaseA | RegimeCase::CaseB1 | RegimeCase::CaseC1 => Ok(centering_b(law, n)?.sqrt()),
        RegimeCase::CaseB2 => Ok(finite_mu(law)?.powf(-1.5) * norming_c(law, n.ln())? * psi(law, n)?),
        RegimeCase::CaseC2 => {
            let WFamily::TwoSidedLogPareto { theta0, .. } = *law.family() else {
                return Err(Error::Unsupported("case C2 needs a two-sided log-Pareto law".into()));
            };
            Ok(finite_mu(law)?.powf(-1.0 - 1.0 / theta0) * norming_c(law, n.ln())? * psi(law, n)?)
        }
        RegimeCase::CaseB3Open | RegimeCase::CaseC3Open => Err(Error::OpenRegime(format!(
            "{case}: the joint behaviour of the two competing components is unresolved, so no limit law is known"
        ))),
        other => Err(Error::Unsupported(format!(
            "regime {other} has no centering/norming limit"
        ))),
    }
}

/// Limit law of the normalized statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitLaw {
    /// `(L_n - b_n) / a_n → N(0, 1)`.
    StandardNormal,
    /// `(L_n - b_n) / a_n → ∫ v^{-β} dZ(v)`.
    StableIntegral(LimitIntegral),
    /// `L_n → geom(a)`.
    Geometric { a: f64 },
    /// `L_n → 0` in probability.
    Zero,
    /// Proper limit without a closed form, or no limit claimed.
    Unspecified,
}

/// All centering and norming objects for one law.
#[derive(Debug, Clone)]
pub struct NormingPlan {
    law: WLaw,
    case: RegimeCase,
}

impl NormingPlan {
    pub fn new(law: &WLaw) -> Self {
        NormingPlan {
            law: *law,
            case: classify_regime(law),
        }
    }

    pub fn case(&self) -> RegimeCase {
        self.case
    }

    pub fn b_n(&self, n: f64) -> Result<f64> {
        centering_b(&self.law, n)
    }

    pub fn b_prime_n(&self, n: f64) -> Result<f64> {
        centering_b_prime(&self.law, n)
    }

    pub fn a_n(&self, n: f64) -> Result<f64> {
        scaling_a(&self.law, n, self.case)
    }

    pub fn limit(&self) -> Result<LimitLaw> {
        Ok(match self.case {
            RegimeCase::CaseA | RegimeCase::CaseB1 | RegimeCase::CaseB2 | RegimeCase::CaseC1 => {
                LimitLaw::StandardNormal
            }
            RegimeCase::CaseC2 => {
                let WFamily::TwoSidedLogPareto { theta0, theta1, .. } = *self.law.family() else {
                    return Err(Error::Unsupported("case C2 needs a two-sided log-Pareto law".into()));
                };
                LimitLaw::StableIntegral(LimitIntegral::new(theta0, theta1)?)
            }
            RegimeCase::Comparable(c) => LimitLaw::Geometric { a: 1.0 / (c + 1.0) },
            RegimeCase::MuInfNuFin => LimitLaw::Zero,
            RegimeCase::CaseB3Open | RegimeCase::CaseC3Open => {
                return Err(Error::OpenRegime(self.case.label()));
            }
            RegimeCase::FiniteFinite | RegimeCase::AsymInfZero | RegimeCase::Lattice => LimitLaw::Unspecified,
        })
    }
}

/// `φ` tabulated on `[0, horizon]`, linear in `ln(1 + y)`.
#[derive(Debug, Clone)]
pub struct PhiTable {
    horizon: f64,
    step: f64,
    values: Vec<f64>,
}

/// Default node count for [`PhiTable::new`].
pub const PHI_TABLE_NODES: usize = 8192;

impl PhiTable {
    pub fn new(law: &WLaw, horizon: f64) -> Result<Self> {
        Self::with_nodes(law, horizon, PHI_TABLE_NODES)
    }

    pub fn with_nodes(law: &WLaw, horizon: f64, nodes: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "phi table over [0, {horizon}] with {nodes} nodes"
            )));
        }
        let step = horizon.ln_1p() / (nodes - 1) as f64;
        let values = (0..nodes)
            .map(|i| phi(law, (step * i as f64).exp_m1().min(horizon)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhiTable { horizon, step, values })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Interpolated `φ(y)` for `y ∈ [0, horizon]`.
    pub fn eval(&self, y: f64) -> f64 {
        let u = y.clamp(0.0, self.horizon).ln_1p() / self.step;
        let i = (u.floor() as usize).min(self.values.len() - 2);
        let frac = u - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}
