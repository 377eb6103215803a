//! Laws of the stick-breaking factor `W` on `(0, 1)`.
//!
//! Samples are carried as the pair `(|log W|, |log(1 - W)|)`. Heavy-tailed
//! families put mass so close to 0 or 1 that `W` itself rounds to an endpoint
//! in `f64`, while both logarithms stay exact.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};
use crate::numerics::{self, log_complement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WFamily {
    Uniform01,
    Beta {
        a: f64,
        b: f64,
    },
    PointMass {
        x: f64,
    },
    /// `W = 1 - e^{-η}` with `η` Pareto of index `beta` and scale `xm`.
    RightLogPareto {
        beta: f64,
        xm: f64,
    },
    /// `W = 1 - e^{-η}` with `P{η > x} = min(1, c0 / ln(e + x))`.
    RightLogLogTail {
        c0: f64,
    },
    /// With probability `p`, `W = e^{-ξ}` (`ξ` Pareto(theta0, xm)); otherwise
    /// `W = 1 - e^{-η}` (`η` Pareto(theta1, xm)).
    TwoSidedLogPareto {
        p: f64,
        theta0: f64,
        theta1: f64,
        xm: f64,
    },
}

/// A validated law of `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WLaw {
    family: WFamily,
}

/// One draw of `W`, stored through its two logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WSample {
    /// `|log W|`
    pub neg_log_w: f64,
    /// `|log(1 - W)|`
    pub neg_log_1mw: f64,
}

impl WSample {
    fn from_w(w: f64) -> Self {
        WSample {
            neg_log_w: -w.ln(),
            neg_log_1mw: -(-w).ln_1p(),
        }
    }

    /// `W` in `f64`; may round to 0 or 1 for extreme draws.
    pub fn value(&self) -> f64 {
        (-self.neg_log_w).exp()
    }

    /// `1 - W` computed without cancellation.
    pub fn complement(&self) -> f64 {
        (-self.neg_log_1mw).exp()
    }
}

/// `P{ζ > x}` for `ζ` Pareto with index `theta` and scale `xm`.
pub(crate) fn pareto_tail(x: f64, theta: f64, xm: f64) -> f64 {
    if x <= xm {
        1.0
    } else {
        (x / xm).powf(-theta)
    }
}

fn sample_pareto<R: Rng + ?Sized>(theta: f64, xm: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    (xm * u.powf(-1.0 / theta)).min(f64::MAX)
}

fn finite_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite real, got {v}"
        )))
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// `E g(ζ)^power` where `g(x) = -ln(1 - e^{-x})` and `ζ` is Pareto(theta, xm).
fn pareto_log_complement_moment(theta: f64, xm: f64, power: i32) -> Result<f64> {
    let upper = log_complement(xm);
    numerics::integrate(
        |x| {
            let tail = 1.0 - pareto_tail(log_complement(x), theta, xm);
            if power == 1 {
                tail
            } else {
                power as f64 * x.powi(power - 1) * tail
            }
        },
        0.0,
        upper,
    )
}

impl WLaw {
    pub fn new(family: WFamily) -> Result<Self> {
        match family {
            WFamily::Uniform01 => {}
            WFamily::Beta { a, b } => {
                finite_positive("a", a)?;
                finite_positive("b", b)?;
            }
            WFamily::PointMass { x } => open_unit("x", x)?,
            WFamily::RightLogPareto { beta, xm } => {
                open_unit("beta", beta)?;
                finite_positive("xm", xm)?;
            }
            WFamily::RightLogLogTail { c0 } => {
                if !(c0.is_finite() && c0 >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "c0 must be >= 1 (smaller values put an atom at W = 0), got {c0}"
                    )));
                }
            }
            WFamily::TwoSidedLogPareto { p, theta0, theta1, xm } => {
                open_unit("p", p)?;
                finite_positive("theta0", theta0)?;
                finite_positive("theta1", theta1)?;
                finite_positive("xm", xm)?;
            }
        }
        Ok(WLaw { family })
    }

    pub fn uniform() -> Self {
        WLaw {
            family: WFamily::Uniform01,
        }
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::new(WFamily::Beta { a, b })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(WFamily::PointMass { x })
    }

    pub fn right_log_pareto(beta: f64, xm: f64) -> Result<Self> {
        Self::new(WFamily::RightLogPareto { beta, xm })
    }

    pub fn right_log_log_tail(c0: f64) -> Result<Self> {
        Self::new(WFamily::RightLogLogTail { c0 })
    }

    pub fn two_sided_log_pareto(p: f64, theta0: f64, theta1: f64, xm: f64) -> Result<Self> {
        Self::new(WFamily::TwoSidedLogPareto { p, theta0, theta1, xm })
    }

    pub fn family(&self) -> &WFamily {
        &self.family
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WSample {
        match self.family {
            WFamily::Uniform01 => WSample::from_w(Open01.sample(rng)),
            WFamily::Beta { a, b } => {
                // W = Ga / (Ga + Gb) keeps both logs accurate
                let ga = Gamma::new(a, 1.0).expect("validated").sample(rng);
                let gb = Gamma::new(b, 1.0).expect("validated").sample(rng);
                let total = (ga + gb).ln();
                WSample {
                    neg_log_w: total - ga.ln(),
                    neg_log_1mw: total - gb.ln(),
                }
            }
            WFamily::PointMass { x } => WSample::from_w(x),
            WFamily::RightLogPareto { beta, xm } => {
                let eta = sample_pareto(beta, xm, rng);
                WSample {
                    neg_log_w: log_complement(eta),
                    neg_log_1mw: eta,
                }
            }
            WFamily::RightLogLogTail { c0 } => {
                let u: f64 = Open01.sample(rng);
                let eta = ((c0 / u).exp() - std::f64::consts::E).min(f64::MAX);
                WSample {
                    neg_log_w: log_complement(eta),
                    neg_log_1mw: eta,
                }
            }
            WFamily::TwoSidedLogPareto { p, theta0, theta1, xm } => {
                if rng.random::<f64>() < p {
                    let xi = sample_pareto(theta0, xm, rng);
                    WSample {
                        neg_log_w: xi,
                        neg_log_1mw: log_complement(xi),
                    }
                } else {
                    let eta = sample_pareto(theta1, xm, rng);
                    WSample {
                        neg_log_w: log_complement(eta),
                        neg_log_1mw: eta,
                    }
                }
            }
        }
    }

    /// `P{|log W| > x}`.
    pub fn log_tail_left(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.family {
            WFamily::Uniform01 => (-x).exp(),
            WFamily::Beta { a, b } => beta_reg(a, b, (-x).exp()),
            WFamily::PointMass { x: w } => f64::from(x < -w.ln()),
            WFamily::RightLogPareto { beta, xm } => 1.0 - pareto_tail(log_complement(x), beta, xm),
            WFamily::RightLogLogTail { c0 } => 1.0 - log_log_tail(log_complement(x), c0),
            WFamily::TwoSidedLogPareto { p, theta0, theta1, xm } => {
                p * pareto_tail(x, theta0, xm) + (1.0 - p) * (1.0 - pareto_tail(log_complement(x), theta1, xm))
            }
        }
    }

    /// `P{|log(1 - W)| > x}`.
    pub fn log_tail_right(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.family {
            WFamily::Uniform01 => (-x).exp(),
            WFamily::Beta { a, b } => beta_reg(b, a, (-x).exp()),
            WFamily::PointMass { x: w } => f64::from(x < -(-w).ln_1p()),
            WFamily::RightLogPareto { beta, xm } => pareto_tail(x, beta, xm),
            WFamily::RightLogLogTail { c0 } => log_log_tail(x, c0),
            WFamily::TwoSidedLogPareto { p, theta0, theta1, xm } => {
                p * (1.0 - pareto_tail(log_complement(x), theta0, xm)) + (1.0 - p) * pareto_tail(x, theta1, xm)
            }
        }
    }

    /// Points where the right log-tail is not smooth; quadrature splits there.
    pub(crate) fn right_tail_kinks(&self) -> Vec<f64> {
        match self.family {
            WFamily::PointMass { x } => vec![-(-x).ln_1p()],
            WFamily::RightLogPareto { xm, .. } => vec![xm],
            WFamily::RightLogLogTail { c0 } => vec![c0.exp() - std::f64::consts::E],
            WFamily::TwoSidedLogPareto { xm, .. } => vec![xm, log_complement(xm)],
            _ => Vec::new(),
        }
    }

    pub(crate) fn left_tail_kinks(&self) -> Vec<f64> {
        match self.family {
            WFamily::PointMass { x } => vec![-x.ln()],
            WFamily::RightLogPareto { xm, .. } => vec![log_complement(xm)],
            WFamily::RightLogLogTail { c0 } => {
                vec![log_complement(c0.exp() - std::f64::consts::E)]
            }
            WFamily::TwoSidedLogPareto { xm, .. } => vec![xm, log_complement(xm)],
            _ => Vec::new(),
        }
    }

    /// `μ = E|log W|`; `f64::INFINITY` when the integral diverges.
    pub fn mu(&self) -> f64 {
        self.log_moment_left(1)
            .expect("log-moment quadrature on a validated law")
    }

    /// `ν = E|log(1 - W)|`; `f64::INFINITY` when the integral diverges.
    pub fn nu(&self) -> f64 {
        match self.family {
            WFamily::Uniform01 => 1.0,
            WFamily::Beta { a, b } => digamma(a + b) - digamma(b),
            WFamily::PointMass { x } => -(-x).ln_1p(),
            WFamily::RightLogPareto { .. } | WFamily::RightLogLogTail { .. } => f64::INFINITY,
            WFamily::TwoSidedLogPareto { p, theta0, theta1, xm } => {
                if theta1 <= 1.0 {
                    return f64::INFINITY;
                }
                let left = pareto_log_complement_moment(theta0, xm, 1).expect("quadrature");
                p * left + (1.0 - p) * theta1 * xm / (theta1 - 1.0)
            }
        }
    }

    /// `σ² = Var(log W)`; `f64::INFINITY` when the second moment diverges.
    pub fn sigma2(&self) -> f64 {
        match self.family {
            WFamily::Uniform01 => 1.0,
            WFamily::Beta { a, b } => numerics::trigamma(a) - numerics::trigamma(a + b),
            WFamily::PointMass { .. } => 0.0,
            _ => {
                let m1 = self.mu();
                let m2 = self.log_moment_left(2).expect("log-moment quadrature");
                if m2.is_infinite() {
                    f64::INFINITY
                } else {
                    (m2 - m1 * m1).max(0.0)
                }
            }
        }
    }

    /// `E|log W|^power` for power 1 or 2.
    fn log_moment_left(&self, power: i32) -> Result<f64> {
        match self.family {
            WFamily::Uniform01 => Ok(if power == 1 { 1.0 } else { 2.0 }),
            WFamily::Beta { a, b } => {
                let m = digamma(a + b) - digamma(a);
                Ok(if power == 1 {
                    m
                } else {
                    numerics::trigamma(a) - numerics::trigamma(a + b) + m * m
                })
            }
            WFamily::PointMass { x } => Ok((-x.ln()).powi(power)),
            WFamily::RightLogPareto { beta, xm } => pareto_log_complement_moment(beta, xm, power),
            WFamily::RightLogLogTail { c0 } => {
                let eta_min = c0.exp() - std::f64::consts::E;
                // for c0 = 1 the tail is ~e^{-x-1}; 60 leaves < 1e-26 out
                let upper = log_complement(eta_min).min(60.0);
                let kinks = numerics::breakpoints(0.0, upper, &[1.0, 5.0, 20.0]);
                numerics::integrate_with_breaks(
                    |x| {
                        let tail = 1.0 - log_log_tail(log_complement(x), c0);
                        if power == 1 {
                            tail
                        } else {
                            2.0 * x * tail
                        }
                    },
                    &kinks,
                )
            }
            WFamily::TwoSidedLogPareto { p, theta0, theta1, xm } => {
                let t = power as f64;
                if theta0 <= t {
                    return Ok(f64::INFINITY);
                }
                let xi_moment = theta0 * xm.powi(power) / (theta0 - t);
                let right = pareto_log_complement_moment(theta1, xm, power)?;
                Ok(p * xi_moment + (1.0 - p) * right)
            }
        }
    }

    /// `E W^j (1 - W)^{i-j}` for families where it has a closed form.
    pub fn mixed_moment(&self, i: u64, j: u64) -> Option<f64> {
        self.ln_mixed_moment(i, j).map(f64::exp)
    }

    pub(crate) fn ln_mixed_moment(&self, i: u64, j: u64) -> Option<f64> {
        debug_assert!(j <= i);
        let (jf, kf) = (j as f64, (i - j) as f64);
        match self.family {
            WFamily::Uniform01 => Some(statrs::function::beta::ln_beta(jf + 1.0, kf + 1.0)),
            WFamily::Beta { a, b } => {
                Some(statrs::function::beta::ln_beta(a + jf, b + kf) - statrs::function::beta::ln_beta(a, b))
            }
            WFamily::PointMass { x } => Some(jf * x.ln() + kf * (-x).ln_1p()),
            _ => None,
        }
    }

    /// True when `|log W|` is supported on a lattice.
    pub fn is_lattice(&self) -> bool {
        matches!(self.family, WFamily::PointMass { .. })
    }
}

fn log_log_tail(x: f64, c0: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    (c0 / (std::f64::consts::E + x).ln()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn families() -> Vec<WLaw> {
        vec![
            WLaw::uniform(),
            WLaw::beta(2.0, 3.0).unwrap(),
            WLaw::beta(0.4, 0.7).unwrap(),
            WLaw::point_mass(0.3).unwrap(),
            WLaw::right_log_pareto(0.5, 1.0).unwrap(),
            WLaw::right_log_log_tail(1.0).unwrap(),
            WLaw::right_log_log_tail(2.0).unwrap(),
            WLaw::two_sided_log_pareto(1.0 / 3.0, 0.5, 0.5, 1.0).unwrap(),
            WLaw::two_sided_log_pareto(0.5, 1.5, 0.2, 1.0).unwrap(),
        ]
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(WLaw::point_mass(1.0).is_err());
        assert!(WLaw::point_mass(0.0).is_err());
        assert!(WLaw::right_log_pareto(1.0, 1.0).is_err());
        assert!(WLaw::right_log_pareto(0.0, 1.0).is_err());
        assert!(WLaw::two_sided_log_pareto(1.2, 0.5, 0.5, 1.0).is_err());
        assert!(WLaw::beta(-1.0, 1.0).is_err());
        assert!(WLaw::right_log_log_tail(0.5).is_err());
    }

    #[test]
    fn uniform_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let law = WLaw::uniform();
        let n = 1_000_000;
        let mean = (0..n).map(|_| law.sample(&mut rng).value()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
    }

    #[test]
    fn point_mass_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let law = WLaw::point_mass(0.3).unwrap();
        for _ in 0..100 {
            assert!((law.sample(&mut rng).value() - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn two_sided_branch_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let law = WLaw::two_sided_log_pareto(1.0 / 3.0, 0.5, 0.5, 1.0).unwrap();
        let n = 300_000;
        let below = (0..n).filter(|_| law.sample(&mut rng).neg_log_w > 1.0).count();
        let frac = below as f64 / n as f64;
        let se = (1.0 / 3.0 * 2.0 / 3.0 / n as f64).sqrt();
        assert!((frac - 1.0 / 3.0).abs() < 4.0 * se, "{frac}");
    }

    #[test]
    fn samples_lie_strictly_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for law in families() {
            for _ in 0..20_000 {
                let s = law.sample(&mut rng);
                assert!(s.neg_log_w >= 0.0 && s.neg_log_1mw >= 0.0, "{law:?} {s:?}");
                assert!(s.neg_log_w.is_finite() && s.neg_log_1mw.is_finite(), "{law:?} {s:?}");
                assert!(s.neg_log_w > 0.0 || s.neg_log_1mw > 700.0, "{law:?} {s:?}");
                assert!(s.neg_log_1mw > 0.0 || s.neg_log_w > 700.0, "{law:?} {s:?}");
                // W + (1 - W) = 1 in exact arithmetic
                assert!((s.value() + s.complement() - 1.0).abs() < 1e-12, "{law:?} {s:?}");
            }
        }
    }

    #[test]
    fn tail_closed_forms() {
        let law = WLaw::right_log_pareto(0.5, 1.0).unwrap();
        assert!((law.log_tail_right(4.0) - 0.5).abs() < 1e-15);
        let u = WLaw::uniform();
        for &x in &[0.0, 0.3, 2.0, 10.0] {
            assert!((u.log_tail_left(x) - (-x).exp()).abs() < 1e-15);
        }
        let two = WLaw::two_sided_log_pareto(1.0 / 3.0, 0.5, 0.5, 1.0).unwrap();
        let x = 100.0;
        assert!((two.log_tail_right(x) / (2.0 / 3.0 * x.powf(-0.5)) - 1.0).abs() < 1e-12);
        // Beta(1,1) is uniform
        let b = WLaw::beta(1.0, 1.0).unwrap();
        assert!((b.log_tail_left(1.5) - (-1.5f64).exp()).abs() < 1e-12);
        assert!((b.log_tail_right(0.7) - (-0.7f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn tails_are_survival_functions() {
        let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).chain([50.0, 500.0, 1e5]).collect();
        for law in families() {
            assert_eq!(law.log_tail_left(0.0), 1.0, "{law:?}");
            assert_eq!(law.log_tail_right(0.0), 1.0, "{law:?}");
            for tail in [WLaw::log_tail_left, WLaw::log_tail_right] {
                let vals: Vec<f64> = grid.iter().map(|&x| tail(&law, x)).collect();
                for w in vals.windows(2) {
                    assert!(w[1] <= w[0] + 1e-14, "{law:?}");
                    assert!((0.0..=1.0).contains(&w[1]));
                }
            }
        }
    }

    #[test]
    fn empirical_tails_match_analytic() {
        let n = 1_000_000;
        let grid = [0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];
        for (k, law) in families().into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
            let samples: Vec<WSample> = (0..n).map(|_| law.sample(&mut rng)).collect();
            for &x in &grid {
                for (left, analytic) in [(true, law.log_tail_left(x)), (false, law.log_tail_right(x))] {
                    let hits = samples
                        .iter()
                        .filter(|s| if left { s.neg_log_w > x } else { s.neg_log_1mw > x })
                        .count();
                    let emp = hits as f64 / n as f64;
                    let bound = 4.0 * (analytic * (1.0 - analytic) / n as f64).sqrt();
                    assert!(
                        (emp - analytic).abs() <= bound.max(1e-12),
                        "{law:?} left={left} x={x} emp={emp} analytic={analytic}"
                    );
                }
            }
        }
    }

    #[test]
    fn two_sided_left_tail_ratio_at_ten_xm() {
        let law = WLaw::two_sided_log_pareto(0.4, 1.5, 0.7, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 2_000_000;
        let x = 20.0;
        let hits = (0..n).filter(|_| law.sample(&mut rng).neg_log_w > x).count() as f64;
        let leading = 0.4 * (x / 2.0f64).powf(-1.5);
        let se = (leading / n as f64).sqrt();
        assert!((hits / n as f64 - leading).abs() < 4.0 * se);
    }

    #[test]
    fn moments() {
        let u = WLaw::uniform();
        assert_eq!(u.mu(), 1.0);
        assert_eq!(u.sigma2(), 1.0);
        assert!(WLaw::two_sided_log_pareto(0.3, 1.0, 2.0, 1.0)
            .unwrap()
            .mu()
            .is_infinite());
        assert!(WLaw::two_sided_log_pareto(0.3, 0.7, 2.0, 1.0)
            .unwrap()
            .mu()
            .is_infinite());
        assert!(WLaw::right_log_pareto(0.5, 1.0).unwrap().nu().is_infinite());
        assert!(WLaw::two_sided_log_pareto(0.5, 1.5, 0.2, 1.0)
            .unwrap()
            .sigma2()
            .is_infinite());
        // Beta(1,1) equals uniform
        let b = WLaw::beta(1.0, 1.0).unwrap();
        assert!((b.mu() - 1.0).abs() < 1e-12);
        assert!((b.sigma2() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn moments_agree_with_tail_integrals() {
        for law in families() {
            let mu = law.mu();
            if !mu.is_finite() {
                continue;
            }
            let mut kinks = law.left_tail_kinks();
            kinks.extend([0.5, 1.0, 2.0, 5.0, 10.0, 40.0]);
            let pts = numerics::breakpoints(0.0, 400.0, &kinks);
            let mut q = numerics::integrate_with_breaks(|x| law.log_tail_left(x), &pts).unwrap();
            if let WFamily::TwoSidedLogPareto { p, theta0, xm, .. } = *law.family() {
                q += p * xm.powf(theta0) * 400f64.powf(1.0 - theta0) / (theta0 - 1.0);
            }
            assert!((q - mu).abs() < 1e-7 * mu.max(1.0), "{law:?} {q} {mu}");
            let s2 = law.sigma2();
            if s2.is_finite() && !matches!(law.family(), WFamily::TwoSidedLogPareto { .. }) {
                let q2 = numerics::integrate_with_breaks(|x| 2.0 * x * law.log_tail_left(x), &pts).unwrap();
                assert!(
                    (q2 - mu * mu - s2).abs() < 1e-6 * s2.max(1.0),
                    "{law:?} {} {s2}",
                    q2 - mu * mu
                );
            }
        }
    }

    #[test]
    fn mixed_moments_closed_form() {
        // Uniform: E W^j (1-W)^{i-j} = j!(i-j)!/(i+1)!
        let u = WLaw::uniform();
        let v = u.mixed_moment(4, 1).unwrap();
        assert!((v - 1.0 / 20.0).abs() < 1e-14);
        assert!(WLaw::right_log_pareto(0.5, 1.0).unwrap().mixed_moment(3, 1).is_none());
    }
}
