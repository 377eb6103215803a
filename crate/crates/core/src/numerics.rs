//! Numerical plumbing: adaptive Gauss–Kronrod quadrature, trigamma and root
//! bracketing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Absolute tolerance for every analytic quadrature in the crate.
pub const QUAD_ABS_TOL: f64 = 1e-10;
/// Relative floor that keeps large integrals from chasing roundoff.
const QUAD_REL_TOL: f64 = 1e-13;
/// Hard cap on interval subdivisions.
pub const QUAD_MAX_SUBDIVISIONS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance [`QUAD_ABS_TOL`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate_with_breaks(f, &[a, b])
}

/// Integrates over consecutive segments of `points` (sorted ascending), which
/// is how callers pass kinks of piecewise integrands.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64]) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, err) = gk15(&f, a, b);
        total += value;
        total_err += err;
        heap.push(Piece { a, b, value, err });
    }
    let mut splits = 0;
    while total_err > QUAD_ABS_TOL.max(QUAD_REL_TOL * total.abs()) {
        let Some(worst) = heap.pop() else { break };
        if splits >= QUAD_MAX_SUBDIVISIONS {
            return Err(Error::Quadrature {
                lo: points[0],
                hi: points[points.len() - 1],
                err: total_err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval collapsed to adjacent floats; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        splits += 1;
    }
    // re-sum to shed accumulated update drift
    Ok(heap.iter().map(|p| p.value).sum())
}

/// Sorted, deduplicated break points clipped to `[a, b]`.
pub fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    pts.extend(interior.iter().copied().filter(|x| x.is_finite() && *x > a && *x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Trigamma function for positive arguments.
pub fn trigamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

/// Root of a nondecreasing function on `[lo, hi]` by bisection.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, abs_tol: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= abs_tol || mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `-ln(1 - e^{-x})` for `x > 0`; the map is an involution on `(0, ∞)`.
pub fn log_complement(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else if x < std::f64::consts::LN_2 {
        -(-(-x).exp_m1()).ln()
    } else {
        -(-(-x).exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_smooth() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn handles_kinks_and_endpoint_singularity() {
        let v = integrate_with_breaks(|x: f64| (x - 0.3).abs(), &breakpoints(0.0, 1.0, &[0.3])).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
        let v = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn trigamma_known_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-12);
        assert!((trigamma(0.5) - 3.0 * pi2_6).abs() < 1e-12);
        assert!((trigamma(2.0) - (pi2_6 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn log_complement_is_involution() {
        for &x in &[1e-8, 0.1, 0.5, 1.0, 3.0, 20.0] {
            let y = log_complement(x);
            assert!((log_complement(y) - x).abs() <= 1e-9 * x.max(1.0), "x={x}");
        }
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
