//! Integer moments of `geom(a)` on `{0, 1, 2, ...}` through the first-step
//! recurrence `m_1 = b`, `m_j = b (1 + Σ_{i<j} C(j,i) m_i)`, `b = (1-a)/a`.

use crate::error::{Error, Result};

pub const MAX_MOMENT_ORDER: usize = 64;

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `[E X, E X², ..., E X^kmax]` for `X ~ geom(a)`.
pub fn geometric_moments(a: f64, kmax: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("a must lie in (0, 1], got {a}")));
    }
    if kmax == 0 || kmax > MAX_MOMENT_ORDER {
        return Err(Error::InvalidParameter(format!(
            "moment order must lie in 1..={MAX_MOMENT_ORDER}, got {kmax}"
        )));
    }
    let b = (1.0 - a) / a;
    // Pascal row j holds C(j, i) for i = 0..=j
    let mut row = vec![1.0f64];
    let mut moments: Vec<f64> = Vec::with_capacity(kmax);
    for j in 1..=kmax {
        let mut next = vec![1.0; j + 1];
        for i in 1..j {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for (i, m) in moments.iter().enumerate() {
            acc.add(row[i + 1] * m);
        }
        moments.push(b * acc.value());
    }
    Ok(moments)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Σ_k k^j a (1-a)^k, summed until the terms vanish.
    fn brute_force(a: f64, j: i32) -> f64 {
        let mut acc = CompensatedSum::default();
        let q = 1.0 - a;
        let mut weight = a;
        let mut k = 0u64;
        loop {
            let term = (k as f64).powi(j) * weight;
            acc.add(term);
            if k > 50 && term < 1e-30 * acc.value() {
                break;
            }
            weight *= q;
            k += 1;
        }
        acc.value()
    }

    #[test]
    fn half() {
        let m = geometric_moments(0.5, 3).unwrap();
        assert_eq!(m, vec![1.0, 3.0, 13.0]);
    }

    #[test]
    fn degenerate_at_one() {
        assert!(geometric_moments(1.0, 8).unwrap().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn matches_series() {
        for &a in &[0.1, 0.5, 0.9] {
            let m = geometric_moments(a, 8).unwrap();
            for (j, &mj) in m.iter().enumerate() {
                let oracle = brute_force(a, j as i32 + 1);
                assert!(
                    ((mj - oracle) / oracle).abs() < 1e-10,
                    "a={a} j={} {mj} {oracle}",
                    j + 1
                );
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(geometric_moments(0.0, 3).is_err());
        assert!(geometric_moments(1.5, 3).is_err());
        assert!(geometric_moments(0.5, 65).is_err());
        assert!(geometric_moments(0.5, 64).unwrap().iter().all(|m| m.is_finite()));
    }
}
