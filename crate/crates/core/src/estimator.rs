//! Running the recursion over a stream of occasions.
//!
//! Each occasion supplies the `N`-slot vector `X_t`; gap slots are ignored
//! (they may hold anything, including NaN). The first `p` estimates are
//! formed directly from the weights `w_0..w_t` with the unobserved past taken
//! as zero; after that the recursion takes over. Both paths describe the same
//! linear filter, so the switch is seamless.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::Error;
use crate::recurrence::RecurrenceSolution;

fn masked_dot(mask: &[bool], w: &[f64], x: &[f64]) -> f64 {
    mask.iter()
        .zip(w)
        .zip(x)
        .filter(|((&m, _), _)| m)
        .map(|((_, w), x)| w * x)
        .sum()
}

/// Streaming estimator holding the last `p + 1` occasions and `p` estimates.
#[derive(Debug, Clone)]
pub struct RecursiveEstimator {
    a: Vec<f64>,
    r: Vec<Vec<f64>>,
    bootstrap: Vec<Vec<f64>>,
    mask: Vec<bool>,
    observations: VecDeque<Vec<f64>>,
    estimates: VecDeque<f64>,
    seen: usize,
}

impl RecursiveEstimator {
    /// Prepares an estimator with empty history.
    pub fn new(solution: &RecurrenceSolution) -> Self {
        let p = solution.order();
        Self {
            a: solution.a().to_vec(),
            r: solution.r().to_vec(),
            bootstrap: solution.unroll_weights(p),
            mask: solution.params().pattern().slots().to_vec(),
            observations: VecDeque::with_capacity(p + 1),
            estimates: VecDeque::with_capacity(p),
            seen: 0,
        }
    }

    /// Number of occasions estimated directly before the recursion starts.
    pub fn bootstrap_len(&self) -> usize {
        self.a.len()
    }

    /// Occasions consumed so far.
    pub fn occasions(&self) -> usize {
        self.seen
    }

    /// Consumes `X_t` and returns the estimate of `mu_t`.
    pub fn push(&mut self, x: &[f64]) -> Result<f64, Error> {
        let n = self.mask.len();
        if x.len() != n {
            return Err(Error::ObservationLength {
                occasion: self.seen,
                got: x.len(),
                expected: n,
            });
        }
        let p = self.a.len();
        if self.observations.len() == p + 1 {
            self.observations.pop_back();
        }
        self.observations.push_front(x.to_vec());

        let estimate = if self.seen < p {
            self.observations
                .iter()
                .zip(&self.bootstrap)
                .map(|(obs, w)| masked_dot(&self.mask, w, obs))
                .sum()
        } else {
            let past: f64 = self.a.iter().zip(&self.estimates).map(|(a, m)| a * m).sum();
            let current: f64 = self
                .observations
                .iter()
                .zip(&self.r)
                .map(|(obs, r)| masked_dot(&self.mask, r, obs))
                .sum();
            past + current
        };

        if p > 0 {
            if self.estimates.len() == p {
                self.estimates.pop_back();
            }
            self.estimates.push_front(estimate);
        }
        self.seen += 1;
        Ok(estimate)
    }
}

/// Estimates `mu_0..mu_{T-1}` for a whole series.
pub fn estimate_series(
    solution: &RecurrenceSolution,
    data: &[Vec<f64>],
) -> Result<Vec<f64>, Error> {
    let mut est = RecursiveEstimator::new(solution);
    if data.len() < est.bootstrap_len() {
        return Err(Error::InsufficientHistory {
            needed: est.bootstrap_len(),
            got: data.len(),
        });
    }
    data.iter().map(|x| est.push(x)).collect()
}

/// `sum_{i < min(L, t+1)} w_i' X_{t-i}` with gap slots skipped.
pub fn direct_estimate(
    solution: &RecurrenceSolution,
    weights: &[Vec<f64>],
    data: &[Vec<f64>],
    t: usize,
) -> f64 {
    let mask = solution.params().pattern().slots();
    weights
        .iter()
        .take(t + 1)
        .enumerate()
        .map(|(i, w)| masked_dot(mask, w, &data[t - i]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{CascadePattern, ModelParams};
    use crate::recurrence::solve;
    use crate::Tolerances;
    use alloc::vec;

    fn sol(p: &str, rho: f64) -> RecurrenceSolution {
        let params = ModelParams::new(CascadePattern::parse(p).unwrap(), rho).unwrap();
        solve(&params, &Tolerances::default()).unwrap()
    }

    fn noise(len: usize, n: usize) -> Vec<Vec<f64>> {
        // small LCG, deterministic
        let mut state = 0x2545_f491_4f6c_dd1du64;
        (0..len)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        state = state
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(1442695040888963407);
                        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_data_is_recovered_exactly() {
        let s = sol("110011", 0.7);
        let data = vec![vec![3.5; 6]; 40];
        for (t, m) in estimate_series(&s, &data).unwrap().into_iter().enumerate() {
            assert!((m - 3.5).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn gap_slots_are_ignored() {
        let s = sol("1101101", 0.5);
        let mut data = noise(30, 7);
        let clean = estimate_series(&s, &data).unwrap();
        for x in &mut data {
            x[2] = f64::NAN;
            x[5] = 1e9;
        }
        assert_eq!(estimate_series(&s, &data).unwrap(), clean);
    }

    #[test]
    fn recursion_matches_direct_weighting() {
        for (p, rho) in [("111111", 0.9), ("110011", 0.7), ("1111000000001111", 0.9)] {
            let s = sol(p, rho);
            let len = s.truncation_length();
            let w = s.unroll_weights(len);
            let data = noise(len + 40, s.params().len());
            let rec = estimate_series(&s, &data).unwrap();
            for (t, est) in rec.iter().enumerate() {
                assert!(
                    (est - direct_estimate(&s, &w, &data, t)).abs() < 1e-9,
                    "{p} t={t}"
                );
            }
        }
    }

    #[test]
    fn patterson_step_uses_single_lag() {
        let s = sol("111111", 0.9);
        let data = noise(5, 6);
        let est = estimate_series(&s, &data).unwrap();
        let r = s.r();
        let dot = |w: &[f64], x: &[f64]| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let expect = s.a()[0] * est[2] + dot(&r[0], &data[3]) + dot(&r[1], &data[2]);
        assert!((est[3] - expect).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let s = sol("110011", 0.7);
        assert_eq!(
            estimate_series(&s, &noise(2, 6)).unwrap_err(),
            Error::InsufficientHistory { needed: 3, got: 2 }
        );
        let mut est = RecursiveEstimator::new(&s);
        assert_eq!(
            est.push(&[1.0; 5]).unwrap_err(),
            Error::ObservationLength {
                occasion: 0,
                got: 5,
                expected: 6
            }
        );
    }
}
