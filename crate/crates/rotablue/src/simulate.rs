//! Monte Carlo rotation panels and an empirical check of the estimator variance.
//!
//! Unit `u = j + a` occupies slot `a` (0-based) on occasion `j`, so every unit
//! enters at slot `N - 1`, moves one slot down per occasion and leaves after
//! slot 0. Its deviations from the mean follow a stationary AR(1) path with unit
//! variance and innovation variance `1 - rho^2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rotablue_core::{Error, ModelParams, RecurrenceSolution, RecursiveEstimator};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] Error),
}

/// Inputs of a Monte Carlo run. The number of occasions is `mu.len()`.
#[derive(Debug, Clone)]
pub struct PanelConfig {
    pub params: ModelParams,
    pub mu: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    /// Zero innovations and zero initial deviations: every value equals its mean.
    pub noiseless: bool,
}

/// `sin(j / 5)`, the default mean path.
pub fn sine_means(occasions: usize) -> Vec<f64> {
    (0..occasions).map(|j| (j as f64 / 5.0).sin()).collect()
}

/// Occasions discarded before scoring: `max(N, p, 20)`.
pub fn burn_in(solution: &RecurrenceSolution) -> usize {
    solution.params().len().max(solution.order()).max(20)
}

/// Burn-in plus enough occasions for the start-up transient to fall below 1e-12.
pub fn default_occasions(solution: &RecurrenceSolution) -> usize {
    burn_in(solution) + solution.truncation_length()
}

impl PanelConfig {
    pub fn new(params: ModelParams, occasions: usize, replications: usize, seed: u64) -> Self {
        Self {
            params,
            mu: sine_means(occasions),
            replications,
            seed,
            noiseless: false,
        }
    }

    pub fn occasions(&self) -> usize {
        self.mu.len()
    }

    /// Checks the config against the estimator it will feed.
    pub fn validate(&self, solution: &RecurrenceSolution) -> Result<(), SimError> {
        let needed = (solution.order() + 10).max(burn_in(solution) + 1);
        if self.occasions() < needed {
            return Err(SimError::InvalidConfig(format!(
                "need at least {needed} occasions, got {}",
                self.occasions()
            )));
        }
        if self.replications < 100 {
            return Err(SimError::InvalidConfig(format!(
                "need at least 100 replications, got {}",
                self.replications
            )));
        }
        if self.params != *solution.params() {
            return Err(SimError::InvalidConfig(
                "panel parameters differ from the solution's".into(),
            ));
        }
        if self.mu.iter().any(|m| !m.is_finite()) {
            return Err(SimError::InvalidConfig("means must be finite".into()));
        }
        Ok(())
    }
}

/// One replication: `values[j][a]`, with NaN in gap slots.
#[derive(Debug, Clone)]
pub struct Panel {
    pub values: Vec<Vec<f64>>,
}

/// Stream for one unit: the ChaCha key holds `(seed, replication)` and the
/// stream id is the unit number, so any replication or unit can be regenerated
/// on its own.
fn unit_rng(seed: u64, replication: u64, unit: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replication.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(unit);
    rng
}

fn unit_path(cfg: &PanelConfig, replication: usize, unit: usize, out: &mut [f64]) {
    if cfg.noiseless {
        out.fill(0.0);
        return;
    }
    let rho = cfg.params.rho();
    let scale = (1.0 - rho * rho).sqrt();
    let mut rng = unit_rng(cfg.seed, replication as u64, unit as u64);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut e = z();
    out[0] = e;
    for v in out.iter_mut().skip(1) {
        e = rho * e + scale * z();
        *v = e;
    }
}

/// Generates the panel of one replication.
pub fn generate_panel(cfg: &PanelConfig, replication: usize) -> Panel {
    let n = cfg.params.len();
    let occasions = cfg.occasions();
    let slots = cfg.params.pattern().slots();
    let mut values = vec![vec![f64::NAN; n]; occasions];
    let mut path = vec![0.0; n];
    for unit in 0..occasions + n - 1 {
        unit_path(cfg, replication, unit, &mut path);
        // the unit sits in slot N-1 on occasion unit - (N-1)
        for (a, &observed) in slots.iter().enumerate() {
            if !observed || unit < a || unit - a >= occasions {
                continue;
            }
            let j = unit - a;
            values[j][a] = cfg.mu[j] + path[n - 1 - a];
        }
    }
    Panel { values }
}

/// Estimation error `mu_hat - mu` at the final occasion of one replication.
pub fn final_error(
    cfg: &PanelConfig,
    solution: &RecurrenceSolution,
    replication: usize,
) -> Result<f64, Error> {
    let panel = generate_panel(cfg, replication);
    let mut est = RecursiveEstimator::new(solution);
    let mut last = 0.0;
    for x in &panel.values {
        last = est.push(x)?;
    }
    Ok(last - cfg.mu[cfg.occasions() - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub replications: usize,
    pub occasions: usize,
    pub theoretical_variance: f64,
    pub empirical_variance: f64,
    /// Standard error of `empirical_variance`.
    pub stderr: f64,
    pub pass: bool,
    pub bias: f64,
    pub bias_stderr: f64,
    pub bias_pass: bool,
    pub seed: u64,
}

/// Sample mean, unbiased variance and the standard error of that variance.
pub fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    let var = m2 / (n - 1.0);
    let m4 = m4 / n;
    let se = ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n)
        .max(0.0)
        .sqrt();
    (mean, var, se)
}

/// Runs the replications (in parallel, in a fixed order) and compares the
/// sample variance of the final-occasion error with `sum_m c_{0,m}`.
pub fn empirical_variance(
    cfg: &PanelConfig,
    solution: &RecurrenceSolution,
) -> Result<SimulationReport, SimError> {
    cfg.validate(solution)?;
    let errors = crate::with_thread_cap(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| final_error(cfg, solution, rep))
            .collect::<Result<Vec<f64>, Error>>()
    })?;
    let (bias, var, se) = moments(&errors);
    let bias_se = (var / errors.len() as f64).sqrt();
    let theoretical = solution.variance();
    Ok(SimulationReport {
        replications: cfg.replications,
        occasions: cfg.occasions(),
        theoretical_variance: theoretical,
        empirical_variance: var,
        stderr: se,
        pass: (var - theoretical).abs() < 3.0 * se,
        bias,
        bias_stderr: bias_se,
        bias_pass: bias.abs() < 3.0 * bias_se,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rotablue_core::recurrence::solve;
    use rotablue_core::{CascadePattern, Tolerances};

    fn setup(pattern: &str, rho: f64) -> (ModelParams, RecurrenceSolution) {
        let params = ModelParams::new(CascadePattern::parse(pattern).unwrap(), rho).unwrap();
        let sol = solve(&params, &Tolerances::default()).unwrap();
        (params, sol)
    }

    fn corr(pairs: &[(f64, f64)]) -> f64 {
        let n = pairs.len() as f64;
        let (mx, my) = pairs
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, y) in pairs {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn panel_follows_the_covariance_model() {
        let (params, _) = setup("1111", 0.9);
        let cfg = PanelConfig::new(params, 40, 200, 11);
        let mut lag3 = Vec::new();
        let mut cross = Vec::new();
        let mut marginal = Vec::new();
        for rep in 0..200 {
            let p = generate_panel(&cfg, rep);
            let dev = |j: usize, a: usize| p.values[j][a] - cfg.mu[j];
            for j in 0..37 {
                lag3.push((dev(j, 3), dev(j + 3, 0)));
                cross.push((dev(j, 0), dev(j, 1)));
                marginal.push(dev(j, 2));
            }
        }
        // 7400 pairs: standard errors around 0.005 for lag3, 0.012 otherwise
        assert!((corr(&lag3) - 0.729).abs() < 0.03, "{}", corr(&lag3));
        assert!(corr(&cross).abs() < 0.05, "{}", corr(&cross));
        let (_, var, _) = moments(&marginal);
        assert!((var - 1.0).abs() < 0.06, "{var}");
    }

    #[test]
    fn gap_slots_stay_empty() {
        let (params, _) = setup("1101101", 0.5);
        let cfg = PanelConfig::new(params, 30, 100, 1);
        let p = generate_panel(&cfg, 0);
        for row in &p.values {
            assert!(row[2].is_nan() && row[5].is_nan());
            assert!(row[0].is_finite() && row[6].is_finite());
        }
    }

    #[test]
    fn same_seed_same_panel() {
        let (params, sol) = setup("110011", 0.7);
        let cfg = PanelConfig::new(params, 60, 100, 42);
        // gap slots hold NaN, so compare bit patterns
        let bits = |rep| -> Vec<u64> {
            generate_panel(&cfg, rep)
                .values
                .concat()
                .iter()
                .map(|v| v.to_bits())
                .collect()
        };
        assert_eq!(bits(5), bits(5));
        assert_ne!(bits(5), bits(6));
        let a = empirical_variance(&cfg, &sol).unwrap();
        let b = empirical_variance(&cfg, &sol).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_constant_mean_has_no_error() {
        let (params, sol) = setup("1101101", 0.5);
        let mut cfg = PanelConfig::new(params, 60, 100, 3);
        cfg.mu = vec![2.5; 60];
        cfg.noiseless = true;
        for rep in 0..3 {
            assert!(final_error(&cfg, &sol, rep).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn config_invariants() {
        let (params, sol) = setup("111111", 0.9);
        assert!(PanelConfig::new(params.clone(), 15, 1000, 0)
            .validate(&sol)
            .is_err());
        assert!(PanelConfig::new(params.clone(), 60, 99, 0)
            .validate(&sol)
            .is_err());
        assert!(PanelConfig::new(params, 60, 100, 0).validate(&sol).is_ok());
    }

    #[test]
    fn moments_of_a_known_sample() {
        let (mean, var, se) = moments(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        assert!((var - 5.0 / 3.0).abs() < 1e-15);
        assert!(se > 0.0);
    }
}
