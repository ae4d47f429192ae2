//! Finite-horizon BLUE by direct constrained minimization.
//!
//! With weights `u_0..u_{T-1}` (one `N`-vector per occasion, lag `i` back
//! from the current one) the estimator variance is
//!
//! ```text
//! sum_i u_i' u_i + 2 sum_i sum_{k>=1} u_i' C^k u_{i+k}
//! ```
//!
//! minimized subject to `1' u_0 = 1`, `1' u_i = 0` for `i >= 1` and
//! `u_i[j] = 0` on gap slots. The KKT system is solved densely; the
//! multipliers of the first occasion converge to the variance.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::pattern::ModelParams;
use crate::recurrence::RecurrenceSolution;
use crate::slots::{apply_c_pow, dot};

/// Optimal finite-horizon weights.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Number of occasions `T`.
    pub horizon: usize,
    /// `u_0..u_{T-1}`, each of length `N`.
    pub weights: Vec<Vec<f64>>,
    /// Minimized variance.
    pub variance: f64,
    /// Multipliers `lambda_{j,i}` laid out `T x (h + 1)`; column `0` is
    /// unbiasedness, column `1 + g` the `g`-th gap slot.
    pub multipliers: Vec<Vec<f64>>,
    /// `||K z - rhs||_inf / max(1, ||K||_inf)`.
    pub kkt_residual: f64,
}

/// `sum_i u_i'u_i + 2 sum_i sum_k u_i' C^k u_{i+k}` for arbitrary weights.
pub fn variance_functional(rho: f64, u: &[Vec<f64>]) -> f64 {
    let n = u.first().map_or(0, Vec::len);
    let mut total = 0.0;
    for i in 0..u.len() {
        total += dot(&u[i], &u[i]);
        for k in 1..n.min(u.len() - i) {
            total += 2.0 * dot(&u[i], &apply_c_pow(rho, k, &u[i + k]));
        }
    }
    total
}

/// `max(50, 4 ceil(1 / (1 - r)))` for spectral radius `r` of the `d_m`.
pub fn default_horizon(max_modulus: f64) -> usize {
    let tail = (1.0 / (1.0 - max_modulus)).ceil();
    let tail = if tail.is_finite() && tail > 0.0 {
        tail as usize
    } else {
        0
    };
    50usize.max(4 * tail)
}

/// Solves `[2Q A'; A 0] (u, nu) = (0, b)`.
pub fn solve_finite_blue(params: &ModelParams, horizon: usize) -> Result<OracleSolution, Error> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let pattern = params.pattern();
    let rho = params.rho();
    let n = pattern.len();
    let gaps = pattern.gap_positions();
    let h = gaps.len();
    let vars = horizon * n;
    let cons = horizon * (h + 1);
    let size = vars + cons;

    let idx = |i: usize, s: usize| i * n + s;
    let mut k = DMatrix::<f64>::zeros(size, size);
    // The same unit sits in slot s at lag i and in slot s + k at lag i + k.
    for i in 0..horizon {
        for s in 0..n {
            k[(idx(i, s), idx(i, s))] = 2.0;
            let mut corr = 1.0;
            for lag in 1..n - s {
                corr *= rho;
                if i + lag >= horizon {
                    break;
                }
                let (a, b) = (idx(i, s), idx(i + lag, s + lag));
                k[(a, b)] = 2.0 * corr;
                k[(b, a)] = 2.0 * corr;
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(size);
    for i in 0..horizon {
        let row = vars + i * (h + 1);
        for s in 0..n {
            k[(row, idx(i, s))] = 1.0;
            k[(idx(i, s), row)] = 1.0;
        }
        if i == 0 {
            rhs[row] = 1.0;
        }
        for (g, &pos) in gaps.iter().enumerate() {
            let (r, c) = (row + 1 + g, idx(i, pos - 1));
            k[(r, c)] = 1.0;
            k[(c, r)] = 1.0;
        }
    }

    let scale = k
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(1.0, f64::max);
    let z = k.clone().lu().solve(&rhs).ok_or(Error::SingularKkt)?;
    let kkt_residual = (&k * &z - &rhs).amax() / scale;
    if !kkt_residual.is_finite() {
        return Err(Error::SingularKkt);
    }

    let weights: Vec<Vec<f64>> = (0..horizon)
        .map(|i| z.rows(i * n, n).iter().copied().collect())
        .collect();
    // nu = -2 lambda under this scaling
    let multipliers = (0..horizon)
        .map(|i| (0..=h).map(|j| -0.5 * z[vars + i * (h + 1) + j]).collect())
        .collect();
    let variance = variance_functional(rho, &weights);
    Ok(OracleSolution {
        horizon,
        weights,
        variance,
        multipliers,
        kkt_residual,
    })
}

/// Recursion versus oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    /// Horizon used.
    pub horizon: usize,
    /// Oracle variance.
    pub variance: f64,
    /// `sum_m c_{0,m}`.
    pub recursion_variance: f64,
    /// `|oracle - recursion|` variance.
    pub variance_gap: f64,
    /// Largest `|u_i[s] - w_i[s]|` over `i < T - 2p`.
    pub max_weight_gap: f64,
    /// Both gaps within [`WEIGHT_TOLERANCE`] and [`VARIANCE_TOLERANCE`].
    pub pass: bool,
}

/// Entrywise weight tolerance.
pub const WEIGHT_TOLERANCE: f64 = 1e-6;
/// Variance tolerance.
pub const VARIANCE_TOLERANCE: f64 = 1e-8;

/// Runs the oracle at `horizon` (or [`default_horizon`]) and compares it with
/// the unrolled recursion.
pub fn compare_oracle_vs_recursion(
    solution: &RecurrenceSolution,
    horizon: Option<usize>,
) -> Result<OracleComparison, Error> {
    let horizon = horizon.unwrap_or_else(|| default_horizon(solution.spectrum().max_modulus()));
    let oracle = solve_finite_blue(solution.params(), horizon)?;
    let buffer = 2 * solution.order();
    let compared = horizon.saturating_sub(buffer).max(1);
    let w = solution.unroll_weights(compared);
    let max_weight_gap = w
        .iter()
        .zip(&oracle.weights)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let variance_gap = (oracle.variance - solution.variance()).abs();
    Ok(OracleComparison {
        horizon,
        variance: oracle.variance,
        recursion_variance: solution.variance(),
        variance_gap,
        max_weight_gap,
        pass: max_weight_gap <= WEIGHT_TOLERANCE && variance_gap <= VARIANCE_TOLERANCE,
    })
}
