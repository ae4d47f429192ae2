//! Generalized least squares on the stacked observations, written without
//! any of the crate's internals. Serves as an independent reference for the
//! finite-horizon estimator.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

pub struct Gls {
    /// `u_0..u_{T-1}` as full `N`-vectors, zero on gap slots.
    pub weights: Vec<Vec<f64>>,
    pub variance: f64,
}

/// BLUE of the current mean from `horizon` occasions of a cascade pattern.
pub fn gls_blue(slots: &[bool], rho: f64, horizon: usize) -> Gls {
    let n = slots.len();
    // (lag, slot) for every observed entry; unit id = slot - lag
    let obs: Vec<(usize, usize)> = (0..horizon)
        .flat_map(|i| (0..n).filter(|&s| slots[s]).map(move |s| (i, s)))
        .collect();
    let k = obs.len();
    let sigma = DMatrix::from_fn(k, k, |a, b| {
        let (ia, sa) = obs[a];
        let (ib, sb) = (obs[b].0, obs[b].1);
        if sa as i64 - ia as i64 == sb as i64 - ib as i64 {
            rho.powi((ia as i64 - ib as i64).abs() as i32)
        } else {
            0.0
        }
    });
    let design = DMatrix::from_fn(k, horizon, |a, j| if obs[a].0 == j { 1.0 } else { 0.0 });
    let chol = sigma.cholesky().expect("covariance is positive definite");
    let sinv_d = chol.solve(&design);
    let info = design.transpose() * &sinv_d;
    let info_inv = info
        .try_inverse()
        .expect("information matrix is invertible");
    // weights on observations: row 0 of (D' S^-1 D)^-1 D' S^-1
    let row: DVector<f64> = sinv_d * info_inv.column(0);
    let mut weights = vec![vec![0.0; n]; horizon];
    for (a, &(i, s)) in obs.iter().enumerate() {
        weights[i][s] = row[a];
    }
    Gls {
        weights,
        variance: info_inv[(0, 0)],
    }
}
