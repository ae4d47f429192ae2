//! The characteristic polynomial `Q_p` of a rotation pattern.
//!
//! For a pattern with `N` slots and gaps of sizes `m_1..m_s`,
//!
//! ```text
//! Q_p(x) = (N-1) l(x) + 1 - rho^2 - l(x)^2 * sum_j tr(T_{m_j}(x) R_{m_j}^{-1}),
//! l(x)   = 1 + rho^2 - 2 rho x,
//! ```
//!
//! where `T_m(x)` is the symmetric Toeplitz matrix with entries
//! `T_{|i-j|}(x)` (Chebyshev polynomials of the first kind) and `R_m` is
//! tridiagonal with `1 + rho^2` on the diagonal and `-rho` beside it.
//! Each trace term has degree `m - 1`, so `deg Q_p = p`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::Error;
use crate::pattern::ModelParams;
use crate::poly::RealPolynomial;
use crate::tridiag;

/// `T_k` by the three-term recurrence.
pub fn chebyshev_t(k: usize) -> RealPolynomial {
    chebyshev_table(k)
        .pop()
        .unwrap_or_else(|| RealPolynomial::constant(1.0))
}

/// `[T_0, ..., T_k]`.
pub fn chebyshev_table(k: usize) -> Vec<RealPolynomial> {
    let mut table = vec![RealPolynomial::constant(1.0)];
    if k == 0 {
        return table;
    }
    table.push(RealPolynomial::x());
    let two_x = RealPolynomial::new(vec![0.0, 2.0]);
    for j in 1..k {
        let next = &(&two_x * &table[j]) - &table[j - 1];
        table.push(next);
    }
    table
}

/// `R_m`: `1 + rho^2` on the diagonal, `-rho` on both off-diagonals.
pub fn r_matrix(m: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            1.0 + rho * rho
        } else if i.abs_diff(j) == 1 {
            -rho
        } else {
            0.0
        }
    })
}

/// `x -> tr(T_m(x) R_m^{-1})` as a degree `m - 1` polynomial.
pub fn trace_polynomial(m: usize, rho: f64) -> Result<RealPolynomial, Error> {
    let table = chebyshev_table(m.saturating_sub(1));
    trace_polynomial_with(m, rho, &table)
}

fn trace_polynomial_with(
    m: usize,
    rho: f64,
    table: &[RealPolynomial],
) -> Result<RealPolynomial, Error> {
    if m == 0 {
        return Ok(RealPolynomial::zero());
    }
    let inv = tridiag::symmetric_toeplitz_inverse(m, 1.0 + rho * rho, -rho)?;
    // Weight of T_k is the sum of R^{-1} entries on the k-th diagonal pair.
    let mut weights = vec![0.0; m];
    for (i, row) in inv.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            weights[i.abs_diff(j)] += v;
        }
    }
    let mut out = vec![0.0; m];
    for (k, w) in weights.iter().enumerate() {
        for (deg, c) in table[k].coeffs().iter().enumerate() {
            out[deg] += w * c;
        }
    }
    Ok(RealPolynomial::new(out))
}

/// Assembles `Q_p` for the given pattern and correlation.
pub fn build_qp(params: &ModelParams) -> Result<RealPolynomial, Error> {
    let rho = params.rho();
    let n = params.len() as f64;
    let sizes = params.pattern().gap_sizes();
    let max_gap = sizes.iter().copied().max().unwrap_or(0);
    let table = chebyshev_table(max_gap.saturating_sub(1));

    let l = RealPolynomial::new(vec![1.0 + rho * rho, -2.0 * rho]);
    let mut traces = RealPolynomial::zero();
    for &m in &sizes {
        traces = &traces + &trace_polynomial_with(m, rho, &table)?;
    }
    let base = &l.scale(n - 1.0) + &RealPolynomial::constant(1.0 - rho * rho);
    Ok(&base - &(&(&l * &l) * &traces))
}
