//! Thomas algorithm for tridiagonal systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// Solves `A x = rhs` for tridiagonal `A` given by its sub-, main and
/// super-diagonals (`sub[0]` and `sup[n-1]` are ignored).
///
/// No pivoting; fine for the diagonally dominant systems used here.
pub fn solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>, Error> {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::SingularR { order: n });
    }
    c[0] = sup[0] / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularR { order: n });
        }
        c[i] = sup[i] / denom;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Inverse of a symmetric Toeplitz tridiagonal matrix, one unit-vector solve
/// per column. Returned row-major as `n` rows.
pub fn symmetric_toeplitz_inverse(n: usize, diag: f64, off: f64) -> Result<Vec<Vec<f64>>, Error> {
    let sub = vec![off; n];
    let main = vec![diag; n];
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(&sub, &main, &sub, &e)?);
    }
    // symmetric, so columns are rows
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4 8 8] -> x = [1 2 3]
        let x = solve(
            &[0.0, 1.0, 1.0],
            &[2.0, 2.0, 2.0],
            &[1.0, 1.0, 0.0],
            &[4.0, 8.0, 8.0],
        )
        .unwrap();
        for (a, b) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        assert_eq!(
            solve(&[0.0], &[0.0], &[0.0], &[1.0]),
            Err(Error::SingularR { order: 1 })
        );
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let (d, o, n) = (1.81, -0.9, 6);
        let inv = symmetric_toeplitz_inverse(n, d, o).unwrap();
        for (i, row) in inv.iter().enumerate() {
            for j in 0..n {
                let mut s = d * row[j];
                if j > 0 {
                    s += o * row[j - 1];
                }
                if j + 1 < n {
                    s += o * row[j + 1];
                }
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-12);
            }
        }
    }
}
