// Structured operators on N-slot vectors: C, C^T, the diagonal
// (I - C C^T)^{-1} and M(d) = (I - C C^T)^{-1} (I - d C).

use alloc::vec::Vec;
use core::ops::Mul;

use num_complex::Complex64;
use num_traits::Zero;

/// `(C^k u)_a = rho^k u_{a+k}`.
pub(crate) fn apply_c_pow<T>(rho: f64, k: usize, u: &[T]) -> Vec<T>
where
    T: Copy + Zero + Mul<f64, Output = T>,
{
    let n = u.len();
    let scale = rho_pow(rho, k);
    (0..n)
        .map(|a| {
            if a + k < n {
                u[a + k] * scale
            } else {
                T::zero()
            }
        })
        .collect()
}

/// `((C^T)^k u)_a = rho^k u_{a-k}`.
pub(crate) fn apply_ct_pow<T>(rho: f64, k: usize, u: &[T]) -> Vec<T>
where
    T: Copy + Zero + Mul<f64, Output = T>,
{
    let scale = rho_pow(rho, k);
    (0..u.len())
        .map(|a| if a >= k { u[a - k] * scale } else { T::zero() })
        .collect()
}

pub(crate) fn rho_pow(rho: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * rho)
}

/// `M(d) y = D (y - d C y)` with `D = diag(1/(1-rho^2), ..., 1/(1-rho^2), 1)`.
pub(crate) fn apply_m(rho: f64, d: Complex64, y: &[Complex64]) -> Vec<Complex64> {
    let n = y.len();
    let inv = 1.0 / (1.0 - rho * rho);
    let cy = apply_c_pow(rho, 1, y);
    (0..n)
        .map(|a| {
            let v = y[a] - d * cy[a];
            if a + 1 < n {
                v * inv
            } else {
                v
            }
        })
        .collect()
}

pub(crate) fn axpy<T>(acc: &mut [T], alpha: T, x: &[T])
where
    T: Copy + Mul<T, Output = T> + core::ops::AddAssign,
{
    for (a, &b) in acc.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
