//! Stationary recursion for the best linear unbiased estimator (BLUE) of the
//! current mean in repeated surveys that rotate units through a cascade
//! pattern, gaps included.
//!
//! The pipeline is:
//!
//! 1. [`pattern`]: parse the rotation design and validate the correlation.
//! 2. [`qpoly`]: build the characteristic polynomial `Q_p` from Chebyshev
//!    polynomials and the tridiagonal matrices `R_m`.
//! 3. [`roots`]: locate the `p` roots of `Q_p`, map each into the unit disk
//!    and decide whether the roots are distinct and off `[-1, 1]`.
//! 4. [`recurrence`]: assemble the block matrix `S`, decide its rank, solve
//!    for the multipliers and produce the recursion coefficients, the vector
//!    coefficients and the variance.
//!
//! [`oracle`] solves the same problem on a finite horizon by brute force
//! (a dense KKT system) and is used to cross-check the recursion.
//! [`estimator`] runs the recursion over a stream of observations and
//! [`checks`] bundles the numerical invariants the construction must satisfy.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod checks;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod pattern;
pub mod poly;
pub mod qpoly;
pub mod recurrence;
pub mod roots;
mod slots;
pub mod tridiag;

pub use error::{Error, PatternError, RhoError};
pub use estimator::{estimate_series, RecursiveEstimator};
pub use num_complex::Complex64;
pub use oracle::{
    compare_oracle_vs_recursion, solve_finite_blue, OracleComparison, OracleSolution,
};
pub use pattern::{CascadePattern, Gap, ModelParams};
pub use poly::RealPolynomial;
pub use recurrence::{analyze, Analysis, RecurrenceSolution};
pub use roots::{AssumptionOne, RootKind, RootSpectrum};

/// Numerical thresholds used by the assumption checks and residual gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Distance from the real segment `[-1, 1]` below which a root counts as on it.
    pub root_interval: f64,
    /// Relative pairwise distance below which two roots count as repeated.
    pub root_distinct: f64,
    /// Singular values below `rank_cutoff * sigma_max` are treated as zero.
    pub rank_cutoff: f64,
    /// Bound on `||S c - e1||` and on the gap entries of the vector coefficients.
    pub residual: f64,
    /// Bound on imaginary parts dropped when realizing complex sums.
    pub imaginary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_interval: 1e-10,
            root_distinct: 1e-8,
            rank_cutoff: 1e-10,
            residual: 1e-8,
            imaginary: 1e-8,
        }
    }
}
