//! Numerical invariants of a solved recursion.
//!
//! Each check returns a [`Check`] carrying the measured value and the bound
//! it was held to; [`run_suite`] collects all of them for one solution.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::oracle::variance_functional;
use crate::pattern::ModelParams;
use crate::qpoly::{build_qp, chebyshev_table, r_matrix};
use crate::recurrence::{apply_lagrange_operator, RecurrenceSolution};
use crate::roots::{d_plus, x_of_d};

/// One measured invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// Short identifier.
    pub name: &'static str,
    /// Measured deviation.
    pub value: f64,
    /// Bound.
    pub tolerance: f64,
    /// `value <= tolerance`.
    pub pass: bool,
}

impl Check {
    /// Builds a check; NaN never passes.
    pub fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

/// `H_m(d)`: `1 + rho^2` on the diagonal, `-d rho` above, `-rho / d` below.
pub fn h_matrix(m: usize, rho: f64, d: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::new(1.0 + rho * rho, 0.0)
        } else if j == i + 1 {
            -d * rho
        } else if i == j + 1 {
            -d.inv() * rho
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Largest entry of `|H_m(d) - D^{-1} R_m D|` with `D = diag(1, d, ..., d^{m-1})`.
pub fn decomposition_residual(m: usize, rho: f64, d: Complex64) -> f64 {
    let scale = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            d.powu(i as u32)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let inv_scale = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            d.powu(i as u32).inv()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let r = r_matrix(m, rho).map(|v| Complex64::new(v, 0.0));
    let rebuilt = inv_scale * r * scale;
    (h_matrix(m, rho, d) - rebuilt)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `|1' H_m(d)^{-1} 1 - tr(T_m(x) R_m^{-1})|` relative to the trace, `x = (d + 1/d) / 2`.
pub fn trace_identity_residual(m: usize, rho: f64, d: Complex64) -> f64 {
    let ones = DVector::from_element(m, Complex64::new(1.0, 0.0));
    let lhs = match h_matrix(m, rho, d).lu().solve(&ones) {
        Some(z) => z.sum(),
        None => return f64::INFINITY,
    };
    let x = x_of_d(d);
    let table = chebyshev_table(m - 1);
    let t = DMatrix::from_fn(m, m, |i, j| table[i.abs_diff(j)].eval_complex(x));
    let rinv = match r_matrix(m, rho).try_inverse() {
        Some(inv) => inv.map(|v| Complex64::new(v, 0.0)),
        None => return f64::INFINITY,
    };
    let rhs = (t * rinv).trace();
    (lhs - rhs).norm() / rhs.norm().max(1.0)
}

/// The `(h + 1) x (h + 1)` matrix whose determinant vanishes at every `d_m`.
pub fn g_bar(params: &ModelParams, d: Complex64) -> DMatrix<Complex64> {
    let rho = params.rho();
    let pattern = params.pattern();
    let h = pattern.gap_count();
    let n = pattern.len() as f64;
    let l = (1.0 - d * rho) * (1.0 - d.inv() * rho);
    let mut inner = DMatrix::<Complex64>::zeros(h + 1, h + 1);
    inner[(0, 0)] = l * (n - 1.0) + (1.0 - rho * rho);
    let mut offset = 1;
    for gap in pattern.gaps() {
        let block = h_matrix(gap.len, rho, d);
        inner
            .view_mut((offset, offset), (gap.len, gap.len))
            .copy_from(&block);
        offset += gap.len;
    }
    for g in 0..h {
        inner[(0, 1 + g)] = l;
        inner[(1 + g, 0)] = l;
    }
    inner * (d / (1.0 - rho * rho))
}

/// `|det G(d)|` over a Hadamard bound of its rows in which the top-left
/// entry is replaced by the sum of the magnitudes of its terms (that entry
/// alone vanishes at a root when there are no gaps).
pub fn g_bar_determinant_residual(params: &ModelParams, d: Complex64) -> f64 {
    let rho = params.rho();
    let g = g_bar(params, d);
    let l = (1.0 - d * rho) * (1.0 - d.inv() * rho);
    let n = params.len() as f64;
    let corner = d.norm() / (1.0 - rho * rho) * ((n - 1.0) * l.norm() + 1.0 - rho * rho);
    let mut magnitudes = g.map(|z| z.norm());
    magnitudes[(0, 0)] = corner;
    let bound: f64 = magnitudes.row_iter().map(|r| r.norm()).product();
    g.determinant().norm() / bound.max(f64::MIN_POSITIVE)
}

/// `|Schur(H) - Q_p(x(d))|` relative to `max|coeff Q_p|`, where `Schur(H)`
/// eliminates the gap block of the unscaled inner matrix.
pub fn schur_identity_residual(params: &ModelParams, d: Complex64) -> f64 {
    let g = g_bar(params, d) * ((1.0 - params.rho() * params.rho()) / d);
    let h = g.nrows() - 1;
    let mut schur = g[(0, 0)];
    if h > 0 {
        let h22 = g.view((1, 1), (h, h)).clone_owned();
        let h21 = g.view((1, 0), (h, 1)).clone_owned();
        let h12 = g.view((0, 1), (1, h)).clone_owned();
        match h22.lu().solve(&h21) {
            Some(z) => schur -= (h12 * z)[(0, 0)],
            None => return f64::INFINITY,
        }
    }
    let q = match build_qp(params) {
        Ok(q) => q,
        Err(_) => return f64::INFINITY,
    };
    (schur - q.eval_complex(x_of_d(d))).norm() / q.max_abs_coeff()
}

fn max_abs(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(
        0.0,
        |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) },
    )
}

/// `|1'w_0 - 1|` and `|1'w_i|` for `i >= 1`.
pub fn unbiasedness(weights: &[Vec<f64>]) -> f64 {
    max_abs(
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| w.iter().sum::<f64>() - if i == 0 { 1.0 } else { 0.0 }),
    )
}

/// Largest weight on a gap slot.
pub fn gap_leakage(solution: &RecurrenceSolution, weights: &[Vec<f64>]) -> f64 {
    let pattern = solution.params().pattern();
    max_abs(
        weights
            .iter()
            .flat_map(|w| pattern.gap_positions().into_iter().map(move |j| w[j - 1])),
    )
}

/// Largest deviation of the stationarity conditions from
/// `lambda_{0,i} 1 + sum_{j in H} lambda_{j,i} e_j`, over `i <= last`.
pub fn lagrange_residual(solution: &RecurrenceSolution, weights: &[Vec<f64>], last: usize) -> f64 {
    let rho = solution.params().rho();
    let gaps = solution.params().pattern().gap_positions();
    let mut worst = 0.0f64;
    for i in 0..=last {
        let lhs = apply_lagrange_operator(rho, weights, i);
        let mut rhs = vec![solution.lambda(0, i); lhs.len()];
        for (g, &pos) in gaps.iter().enumerate() {
            rhs[pos - 1] += solution.lambda(1 + g, i);
        }
        worst = worst.max(max_abs(lhs.iter().zip(&rhs).map(|(a, b)| a - b)));
    }
    worst
}

/// Feasible directions used by [`perturbation_gain`]: for several occasions,
/// move weight between two observed slots.
pub fn feasible_directions(
    solution: &RecurrenceSolution,
    occasions: usize,
    size: f64,
) -> Vec<Vec<Vec<f64>>> {
    let observed = solution.params().pattern().observed_slots();
    let n = solution.params().len();
    let (first, last) = (observed[0], observed[observed.len() - 1]);
    let step = size / core::f64::consts::SQRT_2;
    (0..occasions.min(4))
        .map(|i| {
            let mut delta = vec![vec![0.0; n]; occasions];
            delta[i][first] = step;
            delta[i][last] = -step;
            delta
        })
        .collect()
}

/// Smallest increase of the variance functional when stepping along each
/// direction from the unrolled weights; positive at a strict minimum.
pub fn perturbation_gain(
    solution: &RecurrenceSolution,
    weights: &[Vec<f64>],
    directions: &[Vec<Vec<f64>>],
) -> f64 {
    let rho = solution.params().rho();
    let base = variance_functional(rho, weights);
    directions
        .iter()
        .map(|delta| {
            let moved: Vec<Vec<f64>> = weights
                .iter()
                .zip(delta)
                .map(|(w, d)| w.iter().zip(d).map(|(a, b)| a + b).collect())
                .collect();
            variance_functional(rho, &moved) - base
        })
        .fold(f64::INFINITY, f64::min)
}

/// Tolerances for [`run_suite`].
pub mod bounds {
    /// Sums of weights.
    pub const UNBIASEDNESS: f64 = 1e-9;
    /// Gap-slot weights.
    pub const GAP: f64 = 1e-12;
    /// Trace identity, relative.
    pub const TRACE: f64 = 1e-9;
    /// `H_m = D^{-1} R_m D`, entrywise.
    pub const DECOMPOSITION: f64 = 1e-10;
    /// `Q_p(x(d_m))`, relative to the largest coefficient.
    pub const ROOT: f64 = 1e-8;
    /// Determinant over the Hadamard bound.
    pub const DETERMINANT: f64 = 1e-8;
    /// Schur complement against `Q_p`, relative.
    pub const SCHUR: f64 = 1e-9;
    /// Stationarity conditions.
    pub const LAGRANGE: f64 = 1e-8;
    /// Quadratic form on unrolled weights against `sum c_{0,m}`.
    pub const VARIANCE: f64 = 1e-8;
    /// `|d_m d_+(x_m)| = 1`.
    pub const ROUND_TRIP: f64 = 1e-9;
    /// Agreement of the two weight computations.
    pub const CLOSED_FORM: f64 = 1e-9;
}

/// Every invariant for one solution.
pub fn run_suite(solution: &RecurrenceSolution) -> Vec<Check> {
    let params = solution.params();
    let rho = params.rho();
    let ds = solution.spectrum().ds();
    let xs = solution.spectrum().xs();
    let len = solution.truncation_length().max(41).max(31 + params.len());
    let weights = solution.unroll_weights(len);
    let mut checks = Vec::new();

    checks.push(Check::new(
        "unbiasedness",
        unbiasedness(&weights),
        bounds::UNBIASEDNESS,
    ));
    checks.push(Check::new(
        "gap-constraints",
        gap_leakage(solution, &weights),
        bounds::GAP,
    ));

    let closed = max_abs((0..=40).flat_map(|i| {
        let cf = solution.closed_form_weights(i);
        weights[i]
            .iter()
            .zip(cf)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
    }));
    checks.push(Check::new(
        "closed-form-weights",
        closed,
        bounds::CLOSED_FORM,
    ));

    let sizes = params.pattern().gap_sizes();
    let probes: Vec<Complex64> = ds
        .iter()
        .copied()
        .chain([Complex64::new(0.37, 0.21), Complex64::new(-0.6, 0.0)])
        .collect();
    let mut trace = 0.0f64;
    let mut decomposition = 0.0f64;
    for &m in &sizes {
        for &d in &probes {
            trace = trace.max(trace_identity_residual(m, rho, d));
            decomposition = decomposition.max(decomposition_residual(m, rho, d));
        }
    }
    checks.push(Check::new("trace-identity", trace, bounds::TRACE));
    checks.push(Check::new(
        "h-decomposition",
        decomposition,
        bounds::DECOMPOSITION,
    ));

    let qp = build_qp(params);
    let root = match &qp {
        Ok(q) => max_abs(
            ds.iter()
                .map(|&d| q.eval_complex(x_of_d(d)).norm() / q.max_abs_coeff()),
        ),
        Err(_) => f64::INFINITY,
    };
    checks.push(Check::new("qp-at-roots", root, bounds::ROOT));
    let det = max_abs(ds.iter().map(|&d| g_bar_determinant_residual(params, d)));
    checks.push(Check::new("g-bar-determinant", det, bounds::DETERMINANT));
    let schur = max_abs(probes.iter().map(|&d| schur_identity_residual(params, d)));
    checks.push(Check::new("schur-identity", schur, bounds::SCHUR));

    let round_trip = max_abs(xs.iter().zip(ds).map(|(&x, &d)| match d_plus(x) {
        Ok(dp) => (d * dp).norm() - 1.0,
        Err(_) => f64::INFINITY,
    }));
    checks.push(Check::new("d-round-trip", round_trip, bounds::ROUND_TRIP));

    checks.push(Check::new(
        "lagrange-support",
        lagrange_residual(solution, &weights, 30),
        bounds::LAGRANGE,
    ));
    let quad = (variance_functional(rho, &weights) - solution.variance()).abs();
    checks.push(Check::new("variance-functional", quad, bounds::VARIANCE));
    let gain = perturbation_gain(
        solution,
        &weights,
        &feasible_directions(solution, len, 1e-3),
    );
    // a positive gain passes; report its negative part
    checks.push(Check::new(
        "argmin-perturbation",
        if gain > 0.0 { 0.0 } else { -gain },
        0.0,
    ));

    let residuals = solution.residuals();
    let imaginary = residuals
        .a_imaginary
        .max(residuals.r_imaginary)
        .max(residuals.variance_imaginary);
    checks.push(Check::new("imaginary-residue", imaginary, 1e-8));
    checks.push(Check::new("r-gap-entries", residuals.r_gap, 1e-8));
    let v = solution.variance();
    checks.push(Check::new(
        "variance-range",
        if v > 0.0 && v <= 1.0 { 0.0 } else { 1.0 },
        0.0,
    ));
    checks
}
