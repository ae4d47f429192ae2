//! The stationary recursion
//!
//! ```text
//! mu_t = sum_{k=1..p} a_k mu_{t-k} + sum_{k=0..p} r_k' X_{t-k}
//! ```
//!
//! and everything needed to build it from the unit-disk parameters
//! `d_1..d_p`: the block matrix `S`, its rank decision, the multipliers
//! `c_{j,m}` solving `S c = e_1`, the coefficients `a_k` (signed elementary
//! symmetric functions of the `d_m`) and the vector coefficients `r_i`.
//!
//! Multipliers are indexed by `j in H' = {0} u H` (row `0` is the
//! unbiasedness constraint, row `1 + g` the `g`-th gap slot) and by the root
//! index `m`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::pattern::{CascadePattern, ModelParams};
use crate::poly::RealPolynomial;
use crate::qpoly::build_qp;
use crate::roots::{check_assumption_one, find_roots, AssumptionOne, RootKind, RootSpectrum};
use crate::slots::{apply_c_pow, apply_ct_pow, apply_m, axpy};
use crate::Tolerances;

/// `(p h + h + 1) x p (h + 1)` block matrix whose rank decides solvability.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    entries: DMatrix<Complex64>,
    p: usize,
    h: usize,
}

impl SMatrix {
    /// Dense entries.
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Number of blocks `p`.
    pub fn coverage(&self) -> usize {
        self.p
    }

    /// Number of gap slots `h`.
    pub fn gap_count(&self) -> usize {
        self.h
    }

    /// Full column rank, `p (h + 1)`.
    pub fn expected_rank(&self) -> usize {
        self.entries.ncols()
    }
}

// Pairs (g, g + 1) of gap indices that sit in the same gap.
fn adjacent_gap_pairs(pattern: &CascadePattern) -> Vec<bool> {
    let positions = pattern.gap_positions();
    (0..positions.len())
        .map(|g| g + 1 < positions.len() && positions[g + 1] == positions[g] + 1)
        .collect()
}

/// Assembles `S(d_1, ..., d_p)`: a top block row of `G~(d_m)` and a block
/// diagonal of `G(d_m)` below it.
pub fn build_s(pattern: &CascadePattern, rho: f64, ds: &[Complex64]) -> Result<SMatrix, Error> {
    if let Some(i) = ds.iter().position(|d| d.norm() == 0.0) {
        return Err(Error::ZeroD { index: i + 1 });
    }
    let h = pattern.gap_count();
    let p = ds.len();
    let n = pattern.len() as f64;
    let adjacent = adjacent_gap_pairs(pattern);
    let scale = 1.0 / (1.0 - rho * rho);
    let mut s = DMatrix::<Complex64>::zeros(p * h + h + 1, p * (h + 1));
    for (m, &d) in ds.iter().enumerate() {
        let col = m * (h + 1);
        let one_minus = 1.0 - d * rho;
        s[(0, col)] = ((n - 1.0) * one_minus + 1.0 - rho * rho) * scale;
        for g in 0..h {
            s[(0, col + 1 + g)] = one_minus * scale;
            s[(1 + g, col)] = one_minus * scale;
            s[(1 + g, col + 1 + g)] = Complex64::new(scale, 0.0);
            if adjacent[g] {
                s[(1 + g, col + 2 + g)] = -d * rho * scale;
            }
        }
        let row = h + 1 + m * h;
        let inv_d = d.inv();
        for g in 0..h {
            s[(row + g, col)] = one_minus * (d - rho) * scale;
            s[(row + g, col + 1 + g)] = d * (1.0 + rho * rho) * scale;
            if adjacent[g] {
                s[(row + g, col + 2 + g)] = d * (-d * rho) * scale;
                s[(row + g + 1, col + 1 + g)] = d * (-inv_d * rho) * scale;
            }
        }
    }
    Ok(SMatrix { entries: s, p, h })
}

/// Outcome of the rank check on `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDecision {
    /// Numerical rank equals the column count.
    pub pass: bool,
    /// Singular values above `cutoff * sigma_max`.
    pub rank: usize,
    /// Column count.
    pub expected: usize,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
}

impl RankDecision {
    /// `sigma_max / sigma_min`.
    pub fn condition_number(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

fn sorted_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Rank of `S` from its singular values with relative cutoff `cutoff`.
pub fn check_assumption_two(s: &SMatrix, cutoff: f64) -> RankDecision {
    let singular_values = sorted_singular_values(&s.entries);
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .filter(|&&v| top > 0.0 && v > cutoff * top)
        .count();
    let expected = s.expected_rank();
    RankDecision {
        pass: rank == expected,
        rank,
        expected,
        singular_values,
    }
}

/// Solution of `S c = e_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// `c_{j,m}` laid out `(h + 1) x p`.
    pub values: DMatrix<Complex64>,
    /// `||S c - e_1||_2`.
    pub residual: f64,
}

/// Least-squares solution of the overdetermined system `S c = e_1`; the
/// system must be consistent, so a residual above `tol.residual` is an error.
pub fn solve_c(s: &SMatrix, tol: &Tolerances) -> Result<Multipliers, Error> {
    let rows = s.entries.nrows();
    let svd = s.entries.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0f64, |m, &v| m.max(v));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&v| top > 0.0 && v > tol.rank_cutoff * top)
        .count();
    if rank < s.expected_rank() {
        return Err(Error::RankDeficient {
            rank,
            expected: s.expected_rank(),
        });
    }
    let mut rhs = DVector::<Complex64>::zeros(rows);
    rhs[0] = Complex64::new(1.0, 0.0);
    let c = svd
        .solve(&rhs, tol.rank_cutoff * top)
        .map_err(|_| Error::RankDeficient {
            rank,
            expected: s.expected_rank(),
        })?;
    let residual = (&s.entries * &c - &rhs).norm();
    if residual.is_nan() || residual > tol.residual {
        return Err(Error::InconsistentSystem { residual });
    }
    let values = DMatrix::from_fn(s.h + 1, s.p, |j, m| c[m * (s.h + 1) + j]);
    Ok(Multipliers { values, residual })
}

/// `a_k = (-1)^{k+1} e_k(d_1, ..., d_p)`, so that
/// `z^p - sum_k a_k z^{p-k} = prod_m (z - d_m)`.
pub fn recurrence_coeffs(ds: &[Complex64], tol: &Tolerances) -> Result<Vec<f64>, Error> {
    let (a, residue) = recurrence_coeffs_complex(ds);
    if residue > tol.imaginary {
        return Err(Error::ImaginaryResidue {
            quantity: "recurrence coefficients",
            residue,
        });
    }
    Ok(a)
}

fn recurrence_coeffs_complex(ds: &[Complex64]) -> (Vec<f64>, f64) {
    // descending coefficients of prod (z - d_m)
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for &d in ds {
        let mut next = e.clone();
        next.push(Complex64::new(0.0, 0.0));
        for k in 1..next.len() {
            next[k] -= d * e[k - 1];
        }
        e = next;
    }
    let residue = e.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    (e[1..].iter().map(|z| -z.re).collect(), residue)
}

/// `v_i(d) = d^i - sum_{l=1..i} a_l d^{i-l}`; `v_0 = 1`.
pub fn v_poly(i: usize, d: Complex64, a: &[f64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for &al in &a[..i] {
        v = v * d - al;
    }
    v
}

fn v_prev(i: usize, d: Complex64, a: &[f64]) -> Complex64 {
    if i == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        v_poly(i - 1, d, a)
    }
}

/// `y_m = sum_{j in H'} c_{j,m} e_j`, with `e_0` the all-ones vector.
fn multiplier_vector(pattern: &CascadePattern, c: &DMatrix<Complex64>, m: usize) -> Vec<Complex64> {
    let mut y = vec![c[(0, m)]; pattern.len()];
    for (g, pos) in pattern.gap_positions().into_iter().enumerate() {
        y[pos - 1] += c[(1 + g, m)];
    }
    y
}

/// Complex vector coefficients before realization.
fn r_vectors_complex(
    pattern: &CascadePattern,
    rho: f64,
    ds: &[Complex64],
    c: &DMatrix<Complex64>,
    a: &[f64],
) -> Vec<Vec<Complex64>> {
    let n = pattern.len();
    let p = ds.len();
    let mut r = vec![vec![Complex64::new(0.0, 0.0); n]; p + 1];
    for (m, &d) in ds.iter().enumerate() {
        let my = apply_m(rho, d, &multiplier_vector(pattern, c, m));
        let ct_my = apply_ct_pow(rho, 1, &my);
        for (i, ri) in r.iter_mut().enumerate() {
            axpy(ri, v_poly(i, d, a), &my);
            axpy(ri, -v_prev(i, d, a), &ct_my);
        }
    }
    r
}

/// Vector coefficients `r_0..r_p`, realized and with gap slots zeroed.
///
/// Returns the vectors together with the largest dropped imaginary part and
/// the largest gap-slot magnitude before zeroing.
pub fn r_vectors(
    pattern: &CascadePattern,
    rho: f64,
    ds: &[Complex64],
    c: &DMatrix<Complex64>,
    a: &[f64],
) -> (Vec<Vec<f64>>, f64, f64) {
    let complex = r_vectors_complex(pattern, rho, ds, c, a);
    let mut imag = 0.0f64;
    let mut gap = 0.0f64;
    let r = complex
        .iter()
        .map(|ri| {
            ri.iter()
                .enumerate()
                .map(|(slot, z)| {
                    imag = imag.max(z.im.abs());
                    if pattern.is_observed(slot) {
                        z.re
                    } else {
                        gap = gap.max(z.norm());
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    (r, imag, gap)
}

/// `w_i` from the closed form
/// `w_0 = sum_m M(d_m) y_m`, `w_i = sum_m d_m^{i-1} (d_m I - C^T) M(d_m) y_m`.
pub fn closed_form_weights(
    pattern: &CascadePattern,
    rho: f64,
    ds: &[Complex64],
    c: &DMatrix<Complex64>,
    i: usize,
) -> Vec<f64> {
    let n = pattern.len();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for (m, &d) in ds.iter().enumerate() {
        let my = apply_m(rho, d, &multiplier_vector(pattern, c, m));
        if i == 0 {
            axpy(&mut w, Complex64::new(1.0, 0.0), &my);
        } else {
            let lead = d.powu(i as u32 - 1);
            let ct_my = apply_ct_pow(rho, 1, &my);
            axpy(&mut w, lead * d, &my);
            axpy(&mut w, -lead, &ct_my);
        }
    }
    w.iter().map(|z| z.re).collect()
}

/// Inverts `r = (Id - sum a_m R^m) w`: `w_i = r_i [i <= p] + sum_{m=1..min(i,p)} a_m w_{i-m}`.
pub fn unroll_weights(a: &[f64], r: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    let n = r.first().map_or(0, Vec::len);
    let p = a.len();
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(len);
    for i in 0..len {
        let mut wi = if i <= p { r[i].clone() } else { vec![0.0; n] };
        for m in 1..=i.min(p) {
            axpy(&mut wi, a[m - 1], &w[i - m]);
        }
        w.push(wi);
    }
    w
}

/// Diagnostics collected while building a solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `max |Q_p(x_m)| / max|coeff|`.
    pub root: f64,
    /// `||S c - e_1||_2`.
    pub s_system: f64,
    /// Largest `|c_{j,n} - conj(c_{j,m})|` over conjugate pairs before symmetrizing.
    pub conjugate_asymmetry: f64,
    /// Largest imaginary part dropped from `a`.
    pub a_imaginary: f64,
    /// Largest imaginary part dropped from the `r` vectors.
    pub r_imaginary: f64,
    /// Largest gap-slot magnitude of the `r` vectors before zeroing.
    pub r_gap: f64,
    /// `|Im sum_m c_{0,m}|`.
    pub variance_imaginary: f64,
}

/// Everything the recursion needs, plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSolution {
    params: ModelParams,
    spectrum: RootSpectrum,
    multipliers: DMatrix<Complex64>,
    a: Vec<f64>,
    r: Vec<Vec<f64>>,
    variance: f64,
    residuals: Residuals,
}

impl RecurrenceSolution {
    /// Builds the solution from a spectrum whose matrix `S` has full rank.
    pub fn from_spectrum(
        params: &ModelParams,
        spectrum: RootSpectrum,
        s: &SMatrix,
        tol: &Tolerances,
    ) -> Result<Self, Error> {
        let pattern = params.pattern();
        let rho = params.rho();
        let solved = solve_c(s, tol)?;
        let (multipliers, asymmetry) = realize_pairs(solved.values, spectrum.kinds());
        let ds = spectrum.ds();
        let (a, a_imaginary) = recurrence_coeffs_complex(ds);
        if a_imaginary > tol.imaginary {
            return Err(Error::ImaginaryResidue {
                quantity: "recurrence coefficients",
                residue: a_imaginary,
            });
        }
        let (r, r_imaginary, r_gap) = r_vectors(pattern, rho, ds, &multipliers, &a);
        if r_imaginary > tol.imaginary {
            return Err(Error::ImaginaryResidue {
                quantity: "vector coefficients",
                residue: r_imaginary,
            });
        }
        if r_gap > tol.residual {
            return Err(Error::InconsistentSystem { residual: r_gap });
        }
        let total: Complex64 = (0..spectrum.len()).map(|m| multipliers[(0, m)]).sum();
        if total.im.abs() > tol.imaginary {
            return Err(Error::ImaginaryResidue {
                quantity: "variance",
                residue: total.im.abs(),
            });
        }
        let variance = total.re;
        if !(variance > 0.0 && variance <= 1.0) {
            return Err(Error::VarianceOutOfRange { variance });
        }
        Ok(Self {
            params: params.clone(),
            residuals: Residuals {
                root: 0.0,
                s_system: solved.residual,
                conjugate_asymmetry: asymmetry,
                a_imaginary,
                r_imaginary,
                r_gap,
                variance_imaginary: total.im.abs(),
            },
            spectrum,
            multipliers,
            a,
            r,
            variance,
        })
    }

    /// Model the solution was built for.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Roots and unit-disk parameters.
    pub fn spectrum(&self) -> &RootSpectrum {
        &self.spectrum
    }

    /// Recursion order `p`.
    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// `a_1..a_p`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `r_0..r_p`, each of length `N`.
    pub fn r(&self) -> &[Vec<f64>] {
        &self.r
    }

    /// `var(mu_t) = sum_m c_{0,m}`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `c_{j,m}` laid out `(h + 1) x p`, conjugate pairs symmetrized.
    pub fn multipliers(&self) -> &DMatrix<Complex64> {
        &self.multipliers
    }

    /// Diagnostics.
    pub fn residuals(&self) -> &Residuals {
        &self.residuals
    }

    /// `v_i(d)` with this solution's coefficients.
    pub fn v(&self, i: usize, d: Complex64) -> Complex64 {
        v_poly(i, d, &self.a)
    }

    /// First `len` weights of the infinite BLUE expansion, via the recursion.
    pub fn unroll_weights(&self, len: usize) -> Vec<Vec<f64>> {
        unroll_weights(&self.a, &self.r, len)
    }

    /// `w_i` from the closed form, independent of `a` and `r`.
    pub fn closed_form_weights(&self, i: usize) -> Vec<f64> {
        closed_form_weights(
            self.params.pattern(),
            self.params.rho(),
            self.spectrum.ds(),
            &self.multipliers,
            i,
        )
    }

    /// `lambda_{j,i} = sum_m c_{j,m} d_m^i`, real part.
    pub fn lambda(&self, j: usize, i: usize) -> f64 {
        self.spectrum
            .ds()
            .iter()
            .enumerate()
            .map(|(m, d)| self.multipliers[(j, m)] * d.powu(i as u32))
            .sum::<Complex64>()
            .re
    }

    /// Smallest `L` with `max|d_m|^L < 1e-12`, at least `p + 1`.
    pub fn truncation_length(&self) -> usize {
        let rate = self.spectrum.max_modulus();
        let len = if rate <= 0.0 {
            1.0
        } else {
            (1e-12f64.ln() / rate.ln()).ceil()
        };
        (len as usize).max(self.order() + 1)
    }

    /// Returns a copy with `a_k` shifted by `delta` (1-based `k`); used to
    /// confirm that the verification harness notices corrupted coefficients.
    #[doc(hidden)]
    pub fn with_perturbed_a(&self, k: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.a[k - 1] += delta;
        out
    }
}

// Averages each conjugate pair of columns so that c_{., n} = conj(c_{., m})
// exactly, and zeroes imaginary parts of real-root columns.
fn realize_pairs(mut c: DMatrix<Complex64>, kinds: &[RootKind]) -> (DMatrix<Complex64>, f64) {
    let mut asymmetry = 0.0f64;
    for (m, kind) in kinds.iter().enumerate() {
        match *kind {
            RootKind::Conjugate { partner } if partner > m => {
                for j in 0..c.nrows() {
                    let (x, y) = (c[(j, m)], c[(j, partner)]);
                    asymmetry = asymmetry.max((y - x.conj()).norm());
                    let mid = (x + y.conj()) * 0.5;
                    c[(j, m)] = mid;
                    c[(j, partner)] = mid.conj();
                }
            }
            RootKind::Real => {
                for j in 0..c.nrows() {
                    asymmetry = asymmetry.max(c[(j, m)].im.abs());
                    c[(j, m)].im = 0.0;
                }
            }
            RootKind::Conjugate { .. } => {}
        }
    }
    (c, asymmetry)
}

/// How far the pipeline got.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Both assumptions hold and the recursion was built.
    Solved,
    /// Roots of `Q_p` are repeated or touch `[-1, 1]`.
    AssumptionOneFailed,
    /// `S` is rank deficient.
    AssumptionTwoFailed,
}

/// Result of running the whole pipeline on one `(pattern, rho)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    /// Inputs.
    pub params: ModelParams,
    /// `Q_p`.
    pub qp: RealPolynomial,
    /// Its roots, ordered.
    pub roots: Vec<Complex64>,
    /// Root-localization decision.
    pub assumption_one: AssumptionOne,
    /// Roots with unit-disk parameters, when assumption one holds.
    pub spectrum: Option<RootSpectrum>,
    /// Rank decision on `S`, when assumption one holds.
    pub assumption_two: Option<RankDecision>,
    /// The recursion, when both hold.
    pub solution: Option<RecurrenceSolution>,
}

impl Analysis {
    /// Classifies the result.
    pub fn outcome(&self) -> Outcome {
        if !self.assumption_one.pass {
            Outcome::AssumptionOneFailed
        } else if !self.assumption_two.as_ref().is_some_and(|d| d.pass) {
            Outcome::AssumptionTwoFailed
        } else {
            Outcome::Solved
        }
    }
}

/// Pattern and `rho` to recursion: `Q_p`, roots, assumption one, `S`,
/// assumption two, multipliers, coefficients.
///
/// Assumption failures are reported through [`Analysis::outcome`]; `Err` is
/// reserved for numerical breakdowns.
pub fn analyze(params: &ModelParams, tol: &Tolerances) -> Result<Analysis, Error> {
    let qp = build_qp(params)?;
    let roots = find_roots(&qp)?;
    let assumption_one = check_assumption_one(&roots, tol);
    let mut analysis = Analysis {
        params: params.clone(),
        qp,
        roots,
        assumption_one,
        spectrum: None,
        assumption_two: None,
        solution: None,
    };
    if !analysis.assumption_one.pass {
        return Ok(analysis);
    }
    let spectrum = RootSpectrum::new(analysis.roots.clone(), tol)?;
    let s = build_s(params.pattern(), params.rho(), spectrum.ds())?;
    let decision = check_assumption_two(&s, tol.rank_cutoff);
    let pass = decision.pass;
    analysis.assumption_two = Some(decision);
    analysis.spectrum = Some(spectrum.clone());
    if !pass {
        return Ok(analysis);
    }
    let mut solution = RecurrenceSolution::from_spectrum(params, spectrum, &s, tol)?;
    let scale = analysis.qp.max_abs_coeff();
    solution.residuals.root = analysis
        .roots
        .iter()
        .map(|&x| analysis.qp.eval_complex(x).norm() / scale)
        .fold(0.0, f64::max);
    analysis.solution = Some(solution);
    Ok(analysis)
}

/// Convenience: runs [`analyze`] and insists on a solved outcome.
pub fn solve(params: &ModelParams, tol: &Tolerances) -> Result<RecurrenceSolution, Error> {
    let analysis = analyze(params, tol)?;
    match (analysis.outcome(), analysis.solution) {
        (Outcome::Solved, Some(sol)) => Ok(sol),
        (Outcome::AssumptionOneFailed, _) => {
            let x = analysis
                .assumption_one
                .offending
                .first()
                .map_or(Complex64::new(0.0, 0.0), |&i| analysis.roots[i]);
            Err(Error::OnCriticalInterval { re: x.re, im: x.im })
        }
        _ => {
            let d = analysis.assumption_two.unwrap_or(RankDecision {
                pass: false,
                rank: 0,
                expected: 0,
                singular_values: Vec::new(),
            });
            Err(Error::RankDeficient {
                rank: d.rank,
                expected: d.expected,
            })
        }
    }
}

// Keeps the C-power helper reachable for the Lagrange checks in this crate.
pub(crate) fn apply_lagrange_operator(rho: f64, w: &[Vec<f64>], i: usize) -> Vec<f64> {
    let n = w[i].len();
    let mut out = w[i].clone();
    for k in 1..n {
        if i + k < w.len() {
            axpy(&mut out, 1.0, &apply_c_pow(rho, k, &w[i + k]));
        }
        if k <= i {
            axpy(&mut out, 1.0, &apply_ct_pow(rho, k, &w[i - k]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(p: &str, rho: f64) -> ModelParams {
        ModelParams::new(CascadePattern::parse(p).unwrap(), rho).unwrap()
    }

    fn sol(p: &str, rho: f64) -> RecurrenceSolution {
        solve(&params(p, rho), &Tolerances::default()).unwrap()
    }

    #[test]
    fn patterson_s_is_scalar() {
        let (n, rho, d) = (6.0, 0.9, c(0.7942, 0.0));
        let s = build_s(&CascadePattern::parse("111111").unwrap(), rho, &[d]).unwrap();
        assert_eq!(s.entries().shape(), (1, 1));
        let expect = (n - 1.0) * (1.0 - d.re * rho) / (1.0 - rho * rho) + 1.0;
        assert!((s.entries()[(0, 0)].re - expect).abs() < 1e-12);
        assert!(check_assumption_two(&s, 1e-10).pass);
    }

    #[test]
    fn size_one_gap_blocks() {
        let rho = 0.5;
        let ds = [c(-0.2, 0.0), c(0.4, 0.0)];
        let s = build_s(&CascadePattern::parse("1101101").unwrap(), rho, &ds).unwrap();
        let scale = 1.0 / (1.0 - rho * rho);
        // H~_1 = 1 on the top block diagonal, H_1 = 1 + rho^2 scaled by d below
        assert!((s.entries()[(1, 1)].re - scale).abs() < 1e-15);
        assert!((s.entries()[(3, 1)].re - ds[0].re * (1.0 + rho * rho) * scale).abs() < 1e-15);
        assert_eq!(s.entries().shape(), (7, 6));
    }

    #[test]
    fn szarkowski_s_is_square_of_order_nine() {
        let p = params("110011", 0.7);
        let spectrum = RootSpectrum::new(
            find_roots(&build_qp(&p).unwrap()).unwrap(),
            &Tolerances::default(),
        )
        .unwrap();
        let s = build_s(p.pattern(), p.rho(), spectrum.ds()).unwrap();
        assert_eq!(s.entries().shape(), (9, 9));
    }

    #[test]
    fn zero_d_is_rejected() {
        let err = build_s(
            &CascadePattern::parse("101").unwrap(),
            0.5,
            &[c(0.3, 0.0), c(0.0, 0.0)],
        )
        .unwrap_err();
        assert_eq!(err, Error::ZeroD { index: 2 });
    }

    #[test]
    fn all_zero_matrix_fails_rank_check() {
        let s = SMatrix {
            entries: DMatrix::zeros(3, 2),
            p: 2,
            h: 0,
        };
        let d = check_assumption_two(&s, 1e-10);
        assert!(!d.pass);
        assert_eq!(d.rank, 0);
    }

    #[test]
    fn patterson_multiplier_closed_form() {
        let (n, rho) = (6.0, 0.9);
        let s = sol("111111", rho);
        let d = s.spectrum().ds()[0].re;
        let expect = 1.0 / ((n - 1.0) * (1.0 - d * rho) / (1.0 - rho * rho) + 1.0);
        assert!((s.multipliers()[(0, 0)].re - expect).abs() < 1e-13);
        assert!((expect - 0.11756).abs() < 1e-5);
        assert!((s.variance() - expect).abs() < 1e-13);
    }

    #[test]
    fn size_one_gaps_share_multipliers() {
        let s = sol("1101101", 0.5);
        let c = s.multipliers();
        for m in 0..2 {
            assert!((c[(1, m)] - c[(2, m)]).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugate_roots_have_conjugate_multipliers() {
        let s = sol("110011", 0.7);
        let c = s.multipliers();
        for j in 0..c.nrows() {
            assert_eq!(c[(j, 1)], c[(j, 0)].conj());
        }
        assert!(s.residuals().conjugate_asymmetry < 1e-10);
    }

    #[test]
    fn coefficients_from_roots() {
        let tol = Tolerances::default();
        let a = recurrence_coeffs(&[c(-0.1983, 0.0), c(0.4331, 0.0)], &tol).unwrap();
        assert!((a[0] - 0.2348).abs() < 5e-4 && (a[1] - 0.0859).abs() < 5e-4);
        assert_eq!(recurrence_coeffs(&[c(0.3, 0.0)], &tol).unwrap(), vec![0.3]);
        let err = recurrence_coeffs(&[c(0.3, 0.1)], &tol).unwrap_err();
        assert_eq!(err.code(), "imaginary-residue");
    }

    #[test]
    fn v_poly_basics() {
        let a = [0.2348, 0.0859];
        let d = c(0.3, -0.2);
        assert_eq!(v_poly(0, d, &a), c(1.0, 0.0));
        assert!((v_poly(1, d, &a) - (d - a[0])).norm() < 1e-15);
        let s = sol("110011", 0.7);
        for &dm in s.spectrum().ds() {
            assert!(s.v(3, dm).norm() < 1e-12);
        }
    }

    #[test]
    fn unroll_matches_closed_form() {
        for (p, rho) in [
            ("111111", 0.9),
            ("1101101", 0.5),
            ("110011", 0.7),
            ("1111000000001111", 0.9),
        ] {
            let s = sol(p, rho);
            let w = s.unroll_weights(41);
            for (i, wi) in w.iter().enumerate() {
                let cf = s.closed_form_weights(i);
                for (x, y) in wi.iter().zip(&cf) {
                    assert!((x - y).abs() < 1e-9, "{p} i={i}");
                }
            }
        }
    }

    #[test]
    fn unbiasedness_and_gap_constraints() {
        let s = sol("1101101", 0.5);
        let w = s.unroll_weights(30);
        assert!((w[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for wi in &w[1..] {
            assert!(wi.iter().sum::<f64>().abs() < 1e-12);
            assert_eq!(wi[2], 0.0);
            assert_eq!(wi[5], 0.0);
        }
    }

    #[test]
    fn solve_rejects_inconsistent_system() {
        // e_1 outside the column space of [[0], [1]]
        let s = SMatrix {
            entries: DMatrix::from_row_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]),
            p: 1,
            h: 0,
        };
        assert_eq!(
            solve_c(&s, &Tolerances::default()).unwrap_err().code(),
            "inconsistent-system"
        );
    }
}
