//! Roots of `Q_p` and their unit-disk parameters.
//!
//! Every `x` off the real segment `[-1, 1]` has two preimages under
//! `d -> (d + 1/d) / 2`; their product is one, so exactly one of them,
//! `d_-(x)`, lies strictly inside the unit disk. The recursion is built from
//! `d_m = d_-(x_m)` for the roots `x_m` of `Q_p`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::poly::RealPolynomial;
use crate::Tolerances;

const MAX_ITERATIONS: usize = 500;
const POLISH_STEPS: usize = 5;

/// Relative residual bound every returned root satisfies: `|Q(x)| <= RESIDUAL * max|coeff|`.
pub const RESIDUAL: f64 = 1e-8;

/// All complex roots of `q` by Aberth-Ehrlich iteration followed by Newton polishing.
///
/// Non-real roots are returned as exact conjugate pairs, real roots with a
/// zero imaginary part, ordered by real part and then imaginary part.
pub fn find_roots(q: &RealPolynomial) -> Result<Vec<Complex64>, Error> {
    let degree = q.degree();
    if degree == 0 {
        return Err(Error::DegreeTooLow { degree });
    }
    let lead = q.leading();
    let monic = RealPolynomial::new(q.coeffs().iter().map(|c| c / lead).collect());
    let dq = monic.derivative();

    let mut z = initial_guesses(&monic);
    let mut done = vec![false; degree];
    let mut iterations = 0;
    while done.iter().any(|d| !d) {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations });
        }
        iterations += 1;
        for k in 0..degree {
            if done[k] {
                continue;
            }
            let value = monic.eval_complex(z[k]);
            if value.norm() <= 4.0 * f64::EPSILON * monic.eval_abs(z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = value / dq.eval_complex(z[k]);
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                return Err(Error::NoConvergence { iterations });
            }
            z[k] -= step;
            if step.norm() <= 2.0 * f64::EPSILON * z[k].norm().max(f64::MIN_POSITIVE) {
                done[k] = true;
            }
        }
    }

    for root in z.iter_mut() {
        polish(&monic, &dq, root);
    }
    let mut roots = symmetrize(z).ok_or(Error::NoConvergence { iterations })?;
    for root in roots.iter_mut() {
        if root.im == 0.0 {
            polish(&monic, &dq, root);
            root.im = 0.0;
        }
    }
    roots.sort_by(|a, b| cmp_roots(*a, *b));

    let bound = RESIDUAL * q.max_abs_coeff();
    if roots.iter().any(|&x| q.eval_complex(x).norm() > bound) {
        return Err(Error::NoConvergence { iterations });
    }
    Ok(roots)
}

fn initial_guesses(monic: &RealPolynomial) -> Vec<Complex64> {
    let c = monic.coeffs();
    let n = monic.degree();
    // Fujiwara bound on root moduli
    let radius = (0..n)
        .map(|k| {
            let mut v = c[k].abs();
            if k == 0 {
                v *= 0.5;
            }
            v.powf(1.0 / (n - k) as f64)
        })
        .fold(0.0f64, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let centre = -c[n - 1] / n as f64;
    (0..n)
        .map(|k| {
            let angle = 2.0 * core::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::new(centre, 0.0) + Complex64::from_polar(radius, angle)
        })
        .collect()
}

fn polish(q: &RealPolynomial, dq: &RealPolynomial, root: &mut Complex64) {
    let mut best = q.eval_complex(*root).norm();
    for _ in 0..POLISH_STEPS {
        if best == 0.0 {
            return;
        }
        let d = dq.eval_complex(*root);
        if d.norm() == 0.0 {
            return;
        }
        let next = *root - q.eval_complex(*root) / d;
        let r = q.eval_complex(next).norm();
        if r.is_nan() || r >= best {
            return;
        }
        *root = next;
        best = r;
    }
}

/// Snaps near-real roots onto the axis and pairs the rest into exact conjugates.
fn symmetrize(z: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let real_tol = |x: Complex64| 1e-10 * (1.0 + x.norm());
    let mut out = Vec::with_capacity(z.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for x in z {
        if x.im.abs() <= real_tol(x) {
            out.push(Complex64::new(x.re, 0.0));
        } else if x.im > 0.0 {
            upper.push(x);
        } else {
            lower.push(x);
        }
    }
    if upper.len() != lower.len() {
        return None;
    }
    let mut used = vec![false; lower.len()];
    for u in upper {
        let (j, _) = lower
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, l)| (j, (l.conj() - u).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        used[j] = true;
        let mid = (u + lower[j].conj()) * 0.5;
        out.push(mid);
        out.push(mid.conj());
    }
    Some(out)
}

fn cmp_roots(a: Complex64, b: Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Euclidean distance from `x` to the real segment `[-1, 1]`.
pub fn distance_to_critical_interval(x: Complex64) -> f64 {
    let excess = (x.re.abs() - 1.0).max(0.0);
    excess.hypot(x.im)
}

fn d_pair(x: Complex64, tol: f64) -> Result<(Complex64, Complex64), Error> {
    if distance_to_critical_interval(x) <= tol {
        return Err(Error::OnCriticalInterval { re: x.re, im: x.im });
    }
    let s = ((x - 1.0) * (x + 1.0)).sqrt();
    let (a, b) = (x + s, x - s);
    let big = if a.norm() >= b.norm() { a } else { b };
    if big.norm() <= 1.0 + 1e-12 {
        return Err(Error::OnCriticalInterval { re: x.re, im: x.im });
    }
    let mut small = big.inv();
    let mut big = big;
    if x.im == 0.0 {
        small.im = 0.0;
        big.im = 0.0;
    }
    Ok((small, big))
}

/// Root of `d^2 - 2 x d + 1 = 0` inside the unit disk.
pub fn d_minus(x: Complex64) -> Result<Complex64, Error> {
    d_pair(x, Tolerances::default().root_interval).map(|p| p.0)
}

/// Root of `d^2 - 2 x d + 1 = 0` outside the unit disk.
pub fn d_plus(x: Complex64) -> Result<Complex64, Error> {
    d_pair(x, Tolerances::default().root_interval).map(|p| p.1)
}

/// `x(d) = (d + 1/d) / 2`.
pub fn x_of_d(d: Complex64) -> Complex64 {
    (d + d.inv()) * 0.5
}

/// Outcome of the root-localization check.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionOne {
    /// All roots distinct and off `[-1, 1]`.
    pub pass: bool,
    /// Smallest pairwise distance between roots (infinite for one root).
    pub min_separation: f64,
    /// Smallest distance from a root to `[-1, 1]`.
    pub interval_distance: f64,
    /// 0-based indices of roots that violate either condition.
    pub offending: Vec<usize>,
}

/// Roots must be pairwise farther apart than `tol.root_distinct * (1 + max|x|)`
/// and farther than `tol.root_interval` from `[-1, 1]`.
pub fn check_assumption_one(xs: &[Complex64], tol: &Tolerances) -> AssumptionOne {
    let scale = 1.0 + xs.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    let mut offending = Vec::new();
    let mut min_separation = f64::INFINITY;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let gap = (xs[i] - xs[j]).norm();
            min_separation = min_separation.min(gap);
            if gap <= tol.root_distinct * scale {
                offending.extend([i, j]);
            }
        }
    }
    let mut interval_distance = f64::INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        let dist = distance_to_critical_interval(x);
        interval_distance = interval_distance.min(dist);
        if dist <= tol.root_interval {
            offending.push(i);
        }
    }
    offending.sort_unstable();
    offending.dedup();
    AssumptionOne {
        pass: offending.is_empty(),
        min_separation,
        interval_distance,
        offending,
    }
}

/// How a root relates to the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Real root.
    Real,
    /// Member of a conjugate pair; `partner` is the 0-based index of the other.
    Conjugate {
        /// Index of the conjugate root.
        partner: usize,
    },
}

/// Roots of `Q_p` paired with their unit-disk parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSpectrum {
    xs: Vec<Complex64>,
    ds: Vec<Complex64>,
    kinds: Vec<RootKind>,
}

impl RootSpectrum {
    /// Maps each root to `d_-(x)`; conjugate roots get exactly conjugate `d`.
    pub fn new(xs: Vec<Complex64>, tol: &Tolerances) -> Result<Self, Error> {
        let kinds = pair_roots(&xs);
        let mut ds: Vec<Complex64> = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let d = match kinds[i] {
                RootKind::Conjugate { partner } if partner < i => ds[partner].conj(),
                _ => d_pair(x, tol.root_interval)?.0,
            };
            if d.norm() == 0.0 {
                return Err(Error::ZeroD { index: i + 1 });
            }
            ds.push(d);
        }
        Ok(Self { xs, ds, kinds })
    }

    /// Roots `x_1..x_p`.
    pub fn xs(&self) -> &[Complex64] {
        &self.xs
    }

    /// Unit-disk parameters `d_1..d_p`.
    pub fn ds(&self) -> &[Complex64] {
        &self.ds
    }

    /// Pairing tag per root.
    pub fn kinds(&self) -> &[RootKind] {
        &self.kinds
    }

    /// `p`.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// True when there are no roots.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// `max_m |d_m|`, the geometric decay rate of the estimator weights.
    pub fn max_modulus(&self) -> f64 {
        self.ds.iter().fold(0.0f64, |m, d| m.max(d.norm()))
    }
}

fn pair_roots(xs: &[Complex64]) -> Vec<RootKind> {
    let mut kinds = vec![RootKind::Real; xs.len()];
    let mut taken = vec![false; xs.len()];
    for i in 0..xs.len() {
        if taken[i] || xs[i].im == 0.0 {
            continue;
        }
        let tol = 1e-12 * (1.0 + xs[i].norm());
        let partner = (0..xs.len())
            .filter(|&j| j != i && !taken[j] && xs[j].im != 0.0)
            .map(|j| (j, (xs[j] - xs[i].conj()).norm()))
            .filter(|&(_, dist)| dist <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, _)) = partner {
            kinds[i] = RootKind::Conjugate { partner: j };
            kinds[j] = RootKind::Conjugate { partner: i };
            taken[i] = true;
            taken[j] = true;
        }
    }
    kinds
}
