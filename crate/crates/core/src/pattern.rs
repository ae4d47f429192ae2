//! Cascade rotation patterns and the model parameters built on them.
//!
//! A pattern of length `N` marks which of the `N` rotation-group slots are
//! observed on each occasion. Slot 1 holds the group about to leave, slot `N`
//! the group that just entered. Zeros are gaps: the group is still in the
//! panel but is not interviewed on that occasion.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{PatternError, RhoError};

/// Maximal run of out-of-sample slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    /// 1-based position of the first zero.
    pub start: usize,
    /// Number of consecutive zeros.
    pub len: usize,
}

impl Gap {
    /// 1-based positions covered by the gap.
    pub fn positions(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Validated rotation design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadePattern {
    slots: Vec<bool>,
    gaps: Vec<Gap>,
}

impl CascadePattern {
    /// Parses either a bit string (`"1101101"`) or an alternating run alias
    /// (`"4-8-4"`: four in, eight out, four in).
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let text = text.trim();
        if text.contains('-') {
            Self::from_scheme(text)
        } else {
            Self::from_bit_string(text)
        }
    }

    /// Parses a string over `{0, 1}`, slot 1 first.
    pub fn from_bit_string(text: &str) -> Result<Self, PatternError> {
        let mut slots = Vec::with_capacity(text.len());
        for (i, ch) in text.chars().enumerate() {
            match ch {
                '1' => slots.push(true),
                '0' => slots.push(false),
                _ => return Err(PatternError::BadChar { ch, index: i + 1 }),
            }
        }
        Self::from_slots(slots)
    }

    /// Expands an alias such as `"2-2-2"` into in/out runs.
    pub fn from_scheme(text: &str) -> Result<Self, PatternError> {
        let mut slots = Vec::new();
        let mut runs = 0;
        for (i, part) in text.split('-').enumerate() {
            let part = part.trim();
            if part.is_empty() {
                return Err(PatternError::BadScheme {
                    reason: "empty run length",
                    index: Some(i + 1),
                });
            }
            let len: usize = part.parse().map_err(|_| PatternError::BadScheme {
                reason: "run length is not a number",
                index: Some(i + 1),
            })?;
            if len == 0 {
                return Err(PatternError::BadScheme {
                    reason: "run length must be positive",
                    index: Some(i + 1),
                });
            }
            slots.extend(core::iter::repeat(i % 2 == 0).take(len));
            runs += 1;
        }
        if runs % 2 == 0 {
            return Err(PatternError::BadScheme {
                reason: "alias must have an odd number of runs so it ends in-sample",
                index: None,
            });
        }
        Self::from_slots(slots)
    }

    /// Validates a slot mask, `true` = observed.
    pub fn from_slots(slots: Vec<bool>) -> Result<Self, PatternError> {
        let n = slots.len();
        if n < 2 {
            return Err(PatternError::EmptyOrShort { len: n });
        }
        if !slots[0] {
            return Err(PatternError::EndpointZero { index: 1 });
        }
        if !slots[n - 1] {
            return Err(PatternError::EndpointZero { index: n });
        }
        let mut gaps = Vec::new();
        let mut i = 0;
        while i < n {
            if slots[i] {
                i += 1;
                continue;
            }
            let start = i;
            while !slots[i] {
                i += 1;
            }
            gaps.push(Gap {
                start: start + 1,
                len: i - start,
            });
        }
        Ok(Self { slots, gaps })
    }

    /// Maximal sample size `N`.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    /// Always false; a valid pattern has at least two slots.
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Effective sample size `n`.
    pub fn observed(&self) -> usize {
        self.slots.iter().filter(|&&s| s).count()
    }

    /// Number of gap slots `h = N - n`.
    pub fn gap_count(&self) -> usize {
        self.len() - self.observed()
    }

    /// Coverage `p`: one plus the largest gap.
    pub fn coverage(&self) -> usize {
        1 + self.gaps.iter().map(|g| g.len).max().unwrap_or(0)
    }

    /// Slot mask, `true` = observed.
    pub fn slots(&self) -> &[bool] {
        &self.slots
    }

    /// Maximal runs of zeros, left to right.
    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    /// Gap sizes `m_1..m_s`.
    pub fn gap_sizes(&self) -> Vec<usize> {
        self.gaps.iter().map(|g| g.len).collect()
    }

    /// The set `H` as sorted 1-based positions.
    pub fn gap_positions(&self) -> Vec<usize> {
        self.gaps.iter().flat_map(Gap::positions).collect()
    }

    /// 0-based indices of observed slots.
    pub fn observed_slots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.slots[i]).collect()
    }

    /// Whether the 0-based slot is observed.
    pub fn is_observed(&self, slot: usize) -> bool {
        self.slots[slot]
    }

    /// Bit-string form.
    pub fn to_bit_string(&self) -> String {
        self.slots
            .iter()
            .map(|&s| if s { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for CascadePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.slots {
            f.write_str(if s { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for CascadePattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Checks `0 < |rho| < 1`.
pub fn validate_rho(rho: f64) -> Result<f64, RhoError> {
    if !rho.is_finite() {
        Err(RhoError::NotFinite)
    } else if rho == 0.0 {
        Err(RhoError::Zero)
    } else if rho.abs() >= 1.0 {
        Err(RhoError::OutOfRange { rho })
    } else {
        Ok(rho)
    }
}

/// Pattern plus the exponential correlation `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    rho: f64,
    pattern: CascadePattern,
}

impl ModelParams {
    /// Validates `rho` and bundles it with the pattern.
    pub fn new(pattern: CascadePattern, rho: f64) -> Result<Self, RhoError> {
        Ok(Self {
            rho: validate_rho(rho)?,
            pattern,
        })
    }

    /// Correlation between consecutive occasions of a unit.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// The rotation design.
    pub fn pattern(&self) -> &CascadePattern {
        &self.pattern
    }

    /// `N`.
    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    /// `cov(X_t, X_{t-1})`: `rho` on the superdiagonal, zero elsewhere.
    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        covariance_matrix(self.len(), self.rho)
    }
}

/// The `N x N` lag-one cross-covariance of maximal samples.
pub fn covariance_matrix(n: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { rho } else { 0.0 })
}
