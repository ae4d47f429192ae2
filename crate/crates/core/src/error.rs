//! Error types.

use thiserror::Error;

/// Rejected pattern text. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    /// Fewer than two slots.
    #[error("pattern needs at least 2 slots, got {len}")]
    EmptyOrShort {
        /// Number of slots found.
        len: usize,
    },
    /// A character other than `0` or `1`.
    #[error("invalid character {ch:?} at position {index}")]
    BadChar {
        /// Offending character.
        ch: char,
        /// Its 1-based position.
        index: usize,
    },
    /// First or last slot is out of sample.
    #[error("slot {index} is '0' but a cascade pattern must start and end in-sample")]
    EndpointZero {
        /// 1-based slot index.
        index: usize,
    },
    /// Malformed `a-b-c` alias.
    #[error("malformed scheme alias: {reason}")]
    BadScheme {
        /// What is wrong.
        reason: &'static str,
        /// 1-based index of the offending run, when there is one.
        index: Option<usize>,
    },
}

impl PatternError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyOrShort { .. } => "empty-or-short",
            Self::BadChar { .. } => "bad-char",
            Self::EndpointZero { .. } => "endpoint-zero",
            Self::BadScheme { .. } => "bad-scheme",
        }
    }

    /// 1-based index of the offending slot or run, if any.
    pub fn index(&self) -> Option<usize> {
        match *self {
            Self::EmptyOrShort { .. } => None,
            Self::BadChar { index, .. } | Self::EndpointZero { index } => Some(index),
            Self::BadScheme { index, .. } => index,
        }
    }
}

/// Rejected correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RhoError {
    /// `rho == 0`: past occasions carry no information.
    #[error("rho = 0 is excluded: past occasions carry no information about the current mean")]
    Zero,
    /// `|rho| >= 1`.
    #[error("rho = {rho} is outside the open interval (-1, 1)")]
    OutOfRange {
        /// The rejected value.
        rho: f64,
    },
    /// NaN or infinite.
    #[error("rho is not a finite number")]
    NotFinite,
}

impl RhoError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Zero => "rho-zero",
            Self::OutOfRange { .. } => "rho-out-of-range",
            Self::NotFinite => "rho-not-finite",
        }
    }
}

/// Everything that can go wrong in the core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Bad pattern text.
    #[error(transparent)]
    Pattern(#[from] PatternError),
    /// Bad correlation.
    #[error(transparent)]
    Rho(#[from] RhoError),
    /// A tridiagonal solve hit a zero pivot.
    #[error("tridiagonal system of order {order} is singular")]
    SingularR {
        /// Matrix order.
        order: usize,
    },
    /// Root finding requires degree at least one.
    #[error("polynomial of degree {degree} has no roots to find")]
    DegreeTooLow {
        /// Degree found.
        degree: usize,
    },
    /// Simultaneous root iteration hit its cap.
    #[error("root finder did not converge within {iterations} iterations")]
    NoConvergence {
        /// Iterations performed.
        iterations: usize,
    },
    /// `x` lies on `[-1, 1]`, where `d_-(x)` is undefined.
    #[error("x = {re} + {im}i lies on the critical interval [-1, 1]")]
    OnCriticalInterval {
        /// Real part.
        re: f64,
        /// Imaginary part.
        im: f64,
    },
    /// A unit-disk parameter is zero.
    #[error("d_{index} is zero")]
    ZeroD {
        /// 1-based root index.
        index: usize,
    },
    /// `S` lost rank.
    #[error("S has numerical rank {rank}, expected {expected}")]
    RankDeficient {
        /// Numerical rank.
        rank: usize,
        /// Number of columns.
        expected: usize,
    },
    /// Least-squares solution of `S c = e1` leaves a residual.
    #[error("S c = e1 is inconsistent: residual {residual:e}")]
    InconsistentSystem {
        /// `||S c - e1||_2`.
        residual: f64,
    },
    /// A quantity that must be real has a large imaginary part.
    #[error("{quantity} carries imaginary residue {residue:e}")]
    ImaginaryResidue {
        /// Which quantity.
        quantity: &'static str,
        /// Largest imaginary magnitude.
        residue: f64,
    },
    /// Variance fell outside `(0, 1]`.
    #[error("variance {variance} is outside (0, 1]")]
    VarianceOutOfRange {
        /// Offending value.
        variance: f64,
    },
    /// Finite-horizon KKT matrix could not be factored.
    #[error("KKT system is singular")]
    SingularKkt,
    /// Not enough occasions to bootstrap the recursion.
    #[error("need at least {needed} occasions, got {got}")]
    InsufficientHistory {
        /// Required count.
        needed: usize,
        /// Supplied count.
        got: usize,
    },
    /// Observation vector with the wrong number of slots.
    #[error("observation on occasion {occasion} has {got} slots, expected {expected}")]
    ObservationLength {
        /// 0-based occasion.
        occasion: usize,
        /// Slots supplied.
        got: usize,
        /// Slots expected.
        expected: usize,
    },
    /// Horizon or length argument must be at least one.
    #[error("horizon must be at least 1")]
    InvalidHorizon,
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Pattern(e) => e.code(),
            Self::Rho(e) => e.code(),
            Self::SingularR { .. } => "singular-r",
            Self::DegreeTooLow { .. } => "degree-too-low",
            Self::NoConvergence { .. } => "no-convergence",
            Self::OnCriticalInterval { .. } => "on-critical-interval",
            Self::ZeroD { .. } => "zero-d",
            Self::RankDeficient { .. } => "rank-deficient",
            Self::InconsistentSystem { .. } => "inconsistent-system",
            Self::ImaginaryResidue { .. } => "imaginary-residue",
            Self::VarianceOutOfRange { .. } => "variance-out-of-range",
            Self::SingularKkt => "singular-kkt",
            Self::InsufficientHistory { .. } => "insufficient-history",
            Self::ObservationLength { .. } => "observation-length",
            Self::InvalidHorizon => "invalid-horizon",
        }
    }

    /// True for input-validation failures, as opposed to numerical ones.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Self::Pattern(_) | Self::Rho(_) | Self::InvalidHorizon | Self::ObservationLength { .. }
        )
    }
}
