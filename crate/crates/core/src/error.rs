use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// Everything that can go wrong in this crate.
///
/// The variants fall into two groups: *usage* problems (bad input files,
/// malformed rationals, out-of-range flags) and *domain* outcomes (a Rauzy
/// tie, no admissible edge, no closing parameter). The CLI maps the second
/// group to exit code 2, see [`Error::is_domain`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("lengths must be nonempty")]
    EmptyLengths,

    #[error("NonPositiveLength: length {index} is {value}", value = format_rational(.value))]
    NonPositiveLength { index: usize, value: Rational },

    #[error("PermutationNotBijective: {0:?} is not a bijection of 1..m")]
    PermutationNotBijective(Vec<usize>),

    #[error("OutOfDomain: {x} is not in [0, {base})", x = format_rational(.x), base = format_rational(.base))]
    OutOfDomain { x: Rational, base: Rational },

    #[error("ReturnTimeExceeded: some orbit of [0, {scale}) did not return within {max_steps} steps", scale = format_rational(.scale))]
    ReturnTimeExceeded { max_steps: usize, scale: Rational },

    #[error("NotInduced: {0}")]
    NotInduced(String),

    #[error("TieEncountered: the two rightmost lengths are both {r}", r = format_rational(.0))]
    TieEncountered(Rational),

    #[error("ReduciblePermutation: {0:?}")]
    ReduciblePermutation(Vec<usize>),

    #[error("SingularityInBox: singular point {r} lies on the box", r = format_rational(.0))]
    SingularityInBox(Rational),

    #[error("NotEmbedded: {0}")]
    NotEmbedded(String),

    #[error("LeftBoxUndefined: twisted orbit reaches the singular point {0}")]
    LeftBoxUndefined(f64),

    #[error("ContinuationBroken: at t = {t} the arc leaves the box before reaching the orthogonal edge")]
    ContinuationBroken { t: f64 },

    #[error("NoClosingInRange: g(t) = a(t) - b does not change sign on [{lo}, {hi}]")]
    NoClosingInRange { lo: f64, hi: f64 },

    #[error("ClosingNotVerified: forward integration misses the start by {residual}, above the tolerance {tolerance}")]
    ClosingNotVerified { residual: f64, tolerance: f64 },

    #[error("NoEdgeInNeighborhood({n}): {reason}")]
    NoEdgeInNeighborhood { n: usize, reason: String, blocked: Vec<String> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// The short typed name used in diagnostics, e.g. `TieEncountered`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyLengths => "EmptyLengths",
            Error::NonPositiveLength { .. } => "NonPositiveLength",
            Error::PermutationNotBijective(_) => "PermutationNotBijective",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::ReturnTimeExceeded { .. } => "ReturnTimeExceeded",
            Error::NotInduced(_) => "NotInduced",
            Error::TieEncountered(_) => "TieEncountered",
            Error::ReduciblePermutation(_) => "ReduciblePermutation",
            Error::SingularityInBox(_) => "SingularityInBox",
            Error::NotEmbedded(_) => "NotEmbedded",
            Error::LeftBoxUndefined(_) => "LeftBoxUndefined",
            Error::ContinuationBroken { .. } => "ContinuationBroken",
            Error::NoClosingInRange { .. } => "NoClosingInRange",
            Error::ClosingNotVerified { .. } => "ClosingNotVerified",
            Error::NoEdgeInNeighborhood { .. } => "NoEdgeInNeighborhood",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// True for outcomes of the mathematics rather than of bad input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutOfDomain { .. }
                | Error::ReturnTimeExceeded { .. }
                | Error::NotInduced(_)
                | Error::TieEncountered(_)
                | Error::ReduciblePermutation(_)
                | Error::SingularityInBox(_)
                | Error::NotEmbedded(_)
                | Error::LeftBoxUndefined(_)
                | Error::ContinuationBroken { .. }
                | Error::NoClosingInRange { .. }
                | Error::ClosingNotVerified { .. }
                | Error::NoEdgeInNeighborhood { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
