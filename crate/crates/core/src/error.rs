use std::fmt;

use serde::Serialize;

/// Clause of the standing hypotheses that a rejected problem violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Clause {
    /// n must exceed p.
    DimensionNotAbovePower,
    /// 1 < p <= 2.
    PowerOutOfRange,
    /// n must be an integer >= 2.
    DimensionTooSmall,
    /// (F): q > 2.
    GrowthExponent,
    /// (F): the double-power family needs Q > q.
    SecondExponent,
    /// (F): b > 0 on (-d-, d+).
    BNotPositive,
    /// (F): b(-d-) = b(d+) = 0.
    BNotVanishing,
    /// (F): d+ and d- must be finite and positive.
    PositivityBounds,
    /// (K): delta > -p.
    WeightExponent,
    /// (K): h > 0.
    WeightNotPositive,
    /// (K): h0 and h_inf finite and positive.
    WeightLimits,
    /// (K): limsup h'(r) r < inf as r -> 0.
    WeightDerivativeAtZero,
    /// (K): h'(r) r^(1+varpi) -> 0 as r -> inf.
    WeightDerivativeAtInfinity,
    /// varpi must lie in (0, alpha_l).
    DecayRate,
    /// l > p* (Sobolev) is required outside oracle mode.
    NotSupercritical,
    /// Oracle mode only admits l = p*.
    OracleNotCritical,
    /// A pure power nonlinearity is only allowed in oracle mode.
    PurePowerOutsideOracle,
    /// Non-finite input value.
    NonFinite,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::DimensionNotAbovePower => "n > p",
            Clause::PowerOutOfRange => "1 < p <= 2",
            Clause::DimensionTooSmall => "n >= 2",
            Clause::GrowthExponent => "(F) q > 2",
            Clause::SecondExponent => "(F) Q > q",
            Clause::BNotPositive => "(F) b > 0 on (-d-, d+)",
            Clause::BNotVanishing => "(F) b(-d-) = b(d+) = 0",
            Clause::PositivityBounds => "(F) d+, d- > 0",
            Clause::WeightExponent => "(K) delta > -p",
            Clause::WeightNotPositive => "(K) h > 0",
            Clause::WeightLimits => "(K) h0, h_inf in (0, inf)",
            Clause::WeightDerivativeAtZero => "(K) limsup h'(r) r < inf at 0",
            Clause::WeightDerivativeAtInfinity => "(K) h'(r) r^(1+varpi) -> 0 at inf",
            Clause::DecayRate => "0 < varpi < alpha_l",
            Clause::NotSupercritical => "l > p*",
            Clause::OracleNotCritical => "oracle mode requires l = p*",
            Clause::PurePowerOutsideOracle => "(F) pure power only in oracle mode",
            Clause::NonFinite => "finite parameters",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid problem: {clause} violated ({detail})")]
    InvalidSpec { clause: Clause, detail: String },
    #[error("limiting nonlinearity is degenerate: h_inf b(0) = {0}")]
    DegenerateLimit(f64),
    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("regular seed failed the Richardson check (difference {diff:e} at r0 = {r0:e})")]
    BadSeed { r0: f64, diff: f64 },
    #[error("zero count {zeros} disagrees with unwrapped angle {angle}")]
    InconsistentAngle { zeros: usize, angle: f64 },
    #[error("transition for k = {0} could not be narrowed to the requested width")]
    UnresolvedBracket(usize),
    #[error("manifold grid could not be refined to angle continuity")]
    GridTooCoarse,
    #[error("stable slice does not wind far enough to meet E_{0}")]
    NoCrossing(usize),
    #[error("invariant set violated at t = {t}: {what}")]
    ViolationFound { t: f64, what: String },
    #[error("unsupported closed-form family: {0}")]
    UnsupportedFamily(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn spec(clause: Clause, detail: impl Into<String>) -> Self {
        Error::InvalidSpec {
            clause,
            detail: detail.into(),
        }
    }

    /// The violated clause, when this is a spec rejection.
    pub fn clause(&self) -> Option<Clause> {
        match self {
            Error::InvalidSpec { clause, .. } => Some(*clause),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
