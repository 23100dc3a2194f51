//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The 2-plane handed to the null-frame builder is degenerate or
    /// definite; no pair of independent null directions exists in it.
    #[error("not a Lorentzian plane (discriminant {discriminant:.3e})")]
    NotLorentzianPlane { discriminant: f64 },

    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },

    /// Evaluation left the domain of an expression (division by a value
    /// within tolerance of zero, or the square root of a negative).
    #[error("evaluation domain error: {what}")]
    EvalDomain { what: String },

    #[error("degenerate chart point (frame pivot {pivot:.3e})")]
    DegenerateChartPoint { pivot: f64 },

    /// The tau polynomial has no admissible real root anywhere on the
    /// sampled domain.
    #[error("no admissible tau root")]
    NoAdmissibleTau,

    /// Root branches collided or the accepted-root count changed across
    /// the domain, so a fixed branch index no longer identifies a root.
    #[error("root branch lost at {at:?}: {detail}")]
    RootBranchLost { at: Vec<f64>, detail: String },

    /// The tau polynomial is identically zero: a structural degeneracy of
    /// the input matrices.
    #[error("tau polynomial identically zero")]
    IdenticallyZero,

    #[error("graph leaves the null hyperplane at {at:?} (residual {residual:.3e})")]
    NotInNullHyperplane { at: Vec<f64>, residual: f64 },

    /// The null normal cannot be scaled to last component 1.
    #[error("normal normalization failure at {at:?}")]
    NormalizationFailure { at: Vec<f64> },

    /// Induced metric singular or tangent map rank-deficient at a sample.
    #[error("degenerate sample at {at:?}")]
    DegenerateSample { at: Vec<f64> },

    /// Every grid sample was degenerate; there is nothing to verify.
    #[error("nothing verifiable: all samples degenerate")]
    NothingVerifiable,

    #[error("sample {at:?} too close to the domain boundary for the requested stencil")]
    BoundaryMargin { at: Vec<f64> },

    /// Analytic jets were requested for a candidate that only provides
    /// pointwise evaluation.
    #[error("analytic jets unavailable for this candidate; use fd mode")]
    AnalyticUnavailable,

    /// A seed or scenario violates one of its stated invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
