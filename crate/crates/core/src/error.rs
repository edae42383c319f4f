use thiserror::Error;

/// Errors raised by the spectral, geometric and lifting machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not unitary (max deviation of M^dagger M from I is {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("degenerate spectrum: circular eigenphase gap {gap:.3e} is below threshold {threshold:.3e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("eigendecomposition residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("degenerate parameter point: sin(delta/2) = {sin_half_gap:.3e}")]
    DegeneratePoint { sin_half_gap: f64 },

    #[error(
        "vector is (numerically) an eigenvector of, or orthogonal to an eigenvector of, U0 (overlap {overlap:.3e})"
    )]
    VectorIsEigenvector { overlap: f64 },

    #[error("vector is not of unit norm (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("matrix is not a rank-1 projector (deviation {deviation:.3e})")]
    NotRankOneProjector { deviation: f64 },

    #[error("projectors do not form an orthogonal resolution of the identity (deviation {deviation:.3e})")]
    InvalidFrame { deviation: f64 },

    #[error("mapping is not a permutation of 0..{len}")]
    NotAPermutation { len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter cycle: {0}")]
    InvalidCycle(String),

    #[error("invalid option: {0}")]
    InvalidOptions(String),

    #[error("degeneracy encountered at sample {sample}: gap {gap:.3e} below {gap_tol:.3e}")]
    DegeneracyEncountered { sample: String, gap: f64, gap_tol: f64 },

    #[error("refinement exhausted after {depth} halvings between {from} and {to}")]
    RefinementExhausted { depth: usize, from: String, to: String },

    #[error("overlap assignment is not a permutation")]
    MatchingAmbiguous,

    #[error("final frame is not a permutation of the initial frame (max mismatch {mismatch:.3e})")]
    SetMismatch { mismatch: f64 },

    #[error("loop passes through the origin")]
    PassesThroughOrigin,

    #[error("loop is undersampled at segment {index}")]
    UndersampledLoop { index: usize },

    #[error("loop is not closed (endpoint mismatch {mismatch:.3e})")]
    NotClosed { mismatch: f64 },
}

impl Error {
    /// Stable machine-readable code, used in scenario reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotUnitary { .. } => "not_unitary",
            Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
            Error::ResidualTooLarge { .. } => "residual_too_large",
            Error::DegeneratePoint { .. } => "degenerate_point",
            Error::VectorIsEigenvector { .. } => "vector_is_eigenvector",
            Error::NotUnit { .. } => "not_unit",
            Error::NotRankOneProjector { .. } => "not_rank_one_projector",
            Error::InvalidFrame { .. } => "invalid_frame",
            Error::NotAPermutation { .. } => "not_a_permutation",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidCycle(_) => "invalid_cycle",
            Error::InvalidOptions(_) => "invalid_options",
            Error::DegeneracyEncountered { .. } => "degeneracy_encountered",
            Error::RefinementExhausted { .. } => "refinement_exhausted",
            Error::MatchingAmbiguous => "matching_ambiguous",
            Error::SetMismatch { .. } => "set_mismatch",
            Error::PassesThroughOrigin => "passes_through_origin",
            Error::UndersampledLoop { .. } => "undersampled_loop",
            Error::NotClosed { .. } => "not_closed",
        }
    }

    /// True for failures of the numerics (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSpectrum { .. }
                | Error::ResidualTooLarge { .. }
                | Error::DegeneratePoint { .. }
                | Error::DegeneracyEncountered { .. }
                | Error::RefinementExhausted { .. }
                | Error::MatchingAmbiguous
                | Error::SetMismatch { .. }
                | Error::PassesThroughOrigin
                | Error::UndersampledLoop { .. }
                | Error::NotClosed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
