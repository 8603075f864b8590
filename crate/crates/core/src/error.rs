use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("non-positive box dimension")]
    NonPositiveDimension,
    #[error("non-finite box coordinate")]
    NonFinite,
    #[error("frame index must be >= 1")]
    ZeroFrame,
    #[error("confidence must be in [0, 1] or -1")]
    ConfidenceOutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FilterError {
    /// The predictive covariance of the measurement is not positive definite.
    #[error("degenerate innovation covariance")]
    DegenerateInnovation,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackerError {
    #[error("non-monotone frame index: {frame} after {previous}")]
    NonMonotoneFrame { previous: u32, frame: u32 },
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("invalid tracker config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("duplicate identity row: frame {frame}, id {id}")]
    DuplicateIdentity { frame: u32, id: i64 },
    #[error("invalid IoU threshold")]
    Threshold,
}
