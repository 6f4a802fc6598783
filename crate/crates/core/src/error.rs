use thiserror::Error;

/// Errors shared by every module of the lab.
#[derive(Debug, Error)]
pub enum LabError {
    /// A vector or operator support would leave the finite window.
    /// Silent truncation is never performed; the caller must enlarge the window.
    #[error("window overflow: {0}")]
    WindowOverflow(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Doubling the boundary grid moved a Taylor coefficient by more than the
    /// resolution budget; the inner function is too stiff for the requested length.
    #[error("grid resolution exhausted: {0}")]
    GridResolution(String),

    /// Eigenvalues of a defect projection cluster near 1/2, so the rank of the
    /// model space cannot be decided at this truncation.
    #[error("ill-conditioned model space: {0}")]
    IllConditioned(String),

    /// An iteration that must stabilize on the window failed to do so.
    #[error("stabilization failure: {0}")]
    Stabilization(String),

    /// An operator is not localized where the operation requires it to be.
    #[error("localization violation: {0}")]
    Localization(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
