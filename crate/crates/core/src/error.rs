use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The product state has no component in the invariant subspace.
    #[error("projection onto the invariant subspace vanishes (norm {norm:e})")]
    ZeroProjection { norm: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    /// Carries the best residual seen over all starts.
    #[error("entropic tetrahedron solve did not converge after {restarts} restarts (best residual {residual:e})")]
    NoConvergence { residual: f64, restarts: usize },

    #[error("invalid tetrahedron geometry: A{index} = {value:e}")]
    InvalidGeometry { index: usize, value: f64 },

    #[error("degenerate closed configuration at theta = {theta}")]
    DegenerateConfig { theta: f64 },

    #[error("polar angle {theta} outside [0, pi]")]
    InvalidDirection { theta: f64 },

    #[error("invalid spin: {0}")]
    InvalidSpin(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{failed} of {total} solves failed, above the allowed fraction")]
    ExcessFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
