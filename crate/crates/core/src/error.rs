use thiserror::Error;

/// Failures reported by the state, path and optics layers.
///
/// The `Display` form always starts with the variant name so that command-line
/// diagnostics can be matched on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NotNormalized: squared norm {norm_sq} differs from 1")]
    NotNormalized { norm_sq: f64 },

    #[error("NotMaximallyEntangled: |C| = {concurrence} (expected 1)")]
    NotMaximallyEntangled { concurrence: f64 },

    #[error("UnknownLabel: {0:?} is not a hypercube vertex")]
    UnknownLabel(String),

    #[error("OrthogonalStates: overlap magnitude {magnitude:e} too small to define a phase")]
    OrthogonalStates { magnitude: f64 },

    #[error("NotClosed: trajectory does not return to the initial SO(3) point")]
    NotClosed,

    #[error("DomainError: {0}")]
    Domain(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotNormalized { .. } => "NotNormalized",
            Error::NotMaximallyEntangled { .. } => "NotMaximallyEntangled",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::OrthogonalStates { .. } => "OrthogonalStates",
            Error::NotClosed => "NotClosed",
            Error::Domain(_) => "DomainError",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
