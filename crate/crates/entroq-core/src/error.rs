//! Error types shared across the library.

use thiserror::Error;

/// Violations found while validating a candidate density matrix.
///
/// Each field carries the measured defect when the corresponding invariant
/// fails, so callers can report exactly what went wrong.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateViolations {
    /// `max |M_jk - conj(M_kj)|` when above tolerance.
    pub hermiticity_defect: Option<f64>,
    /// `|min eigenvalue|` when the spectrum dips below -1e-10.
    pub psd_defect: Option<f64>,
    /// `|tr M - 1|` when above tolerance (unit-trace states only).
    pub trace_defect: Option<f64>,
}

impl std::fmt::Display for StateViolations {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(d) = self.hermiticity_defect {
            parts.push(format!("hermiticity defect {d:.3e}"));
        }
        if let Some(d) = self.psd_defect {
            parts.push(format!("PSD defect {d:.3e}"));
        }
        if let Some(d) = self.trace_defect {
            parts.push(format!("trace defect {d:.3e}"));
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dag| = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("not a valid quantum state: {0}")]
    InvalidState(StateViolations),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support of the first operator is not contained in the support of the second (defect {defect:.3e})")]
    SupportViolation { defect: f64 },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("transport error: {0}")]
    Transport(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
