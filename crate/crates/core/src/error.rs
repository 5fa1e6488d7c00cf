use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("norm validation failed: {0}")]
    NormValidation(String),

    #[error("target is not in the range of the bilinear map (residual {residual:.3e})")]
    NotInRange { residual: f64 },

    #[error("decomposition search failed to reach feasibility (best residual {residual:.3e})")]
    Infeasible { residual: f64 },

    #[error("instance too large for brute force: {0}")]
    Intractable(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Lp(#[from] crate::optlab::lp::LpError),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
