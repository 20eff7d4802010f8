use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entropy argument {0} is negative")]
    EntropyDomain(f64),

    #[error("covariance matrix is not symmetric (max |g - g^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("invalid covariance shape: {0}")]
    Shape(String),

    #[error("covariance matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("unphysical state: symplectic eigenvalue {0} is below 1")]
    Unphysical(f64),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("invalid parameter {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("zero-excess-noise tuning is singular at T = 1 (no loss port for the cloner)")]
    SingularTuning,

    #[error("entangling cloner is degenerate at T = {0}")]
    DegenerateChannel(f64),

    #[error("estimation failed: {0}")]
    Estimation(String),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<f64> {
    if ok && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected,
        })
    }
}
