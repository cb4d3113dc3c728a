use thiserror::Error;

/// Errors raised by the attenuation, sampling and averaging routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("depth must be nonnegative, got {0}")]
    NegativeDepth(f64),

    #[error("depth {z} lies outside the slab [{lo}, {hi}]")]
    OutOfDomain { z: f64, lo: f64, hi: f64 },

    #[error("covariance Cholesky factorization failed even with diagonal jitter {max_jitter:.3e}")]
    FactorizationFailure { max_jitter: f64 },

    #[error("mean-free-path series diverges: R = {ratio} >= 1 at order {order}")]
    DivergentSeries { order: u32, ratio: f64 },

    #[error("closed form requires the Gaussian-decay kernel (kappa = 2), got kappa = {kappa}")]
    UnsupportedKernel { kappa: f64 },

    #[error("cumulant order {0} is not supported (Gaussian fields have cumulants of order 1 and 2 only)")]
    UnsupportedOrder(u32),

    #[error("finite-difference step {h} is too small relative to depth {z}")]
    DegenerateStep { h: f64, z: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
