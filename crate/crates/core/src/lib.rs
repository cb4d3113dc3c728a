//! Laser-beam attenuation in a slab whose absorption coefficient is a
//! stationary Gaussian random field.
//!
//! The crate provides
//!
//! * correlation kernels and a Cholesky sampler for field realizations
//!   ([`kernel`], [`field`]),
//! * the deterministic Beer and Beer-Lambert laws ([`attenuation`]),
//! * the random absorption coefficient and its mean-free-path series
//!   ([`medium`]),
//! * the closed-form ensemble-averaged intensity ([`averaged`]),
//! * a Monte Carlo engine built on the pathwise-exact solution of the
//!   stochastic attenuation equation ([`ensemble`]).
//!
//! Units are fixed: depths in cm, coefficients in cm^-1, intensities in W cm^-2.

pub mod attenuation;
pub mod averaged;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod kernel;
pub mod linalg;
pub mod medium;
pub mod quadrature;
pub mod stats;

pub use attenuation::{beer_variable, MediumSpec};
pub use averaged::{cumulant_series_exponent, inner_w, outer_y, theta, AveragedLaw, ExponentConvention};
pub use ensemble::{
    default_depths, euler_convergence, lognormal_oracle, path_intensity, path_intensity_em, run_ensemble,
    run_with_sampler, EnsembleStats, EulerLevel,
};
pub use error::{Error, Result};
pub use field::{path_seed, sample_path, FieldPath, FieldSampler};
pub use kernel::{CorrelationKernel, Grid};
pub use medium::{abs_moment, mfp_series, MfpSeries, StochasticMedium};
pub use stats::SampleMoments;
