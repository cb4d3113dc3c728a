//! Closed-form ensemble-averaged intensity for the Gaussian-decay kernel.
//!
//! Averaging `exp(-alpha sigma int_0^z G)` over the field leaves Beer's law
//! multiplied by a boost factor `exp(g alpha^2 sigma^2 C Y(z))`, where
//!
//! ```text
//! W(z1) = int_0^z1 exp(-(z1 - z2)^2 / zeta^2) dz2 = (sqrt(pi)/2) zeta erf(z1/zeta)
//! Y(z)  = int_0^z W(z1) dz1
//!       = (zeta/2) [sqrt(pi) z erf(z/zeta) + zeta (exp(-z^2/zeta^2) - 1)]
//! ```
//!
//! The prefactor `g` depends on the [`ExponentConvention`]. `Exact` (g = 1)
//! is the lognormal mean `E[e^X] = e^{Var X / 2}` with
//! `Var X = alpha^2 sigma^2 C * 2Y(z)`. `PaperHalf` (g = 1/2) reproduces the
//! published figures.

use std::f64::consts::PI;

use crate::attenuation::{check_depth, exponential, MediumSpec};
use crate::error::{Error, Result};
use crate::kernel::CorrelationKernel;

/// Smallest finite-difference step accepted relative to the depth.
pub const MIN_RELATIVE_STEP: f64 = 1e-12;

/// Prefactor of the second cumulant in the boost exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExponentConvention {
    /// `g = 1/2`, the prefactor printed with the published closed form.
    PaperHalf,
    /// `g = 1`, the exact Gaussian average.
    #[default]
    Exact,
}

impl ExponentConvention {
    pub fn factor(self) -> f64 {
        match self {
            Self::PaperHalf => 0.5,
            Self::Exact => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PaperHalf => "PAPER_HALF",
            Self::Exact => "EXACT",
        }
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Inner integral `W(z1)` of the squared-exponential kernel, in cm.
pub fn inner_w(zeta: f64, z1: f64) -> f64 {
    0.5 * PI.sqrt() * zeta * erf(z1 / zeta)
}

/// Ordered double integral `Y(z)` of the squared-exponential kernel, in cm^2.
pub fn outer_y(zeta: f64, z: f64) -> f64 {
    let x = z / zeta;
    0.5 * zeta * (PI.sqrt() * z * erf(x) + zeta * (-(x * x)).exp_m1())
}

/// Averaged-intensity evaluator for a Gaussian-decay kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedLaw {
    medium: MediumSpec,
    kernel: CorrelationKernel,
    convention: ExponentConvention,
}

impl AveragedLaw {
    pub fn new(medium: MediumSpec, kernel: CorrelationKernel, convention: ExponentConvention) -> Result<Self> {
        require_gaussian(&kernel)?;
        Ok(Self {
            medium,
            kernel,
            convention,
        })
    }

    pub fn medium(&self) -> &MediumSpec {
        &self.medium
    }

    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn convention(&self) -> ExponentConvention {
        self.convention
    }

    pub fn with_convention(self, convention: ExponentConvention) -> Self {
        Self { convention, ..self }
    }

    /// Boost exponent `g alpha^2 sigma^2 C Y(z)` for attenuation coefficient `sigma`.
    fn boost_exponent(&self, sigma: f64, z: f64) -> f64 {
        let alpha = self.medium.alpha;
        self.convention.factor()
            * alpha
            * alpha
            * sigma
            * sigma
            * self.kernel.amplitude()
            * outer_y(self.kernel.correlation_length(), z)
    }

    /// Multiplicative correction to Beer's law, `>= 1` for `z >= 0`.
    pub fn boost_factor(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        Ok(self.boost_exponent(self.medium.sigma_a, z).exp())
    }

    pub fn averaged_intensity(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        let sigma = self.medium.sigma_a;
        Ok(exponential(self.medium.i0, sigma, z) * self.boost_exponent(sigma, z).exp())
    }

    /// Beer-Lambert variant: scattering and absorption share the same noise,
    /// so `sigma_t` replaces `sigma_a` everywhere.
    pub fn averaged_intensity_bl(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        let sigma = self.medium.sigma_t();
        Ok(exponential(self.medium.i0, sigma, z) * self.boost_exponent(sigma, z).exp())
    }

    /// Relative mismatch between a central finite difference of the averaged
    /// intensity and the drift `sigma (g alpha^2 sigma theta(z) - 1) I(z)`.
    pub fn ode_residual(&self, z: f64, h_fd: f64) -> Result<f64> {
        if h_fd.is_nan() || h_fd <= 0.0 || h_fd < MIN_RELATIVE_STEP * z.abs() {
            return Err(Error::DegenerateStep { h: h_fd, z });
        }
        if z < h_fd {
            return Err(Error::InvalidParameter {
                name: "h_fd",
                reason: format!("central difference at z = {z} needs h_fd <= z, got {h_fd}"),
            });
        }
        let i = self.averaged_intensity(z)?;
        let derivative = (self.averaged_intensity(z + h_fd)? - self.averaged_intensity(z - h_fd)?) / (2.0 * h_fd);
        let sigma = self.medium.sigma_a;
        let alpha = self.medium.alpha;
        let theta = theta(&self.kernel, z)?;
        let drift = sigma * (self.convention.factor() * alpha * alpha * sigma * theta - 1.0) * i;
        Ok((derivative - drift).abs() / i)
    }

    /// Logarithmic slope `d log I / dz` of the closed form.
    pub fn log_slope(&self, z: f64) -> Result<f64> {
        let sigma = self.medium.sigma_a;
        let alpha = self.medium.alpha;
        Ok(-sigma + self.convention.factor() * alpha * alpha * sigma * sigma * theta(&self.kernel, z)?)
    }
}

fn require_gaussian(kernel: &CorrelationKernel) -> Result<()> {
    if kernel.is_gaussian_decay() {
        Ok(())
    } else {
        Err(Error::UnsupportedKernel {
            kappa: kernel.exponent(),
        })
    }
}

/// `theta(z) = C W(z)`: the kernel integrated from the surface to `z` with
/// both endpoints tied to the current depth. Its limit for large `z` is
/// `C zeta sqrt(pi) / 2`.
pub fn theta(kernel: &CorrelationKernel, z: f64) -> Result<f64> {
    require_gaussian(kernel)?;
    check_depth(z)?;
    Ok(kernel.amplitude() * inner_w(kernel.correlation_length(), z))
}

/// Exponent of the cumulant expansion truncated at `max_order`, with the
/// second cumulant obtained by nested quadrature of the kernel (any `kappa`).
///
/// Order 1 vanishes for a zero-mean field. Order 2 is
/// `g (alpha sigma_a)^2 int_0^z int_0^z1 phi`. A Gaussian field has no
/// higher cumulants, so larger orders are rejected.
pub fn cumulant_series_exponent(
    kernel: &CorrelationKernel,
    alpha: f64,
    sigma_a: f64,
    z: f64,
    max_order: u32,
    convention: ExponentConvention,
) -> Result<f64> {
    check_depth(z)?;
    match max_order {
        1 => Ok(0.0),
        2 => Ok(convention.factor() * (alpha * sigma_a).powi(2) * kernel.ordered_double_integral(z)),
        m => Err(Error::UnsupportedOrder(m)),
    }
}
