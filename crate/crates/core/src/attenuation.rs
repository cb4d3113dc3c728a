//! Deterministic slab attenuation laws.

use crate::error::{invalid, Error, Result};
use crate::quadrature::trapezoid;

/// Deterministic medium and beam parameters.
///
/// Coefficients are in cm^-1, intensities in W cm^-2; `alpha` scales the
/// random part of the absorption coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    pub sigma_a: f64,
    pub sigma_s: f64,
    pub alpha: f64,
    pub i0: f64,
}

impl MediumSpec {
    pub fn new(sigma_a: f64, sigma_s: f64, alpha: f64, i0: f64) -> Result<Self> {
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and >= 0, got {v}")))
            }
        };
        nonneg("sigma_a", sigma_a)?;
        nonneg("sigma_s", sigma_s)?;
        nonneg("alpha", alpha)?;
        if !(i0.is_finite() && i0 > 0.0) {
            return Err(invalid("i0", format!("must be positive, got {i0}")));
        }
        Ok(Self {
            sigma_a,
            sigma_s,
            alpha,
            i0,
        })
    }

    /// Purely absorbing medium.
    pub fn absorbing(sigma_a: f64, alpha: f64, i0: f64) -> Result<Self> {
        Self::new(sigma_a, 0.0, alpha, i0)
    }

    pub fn sigma_t(&self) -> f64 {
        self.sigma_a + self.sigma_s
    }

    /// The small-fluctuation picture breaks down once `alpha >= 1`.
    pub fn is_large_fluctuation(&self) -> bool {
        self.alpha >= 1.0
    }

    /// Beer's law `I0 exp(-sigma_a z)`.
    pub fn beer(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        Ok(exponential(self.i0, self.sigma_a, z))
    }

    /// Beer-Lambert law with the total attenuation coefficient.
    pub fn beer_lambert(&self, z: f64) -> Result<f64> {
        check_depth(z)?;
        Ok(exponential(self.i0, self.sigma_t(), z))
    }
}

#[inline]
pub(crate) fn exponential(i0: f64, coefficient: f64, z: f64) -> f64 {
    i0 * (-(coefficient * z)).exp()
}

pub(crate) fn check_depth(z: f64) -> Result<()> {
    if z >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeDepth(z))
    }
}

/// `I0 exp(-int_0^z sigma_a(Z) dZ)` for a depth-dependent coefficient, the
/// optical depth taken by the composite trapezoid rule on `quad_points` nodes.
pub fn beer_variable<F>(profile: F, i0: f64, z: f64, quad_points: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_depth(z)?;
    if quad_points < 2 {
        return Err(invalid("quad_points", format!("need at least 2, got {quad_points}")));
    }
    if z == 0.0 {
        return Ok(i0);
    }
    let optical_depth = trapezoid(profile, 0.0, z, quad_points);
    Ok(i0 * (-optical_depth).exp())
}
