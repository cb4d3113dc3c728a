//! Randomly fluctuating absorption coefficient `sigma_a (1 + alpha G(Z))`.

use crate::attenuation::MediumSpec;
use crate::error::{invalid, Error, Result};
use crate::field::FieldPath;
use crate::kernel::CorrelationKernel;

/// Relative size of the last series term below which the MFP series is
/// considered converged.
pub const MFP_CONVERGENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticMedium {
    pub medium: MediumSpec,
    pub kernel: CorrelationKernel,
}

impl StochasticMedium {
    pub fn new(medium: MediumSpec, kernel: CorrelationKernel) -> Self {
        Self { medium, kernel }
    }

    /// Standard deviation of the absorption coefficient, `alpha sigma_a sqrt(C)`.
    pub fn fluctuation_std(&self) -> f64 {
        self.medium.alpha * self.medium.sigma_a * self.kernel.amplitude().sqrt()
    }

    /// Absorption coefficient of one realization at depth `z`.
    ///
    /// Negative values are returned as-is; clamping would bias the moments.
    pub fn absorption_at(&self, path: &FieldPath, z: f64) -> Result<f64> {
        let g = path.value_at(z)?;
        Ok(self.medium.sigma_a * (1.0 + self.medium.alpha * g))
    }

    /// Mean free path shift from the binomial expansion of `1 / A(Z)`.
    pub fn mfp_series(&self, max_order: u32) -> Result<MfpSeries> {
        mfp_series(
            self.medium.alpha,
            self.kernel.amplitude(),
            self.medium.sigma_a,
            max_order,
        )
    }
}

/// The closed moment expression `(C^{l/2} + (-1)^l C^{l/2}) / 2`:
/// `C^{l/2}` for even orders, zero for odd ones.
///
/// Note this is not the Gaussian absolute moment, which carries an extra
/// `(l - 1)!!` factor for even `l`.
pub fn abs_moment(amplitude: f64, order: u32) -> f64 {
    if order % 2 == 1 {
        0.0
    } else {
        amplitude.powf(f64::from(order) / 2.0)
    }
}

/// Ratio `R(alpha, C, Q) = alpha * abs_moment(C, Q)^{1/Q}`.
pub fn series_ratio(alpha: f64, amplitude: f64, order: u32) -> f64 {
    if order == 0 {
        return 1.0;
    }
    alpha * abs_moment(amplitude, order).powf(1.0 / f64::from(order))
}

/// Partial sums of the mean-free-path expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct MfpSeries {
    /// `S = sum_{Q=1}^{Q_max} (-1)^Q |R(alpha, C, Q)|^Q`.
    pub shift: f64,
    /// Contribution of each order, `terms[Q - 1]`.
    pub terms: Vec<f64>,
    pub converged: bool,
    /// `(1 + S) / sigma_a`, in cm.
    pub mean_free_path: f64,
}

pub fn mfp_series(alpha: f64, amplitude: f64, sigma_a: f64, max_order: u32) -> Result<MfpSeries> {
    if max_order == 0 {
        return Err(invalid("max_order", "the series needs at least one term"));
    }
    let mut terms = Vec::with_capacity(max_order as usize);
    for q in 1..=max_order {
        let r = series_ratio(alpha, amplitude, q);
        if r >= 1.0 {
            return Err(Error::DivergentSeries { order: q, ratio: r });
        }
        // binom(-1, Q) = (-1)^Q
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * r.abs().powi(q as i32));
    }
    let shift: f64 = terms.iter().sum();
    // odd orders contribute zero, so judge convergence on the last two terms
    let tail = terms.iter().rev().take(2).fold(0.0f64, |m, t| m.max(t.abs()));
    let converged = tail < MFP_CONVERGENCE_TOLERANCE * (1.0 + shift.abs());
    Ok(MfpSeries {
        shift,
        terms,
        converged,
        mean_free_path: (1.0 + shift) / sigma_a,
    })
}
