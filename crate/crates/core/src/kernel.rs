//! Stationary correlation kernels and the uniform depth grid.

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::quadrature::GaussLegendre;

/// Two-point function `C exp(-|z1 - z2|^kappa / zeta^kappa)` of a zero-mean
/// stationary Gaussian field.
///
/// `kappa = 1` gives exponentially correlated (colored) noise, `kappa = 2`
/// the Bargmann-Fock field and larger exponents super-Gaussian decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationKernel {
    amplitude: f64,
    correlation_length: f64,
    exponent: f64,
}

impl CorrelationKernel {
    pub fn new(amplitude: f64, correlation_length: f64, exponent: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid(
                "amplitude",
                format!("must be positive and finite, got {amplitude}"),
            ));
        }
        if !(correlation_length.is_finite() && correlation_length > 0.0) {
            return Err(invalid(
                "correlation_length",
                format!("must be positive and finite, got {correlation_length}"),
            ));
        }
        // kappa < 1 loses positive definiteness on fine grids
        if !(exponent.is_finite() && exponent >= 1.0) {
            return Err(invalid(
                "exponent",
                format!("must be a finite real >= 1, got {exponent}"),
            ));
        }
        Ok(Self {
            amplitude,
            correlation_length,
            exponent,
        })
    }

    /// Squared-exponential kernel (`kappa = 2`).
    pub fn gaussian(amplitude: f64, correlation_length: f64) -> Result<Self> {
        Self::new(amplitude, correlation_length, 2.0)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn correlation_length(&self) -> f64 {
        self.correlation_length
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn is_gaussian_decay(&self) -> bool {
        self.exponent == 2.0
    }

    /// Kernel value as a function of the separation alone.
    #[inline]
    pub fn at_separation(&self, separation: f64) -> f64 {
        let r = separation.abs() / self.correlation_length;
        let decay = if self.exponent == 2.0 {
            r * r
        } else if self.exponent == 1.0 {
            r
        } else {
            r.powf(self.exponent)
        };
        self.amplitude * (-decay).exp()
    }

    #[inline]
    pub fn evaluate(&self, z1: f64, z2: f64) -> f64 {
        self.at_separation(z1 - z2)
    }

    /// `M[i][j] = phi(Z_i, Z_j)` on the grid abscissae.
    pub fn covariance_matrix(&self, grid: &Grid) -> DenseMatrix {
        let n = grid.n_points();
        let z = grid.abscissae();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = self.amplitude;
            for j in 0..i {
                let v = self.evaluate(z[i], z[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn panels_for(&self, length: f64) -> usize {
        let target = 0.5 * self.correlation_length;
        ((length / target).ceil() as usize).clamp(1, 20_000)
    }

    /// `int_0^z dZ1 int_0^Z1 dZ2 phi(Z1, Z2)` by nested composite Gauss-Legendre.
    pub fn ordered_double_integral(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let rule = GaussLegendre::ten_point();
        rule.composite(
            |z1| {
                if z1 <= 0.0 {
                    return 0.0;
                }
                rule.composite(|z2| self.evaluate(z1, z2), 0.0, z1, self.panels_for(z1))
            },
            0.0,
            z,
            self.panels_for(z),
        )
    }

    /// `int_0^z int_0^z phi(Z1, Z2) dZ1 dZ2`, the variance of `int_0^z G dZ`.
    ///
    /// The inner integral is split on the diagonal so that kernels with a
    /// cusp there (kappa = 1) are still integrated at full order.
    pub fn square_double_integral(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let rule = GaussLegendre::ten_point();
        rule.composite(
            |z1| {
                let below = if z1 > 0.0 {
                    rule.composite(|z2| self.evaluate(z1, z2), 0.0, z1, self.panels_for(z1))
                } else {
                    0.0
                };
                let above = if z1 < z {
                    rule.composite(|z2| self.evaluate(z1, z2), z1, z, self.panels_for(z - z1))
                } else {
                    0.0
                };
                below + above
            },
            0.0,
            z,
            self.panels_for(z),
        )
    }
}

/// Uniform abscissae `0 = Z_0 < ... < Z_{n-1} = L` across the slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid("length", format!("must be positive and finite, got {length}")));
        }
        if n_points < 2 {
            return Err(invalid(
                "n_points",
                format!("need at least 2 grid points, got {n_points}"),
            ));
        }
        Ok(Self { length, n_points })
    }

    /// Smallest grid whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(length: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing.is_finite() && max_spacing > 0.0) {
            return Err(invalid("max_spacing", format!("must be positive, got {max_spacing}")));
        }
        let panels = (length / max_spacing).ceil().max(1.0);
        // guard against ceil landing one panel short through rounding
        let panels = if length / panels > max_spacing {
            panels + 1.0
        } else {
            panels
        };
        Self::new(length, panels as usize + 1)
    }

    /// Default resolution: spacing at most a tenth of the correlation length.
    pub fn resolving(length: f64, kernel: &CorrelationKernel) -> Result<Self> {
        Self::with_max_spacing(length, kernel.correlation_length() / 10.0)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn abscissa(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.length
        } else {
            self.length * i as f64 / (self.n_points - 1) as f64
        }
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.abscissa(i)).collect()
    }

    pub fn check_depth(&self, z: f64) -> Result<()> {
        if (0.0..=self.length).contains(&z) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                z,
                lo: 0.0,
                hi: self.length,
            })
        }
    }

    /// Cell index and fractional position used for linear interpolation.
    pub(crate) fn locate(&self, z: f64) -> (usize, f64) {
        let h = self.spacing();
        let i = ((z / h).floor() as usize).min(self.n_points - 2);
        let t = ((z - self.abscissa(i)) / h).clamp(0.0, 1.0);
        (i, t)
    }
}
