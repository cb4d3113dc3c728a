//! Sampled realizations of the stationary Gaussian field on a depth grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::kernel::{CorrelationKernel, Grid};
use crate::linalg::CholeskyFactor;
use crate::quadrature::cumulative_trapezoid;

/// Relative diagonal jitter tried first when factorizing the covariance.
pub const INITIAL_JITTER: f64 = 1e-12;
/// Largest relative jitter before the factorization is declared failed.
pub const MAX_JITTER: f64 = 1e-6;

/// One realization of the field on a grid, with its running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPath {
    grid: Grid,
    values: Vec<f64>,
    cumulative_integral: Vec<f64>,
}

impl FieldPath {
    /// Wraps grid samples, accumulating the trapezoid integral.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", grid.n_points(), values.len()),
            ));
        }
        let cumulative_integral = cumulative_trapezoid(&values, grid.spacing());
        Ok(Self {
            grid,
            values,
            cumulative_integral,
        })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::from_values(grid, vec![value; grid.n_points()]).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cumulative_integral(&self) -> &[f64] {
        &self.cumulative_integral
    }

    /// Field value at `z`, linearly interpolated between grid points.
    pub fn value_at(&self, z: f64) -> Result<f64> {
        self.grid.check_depth(z)?;
        Ok(lerp(&self.values, self.grid.locate(z)))
    }

    /// `int_0^z G dZ`, interpolated from the running trapezoid integral.
    pub fn stochastic_integral(&self, z: f64) -> Result<f64> {
        self.grid.check_depth(z)?;
        if z == 0.0 {
            return Ok(0.0);
        }
        Ok(lerp(&self.cumulative_integral, self.grid.locate(z)))
    }

    /// Keeps every `stride`-th sample; the running integral is recomputed on
    /// the coarser grid.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let panels = self.grid.n_points() - 1;
        if stride == 0 || !panels.is_multiple_of(stride) {
            return Err(invalid(
                "stride",
                format!("stride {stride} does not divide {panels} grid panels"),
            ));
        }
        let grid = Grid::new(self.grid.length(), panels / stride + 1)?;
        let values = self.values.iter().step_by(stride).copied().collect();
        Self::from_values(grid, values)
    }
}

#[inline]
fn lerp(samples: &[f64], (i, t): (usize, f64)) -> f64 {
    (1.0 - t) * samples[i] + t * samples[i + 1]
}

/// Factorized covariance ready to draw many paths on a fixed grid.
///
/// The factor is computed once and is read-only afterwards, so a sampler can
/// be shared by reference across worker threads.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    kernel: CorrelationKernel,
    grid: Grid,
    factor: CholeskyFactor,
}

impl FieldSampler {
    pub fn new(kernel: CorrelationKernel, grid: Grid) -> Result<Self> {
        let covariance = kernel.covariance_matrix(&grid);
        let c = kernel.amplitude();
        let factor = CholeskyFactor::with_jitter(&covariance, INITIAL_JITTER * c, MAX_JITTER * c)?;
        Ok(Self { kernel, grid, factor })
    }

    pub fn kernel(&self) -> &CorrelationKernel {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Diagonal jitter added to the covariance before factorization.
    pub fn jitter(&self) -> f64 {
        self.factor.jitter()
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Draws the path for `seed`. Identical seeds give identical paths.
    pub fn sample(&self, seed: u64) -> FieldPath {
        let n = self.grid.n_points();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normals: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut values = vec![0.0; n];
        self.factor.mul_vec_into(&normals, &mut values);
        FieldPath::from_values(self.grid, values).expect("sampler grid matches")
    }
}

/// Samples a single path, factorizing the covariance on the fly.
pub fn sample_path(kernel: &CorrelationKernel, grid: &Grid, seed: u64) -> Result<FieldPath> {
    Ok(FieldSampler::new(*kernel, *grid)?.sample(seed))
}

/// Counter-based seed for path `index` of an ensemble.
///
/// Depends only on `(master_seed, index)`, so a path is the same no matter
/// which worker draws it or in which order.
pub fn path_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
