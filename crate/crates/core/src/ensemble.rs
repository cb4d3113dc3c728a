//! Monte Carlo estimate of the averaged intensity from pathwise-exact solutions.
//!
//! Each realization of the field gives the intensity
//! `I0 exp(-sigma_a z - alpha sigma_a int_0^z G)` without any stepping error
//! beyond the trapezoid integral of `G`. Paths are drawn with counter-based
//! seeds and reduced in fixed-size chunks in path-index order, so the
//! statistics are bit-identical for any number of worker threads.

use rayon::prelude::*;

use crate::attenuation::{exponential, MediumSpec};
use crate::error::{invalid, Result};
use crate::field::{path_seed, FieldPath, FieldSampler};
use crate::kernel::Grid;
use crate::medium::StochasticMedium;
use crate::stats::SampleMoments;

/// Paths per reduction chunk. Fixed so the summation order never depends on
/// the thread pool.
const CHUNK_PATHS: usize = 512;

/// Above this value of `alpha sigma_a sqrt(V(z))` the lognormal mean is
/// dominated by rare paths and the sample mean converges slowly.
pub const HEAVY_TAIL_THRESHOLD: f64 = 1.5;

/// Default cap on the number of output depths.
pub const MAX_OUTPUT_ROWS: usize = 256;

/// Pathwise-exact solution of `dI = -sigma_a (1 + alpha G) I dZ`.
pub fn path_intensity(medium: &MediumSpec, path: &FieldPath, z: f64) -> Result<f64> {
    let integral = path.stochastic_integral(z)?;
    Ok(intensity_from_integral(medium, z, integral))
}

#[inline]
fn intensity_from_integral(medium: &MediumSpec, z: f64, integral: f64) -> f64 {
    let sigma = medium.sigma_a;
    medium.i0 * (-(sigma * z) - medium.alpha * sigma * integral).exp()
}

/// Explicit Euler stepping of the same equation on the path grid, with a
/// final partial step when `z` falls between grid points. First order in
/// the spacing.
pub fn path_intensity_em(medium: &MediumSpec, path: &FieldPath, z: f64) -> Result<f64> {
    let grid = path.grid();
    grid.check_depth(z)?;
    let values = path.values();
    let absorption = |k: usize| medium.sigma_a * (1.0 + medium.alpha * values[k]);
    let mut intensity = medium.i0;
    let mut k = 0;
    while k + 1 < grid.n_points() && grid.abscissa(k + 1) <= z {
        let h = grid.abscissa(k + 1) - grid.abscissa(k);
        intensity *= 1.0 - absorption(k) * h;
        k += 1;
    }
    let rest = z - grid.abscissa(k);
    if rest > 0.0 {
        intensity *= 1.0 - absorption(k) * rest;
    }
    Ok(intensity)
}

/// Analytic average via the Gaussian moment identity, with the variance of
/// `int_0^z G` from nested quadrature of the kernel. Uses neither the
/// closed form nor the sampler.
pub fn lognormal_oracle(sm: &StochasticMedium, z: f64) -> Result<f64> {
    let m = &sm.medium;
    let beer = m.beer(z)?;
    let variance = sm.kernel.square_double_integral(z);
    let scale = m.alpha * m.sigma_a;
    Ok(beer * (0.5 * scale * scale * variance).exp())
}

/// Grid abscissae thinned to at most `max_rows`, always keeping both ends.
pub fn default_depths(grid: &Grid, max_rows: usize) -> Vec<f64> {
    let n = grid.n_points();
    let max_rows = max_rows.max(2);
    if n <= max_rows {
        return grid.abscissae();
    }
    let stride = (n - 1).div_ceil(max_rows - 1);
    let mut depths: Vec<f64> = (0..n).step_by(stride).map(|i| grid.abscissa(i)).collect();
    if *depths.last().unwrap() < grid.length() {
        depths.push(grid.length());
    }
    depths
}

/// Per-depth Monte Carlo summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub depths: Vec<f64>,
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
    pub n_paths: usize,
    /// Fraction of sampled grid points where the absorption coefficient is negative.
    pub negative_coefficient_fraction: f64,
    /// Moments of `int_0^L G dZ` across paths.
    pub integral: SampleMoments,
    /// Sample mean of `1 / |A(Z)|` over all grid points, when `sigma_a > 0`.
    pub mean_inverse_absorption: Option<f64>,
    /// `alpha sigma_a sqrt(V(z))` at the deepest output depth.
    pub log_intensity_std: f64,
    /// Jitter used to factorize the covariance.
    pub jitter: f64,
}

impl EnsembleStats {
    pub fn integral_skewness(&self) -> f64 {
        self.integral.skewness
    }

    pub fn integral_excess_kurtosis(&self) -> f64 {
        self.integral.excess_kurtosis
    }

    pub fn heavy_tail_warning(&self) -> bool {
        self.log_intensity_std > HEAVY_TAIL_THRESHOLD
    }
}

#[derive(Debug, Clone)]
struct ChunkSums {
    // deviations from Beer's law, so a deterministic ensemble sums to zero exactly
    dev: Vec<f64>,
    dev_sq: Vec<f64>,
    negative: u64,
    inverse_absorption: f64,
    integrals: Vec<f64>,
}

impl ChunkSums {
    fn new(n_depths: usize, paths: usize) -> Self {
        Self {
            dev: vec![0.0; n_depths],
            dev_sq: vec![0.0; n_depths],
            negative: 0,
            inverse_absorption: 0.0,
            integrals: Vec::with_capacity(paths),
        }
    }
}

/// Runs `n_paths` independent realizations and summarizes `path_intensity`
/// at each of `depths`.
pub fn run_ensemble(
    sm: &StochasticMedium,
    grid: &Grid,
    n_paths: usize,
    master_seed: u64,
    depths: &[f64],
) -> Result<EnsembleStats> {
    if n_paths < 2 {
        return Err(invalid("n_paths", format!("need at least 2 paths, got {n_paths}")));
    }
    for &z in depths {
        grid.check_depth(z)?;
    }
    let sampler = FieldSampler::new(sm.kernel, *grid)?;
    run_with_sampler(sm, &sampler, n_paths, master_seed, depths)
}

/// Same as [`run_ensemble`] with an already factorized sampler.
pub fn run_with_sampler(
    sm: &StochasticMedium,
    sampler: &FieldSampler,
    n_paths: usize,
    master_seed: u64,
    depths: &[f64],
) -> Result<EnsembleStats> {
    if n_paths < 2 {
        return Err(invalid("n_paths", format!("need at least 2 paths, got {n_paths}")));
    }
    let grid = sampler.grid();
    for &z in depths {
        grid.check_depth(z)?;
    }
    let medium = sm.medium;
    let reference: Vec<f64> = depths
        .iter()
        .map(|&z| exponential(medium.i0, medium.sigma_a, z))
        .collect();
    let n_chunks = n_paths.div_ceil(CHUNK_PATHS);

    let chunks: Vec<ChunkSums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_PATHS;
            let end = (start + CHUNK_PATHS).min(n_paths);
            let mut sums = ChunkSums::new(depths.len(), end - start);
            for index in start..end {
                let path = sampler.sample(path_seed(master_seed, index as u64));
                for (d, &z) in depths.iter().enumerate() {
                    let integral = path.stochastic_integral(z).expect("depth validated");
                    let dev = intensity_from_integral(&medium, z, integral) - reference[d];
                    sums.dev[d] += dev;
                    sums.dev_sq[d] += dev * dev;
                }
                for g in path.values() {
                    let a = medium.sigma_a * (1.0 + medium.alpha * g);
                    if a < 0.0 {
                        sums.negative += 1;
                    }
                    sums.inverse_absorption += 1.0 / a.abs();
                }
                sums.integrals.push(*path.cumulative_integral().last().unwrap());
            }
            sums
        })
        .collect();

    let mut dev = vec![0.0; depths.len()];
    let mut dev_sq = vec![0.0; depths.len()];
    let mut negative = 0u64;
    let mut inverse_absorption = 0.0;
    let mut integrals = Vec::with_capacity(n_paths);
    for chunk in chunks {
        for d in 0..depths.len() {
            dev[d] += chunk.dev[d];
            dev_sq[d] += chunk.dev_sq[d];
        }
        negative += chunk.negative;
        inverse_absorption += chunk.inverse_absorption;
        integrals.extend(chunk.integrals);
    }

    let n = n_paths as f64;
    let mean = reference.iter().zip(&dev).map(|(r, s)| r + s / n).collect();
    let sem = dev
        .iter()
        .zip(&dev_sq)
        .map(|(s, sq)| (((sq - s * s / n) / (n - 1.0)).max(0.0) / n).sqrt())
        .collect();
    let samples = (n_paths * grid.n_points()) as f64;
    let deepest = depths.iter().copied().fold(0.0, f64::max);
    let scale = medium.alpha * medium.sigma_a;

    Ok(EnsembleStats {
        depths: depths.to_vec(),
        mean,
        sem,
        n_paths,
        negative_coefficient_fraction: negative as f64 / samples,
        integral: SampleMoments::from_slice(&integrals),
        mean_inverse_absorption: (medium.sigma_a > 0.0).then(|| inverse_absorption / samples),
        log_intensity_std: scale * sm.kernel.square_double_integral(deepest).sqrt(),
        jitter: sampler.jitter(),
    })
}

/// Euler-versus-exact discrepancy at one grid spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerLevel {
    pub spacing: f64,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
}

/// Compares [`path_intensity_em`] with [`path_intensity`] at the slab exit on
/// `n_paths` realizations, viewing each path on successively coarser grids
/// (every `stride`-th sample of the sampler grid).
pub fn euler_convergence(
    medium: &MediumSpec,
    sampler: &FieldSampler,
    n_paths: usize,
    master_seed: u64,
    strides: &[usize],
) -> Result<Vec<EulerLevel>> {
    let z = sampler.grid().length();
    let mut levels: Vec<EulerLevel> = Vec::with_capacity(strides.len());
    let mut errors = vec![Vec::with_capacity(n_paths); strides.len()];
    for index in 0..n_paths {
        let path = sampler.sample(path_seed(master_seed, index as u64));
        for (s, &stride) in strides.iter().enumerate() {
            let coarse = path.subsample(stride)?;
            let err = (path_intensity_em(medium, &coarse, z)? - path_intensity(medium, &coarse, z)?).abs();
            errors[s].push(err);
        }
    }
    for (s, &stride) in strides.iter().enumerate() {
        let e = &errors[s];
        levels.push(EulerLevel {
            spacing: sampler.grid().spacing() * stride as f64,
            mean_abs_error: e.iter().sum::<f64>() / e.len().max(1) as f64,
            max_abs_error: e.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(levels)
}
