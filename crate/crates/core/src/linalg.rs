//! Minimal dense symmetric matrix support for the field sampler.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular Cholesky factor stored row by row (packed).
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    packed: Vec<f64>,
    jitter: f64,
}

impl CholeskyFactor {
    /// Factorizes `a + jitter * I`, starting from `first_jitter` and growing
    /// the jitter tenfold after each failure until `max_jitter` is exceeded.
    pub fn with_jitter(a: &DenseMatrix, first_jitter: f64, max_jitter: f64) -> Result<Self> {
        let mut jitter = first_jitter;
        loop {
            if let Some(packed) = cholesky_packed(a, jitter) {
                return Ok(Self {
                    n: a.dim(),
                    packed,
                    jitter,
                });
            }
            jitter *= 10.0;
            if jitter == 0.0 || jitter > max_jitter * (1.0 + 1e-9) {
                return Err(Error::FactorizationFailure { max_jitter });
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.row(i)[j]
        }
    }

    /// `out = L * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(l, v)| l * v).sum();
        }
    }
}

fn cholesky_packed(a: &DenseMatrix, jitter: f64) -> Option<Vec<f64>> {
    let n = a.dim();
    let mut l = vec![0.0; n * (n + 1) / 2];
    let off = |i: usize| i * (i + 1) / 2;
    for i in 0..n {
        for j in 0..=i {
            let (ri, rj) = (off(i), off(j));
            let dot: f64 = (0..j).map(|k| l[ri + k] * l[rj + k]).sum();
            if i == j {
                let d = a[(i, i)] + jitter - dot;
                if !d.is_finite() || d <= 0.0 {
                    return None;
                }
                l[ri + i] = d.sqrt();
            } else {
                l[ri + j] = (a[(i, j)] - dot) / l[rj + j];
            }
        }
    }
    Some(l)
}
