//! Sample moments used by the ensemble diagnostics.

/// Summary of a sample: mean, unbiased variance and standardized moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl SampleMoments {
    /// Two-pass computation. Needs at least two samples.
    pub fn from_slice(xs: &[f64]) -> Self {
        assert!(xs.len() >= 2, "need at least two samples");
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
        } else {
            (0.0, 0.0)
        };
        Self {
            n: xs.len(),
            mean,
            variance: m2 * n / (n - 1.0),
            skewness,
            excess_kurtosis,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Standard error of the unbiased variance estimate, from the sample
    /// fourth moment.
    pub fn variance_standard_error(&self) -> f64 {
        let n = self.n as f64;
        let kurtosis = self.excess_kurtosis + 3.0;
        (self.variance * self.variance * ((kurtosis - 1.0) + 2.0 / (n - 1.0)) / n).sqrt()
    }
}
