use num_traits::Float;

use super::RandomStream;
use crate::error::invalid;
use crate::Result;

/// Default confidence multiplier.
pub const DEFAULT_Z: f64 = 4.0;

/// Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by √n.
    pub stderr: f64,
    pub n: u64,
    /// `z · stderr`.
    pub ci_half_width: f64,
}

impl McEstimate {
    pub fn new(mean: f64, stderr: f64, n: u64, z: f64) -> Self {
        Self {
            mean,
            stderr,
            n,
            ci_half_width: z * stderr,
        }
    }

    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        Self::from_samples_with_z(samples, DEFAULT_Z)
    }

    pub fn from_samples_with_z(samples: &[f64], z: f64) -> Result<Self> {
        let mut acc = MomentAccumulator::default();
        samples.iter().for_each(|&x| acc.push(x));
        acc.estimate_with_z(z)
    }

    pub fn with_z(self, z: f64) -> Self {
        Self::new(self.mean, self.stderr, self.n, z)
    }

    /// `|mean - target| <= ci_half_width + extra`.
    pub fn covers(&self, target: f64, extra: f64) -> bool {
        (self.mean - target).abs() <= self.ci_half_width + extra
    }
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MomentAccumulator {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn estimate(&self) -> Result<McEstimate> {
        self.estimate_with_z(DEFAULT_Z)
    }

    pub fn estimate_with_z(&self, z: f64) -> Result<McEstimate> {
        if self.n < 2 {
            return Err(invalid!(
                "a Monte Carlo estimate needs n >= 2, got {}",
                self.n
            ));
        }
        let stderr = (self.variance() / self.n as f64).sqrt();
        Ok(McEstimate::new(self.mean, stderr, self.n, z))
    }
}

/// Averages `n` draws of `sampler`, all taken from `stream`.
pub fn mc_estimate<F>(mut sampler: F, n: u64, stream: &mut RandomStream) -> Result<McEstimate>
where
    F: FnMut(&mut RandomStream) -> f64,
{
    if n < 2 {
        return Err(invalid!("a Monte Carlo estimate needs n >= 2, got {n}"));
    }
    let mut acc = MomentAccumulator::default();
    for _ in 0..n {
        acc.push(sampler(stream));
    }
    acc.estimate()
}

/// Standard error of a difference of independent estimates.
pub fn combined_stderr(a: &McEstimate, b: &McEstimate) -> f64 {
    a.stderr.hypot(b.stderr)
}

/// Pearson correlation of paired samples.
pub fn sample_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid!("correlation needs at least two paired samples"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
