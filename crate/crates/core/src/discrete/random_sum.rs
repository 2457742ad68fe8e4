use alloc::vec::Vec;

use num_traits::Float;

use crate::error::invalid;
use crate::simcore::{McEstimate, RandomStream, DEFAULT_Z};
use crate::Result;

/// Sample variance of X = ξ_1 + … + ξ_N with N drawn independently of the
/// ξ's, reported with a delta-method standard error.
///
/// The returned estimate's `mean` field holds the variance.
pub fn simulate_random_sum<N, X>(
    stream: &mut RandomStream,
    mut n_dist: N,
    mut xi_dist: X,
    n_samples: u64,
) -> Result<McEstimate>
where
    N: FnMut(&mut RandomStream) -> u64,
    X: FnMut(&mut RandomStream) -> f64,
{
    if n_samples < 2 {
        return Err(invalid!("variance estimate needs at least two samples"));
    }
    let xs: Vec<f64> = (0..n_samples)
        .map(|_| {
            let n = n_dist(stream);
            (0..n).map(|_| xi_dist(stream)).sum()
        })
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in &xs {
        let d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    let var = m2 / (n - 1.0);
    let (m2, m4) = (m2 / n, m4 / n);
    // Var(s²) ≈ (μ4 − σ⁴)/n.
    let stderr = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    Ok(McEstimate::new(var, stderr, n_samples, DEFAULT_Z))
}

/// Poisson(mean) by sequential inversion; intended for moderate means.
pub fn sample_poisson(stream: &mut RandomStream, mean: f64) -> u64 {
    let u = stream.uniform();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}
