use alloc::vec::Vec;

use num_traits::Float;

use crate::error::invalid;
use crate::Result;

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid!("KS statistic of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid!("KS sample contains NaN"));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid!("KS statistic of an empty sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic 1% critical value of the one-sample statistic, 1.63/√n.
pub fn ks_critical_value_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Asymptotic 1% critical value of the two-sample statistic.
pub fn ks_two_sample_critical_value_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.63 * ((n + m) / (n * m)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_cdf;

    #[test]
    fn quantile_sample_is_within_half_a_step() {
        let n = 100;
        let samples: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-15);
    }

    #[test]
    fn single_sample_at_median() {
        assert_eq!(ks_statistic(&[0.0], normal_cdf).unwrap(), 0.5);
    }

    #[test]
    fn uniform_is_far_from_normal() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        // Direct evaluation: Φ(0) = 0.5 while the empirical CDF is 0 just
        // below 0, and Φ(1) ≈ 0.841 while it is 1 at 1.
        assert!(ks_statistic(&samples, normal_cdf).unwrap() > 0.3);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(ks_statistic(&[], normal_cdf).is_err());
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn two_sample_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&a, &[4.0, 5.0]).unwrap(), 1.0);
    }
}
