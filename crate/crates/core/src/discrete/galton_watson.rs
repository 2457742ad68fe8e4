use alloc::vec::Vec;

use num_traits::Float;

use crate::error::invalid;
use crate::numerics::bisect;
use crate::simcore::{Path, RandomStream};
use crate::{Error, Result};

/// Hard cap on simulated population sizes.
pub const POPULATION_CAP: u64 = 10_000_000;

/// Offspring law p_k = P[ξ = k], k = 0..=k_max.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringDistribution {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl OffspringDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid!("offspring law needs at least one atom"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid!("offspring probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid!("offspring probabilities sum to {total}"));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { probs, cdf })
    }

    /// Binomial(n, p) offspring.
    pub fn binomial(n: u32, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid!("binomial parameter {p} outside [0, 1]"));
        }
        let mut probs = Vec::with_capacity(n as usize + 1);
        let mut coeff = 1.0;
        for k in 0..=n {
            if k > 0 {
                coeff *= f64::from(n - k + 1) / f64::from(k);
            }
            probs.push(coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32));
        }
        Self::new(probs)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - m).powi(2) * p)
            .sum()
    }

    /// Generating function φ(s) = Σ p_k s^k (Horner).
    pub fn pgf(&self, s: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, stream: &mut RandomStream) -> u64 {
        let u = stream.uniform();
        let k = self.cdf.partition_point(|&c| c <= u);
        // Rounding can leave the last cumulative value a hair under 1.
        k.min(self.probs.len() - 1) as u64
    }
}

/// Generation sizes Z_0 = z0, Z_{n+1} = Σ_{i ≤ Z_n} ξ_{i,n+1}.
pub fn simulate_galton_watson(
    stream: &mut RandomStream,
    offspring: &OffspringDistribution,
    z0: u64,
    n_gen: usize,
) -> Result<Path<u64>> {
    if z0 > POPULATION_CAP {
        return Err(Error::ResourceLimit(alloc::format!(
            "initial population {z0} exceeds the cap"
        )));
    }
    let mut values = Vec::with_capacity(n_gen + 1);
    let mut z = z0;
    values.push(z);
    for generation in 1..=n_gen {
        z = next_generation(stream, offspring, z)?;
        if z > POPULATION_CAP {
            return Err(Error::ResourceLimit(alloc::format!(
                "population {z} exceeds the cap {POPULATION_CAP} at generation {generation}"
            )));
        }
        values.push(z);
    }
    Path::on_integer_grid(values)
}

fn next_generation(
    stream: &mut RandomStream,
    offspring: &OffspringDistribution,
    z: u64,
) -> Result<u64> {
    let mut next = 0u64;
    for _ in 0..z {
        next += offspring.sample(stream);
        if next > POPULATION_CAP {
            return Ok(next);
        }
    }
    Ok(next)
}

/// Outcome of an early-stopped tree simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeFate {
    Extinct {
        generation: usize,
    },
    /// Population reached the survival threshold.
    Survived {
        generation: usize,
    },
    /// Neither happened within the generation budget.
    Undecided,
}

/// Runs a tree until it dies out, reaches `survival_threshold` individuals,
/// or exhausts `max_gen` generations.
///
/// Reaching `M` individuals leaves extinction probability ρ^M, so a modest
/// threshold already classifies supercritical trees reliably.
pub fn simulate_extinction(
    stream: &mut RandomStream,
    offspring: &OffspringDistribution,
    z0: u64,
    max_gen: usize,
    survival_threshold: u64,
) -> Result<TreeFate> {
    let mut z = z0;
    for generation in 0..=max_gen {
        if z == 0 {
            return Ok(TreeFate::Extinct { generation });
        }
        if z >= survival_threshold {
            return Ok(TreeFate::Survived { generation });
        }
        if generation < max_gen {
            z = next_generation(stream, offspring, z)?;
        }
    }
    Ok(TreeFate::Undecided)
}

/// Extinction probability of a tree started from one individual.
///
/// Returns 1 when μ ≤ 1 (the critical case μ = 1 included); otherwise the
/// root of φ(s) = s in [0, 1), located by bisection on [0, 1 − 1e-9].
pub fn gw_extinction_probability(offspring: &OffspringDistribution) -> f64 {
    if offspring.mean() <= 1.0 {
        return 1.0;
    }
    let g = |s: f64| offspring.pgf(s) - s;
    // φ(0) - 0 = p_0 >= 0 and φ(s) - s < 0 just below 1 since φ'(1) = μ > 1.
    // No sign change left at 1 - 1e-9 means μ is within ~1e-9 of criticality.
    bisect(g, 0.0, 1.0 - 1e-9, 1e-16).unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::derive_stream;
    use alloc::vec;

    fn fixed_point_iteration(o: &OffspringDistribution) -> f64 {
        // θ_m = φ(θ_{m-1}) from θ_0 = 0 increases to the smallest fixed point.
        let mut theta = 0.0;
        for _ in 0..100_000 {
            theta = o.pgf(theta);
        }
        theta
    }

    #[test]
    fn validation() {
        assert!(OffspringDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(OffspringDistribution::new(vec![1.2, -0.2]).is_err());
        assert!(OffspringDistribution::new(vec![]).is_err());
    }

    #[test]
    fn symmetric_cubic_law_has_root_sqrt5_minus_2() {
        let o = OffspringDistribution::new(vec![0.125, 0.375, 0.375, 0.125]).unwrap();
        let rho = gw_extinction_probability(&o);
        assert!((rho - (5f64.sqrt() - 2.0)).abs() < 1e-12);
        assert!((o.pgf(rho) - rho).abs() < 1e-12);
        assert!((1.0 - rho - (3.0 - 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn critical_and_subcritical_go_extinct() {
        assert_eq!(
            gw_extinction_probability(&OffspringDistribution::new(vec![0.0, 1.0]).unwrap()),
            1.0
        );
        assert_eq!(
            gw_extinction_probability(&OffspringDistribution::new(vec![0.5, 0.0, 0.5]).unwrap()),
            1.0
        );
        assert_eq!(
            gw_extinction_probability(&OffspringDistribution::new(vec![0.6, 0.4]).unwrap()),
            1.0
        );
    }

    #[test]
    fn binomial_root_matches_fixed_point_iteration() {
        let o = OffspringDistribution::binomial(3, 0.4).unwrap();
        let rho = gw_extinction_probability(&o);
        assert!((rho - fixed_point_iteration(&o)).abs() < 1e-12);
        assert!(((0.6 + 0.4 * rho).powi(3) - rho).abs() < 1e-12);
        assert!(rho < 1.0);
    }

    #[test]
    fn no_childless_individuals_never_die_out() {
        let o = OffspringDistribution::new(vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(gw_extinction_probability(&o), 0.0);
    }

    #[test]
    fn trivial_paths() {
        let o = OffspringDistribution::binomial(3, 0.5).unwrap();
        let p = simulate_galton_watson(&mut derive_stream(0, 0), &o, 0, 10).unwrap();
        assert!(p.values().iter().all(|&z| z == 0));
        let one = OffspringDistribution::new(vec![0.0, 1.0]).unwrap();
        let q = simulate_galton_watson(&mut derive_stream(0, 0), &one, 7, 10).unwrap();
        assert!(q.values().iter().all(|&z| z == 7));
    }

    #[test]
    fn overflow_is_reported() {
        let two = OffspringDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        let r = simulate_galton_watson(&mut derive_stream(0, 0), &two, 1, 40);
        assert!(matches!(r, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn extinction_is_absorbing() {
        let o = OffspringDistribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        for id in 0..200 {
            let p = simulate_galton_watson(&mut derive_stream(5, id), &o, 3, 30).unwrap();
            if let Some(i) = p.values().iter().position(|&z| z == 0) {
                assert!(p.values()[i..].iter().all(|&z| z == 0));
            }
        }
    }

    #[test]
    fn sampler_reproduces_the_law() {
        let o = OffspringDistribution::new(vec![0.125, 0.375, 0.375, 0.125]).unwrap();
        let mut s = derive_stream(3, 0);
        let mut counts = [0u32; 4];
        let n = 400_000;
        for _ in 0..n {
            counts[o.sample(&mut s) as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = o.probabilities()[k];
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f64::from(c) / n as f64 - p).abs() < 4.0 * sd);
        }
    }
}
