use num_traits::Float;

use crate::error::invalid;
use crate::simcore::{combined_stderr, McEstimate, MomentAccumulator};
use crate::Result;

/// The two numbers a maximal inequality needs from one sample path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSummary {
    pub running_max: f64,
    pub terminal: f64,
}

impl PathSummary {
    pub fn of(values: &[f64]) -> Self {
        Self {
            running_max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            terminal: values[values.len() - 1],
        }
    }
}

/// Both sides of a maximal inequality, estimated from the same sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximalAudit {
    pub lhs: McEstimate,
    pub rhs: McEstimate,
}

impl MaximalAudit {
    /// `rhs + z·σ − lhs` with σ the combined standard error; nonnegative
    /// when the inequality holds at that confidence.
    pub fn margin(&self, z: f64) -> f64 {
        self.rhs.mean + z * combined_stderr(&self.lhs, &self.rhs) - self.lhs.mean
    }

    pub fn holds(&self, z: f64) -> bool {
        self.margin(z) >= 0.0
    }
}

/// Audits Doob's inequality on a sample of submartingale paths.
///
/// With `p = None`: lhs = P[max_m X_m ≥ λ], rhs = E[X_n⁺]/λ.
/// With `p = Some(p)`, for nonnegative submartingales: lhs = E[(max X)^p],
/// rhs = (p/(p−1))^p E[(X_n⁺)^p]. `lambda` is ignored in that mode.
pub fn maximal_inequality_audit(
    samples: &[PathSummary],
    lambda: f64,
    p: Option<f64>,
) -> Result<MaximalAudit> {
    if !(lambda > 0.0) {
        return Err(invalid!("level must be positive, got {lambda}"));
    }
    let mut lhs = MomentAccumulator::default();
    let mut rhs = MomentAccumulator::default();
    match p {
        None => {
            for s in samples {
                lhs.push(if s.running_max >= lambda { 1.0 } else { 0.0 });
                rhs.push(s.terminal.max(0.0) / lambda);
            }
        }
        Some(p) => {
            if !(p > 1.0) {
                return Err(invalid!("L^p maximal inequality needs p > 1, got {p}"));
            }
            let factor = (p / (p - 1.0)).powf(p);
            for s in samples {
                lhs.push(s.running_max.max(0.0).powf(p));
                rhs.push(factor * s.terminal.max(0.0).powf(p));
            }
        }
    }
    Ok(MaximalAudit {
        lhs: lhs.estimate()?,
        rhs: rhs.estimate()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::simple_walk;
    use crate::simcore::derive_stream;
    use alloc::vec::Vec;

    fn walk_summaries(n_paths: u64, len: usize, map: impl Fn(f64) -> f64) -> Vec<PathSummary> {
        (0..n_paths)
            .map(|id| {
                let w = simple_walk(&mut derive_stream(8, id), len);
                let v: Vec<f64> = w.values().iter().map(|&x| map(x)).collect();
                PathSummary::of(&v)
            })
            .collect()
    }

    #[test]
    fn kolmogorov_on_squared_walk() {
        let s = walk_summaries(20_000, 100, |x| x * x);
        let lambda = 15.0;
        let audit = maximal_inequality_audit(&s, lambda * lambda, None).unwrap();
        assert!(audit.holds(4.0));
        // Var(X_100)/λ² = 100/225.
        assert!(audit.rhs.covers(100.0 / 225.0, 0.0));
    }

    #[test]
    fn huge_level_is_never_reached() {
        let s = walk_summaries(1000, 100, |x| x);
        let audit = maximal_inequality_audit(&s, 1e6, None).unwrap();
        assert_eq!(audit.lhs.mean, 0.0);
    }

    #[test]
    fn l2_on_absolute_walk() {
        let s = walk_summaries(20_000, 100, f64::abs);
        let audit = maximal_inequality_audit(&s, 1.0, Some(2.0)).unwrap();
        assert!(audit.holds(4.0));
        assert!(audit.rhs.covers(400.0, 0.0));
    }

    #[test]
    fn invalid_parameters() {
        let s = [PathSummary {
            running_max: 1.0,
            terminal: 1.0,
        }; 3];
        assert!(maximal_inequality_audit(&s, 0.0, None).is_err());
        assert!(maximal_inequality_audit(&s, 1.0, Some(1.0)).is_err());
    }
}
