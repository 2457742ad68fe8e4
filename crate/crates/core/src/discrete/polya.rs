use alloc::vec::Vec;

use crate::discrete::TransitionKernel;
use crate::error::invalid;
use crate::numerics::incomplete_beta;
use crate::simcore::{Path, RandomStream};
use crate::{Error, Result};

/// Largest step count accepted by [`polya_exact_law`].
pub const POLYA_EXACT_MAX_STEPS: usize = 25;

/// Pólya urn contents: each draw returns the ball plus `c` of its colour.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UrnState {
    pub red: u64,
    pub green: u64,
    pub c: u64,
}

impl UrnState {
    pub fn new(red: u64, green: u64, c: u64) -> Result<Self> {
        if red == 0 || green == 0 || c == 0 {
            return Err(invalid!(
                "urn needs r0, v0, c >= 1 (got {red}, {green}, {c})"
            ));
        }
        Ok(Self { red, green, c })
    }

    pub fn total(&self) -> u64 {
        self.red + self.green
    }

    /// Proportion of red balls.
    pub fn proportion(&self) -> f64 {
        self.red as f64 / self.total() as f64
    }

    /// Draws one ball; returns `true` if it was red.
    pub fn draw(&mut self, stream: &mut RandomStream) -> bool {
        let red = stream.below(self.total()) < self.red;
        if red {
            self.red += self.c;
        } else {
            self.green += self.c;
        }
        red
    }
}

/// Trajectory of the red proportion X_n = r_n / N_n over `n_steps` draws.
pub fn simulate_polya(
    stream: &mut RandomStream,
    r0: u64,
    v0: u64,
    c: u64,
    n_steps: usize,
) -> Result<Path<f64>> {
    let mut urn = UrnState::new(r0, v0, c)?;
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(urn.proportion());
    for _ in 0..n_steps {
        urn.draw(stream);
        debug_assert!(urn.total() == r0 + v0 + values.len() as u64 * c);
        values.push(urn.proportion());
    }
    Path::on_integer_grid(values)
}

/// Exact law of X_n as `(value, probability)` atoms sorted by value.
///
/// Dynamic programming over the number of red draws so far, which is a
/// sufficient statistic for the urn.
pub fn polya_exact_law(r0: u64, v0: u64, c: u64, n: usize) -> Result<Vec<(f64, f64)>> {
    UrnState::new(r0, v0, c)?;
    if n > POLYA_EXACT_MAX_STEPS {
        return Err(Error::ResourceLimit(alloc::format!(
            "exact Pólya law limited to n <= {POLYA_EXACT_MAX_STEPS}, got {n}"
        )));
    }
    let kernel = PolyaKernel { r0, v0, c };
    let mut law = alloc::vec![0.0; n + 1];
    law[0] = 1.0;
    for m in 0..n {
        let mut next = alloc::vec![0.0; n + 1];
        for k in 0..=m {
            let p_red = kernel.red_probability(m, k);
            next[k + 1] += law[k] * p_red;
            next[k] += law[k] * (1.0 - p_red);
        }
        law = next;
    }
    Ok(law
        .into_iter()
        .enumerate()
        .map(|(k, p)| (kernel.proportion(n, k), p))
        .collect())
}

/// CDF of the Beta(r0/c, v0/c) law, the limit of the red proportion.
pub fn polya_limit_cdf(r0: u64, v0: u64, c: u64, x: f64) -> Result<f64> {
    UrnState::new(r0, v0, c)?;
    incomplete_beta(r0 as f64 / c as f64, v0 as f64 / c as f64, x)
}

/// The urn as a time-inhomogeneous chain on `k`, the number of red draws
/// among the first `step` draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyaKernel {
    pub r0: u64,
    pub v0: u64,
    pub c: u64,
}

impl PolyaKernel {
    /// Total number of balls after `step` draws.
    pub fn total(&self, step: usize) -> u64 {
        self.r0 + self.v0 + step as u64 * self.c
    }

    pub fn red_probability(&self, step: usize, k: usize) -> f64 {
        (self.r0 + k as u64 * self.c) as f64 / self.total(step) as f64
    }

    /// X_step given `k` red draws.
    pub fn proportion(&self, step: usize, k: usize) -> f64 {
        self.red_probability(step, k)
    }
}

impl TransitionKernel for PolyaKernel {
    fn for_each_transition(&self, step: usize, k: usize, visit: &mut dyn FnMut(usize, f64)) {
        let p = self.red_probability(step, k);
        visit(k + 1, p);
        visit(k, 1.0 - p);
    }
}
