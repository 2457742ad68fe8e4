use alloc::vec::Vec;

use crate::error::invalid;
use crate::simcore::{Path, RandomStream};
use crate::Result;

/// One-step transition law of a (possibly time-inhomogeneous) Markov chain
/// on the nonnegative integers.
pub trait TransitionKernel {
    /// Calls `visit(next, p)` for every state reachable from `state` on the
    /// transition from step `step` to `step + 1`.
    fn for_each_transition(&self, step: usize, state: usize, visit: &mut dyn FnMut(usize, f64));

    fn probability(&self, step: usize, from: usize, to: usize) -> f64 {
        let mut p = 0.0;
        self.for_each_transition(step, from, &mut |j, q| {
            if j == to {
                p += q;
            }
        });
        p
    }

    /// Σ_j f(j) p(state, j).
    fn expectation(&self, step: usize, state: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        let mut e = 0.0;
        self.for_each_transition(step, state, &mut |j, q| e += q * f(j));
        e
    }

    /// Draws the successor of `state` by inversion over the visited order.
    fn sample_next(&self, step: usize, state: usize, stream: &mut RandomStream) -> usize {
        let u = stream.uniform();
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last = state;
        self.for_each_transition(step, state, &mut |j, q| {
            if chosen.is_none() && q > 0.0 {
                acc += q;
                last = j;
                if u < acc {
                    chosen = Some(j);
                }
            }
        });
        chosen.unwrap_or(last)
    }

    /// Trajectory of `n_steps` transitions from `x0`.
    fn simulate_from(&self, stream: &mut RandomStream, x0: usize, n_steps: usize) -> Path<usize> {
        let mut values = Vec::with_capacity(n_steps + 1);
        let mut x = x0;
        values.push(x);
        for step in 0..n_steps {
            x = self.sample_next(step, x, stream);
            values.push(x);
        }
        let times = (0..=n_steps).map(|i| i as f64).collect();
        Path::from_parts(times, values)
    }
}

/// Finite state space with a row-stochastic transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteChain {
    n: usize,
    p: Vec<f64>,
}

impl FiniteChain {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid!("transition matrix must be square"));
        }
        Self::from_row_major(n, rows.into_iter().flatten().collect())
    }

    pub fn from_row_major(n: usize, p: Vec<f64>) -> Result<Self> {
        if n == 0 || p.len() != n * n {
            return Err(invalid!("expected a nonempty {n}x{n} matrix"));
        }
        for (i, row) in p.chunks(n).enumerate() {
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(invalid!("row {i} has an entry outside [0, 1]"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(invalid!("row {i} sums to {s}"));
            }
        }
        Ok(Self { n, p })
    }

    /// Ehrenfest urn with `n_balls` balls: from `i`, move to `i - 1` with
    /// probability `i / N`, otherwise to `i + 1`.
    pub fn ehrenfest(n_balls: usize) -> Result<Self> {
        if n_balls == 0 {
            return Err(invalid!("Ehrenfest model needs at least one ball"));
        }
        let n = n_balls + 1;
        let mut p = alloc::vec![0.0; n * n];
        for i in 0..n {
            let down = i as f64 / n_balls as f64;
            if i > 0 {
                p[i * n + i - 1] = down;
            }
            if i < n_balls {
                p[i * n + i + 1] = 1.0 - down;
            }
        }
        Self::from_row_major(n, p)
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    /// Draws the successor of `state` by inversion of its row.
    pub fn step(&self, state: usize, stream: &mut RandomStream) -> usize {
        let row = self.row(state);
        let u = stream.uniform();
        let mut acc = 0.0;
        let mut last = state;
        for (j, &q) in row.iter().enumerate() {
            if q > 0.0 {
                acc += q;
                last = j;
                if u < acc {
                    return j;
                }
            }
        }
        last
    }

    pub fn simulate(
        &self,
        stream: &mut RandomStream,
        x0: usize,
        n_steps: usize,
    ) -> Result<Path<usize>> {
        if x0 >= self.n {
            return Err(invalid!("initial state {x0} outside 0..{}", self.n));
        }
        let mut values = Vec::with_capacity(n_steps + 1);
        let mut x = x0;
        values.push(x);
        for _ in 0..n_steps {
            x = self.step(x, stream);
            values.push(x);
        }
        Path::on_integer_grid(values)
    }

    /// Σ_j f(j) p_ij.
    pub fn conditional_mean(&self, i: usize, f: impl Fn(usize) -> f64) -> f64 {
        self.row(i).iter().enumerate().map(|(j, &q)| q * f(j)).sum()
    }

    /// Invariant law by power iteration (started from uniform, averaged over
    /// two consecutive steps so periodic chains converge too).
    pub fn stationary_distribution(&self, tol: f64) -> Vec<f64> {
        let n = self.n;
        let mut pi = alloc::vec![1.0 / n as f64; n];
        for _ in 0..100_000 {
            let mut next = alloc::vec![0.0; n];
            for (i, &w) in pi.iter().enumerate() {
                for (j, &q) in self.row(i).iter().enumerate() {
                    next[j] += w * q;
                }
            }
            let avg: Vec<f64> = pi.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
            let diff: f64 = avg.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = avg;
            if diff < tol {
                break;
            }
        }
        pi
    }
}

impl TransitionKernel for FiniteChain {
    fn for_each_transition(&self, _step: usize, state: usize, visit: &mut dyn FnMut(usize, f64)) {
        for (j, &q) in self.row(state).iter().enumerate() {
            if q > 0.0 {
                visit(j, q);
            }
        }
    }

    fn probability(&self, _step: usize, from: usize, to: usize) -> f64 {
        if from < self.n && to < self.n {
            self.p(from, to)
        } else {
            0.0
        }
    }
}

/// Ehrenfest trajectory with `n_balls` balls started from `x0` balls in the
/// left urn.
pub fn simulate_ehrenfest(
    stream: &mut RandomStream,
    n_balls: usize,
    n_steps: usize,
    x0: usize,
) -> Result<Path<usize>> {
    if n_balls == 0 {
        return Err(invalid!("Ehrenfest model needs at least one ball"));
    }
    if x0 > n_balls {
        return Err(invalid!("initial state {x0} exceeds N = {n_balls}"));
    }
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = x0;
    values.push(x);
    for _ in 0..n_steps {
        // A uniformly chosen ball changes urn.
        if stream.below(n_balls as u64) < x as u64 {
            x -= 1;
        } else {
            x += 1;
        }
        debug_assert!(x <= n_balls);
        values.push(x);
    }
    Path::on_integer_grid(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{derive_stream, MomentAccumulator};
    use alloc::vec;

    #[test]
    fn validates_rows() {
        assert!(FiniteChain::new(vec![vec![0.5, 0.5], vec![0.2, 0.7]]).is_err());
        assert!(FiniteChain::new(vec![vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
        assert!(FiniteChain::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(FiniteChain::new(vec![vec![0.25, 0.75], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn ehrenfest_from_empty_always_moves_up() {
        let c = FiniteChain::ehrenfest(3).unwrap();
        assert_eq!(c.p(0, 1), 1.0);
        for id in 0..20 {
            assert_eq!(c.step(0, &mut derive_stream(1, id)), 1);
            let p = simulate_ehrenfest(&mut derive_stream(1, id), 3, 1, 0).unwrap();
            assert_eq!(p.values(), &[0, 1]);
        }
        assert!(simulate_ehrenfest(&mut derive_stream(1, 0), 3, 1, 4).is_err());
    }

    #[test]
    fn ehrenfest_paths_stay_in_range() {
        let p = simulate_ehrenfest(&mut derive_stream(2, 0), 10, 5000, 10).unwrap();
        assert!(p.values().iter().all(|&x| x <= 10));
        assert!(p.values().windows(2).all(|w| w[0].abs_diff(w[1]) == 1));
    }

    #[test]
    fn ehrenfest_stationary_law_is_binomial() {
        let c = FiniteChain::ehrenfest(20).unwrap();
        let pi = c.stationary_distribution(1e-15);
        let mut binom = 1.0;
        for (k, &w) in pi.iter().enumerate() {
            if k > 0 {
                binom *= (21 - k) as f64 / k as f64;
            }
            assert!((w - binom / 2f64.powi(20)).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn one_step_conditional_mean_matches_matrix() {
        let c = FiniteChain::new(vec![
            vec![0.1, 0.6, 0.3],
            vec![0.5, 0.0, 0.5],
            vec![0.2, 0.2, 0.6],
        ])
        .unwrap();
        let f = |j: usize| [2.0, -1.0, 5.0][j];
        let mut stream = derive_stream(9, 0);
        for i in 0..3 {
            let mut acc = MomentAccumulator::default();
            for _ in 0..100_000 {
                acc.push(f(c.step(i, &mut stream)));
            }
            let e = acc.estimate().unwrap();
            let exact = c.conditional_mean(i, f);
            assert!(e.covers(exact, 0.0), "state {i}: {} vs {exact}", e.mean);
            assert!((c.expectation(0, i, &f) - exact).abs() < 1e-15);
        }
    }
}
