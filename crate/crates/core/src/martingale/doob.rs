use alloc::vec::Vec;

use crate::discrete::{FiniteChain, TransitionKernel};
use crate::error::invalid;
use crate::simcore::Path;
use crate::Result;

/// X_n = M_n + A_n with M a martingale and A predictable, A_0 = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DoobDecomposition {
    pub martingale_part: Path,
    pub predictable_part: Path,
}

fn check_transitions<K: TransitionKernel + ?Sized>(kernel: &K, path: &Path<usize>) -> Result<()> {
    for (m, w) in path.values().windows(2).enumerate() {
        if kernel.probability(m, w[0], w[1]) <= 0.0 {
            return Err(invalid!(
                "transition {} -> {} at step {} has probability zero",
                w[0],
                w[1],
                m + 1
            ));
        }
    }
    Ok(())
}

/// Doob decomposition of `X_n = f(n, state_n)` along a kernel trajectory.
///
/// A_n = A_{n−1} + E[X_n | state_{n−1}] − X_{n−1}, computed exactly from
/// the kernel; M = X − A.
pub fn doob_decomposition<K, F>(kernel: &K, f: F, path: &Path<usize>) -> Result<DoobDecomposition>
where
    K: TransitionKernel + ?Sized,
    F: Fn(usize, usize) -> f64,
{
    check_transitions(kernel, path)?;
    let states = path.values();
    let mut a = Vec::with_capacity(states.len());
    let mut m = Vec::with_capacity(states.len());
    let mut acc = 0.0;
    a.push(acc);
    m.push(f(0, states[0]));
    for n in 1..states.len() {
        let prev = states[n - 1];
        let next_mean = kernel.expectation(n - 1, prev, &|j| f(n, j));
        acc += next_mean - f(n - 1, prev);
        a.push(acc);
        m.push(f(n, states[n]) - acc);
    }
    let times = path.times().to_vec();
    Ok(DoobDecomposition {
        martingale_part: Path::from_parts(times.clone(), m),
        predictable_part: Path::from_parts(times, a),
    })
}

/// [`doob_decomposition`] for a time-homogeneous chain and `X_n = f(state_n)`.
pub fn doob_decomposition_chain(
    chain: &FiniteChain,
    f: impl Fn(usize) -> f64,
    path: &Path<usize>,
) -> Result<DoobDecomposition> {
    doob_decomposition(chain, |_, i| f(i), path)
}

/// ⟨X⟩_n = Σ_{m ≤ n} E[(X_m − X_{m−1})² | state_{m−1}], ⟨X⟩_0 = 0.
pub fn bracket_process<K, F>(kernel: &K, f: F, path: &Path<usize>) -> Result<Path>
where
    K: TransitionKernel + ?Sized,
    F: Fn(usize, usize) -> f64,
{
    check_transitions(kernel, path)?;
    let states = path.values();
    let mut values = Vec::with_capacity(states.len());
    let mut acc = 0.0;
    values.push(acc);
    for n in 1..states.len() {
        let x_prev = f(n - 1, states[n - 1]);
        acc += kernel.expectation(n - 1, states[n - 1], &|j| {
            let d = f(n, j) - x_prev;
            d * d
        });
        values.push(acc);
    }
    Ok(Path::from_parts(path.times().to_vec(), values))
}

pub fn bracket_process_chain(
    chain: &FiniteChain,
    f: impl Fn(usize) -> f64,
    path: &Path<usize>,
) -> Result<Path> {
    bracket_process(chain, |_, i| f(i), path)
}
