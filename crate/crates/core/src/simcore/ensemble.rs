use alloc::vec::Vec;

use super::{McEstimate, MomentAccumulator, RandomStream};
use crate::Result;

/// Runs `f(0), …, f(n-1)` and returns the results in index order.
///
/// Implementations may evaluate in any order on any number of threads; the
/// output order is fixed, which is what keeps reductions deterministic.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Single-threaded executor.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Allocation of stream ids to Monte Carlo trajectories: path `i` reads
/// stream `first_stream + i` of `master_seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamPlan {
    pub master_seed: u64,
    pub first_stream: u64,
}

impl StreamPlan {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            first_stream: 0,
        }
    }

    pub fn stream(&self, i: usize) -> RandomStream {
        RandomStream::new(self.master_seed, self.first_stream.wrapping_add(i as u64))
    }

    /// A plan whose ids start `offset` further along; use disjoint offsets
    /// for ensembles that must be independent of each other.
    pub fn offset(self, offset: u64) -> Self {
        Self {
            first_stream: self.first_stream.wrapping_add(offset),
            ..self
        }
    }
}

/// Runs `n` independent trajectories, one stream each.
pub fn ensemble<E, T, F>(exec: &E, plan: StreamPlan, n: usize, f: F) -> Vec<T>
where
    E: Executor + ?Sized,
    T: Send,
    F: Fn(&mut RandomStream) -> T + Sync + Send,
{
    exec.map_indexed(n, |i| f(&mut plan.stream(i)))
}

/// Mean of a scalar functional over `n` trajectories.
pub fn ensemble_estimate<E, F>(exec: &E, plan: StreamPlan, n: usize, f: F) -> Result<McEstimate>
where
    E: Executor + ?Sized,
    F: Fn(&mut RandomStream) -> f64 + Sync + Send,
{
    let mut acc = MomentAccumulator::default();
    for x in ensemble(exec, plan, n, f) {
        acc.push(x);
    }
    acc.estimate()
}
