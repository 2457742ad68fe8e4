use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

/// A sampled trajectory: strictly increasing times with aligned values.
#[derive(Clone, Debug, PartialEq)]
pub struct Path<T = f64> {
    times: Vec<f64>,
    values: Vec<T>,
}

#[allow(clippy::len_without_is_empty)]
impl<T> Path<T> {
    pub fn new(times: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid!("a path needs at least one point"));
        }
        if times.len() != values.len() {
            return Err(invalid!(
                "{} times but {} values",
                times.len(),
                values.len()
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid!("path times must be finite"));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(invalid!("times not strictly increasing at index {}", i + 1));
        }
        Ok(Self { times, values })
    }

    /// Path on the integer grid `0, 1, …, values.len() - 1`.
    pub fn on_integer_grid(values: Vec<T>) -> Result<Self> {
        let times = (0..values.len()).map(|i| i as f64).collect();
        Self::new(times, values)
    }

    /// Callers guarantee the invariants.
    pub(crate) fn from_parts(times: Vec<f64>, values: Vec<T>) -> Self {
        debug_assert!(!times.is_empty() && times.len() == values.len());
        debug_assert!(times.windows(2).all(|w| w[1] > w[0]));
        Self { times, values }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn first(&self) -> &T {
        &self.values[0]
    }

    pub fn last(&self) -> &T {
        &self.values[self.values.len() - 1]
    }

    pub fn final_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<T>) {
        (self.times, self.values)
    }

    /// The trajectory observed up to and including index `k`.
    pub fn prefix(&self, k: usize) -> Prefix<'_, T> {
        Prefix {
            times: &self.times[..=k],
            values: &self.values[..=k],
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Path<U> {
        Path {
            times: self.times.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn same_grid<U>(&self, other: &Path<U>) -> bool {
        self.times == other.times
    }

    /// Index of the grid point at time `t`, if `t` is on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.times.partition_point(|&s| s < t);
        (i < self.times.len() && self.times[i] == t).then_some(i)
    }
}

impl Path<f64> {
    /// Largest value along the path.
    pub fn running_max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Read-only view of a path up to the current index. Integrands and
/// stopping rules only ever see one of these, which makes anticipation
/// impossible by construction.
#[derive(Clone, Copy, Debug)]
pub struct Prefix<'a, T = f64> {
    times: &'a [f64],
    values: &'a [T],
}

impl<'a, T> Prefix<'a, T> {
    pub fn times(&self) -> &'a [f64] {
        self.times
    }

    pub fn values(&self) -> &'a [T] {
        self.values
    }

    /// Index of the current point in the parent path.
    pub fn index(&self) -> usize {
        self.times.len() - 1
    }

    pub fn time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn current(&self) -> &'a T {
        &self.values[self.values.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_grids() {
        assert!(Path::<f64>::new(vec![], vec![]).is_err());
        assert!(Path::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Path::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Path::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
        assert!(Path::new(vec![0.5], vec![1.0]).is_ok());
    }

    #[test]
    fn prefix_sees_only_the_past() {
        let p = Path::on_integer_grid(vec![3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
        let view = p.prefix(2);
        assert_eq!(view.values(), &[3.0, 1.0, 4.0]);
        assert_eq!(view.index(), 2);
        assert_eq!(*view.current(), 4.0);
        assert_eq!(view.time(), 2.0);
        assert_eq!(p.index_of(3.0), Some(3));
        assert_eq!(p.index_of(3.5), None);
        assert_eq!(p.running_max(), 5.0);
    }
}
