use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::simcore::{Path, RandomStream};
use crate::Result;

/// Symmetric nearest-neighbour walk on Z^dim started at the origin.
///
/// Each step picks one of the `2 * dim` unit vectors ±e_j uniformly.
pub fn simulate_random_walk(
    stream: &mut RandomStream,
    n_steps: usize,
    dim: usize,
) -> Result<Path<Vec<i64>>> {
    if dim == 0 {
        return Err(invalid!("walk dimension must be at least 1"));
    }
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut x = vec![0i64; dim];
    values.push(x.clone());
    for _ in 0..n_steps {
        let choice = stream.below(2 * dim as u64) as usize;
        let axis = choice / 2;
        x[axis] += if choice % 2 == 0 { 1 } else { -1 };
        values.push(x.clone());
    }
    Path::on_integer_grid(values)
}

/// One-dimensional simple symmetric walk from 0, one random bit per step.
pub fn simple_walk(stream: &mut RandomStream, n_steps: usize) -> Path<f64> {
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(0.0);
    let mut x = 0.0;
    let mut bits = 0u64;
    for i in 0..n_steps {
        if i % 64 == 0 {
            bits = stream.next_u64();
        }
        x += if bits & 1 == 1 { 1.0 } else { -1.0 };
        bits >>= 1;
        values.push(x);
    }
    let times = (0..=n_steps).map(|i| i as f64).collect();
    Path::from_parts(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{derive_stream, MomentAccumulator};

    #[test]
    fn zero_steps_is_origin() {
        let p = simulate_random_walk(&mut derive_stream(1, 0), 0, 3).unwrap();
        assert_eq!(p.values(), &[vec![0, 0, 0]]);
        assert!(simulate_random_walk(&mut derive_stream(1, 0), 5, 0).is_err());
    }

    #[test]
    fn unit_increments_and_parity() {
        for id in 0..50 {
            let p = simulate_random_walk(&mut derive_stream(2, id), 101, 2).unwrap();
            for w in p.values().windows(2) {
                let l1: i64 = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum();
                assert_eq!(l1, 1);
            }
            let q = simulate_random_walk(&mut derive_stream(3, id), 101, 1).unwrap();
            assert_eq!(q.last()[0].rem_euclid(2), 1);
            let s = simple_walk(&mut derive_stream(4, id), 100);
            assert_eq!((*s.last() as i64).rem_euclid(2), 0);
        }
    }

    #[test]
    fn variance_grows_linearly() {
        // Var(X_n) = n for independent ±1 steps.
        let n = 10_000;
        let mut acc = MomentAccumulator::default();
        for id in 0..10_000 {
            let p = simulate_random_walk(&mut derive_stream(5, id), n, 1).unwrap();
            acc.push(p.last()[0] as f64);
        }
        let ratio = acc.variance() / n as f64;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    }
}
