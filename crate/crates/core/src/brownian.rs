//! Brownian motion: two constructions, the reflection principle, and exact
//! first-passage sampling.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::invalid;
use crate::numerics::normal_sf;
use crate::simcore::{Path, RandomStream};
use crate::{Error, Result};

/// Deepest dyadic tree [`sample_bm_dyadic`] will build (2^24 + 1 nodes).
pub const DYADIC_MAX_DEPTH: u32 = 24;

/// Overshoot constant for the maximum of a Gaussian walk: the running max on
/// a grid of step dt sits about `DISCRETE_MAX_SHIFT·σ·√dt` below the
/// continuous one.
pub const DISCRETE_MAX_SHIFT: f64 = 0.5826;

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(invalid!("Brownian grid must start at 0"));
    }
    if let Some(i) = grid
        .windows(2)
        .position(|w| !(w[1] > w[0]) || !w[1].is_finite())
    {
        return Err(invalid!(
            "Brownian grid not strictly increasing at index {}",
            i + 1
        ));
    }
    Ok(())
}

/// Standard Brownian motion on `grid` from independent N(0, Δt) increments.
pub fn sample_bm_increments(stream: &mut RandomStream, grid: &[f64]) -> Result<Path> {
    check_grid(grid)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut b = 0.0;
    values.push(b);
    for w in grid.windows(2) {
        b += (w[1] - w[0]).sqrt() * stream.gaussian();
        values.push(b);
    }
    Ok(Path::from_parts(grid.to_vec(), values))
}

/// `n + 1` equally spaced times on `[0, t]`.
pub fn uniform_grid(t: f64, n: usize) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() || n == 0 {
        return Err(invalid!(
            "uniform grid needs t > 0 and n ≥ 1 (got t = {t}, n = {n})"
        ));
    }
    let mut grid: Vec<f64> = (0..=n).map(|k| t * k as f64 / n as f64).collect();
    grid[n] = t;
    Ok(grid)
}

/// Running maximum and terminal value of B on `n_steps` equal steps of
/// `[0, t]`, without storing the path.
pub fn sample_bm_max(stream: &mut RandomStream, t: f64, n_steps: usize) -> (f64, f64) {
    let sd = (t / n_steps as f64).sqrt();
    let mut b = 0.0f64;
    let mut max = 0.0f64;
    for _ in 0..n_steps {
        b += sd * stream.gaussian();
        max = max.max(b);
    }
    (max, b)
}

/// Brownian motion on `[0, 1]` at the dyadic points `k·2^{-depth}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicBridgeTree {
    depth: u32,
    values: Vec<f64>,
}

impl DyadicBridgeTree {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Values at `k·2^{-depth}`, `k = 0..=2^depth`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a depth-`level` node, `k·2^{-level}`.
    pub fn node(&self, level: u32, k: usize) -> f64 {
        assert!(level <= self.depth);
        self.values[k << (self.depth - level)]
    }

    /// Adds every midpoint, drawing from `stream`. Existing nodes are
    /// untouched.
    ///
    /// With U the increment over [s, t] and V an independent N(0, t − s),
    /// the midpoint is X_s + (U − V)/2.
    pub fn refine(&mut self, stream: &mut RandomStream) -> Result<()> {
        if self.depth >= DYADIC_MAX_DEPTH {
            return Err(Error::ResourceLimit(alloc::format!(
                "dyadic depth is capped at {DYADIC_MAX_DEPTH}"
            )));
        }
        let h = (0.5f64).powi(self.depth as i32);
        let sd = h.sqrt();
        let mut next = Vec::with_capacity(2 * self.values.len() - 1);
        next.push(self.values[0]);
        for w in self.values.windows(2) {
            let u = w[1] - w[0];
            let v = sd * stream.gaussian();
            next.push(w[0] + 0.5 * (u - v));
            next.push(w[1]);
        }
        self.values = next;
        self.depth += 1;
        Ok(())
    }

    /// Linear interpolation through the nodes, as a path on `[0, 1]`.
    pub fn to_path(&self) -> Path {
        let n = self.values.len() - 1;
        let times = (0..=n).map(|k| k as f64 / n as f64).collect();
        Path::from_parts(times, self.values.clone())
    }

    /// Linear interpolation at `t ∈ [0, 1]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        let x = t.clamp(0.0, 1.0) * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        let w = x - k as f64;
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }
}

/// Lévy's midpoint construction to the given depth.
///
/// Draws are consumed level by level, so building to depth `n` and then
/// calling `refine` on the same stream gives the depth-`n + 1` tree.
pub fn sample_bm_dyadic(stream: &mut RandomStream, depth: u32) -> Result<DyadicBridgeTree> {
    if depth > DYADIC_MAX_DEPTH {
        return Err(Error::ResourceLimit(alloc::format!(
            "dyadic depth {depth} exceeds the cap of {DYADIC_MAX_DEPTH}"
        )));
    }
    let mut tree = DyadicBridgeTree {
        depth: 0,
        values: vec![0.0, stream.gaussian()],
    };
    for _ in 0..depth {
        tree.refine(stream)?;
    }
    Ok(tree)
}

/// P[sup_{s≤t} B_s ≥ L] = 2 P[B_t ≥ L].
pub fn max_law_cdf(level: f64, t: f64) -> f64 {
    if level <= 0.0 {
        return 1.0;
    }
    (2.0 * normal_sf(level / t.sqrt())).min(1.0)
}

/// How far a running max taken on a grid of step `dt` can shift
/// [`max_law_cdf`]: `max_law_cdf(L − 0.5826√dt, t) − max_law_cdf(L, t)`.
pub fn discrete_max_bias(level: f64, t: f64, dt: f64) -> f64 {
    max_law_cdf(level - DISCRETE_MAX_SHIFT * dt.sqrt(), t) - max_law_cdf(level, t)
}

/// Exact sample of the first passage time of B to `a > 0`, as a²/Z².
pub fn sample_first_passage(stream: &mut RandomStream, a: f64) -> f64 {
    let z = stream.gaussian();
    a * a / (z * z)
}

/// P[τ_a ≤ t].
pub fn first_passage_cdf(a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        max_law_cdf(a, t)
    }
}

/// Where a planar Brownian motion started at (0, 1) first meets the
/// horizontal axis: √τ·Z′ with τ the passage time of the second coordinate.
pub fn sample_line_hit_2d(stream: &mut RandomStream) -> f64 {
    let tau = sample_first_passage(stream, 1.0);
    tau.sqrt() * stream.gaussian()
}

pub fn cauchy_cdf(x: f64) -> f64 {
    0.5 + x.atan() / PI
}

/// Mirrors the path in `level` strictly after it first reaches `level`.
pub fn reflect_at_level(path: &Path, level: f64) -> Path {
    let v = path.values();
    let start = v[0];
    let hit = v.iter().position(|&x| {
        if start <= level {
            x >= level
        } else {
            x <= level
        }
    });
    match hit {
        None => path.clone(),
        Some(k) => path.map({
            let mut i = 0;
            move |&x| {
                let out = if i > k { 2.0 * level - x } else { x };
                i += 1;
                out
            }
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_cdf;
    use crate::simcore::{
        derive_stream, ks_critical_value_1pct, ks_statistic, sample_correlation, MomentAccumulator,
    };

    fn ensemble_at(seed: u64, n: u64, grid: &[f64], idx: &[usize]) -> Vec<Vec<f64>> {
        (0..n)
            .map(|id| {
                let p = sample_bm_increments(&mut derive_stream(seed, id), grid).unwrap();
                idx.iter().map(|&i| p.values()[i]).collect()
            })
            .collect()
    }

    #[test]
    fn bad_grids_rejected() {
        let mut s = derive_stream(0, 0);
        assert!(sample_bm_increments(&mut s, &[0.1, 0.2]).is_err());
        assert!(sample_bm_increments(&mut s, &[0.0, 0.2, 0.2]).is_err());
        assert!(sample_bm_increments(&mut s, &[]).is_err());
        assert!(uniform_grid(0.0, 3).is_err());
    }

    #[test]
    fn variance_and_covariance() {
        let grid = uniform_grid(1.0, 10).unwrap();
        let xs = ensemble_at(10, 100_000, &grid, &[3, 7, 10]);
        let mut var1 = MomentAccumulator::default();
        let mut cov = MomentAccumulator::default();
        for x in &xs {
            var1.push(x[2] * x[2]);
            cov.push(x[0] * x[1]);
        }
        assert!((var1.mean() - 1.0).abs() < 0.02);
        assert!(cov.estimate().unwrap().covers(0.3, 0.0));
    }

    #[test]
    fn scaling_preserves_variance() {
        // c·B_{t/c²} with c = 2, read at t = 1, is B at 1/4 scaled by 2.
        let grid = [0.0, 0.25, 1.0];
        let xs = ensemble_at(11, 100_000, &grid, &[1]);
        let mut acc = MomentAccumulator::default();
        for x in &xs {
            acc.push((2.0 * x[0]).powi(2));
        }
        assert!((acc.mean() - 1.0).abs() < 0.02);
    }

    #[test]
    fn time_inversion_covariance() {
        // W_t = t·B_{1/t} at t = 0.3, 0.7 needs B at 1/0.7 and 1/0.3.
        let grid = [0.0, 1.0 / 0.7, 1.0 / 0.3];
        let xs = ensemble_at(12, 100_000, &grid, &[1, 2]);
        let mut cov = MomentAccumulator::default();
        for x in &xs {
            cov.push(0.7 * x[0] * 0.3 * x[1]);
        }
        assert!(cov.estimate().unwrap().covers(0.3, 0.0));
    }

    #[test]
    fn increments_uncorrelated() {
        let grid = uniform_grid(1.0, 1000).unwrap();
        let p = sample_bm_increments(&mut derive_stream(13, 0), &grid).unwrap();
        let inc: Vec<f64> = p.values().windows(2).map(|w| w[1] - w[0]).collect();
        let r = sample_correlation(&inc[..inc.len() - 1], &inc[1..]).unwrap();
        assert!(r.abs() < 4.0 / (inc.len() as f64).sqrt());
        let tree = sample_bm_dyadic(&mut derive_stream(13, 1), 10).unwrap();
        let inc: Vec<f64> = tree.values().windows(2).map(|w| w[1] - w[0]).collect();
        let r = sample_correlation(&inc[..inc.len() - 1], &inc[1..]).unwrap();
        assert!(r.abs() < 4.0 / (inc.len() as f64).sqrt());
    }

    #[test]
    fn dyadic_depth_zero() {
        let mut s = derive_stream(14, 0);
        let tree = sample_bm_dyadic(&mut s, 0).unwrap();
        let v = derive_stream(14, 0).gaussian();
        assert_eq!(tree.values(), &[0.0, v]);
        assert!(matches!(
            sample_bm_dyadic(&mut s, 25),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn dyadic_refinement_is_consistent() {
        let mut s = derive_stream(15, 0);
        let coarse = sample_bm_dyadic(&mut s, 9).unwrap();
        let mut fine = coarse.clone();
        fine.refine(&mut s).unwrap();
        for k in 0..=512 {
            assert_eq!(fine.node(9, k), coarse.values()[k]);
        }
        // Same draws as building depth 10 directly.
        assert_eq!(
            fine,
            sample_bm_dyadic(&mut derive_stream(15, 0), 10).unwrap()
        );
        assert_eq!(fine.to_path().len(), 1025);
        assert_eq!(fine.value_at(0.5), fine.node(1, 1));
    }

    #[test]
    fn dyadic_increments_are_gaussian() {
        let tree = sample_bm_dyadic(&mut derive_stream(16, 0), 10).unwrap();
        let inc: Vec<f64> = tree.values().windows(2).map(|w| w[1] - w[0]).collect();
        let sd = (0.5f64).powi(10).sqrt();
        let d = ks_statistic(&inc, |x| normal_cdf(x / sd)).unwrap();
        assert!(d < ks_critical_value_1pct(inc.len()));
    }

    #[test]
    fn max_law_values() {
        assert_eq!(max_law_cdf(0.0, 2.0), 1.0);
        assert!((max_law_cdf(1.0, 1.0) - 0.317_310_507_862_914).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 0..100 {
            let v = max_law_cdf(i as f64 * 0.05, 1.5);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn running_max_matches_reflection() {
        let n = 20_000;
        let dt = 1e-3;
        let mut acc = MomentAccumulator::default();
        for id in 0..n {
            let (m, _) = sample_bm_max(&mut derive_stream(17, id), 1.0, 1000);
            acc.push(if m >= 1.0 { 1.0 } else { 0.0 });
        }
        let est = acc.estimate().unwrap();
        assert!(est.covers(max_law_cdf(1.0, 1.0), discrete_max_bias(1.0, 1.0, dt)));
        // The grid max undershoots.
        assert!(est.mean < max_law_cdf(1.0, 1.0));
    }

    #[test]
    fn first_passage_law() {
        let n = 100_000;
        let mut s = derive_stream(18, 0);
        let taus: Vec<f64> = (0..n).map(|_| sample_first_passage(&mut s, 1.0)).collect();
        assert!(taus.iter().all(|t| t.is_finite()));
        let d = ks_statistic(&taus, |t| first_passage_cdf(1.0, t)).unwrap();
        assert!(d < ks_critical_value_1pct(n));
        let z = crate::numerics::normal_quantile(0.75);
        let median = 1.0 / (z * z);
        assert!((median - 2.198).abs() < 1e-3);
        assert!((first_passage_cdf(1.0, median) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn line_hit_is_cauchy() {
        let n = 100_000;
        let mut s = derive_stream(19, 0);
        let mut xs: Vec<f64> = (0..n).map(|_| sample_line_hit_2d(&mut s)).collect();
        let d = ks_statistic(&xs, cauchy_cdf).unwrap();
        assert!(d < ks_critical_value_1pct(n));
        xs.sort_by(f64::total_cmp);
        let median = xs[n / 2];
        let iqr = xs[3 * n / 4] - xs[n / 4];
        assert!(median.abs() < 4.0 * iqr / (n as f64).sqrt());
    }

    #[test]
    fn reflection() {
        let p = Path::on_integer_grid(vec![0.0, 0.5, 1.2, 0.8, -0.1]).unwrap();
        assert_eq!(reflect_at_level(&p, 2.0), p);
        let r = reflect_at_level(&p, 1.0);
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(r.values(), &[0.0, 0.5, 1.2, 1.2, 2.1]));
        assert!(close(reflect_at_level(&r, 1.0).values(), p.values()));
    }

    #[test]
    fn reflected_ensemble_is_brownian() {
        // Fine grid: the overshoot past the level at the crossing index is
        // O(√dt) and shifts the mirror.
        let grid = uniform_grid(1.0, 4000).unwrap();
        let mut acc = MomentAccumulator::default();
        for id in 0..20_000 {
            let p = sample_bm_increments(&mut derive_stream(20, id), &grid).unwrap();
            acc.push(reflect_at_level(&p, 0.5).last().powi(2));
        }
        assert!(acc.estimate().unwrap().covers(1.0, 0.0));
    }
}
