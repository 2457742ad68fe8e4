//! Itô and Stratonovich integrals against sampled Brownian paths.
//!
//! Integrands are functions of a [`Prefix`] of the driving path, so an
//! integrand value on `[t_k, t_{k+1})` can only read the path up to `t_k`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_traits::Float;

use crate::brownian::sample_bm_increments;
use crate::error::invalid;
use crate::simcore::{ensemble, Executor, McEstimate, MomentAccumulator, Path, Prefix, StreamPlan};
use crate::Result;

/// An adapted integrand evaluated on the path observed so far.
pub type Integrand<'a> = dyn Fn(Prefix<'_>) -> f64 + Sync + Send + 'a;

enum SimpleValues {
    Constant(Vec<f64>),
    Adapted {
        value: Box<Integrand<'static>>,
        second_moments: Option<Vec<f64>>,
    },
}

/// A step integrand on a partition `0 = t_0 < … < t_N = T`.
pub struct SimpleIntegrand {
    partition: Vec<f64>,
    values: SimpleValues,
}

fn check_partition(partition: &[f64]) -> Result<()> {
    if partition.len() < 2 || partition[0] != 0.0 {
        return Err(invalid!(
            "partition must start at 0 and have at least one interval"
        ));
    }
    if partition.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid!("partition must be strictly increasing"));
    }
    Ok(())
}

impl SimpleIntegrand {
    /// Deterministic values, `values[k]` on `[t_k, t_{k+1})`.
    pub fn constant(partition: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_partition(&partition)?;
        if values.len() + 1 != partition.len() {
            return Err(invalid!(
                "{} intervals but {} values",
                partition.len() - 1,
                values.len()
            ));
        }
        Ok(Self {
            partition,
            values: SimpleValues::Constant(values),
        })
    }

    /// Random values: on `[t_k, t_{k+1})` the integrand is `value` applied to
    /// the path observed up to `t_k`.
    pub fn adapted(
        partition: Vec<f64>,
        value: impl Fn(Prefix<'_>) -> f64 + Sync + Send + 'static,
    ) -> Result<Self> {
        check_partition(&partition)?;
        Ok(Self {
            partition,
            values: SimpleValues::Adapted {
                value: Box::new(value),
                second_moments: None,
            },
        })
    }

    /// Supplies E[e_k²] per interval, which makes the isometry right side
    /// exact.
    pub fn with_second_moments(mut self, moments: Vec<f64>) -> Result<Self> {
        if moments.len() + 1 != self.partition.len() {
            return Err(invalid!("need one second moment per interval"));
        }
        if let SimpleValues::Adapted { second_moments, .. } = &mut self.values {
            *second_moments = Some(moments);
        }
        Ok(self)
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    fn value(&self, k: usize, observed: Prefix<'_>) -> f64 {
        match &self.values {
            SimpleValues::Constant(v) => v[k],
            SimpleValues::Adapted { value, .. } => value(observed),
        }
    }

    /// ∫ E[e²] ds when it is known in closed form.
    pub fn exact_square_integral(&self) -> Option<f64> {
        let moments: Vec<f64> = match &self.values {
            SimpleValues::Constant(v) => v.iter().map(|x| x * x).collect(),
            SimpleValues::Adapted { second_moments, .. } => second_moments.clone()?,
        };
        Some(
            moments
                .iter()
                .zip(self.partition.windows(2))
                .map(|(m, w)| m * (w[1] - w[0]))
                .sum(),
        )
    }
}

/// Running integral `Σ e_{t_{k}} (B_{t_{k+1}} − B_{t_k})` on the grid of `bm`,
/// up to the end of the partition.
pub fn ito_integral_simple(e: &SimpleIntegrand, bm: &Path) -> Result<Path> {
    let mut nodes = Vec::with_capacity(e.partition.len());
    for &t in &e.partition {
        match bm.index_of(t) {
            Some(i) => nodes.push(i),
            None => return Err(invalid!("partition point {t} is not on the Brownian grid")),
        }
    }
    let end = nodes[nodes.len() - 1];
    let b = bm.values();
    let mut values = Vec::with_capacity(end + 1);
    let mut acc = 0.0;
    values.push(acc);
    for (k, w) in nodes.windows(2).enumerate() {
        let ek = e.value(k, bm.prefix(w[0]));
        for i in w[0]..w[1] {
            acc += ek * (b[i + 1] - b[i]);
            values.push(acc);
        }
    }
    Ok(Path::from_parts(bm.times()[..=end].to_vec(), values))
}

/// Left-endpoint sums `Σ f(B|[0,t_i]) ΔB_i` on the grid of `bm`.
pub fn ito_integral_leftpoint<F>(f: F, bm: &Path) -> Path
where
    F: Fn(Prefix<'_>) -> f64,
{
    let b = bm.values();
    let mut values = Vec::with_capacity(b.len());
    let mut acc = 0.0;
    values.push(acc);
    for i in 0..b.len() - 1 {
        acc += f(bm.prefix(i)) * (b[i + 1] - b[i]);
        values.push(acc);
    }
    Path::from_parts(bm.times().to_vec(), values)
}

/// Midpoint-weighted sums `Σ ½(f_i + f_{i+1}) ΔB_i`.
pub fn stratonovich_integral_midpoint<F>(f: F, bm: &Path) -> Path
where
    F: Fn(Prefix<'_>) -> f64,
{
    let b = bm.values();
    let mut values = Vec::with_capacity(b.len());
    let mut acc = 0.0;
    let mut f_prev = f(bm.prefix(0));
    values.push(acc);
    for i in 0..b.len() - 1 {
        let f_next = f(bm.prefix(i + 1));
        acc += 0.5 * (f_prev + f_next) * (b[i + 1] - b[i]);
        f_prev = f_next;
        values.push(acc);
    }
    Path::from_parts(bm.times().to_vec(), values)
}

/// E[(∫e dB)²] estimated over `n_paths`, against ∫E[e²]ds.
///
/// The right side is exact when known (see
/// [`SimpleIntegrand::exact_square_integral`]); otherwise it is the sample
/// mean of ∫e² ds over the same paths.
pub fn isometry_audit<E: Executor + ?Sized>(
    e: &SimpleIntegrand,
    exec: &E,
    plan: StreamPlan,
    n_paths: usize,
) -> Result<(McEstimate, f64)> {
    let rows = ensemble(exec, plan, n_paths, |s| -> Result<(f64, f64)> {
        let bm = sample_bm_increments(s, &e.partition)?;
        let integral = *ito_integral_simple(e, &bm)?.last();
        let mut sq = 0.0;
        for (k, w) in e.partition.windows(2).enumerate() {
            let v = e.value(k, bm.prefix(k));
            sq += v * v * (w[1] - w[0]);
        }
        Ok((integral * integral, sq))
    });
    let mut lhs = MomentAccumulator::default();
    let mut rhs = MomentAccumulator::default();
    for row in rows {
        let (l, r) = row?;
        lhs.push(l);
        rhs.push(r);
    }
    let exact = e.exact_square_integral();
    Ok((lhs.estimate()?, exact.unwrap_or(rhs.mean())))
}

/// M_t = exp(∫g dB − ½∫g² ds), both integrals left-point.
pub fn exponential_supermartingale<F>(g: F, bm: &Path) -> Path
where
    F: Fn(Prefix<'_>) -> f64,
{
    let b = bm.values();
    let t = bm.times();
    let mut values = Vec::with_capacity(b.len());
    let mut log_m = 0.0;
    values.push(1.0);
    for i in 0..b.len() - 1 {
        let gi = g(bm.prefix(i));
        log_m += gi * (b[i + 1] - b[i]) - 0.5 * gi * gi * (t[i + 1] - t[i]);
        values.push(log_m.exp());
    }
    Path::from_parts(t.to_vec(), values)
}
