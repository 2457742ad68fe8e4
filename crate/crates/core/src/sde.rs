//! Strong solutions of dX = f(X, t) dt + g(X, t) dB: Euler–Maruyama, Picard
//! iteration on a fixed driving path, and closed forms for linear models.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use crate::brownian::sample_bm_increments;
use crate::error::invalid;
use crate::simcore::{ensemble, Executor, MomentAccumulator, Path, RandomStream, StreamPlan};
use crate::{Error, Result};

/// States beyond this magnitude count as an explosion.
pub const EXPLOSION_BOUND: f64 = 1e12;

type Coefficient = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Drift and diffusion coefficients, each a function of `(x, t)`, with
/// optional analytic x-derivatives.
#[derive(Clone)]
pub struct DiffusionSpec {
    drift: Coefficient,
    diffusion: Coefficient,
    drift_dx: Option<Coefficient>,
    diffusion_dx: Option<Coefficient>,
}

impl core::fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("analytic_drift_dx", &self.drift_dx.is_some())
            .field("analytic_diffusion_dx", &self.diffusion_dx.is_some())
            .finish_non_exhaustive()
    }
}

/// Central difference step used when no analytic derivative is given.
pub fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

impl DiffusionSpec {
    pub fn new(
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            drift_dx: None,
            diffusion_dx: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        drift_dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion_dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.drift_dx = Some(Arc::new(drift_dx));
        self.diffusion_dx = Some(Arc::new(diffusion_dx));
        self
    }

    /// Standard Brownian motion, f = 0, g = 1.
    pub fn brownian() -> Self {
        Self::new(|_, _| 0.0, |_, _| 1.0).with_derivatives(|_, _| 0.0, |_, _| 0.0)
    }

    /// dX = μ dt + σ dB.
    pub fn drifted_bm(mu: f64, sigma: f64) -> Self {
        Self::new(move |_, _| mu, move |_, _| sigma).with_derivatives(|_, _| 0.0, |_, _| 0.0)
    }

    /// dX = −θX dt + σ dB.
    pub fn ou(theta: f64, sigma: f64) -> Self {
        Self::new(move |x, _| -theta * x, move |_, _| sigma)
            .with_derivatives(move |_, _| -theta, |_, _| 0.0)
    }

    /// dX = rX dt + σX dB.
    pub fn gbm(r: f64, sigma: f64) -> Self {
        Self::new(move |x, _| r * x, move |x, _| sigma * x)
            .with_derivatives(move |_, _| r, move |_, _| sigma)
    }

    /// dX = −½X dt + √(1 − X²) dB, whose solution from 0 is sin(B) until
    /// |B| reaches π/2. The root is clamped at 0 outside [−1, 1].
    pub fn sine() -> Self {
        Self::new(|x, _| -0.5 * x, |x, _| (1.0 - x * x).max(0.0).sqrt())
    }

    #[inline]
    pub fn drift(&self, x: f64, t: f64) -> f64 {
        (self.drift)(x, t)
    }

    #[inline]
    pub fn diffusion(&self, x: f64, t: f64) -> f64 {
        (self.diffusion)(x, t)
    }

    pub fn drift_dx(&self, x: f64, t: f64) -> f64 {
        match &self.drift_dx {
            Some(d) => d(x, t),
            None => central_difference(|y| self.drift(y, t), x),
        }
    }

    pub fn diffusion_dx(&self, x: f64, t: f64) -> f64 {
        match &self.diffusion_dx {
            Some(d) => d(x, t),
            None => central_difference(|y| self.diffusion(y, t), x),
        }
    }
}

fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[inline]
fn check_state(x: f64, t: f64) -> Result<f64> {
    if x.is_finite() && x.abs() <= EXPLOSION_BOUND {
        Ok(x)
    } else {
        Err(Error::Explosion { time: t })
    }
}

/// Euler–Maruyama driven by the increments of `bm`.
pub fn euler_maruyama(spec: &DiffusionSpec, x0: f64, bm: &Path) -> Result<Path> {
    let t = bm.times();
    let b = bm.values();
    let mut values = Vec::with_capacity(t.len());
    let mut x = check_state(x0, t[0])?;
    values.push(x);
    for i in 0..t.len() - 1 {
        let dt = t[i + 1] - t[i];
        x += spec.drift(x, t[i]) * dt + spec.diffusion(x, t[i]) * (b[i + 1] - b[i]);
        x = check_state(x, t[i + 1])?;
        values.push(x);
    }
    Ok(Path::from_parts(t.to_vec(), values))
}

/// Euler–Maruyama with freshly sampled increments on `grid`.
pub fn euler_maruyama_sampled(
    spec: &DiffusionSpec,
    x0: f64,
    grid: &[f64],
    stream: &mut RandomStream,
) -> Result<Path> {
    let bm = sample_bm_increments(stream, grid)?;
    euler_maruyama(spec, x0, &bm)
}

/// Picard iterates X⁽⁰⁾ ≡ x0, X⁽ʲ⁺¹⁾ = x0 + ∫f(X⁽ʲ⁾) ds + ∫g(X⁽ʲ⁾) dB with
/// left-point sums on the grid of `bm`. Returns X⁽⁰⁾ through X⁽ᵏ⁾.
///
/// On a fixed grid the fixed point of this map is the Euler–Maruyama path,
/// and X⁽ʲ⁾ agrees with it exactly at the first j + 1 grid points.
pub fn picard_iterate(spec: &DiffusionSpec, x0: f64, bm: &Path, k: usize) -> Result<Vec<Path>> {
    if k == 0 {
        return Err(invalid!("need at least one Picard iteration"));
    }
    let t = bm.times();
    let b = bm.values();
    let mut iterates = Vec::with_capacity(k + 1);
    iterates.push(bm.map(|_| x0));
    for _ in 0..k {
        let prev = iterates[iterates.len() - 1].values();
        let mut values = Vec::with_capacity(t.len());
        let mut acc = x0;
        values.push(acc);
        for i in 0..t.len() - 1 {
            let x = prev[i];
            acc += spec.drift(x, t[i]) * (t[i + 1] - t[i])
                + spec.diffusion(x, t[i]) * (b[i + 1] - b[i]);
            values.push(check_state(acc, t[i + 1])?);
        }
        iterates.push(Path::from_parts(t.to_vec(), values));
    }
    Ok(iterates)
}

/// Largest pointwise distance between two paths on the same grid.
pub fn sup_distance(a: &Path, b: &Path) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Linear SDEs with a closed-form solution.
#[derive(Clone)]
pub enum ExactModel {
    /// dX = a(t)X dt + σ(t) dB, given α(t) = ∫₀ᵗ a and σ.
    LinearAdditive {
        alpha: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        sigma: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    /// dX = aX dt + γX dB.
    LinearMultiplicative { a: f64, gamma: f64 },
    /// dX = −θX dt + σ dB.
    Ou { theta: f64, sigma: f64 },
    /// dX = rX dt + σX dB.
    Gbm { r: f64, sigma: f64 },
    /// Bridge from `a` at 0 to `b` at 1: dX = (b − X)/(1 − t) dt + dB on [0, 1).
    BrownianBridge { a: f64, b: f64 },
    /// dX = μ dt + σ dB.
    DriftedBm { mu: f64, sigma: f64 },
    /// dY = r dt + αY dB.
    IntegratingFactor { r: f64, alpha: f64 },
}

impl core::fmt::Debug for ExactModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExactModel::LinearAdditive { .. } => f.write_str("LinearAdditive"),
            ExactModel::LinearMultiplicative { a, gamma } => {
                write!(f, "LinearMultiplicative(a={a}, gamma={gamma})")
            }
            ExactModel::Ou { theta, sigma } => write!(f, "Ou(theta={theta}, sigma={sigma})"),
            ExactModel::Gbm { r, sigma } => write!(f, "Gbm(r={r}, sigma={sigma})"),
            ExactModel::BrownianBridge { a, b } => write!(f, "BrownianBridge(a={a}, b={b})"),
            ExactModel::DriftedBm { mu, sigma } => write!(f, "DriftedBm(mu={mu}, sigma={sigma})"),
            ExactModel::IntegratingFactor { r, alpha } => {
                write!(f, "IntegratingFactor(r={r}, alpha={alpha})")
            }
        }
    }
}

impl ExactModel {
    /// The SDE this model solves. The additive case differentiates α
    /// numerically.
    pub fn spec(&self) -> DiffusionSpec {
        match self.clone() {
            ExactModel::LinearAdditive { alpha, sigma } => DiffusionSpec::new(
                move |x, t| central_difference(|s| alpha(s), t) * x,
                move |_, t| sigma(t),
            ),
            ExactModel::LinearMultiplicative { a, gamma } => DiffusionSpec::gbm(a, gamma),
            ExactModel::Ou { theta, sigma } => DiffusionSpec::ou(theta, sigma),
            ExactModel::Gbm { r, sigma } => DiffusionSpec::gbm(r, sigma),
            ExactModel::BrownianBridge { b, .. } => {
                DiffusionSpec::new(move |x, t| (b - x) / (1.0 - t), |_, _| 1.0)
            }
            ExactModel::DriftedBm { mu, sigma } => DiffusionSpec::drifted_bm(mu, sigma),
            ExactModel::IntegratingFactor { r, alpha } => {
                DiffusionSpec::new(move |_, _| r, move |y, _| alpha * y)
                    .with_derivatives(|_, _| 0.0, move |_, _| alpha)
            }
        }
    }
}

/// Closed-form path of `model` driven by `bm`; stochastic integrals in the
/// formula use left-point sums, everything else is exact.
pub fn exact_solution(model: &ExactModel, bm: &Path, x0: f64) -> Result<Path> {
    let t = bm.times();
    let b = bm.values();
    let n = t.len();
    // Running left-point sum of ∫ w(s) dB_s.
    let stochastic = |w: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut acc = 0.0;
        out.push(acc);
        for i in 0..n - 1 {
            acc += w(t[i]) * (b[i + 1] - b[i]);
            out.push(acc);
        }
        out
    };
    let values: Vec<f64> = match model {
        ExactModel::LinearAdditive { alpha, sigma } => {
            let a0 = alpha(0.0);
            let integral = stochastic(&|s| (a0 - alpha(s)).exp() * sigma(s));
            t.iter()
                .zip(&integral)
                .map(|(&ti, i)| (alpha(ti) - a0).exp() * (x0 + i))
                .collect()
        }
        &ExactModel::LinearMultiplicative { a: r, gamma: sigma }
        | &ExactModel::Gbm { r, sigma } => t
            .iter()
            .zip(b)
            .map(|(&ti, &bi)| x0 * ((r - 0.5 * sigma * sigma) * ti + sigma * bi).exp())
            .collect(),
        &ExactModel::Ou { theta, sigma } => {
            let integral = stochastic(&|s| (theta * s).exp());
            t.iter()
                .zip(&integral)
                .map(|(&ti, i)| (-theta * ti).exp() * (x0 + sigma * i))
                .collect()
        }
        &ExactModel::BrownianBridge { a, b: end } => {
            if t[n - 1] >= 1.0 {
                return Err(invalid!("the bridge is defined on [0, 1) only"));
            }
            let integral = stochastic(&|s| 1.0 / (1.0 - s));
            let _ = x0;
            t.iter()
                .zip(&integral)
                .map(|(&ti, i)| a * (1.0 - ti) + end * ti + (1.0 - ti) * i)
                .collect()
        }
        &ExactModel::DriftedBm { mu, sigma } => t
            .iter()
            .zip(b)
            .map(|(&ti, &bi)| x0 + mu * ti + sigma * bi)
            .collect(),
        &ExactModel::IntegratingFactor { r, alpha } => {
            // F_t = exp(−αB_t + ½α²t) turns the equation into d(FY) = rF dt.
            let f: Vec<f64> = t
                .iter()
                .zip(b)
                .map(|(&ti, &bi)| (-alpha * bi + 0.5 * alpha * alpha * ti).exp())
                .collect();
            let mut out = Vec::with_capacity(n);
            let mut acc = 0.0;
            out.push(x0);
            for i in 0..n - 1 {
                acc += r * f[i] * (t[i + 1] - t[i]);
                out.push((x0 + acc) / f[i + 1]);
            }
            out
        }
    };
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Explosion { time: t[i] });
    }
    Ok(Path::from_parts(t.to_vec(), values))
}

/// One row of a strong-error table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongErrorRow {
    pub dt: f64,
    pub mean_abs_error: f64,
    pub stderr: f64,
}

/// Mean |X_T^Euler − X_T^exact| for each step count in `steps`, all driven by
/// one Brownian path per sample sampled on the finest grid.
///
/// Every entry of `steps` must divide the largest.
#[allow(clippy::too_many_arguments)]
pub fn strong_error_table<E: Executor + ?Sized>(
    spec: &DiffusionSpec,
    model: &ExactModel,
    x0: f64,
    horizon: f64,
    steps: &[usize],
    n_paths: usize,
    exec: &E,
    plan: StreamPlan,
) -> Result<Vec<StrongErrorRow>> {
    let finest = steps
        .iter()
        .copied()
        .max()
        .ok_or_else(|| invalid!("no grids given"))?;
    if steps.iter().any(|&s| s == 0 || finest % s != 0) {
        return Err(invalid!(
            "every step count must divide the finest ({finest})"
        ));
    }
    let grid = crate::brownian::uniform_grid(horizon, finest)?;
    let rows = ensemble(exec, plan, n_paths, |s| -> Result<Vec<f64>> {
        let bm = sample_bm_increments(s, &grid)?;
        let exact = *exact_solution(model, &bm, x0)?.last();
        steps
            .iter()
            .map(|&n| {
                let stride = finest / n;
                let (times, values) = bm.clone().into_parts();
                let coarse = Path::from_parts(
                    times.into_iter().step_by(stride).collect(),
                    values.into_iter().step_by(stride).collect(),
                );
                Ok((euler_maruyama(spec, x0, &coarse)?.last() - exact).abs())
            })
            .collect()
    });
    let mut accs: Vec<MomentAccumulator> =
        steps.iter().map(|_| MomentAccumulator::default()).collect();
    for row in rows {
        for (acc, e) in accs.iter_mut().zip(row?) {
            acc.push(e);
        }
    }
    steps
        .iter()
        .zip(accs)
        .map(|(&n, acc)| {
            let est = acc.estimate()?;
            Ok(StrongErrorRow {
                dt: horizon / n as f64,
                mean_abs_error: est.mean,
                stderr: est.stderr,
            })
        })
        .collect()
}
