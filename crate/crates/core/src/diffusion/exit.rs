use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::brownian::DISCRETE_MAX_SHIFT;
use crate::discrete::FiniteChain;
use crate::error::invalid;
use crate::sde::DiffusionSpec;
use crate::simcore::{ensemble, Executor, McEstimate, MomentAccumulator, StreamPlan};
use crate::Result;

/// Step-size rule for exit simulations: `(κ·d/σ)²` clamped to
/// `[dt_min, dt_max]`, with `d` the distance to the nearest boundary.
///
/// Brownian increments are exact at any step, so large steps far from the
/// boundaries cost nothing in accuracy; the exit overshoot is governed by
/// `dt_min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveStep {
    pub dt_min: f64,
    pub dt_max: f64,
    pub kappa: f64,
}

impl AdaptiveStep {
    pub fn new(dt_min: f64, dt_max: f64) -> Self {
        Self {
            dt_min,
            dt_max,
            kappa: 0.2,
        }
    }

    pub fn fixed(dt: f64) -> Self {
        Self {
            dt_min: dt,
            dt_max: dt,
            kappa: 0.2,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.kappa > 0.0) {
            return Err(invalid!("step rule needs 0 < dt_min ≤ dt_max and κ > 0"));
        }
        Ok(())
    }

    #[inline]
    fn step(&self, dist: f64, drift: f64, sigma: f64) -> f64 {
        let mut h = (self.kappa * dist / sigma).powi(2);
        if drift != 0.0 {
            h = h.min(self.kappa * dist / drift.abs());
        }
        h.clamp(self.dt_min, self.dt_max)
    }
}

/// How far past a boundary a Gaussian walk with step `dt` and noise `sigma`
/// typically lands: 0.5826·σ·√dt.
pub fn boundary_shift(sigma: f64, dt: f64) -> f64 {
    DISCRETE_MAX_SHIFT * sigma * dt.sqrt()
}

/// Declared discretization bias of an exit statistic: the largest change
/// of `oracle(a, b)` when either or both boundaries move outward by their
/// shift.
pub fn shifted_bias(
    oracle: impl Fn(f64, f64) -> Result<f64>,
    a: f64,
    b: f64,
    shift_a: f64,
    shift_b: f64,
) -> Result<f64> {
    let base = oracle(a, b)?;
    let mut worst: f64 = 0.0;
    for (da, db) in [(shift_a, 0.0), (0.0, shift_b), (shift_a, shift_b)] {
        worst = worst.max((oracle(a - da, b + db)? - base).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExitConfig {
    pub x0: f64,
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub lambdas: Vec<f64>,
    /// Paths still inside at this time are counted as unresolved.
    pub max_time: f64,
}

/// Statistics of the exit from `(a, b)`, all from one ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitStatistics {
    pub p_hit_a: McEstimate,
    pub mean_tau: McEstimate,
    pub mean_tau_sq: McEstimate,
    /// `(λ, Ê[e^{−λτ}])`.
    pub laplace: Vec<(f64, McEstimate)>,
    /// Ê[τ·1{exit at a}].
    pub tau_on_a: McEstimate,
    /// Ê[τ·1{exit at b}].
    pub tau_on_b: McEstimate,
    /// Paths that had not exited by `max_time`; excluded from the estimates.
    pub unresolved: usize,
    pub shift_a: f64,
    pub shift_b: f64,
}

/// Euler paths from `x0` with step `dt`, stopped at the first grid point
/// outside `(a, b)`.
pub fn mc_exit_statistics<E: Executor + ?Sized>(
    spec: &DiffusionSpec,
    cfg: &ExitConfig,
    exec: &E,
    plan: StreamPlan,
) -> Result<ExitStatistics> {
    if !(cfg.a < cfg.x0 && cfg.x0 < cfg.b) {
        return Err(invalid!(
            "need a < x0 < b (got {} < {} < {})",
            cfg.a,
            cfg.x0,
            cfg.b
        ));
    }
    if !(cfg.dt > 0.0) || !(cfg.max_time > 0.0) {
        return Err(invalid!("need dt > 0 and a positive time budget"));
    }
    let sqrt_dt = cfg.dt.sqrt();
    let max_steps = (cfg.max_time / cfg.dt).ceil() as u64;
    let outcomes = ensemble(exec, plan, cfg.n_paths, |s| {
        let mut x = cfg.x0;
        for k in 0..max_steps {
            let t = k as f64 * cfg.dt;
            x += spec.drift(x, t) * cfg.dt + spec.diffusion(x, t) * sqrt_dt * s.gaussian();
            if x <= cfg.a {
                return ExitOutcome {
                    time: (k + 1) as f64 * cfg.dt,
                    side: ExitSide::Lower,
                };
            }
            if x >= cfg.b {
                return ExitOutcome {
                    time: (k + 1) as f64 * cfg.dt,
                    side: ExitSide::Upper,
                };
            }
        }
        ExitOutcome {
            time: cfg.max_time,
            side: ExitSide::Unresolved,
        }
    });
    let mut p = MomentAccumulator::default();
    let mut m1 = MomentAccumulator::default();
    let mut m2 = MomentAccumulator::default();
    let mut on_a = MomentAccumulator::default();
    let mut on_b = MomentAccumulator::default();
    let mut lap = vec![MomentAccumulator::default(); cfg.lambdas.len()];
    let mut unresolved = 0;
    for o in &outcomes {
        if o.side == ExitSide::Unresolved {
            unresolved += 1;
            continue;
        }
        let hit_a = o.side == ExitSide::Lower;
        p.push(if hit_a { 1.0 } else { 0.0 });
        m1.push(o.time);
        m2.push(o.time * o.time);
        on_a.push(if hit_a { o.time } else { 0.0 });
        on_b.push(if hit_a { 0.0 } else { o.time });
        for (acc, &l) in lap.iter_mut().zip(&cfg.lambdas) {
            acc.push((-l * o.time).exp());
        }
    }
    let laplace = cfg
        .lambdas
        .iter()
        .zip(&lap)
        .map(|(&l, acc)| Ok((l, acc.estimate()?)))
        .collect::<Result<_>>()?;
    Ok(ExitStatistics {
        p_hit_a: p.estimate()?,
        mean_tau: m1.estimate()?,
        mean_tau_sq: m2.estimate()?,
        laplace,
        tau_on_a: on_a.estimate()?,
        tau_on_b: on_b.estimate()?,
        unresolved,
        shift_a: boundary_shift(spec.diffusion(cfg.a, 0.0).abs(), cfg.dt),
        shift_b: boundary_shift(spec.diffusion(cfg.b, 0.0).abs(), cfg.dt),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitSide {
    Lower,
    Upper,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitOutcome {
    pub time: f64,
    pub side: ExitSide,
}

/// Exits of Y = y0 + μt + σB from `(lower, upper)` (either side may be
/// absent), simulated with exact increments on adaptive steps.
#[allow(clippy::too_many_arguments)]
pub fn mc_drifted_exit<E: Executor + ?Sized>(
    exec: &E,
    plan: StreamPlan,
    mu: f64,
    sigma: f64,
    y0: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    step: AdaptiveStep,
    n_paths: usize,
    max_time: f64,
) -> Result<Vec<ExitOutcome>> {
    step.validate()?;
    let lo = lower.unwrap_or(f64::NEG_INFINITY);
    let hi = upper.unwrap_or(f64::INFINITY);
    if lower.is_none() && upper.is_none() {
        return Err(invalid!("need at least one boundary"));
    }
    if !(lo < y0 && y0 < hi) || !(sigma > 0.0) {
        return Err(invalid!("need lower < y0 < upper and σ > 0"));
    }
    Ok(ensemble(exec, plan, n_paths, |s| {
        let mut y = y0;
        let mut t = 0.0;
        while t < max_time {
            let d = (y - lo).min(hi - y);
            let h = step.step(d, mu, sigma);
            y += mu * h + sigma * h.sqrt() * s.gaussian();
            t += h;
            if y <= lo {
                return ExitOutcome {
                    time: t,
                    side: ExitSide::Lower,
                };
            }
            if y >= hi {
                return ExitOutcome {
                    time: t,
                    side: ExitSide::Upper,
                };
            }
        }
        ExitOutcome {
            time: max_time,
            side: ExitSide::Unresolved,
        }
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallExit {
    /// Ê[τ], τ the exit time of the ball (or of the annulus).
    pub mean_tau: McEstimate,
    /// Annulus mode: P̂[reach the inner sphere before the outer one].
    pub p_inner_first: Option<McEstimate>,
    pub unresolved: usize,
    /// Typical overshoot at the smallest step.
    pub shift: f64,
}

/// Isotropic Brownian motion in `x0.len()` dimensions.
///
/// Without `outer`, runs from `x0` inside the ball of radius `radius` to
/// its exit. With `outer`, runs from `radius < ‖x0‖ < outer` until it
/// reaches either sphere.
#[allow(clippy::too_many_arguments)]
pub fn mc_ball_exit<E: Executor + ?Sized>(
    exec: &E,
    plan: StreamPlan,
    radius: f64,
    x0: &[f64],
    outer: Option<f64>,
    step: AdaptiveStep,
    n_paths: usize,
    max_time: f64,
) -> Result<BallExit> {
    step.validate()?;
    let dim = x0.len();
    if dim == 0 {
        return Err(invalid!("dimension must be at least 1"));
    }
    let r0 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    match outer {
        None if !(r0 < radius) => {
            return Err(invalid!(
                "start ‖x0‖ = {r0} must lie inside the ball of radius {radius}"
            ))
        }
        Some(o) if !(radius < r0 && r0 < o) => {
            return Err(invalid!(
                "annulus mode needs R < ‖x0‖ < outer (got {radius} < {r0} < {o})"
            ))
        }
        _ => {}
    }
    let outcomes = ensemble(exec, plan, n_paths, |s| {
        let mut x = x0.to_vec();
        let mut t = 0.0;
        while t < max_time {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let d = match outer {
                None => radius - r,
                Some(o) => (r - radius).min(o - r),
            };
            let h = step.step(d, 0.0, 1.0);
            let sd = h.sqrt();
            for v in x.iter_mut() {
                *v += sd * s.gaussian();
            }
            t += h;
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            match outer {
                None if r >= radius => {
                    return ExitOutcome {
                        time: t,
                        side: ExitSide::Upper,
                    }
                }
                Some(_) if r <= radius => {
                    return ExitOutcome {
                        time: t,
                        side: ExitSide::Lower,
                    }
                }
                Some(o) if r >= o => {
                    return ExitOutcome {
                        time: t,
                        side: ExitSide::Upper,
                    }
                }
                _ => {}
            }
        }
        ExitOutcome {
            time: max_time,
            side: ExitSide::Unresolved,
        }
    });
    let mut tau = MomentAccumulator::default();
    let mut inner = MomentAccumulator::default();
    let mut unresolved = 0;
    for o in &outcomes {
        if o.side == ExitSide::Unresolved {
            unresolved += 1;
            continue;
        }
        tau.push(o.time);
        inner.push(if o.side == ExitSide::Lower { 1.0 } else { 0.0 });
    }
    Ok(BallExit {
        mean_tau: tau.estimate()?,
        p_inner_first: match outer {
            Some(_) => Some(inner.estimate()?),
            None => None,
        },
        unresolved,
        shift: boundary_shift(1.0, step.dt_min),
    })
}

/// (2/π)·arcsin(√u).
pub fn arcsine_cdf(u: f64) -> f64 {
    2.0 / PI * u.clamp(0.0, 1.0).sqrt().asin()
}

/// Fraction of `[0, t]` that a Brownian path spends above 0, one sample
/// per path. Each step counts the average of its two endpoint indicators.
pub fn arcsine_occupation<E: Executor + ?Sized>(
    exec: &E,
    plan: StreamPlan,
    t: f64,
    dt: f64,
    n_paths: usize,
) -> Result<Vec<f64>> {
    if !(t > 0.0) || !(dt > 0.0) || dt > 1e-3 * t * (1.0 + 1e-12) {
        return Err(invalid!(
            "need t > 0 and 0 < dt ≤ 1e-3·t (got t = {t}, dt = {dt})"
        ));
    }
    let n = (t / dt).round() as usize;
    let sd = (t / n as f64).sqrt();
    Ok(ensemble(exec, plan, n_paths, |s| {
        let mut b = 0.0f64;
        let mut count = 0u32;
        for _ in 0..n {
            let prev = b > 0.0;
            b += sd * s.gaussian();
            count += u32::from(prev) + u32::from(b > 0.0);
        }
        f64::from(count) / (2 * n) as f64
    }))
}

/// For each Ehrenfest state k, with x = (k − N/2)/√N and time measured in
/// units of N steps: `(x, drift, variance)` of the rescaled increments.
pub fn ehrenfest_rescaled_moments(chain: &FiniteChain) -> Vec<(f64, f64, f64)> {
    let n = (chain.n_states() - 1) as f64;
    let root = n.sqrt();
    (0..chain.n_states())
        .map(|k| {
            let x = (k as f64 - n / 2.0) / root;
            let m1 = chain.conditional_mean(k, |j| (j as f64 - k as f64) / root);
            let m2 = chain.conditional_mean(k, |j| ((j as f64 - k as f64) / root).powi(2));
            (x, n * m1, n * (m2 - m1 * m1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{closed_form, ClosedForm};
    use crate::simcore::{
        ks_critical_value_1pct, ks_statistic, ks_two_sample, ks_two_sample_critical_value_1pct,
        Sequential,
    };

    fn cfg(x0: f64, a: f64, b: f64, dt: f64, n_paths: usize) -> ExitConfig {
        ExitConfig {
            x0,
            a,
            b,
            dt,
            n_paths,
            lambdas: vec![0.5],
            max_time: 100.0,
        }
    }

    #[test]
    fn bm_interval_exit() {
        let c = cfg(0.0, -1.0, 2.0, 1e-3, 10_000);
        let st = mc_exit_statistics(
            &DiffusionSpec::brownian(),
            &c,
            &Sequential,
            StreamPlan::new(70),
        )
        .unwrap();
        assert_eq!(st.unresolved, 0);
        let p = |a: f64, b: f64| closed_form(&ClosedForm::IntervalHitLower { a, b, x: 0.0 });
        let bias = shifted_bias(p, -1.0, 2.0, st.shift_a, st.shift_b).unwrap();
        assert!(st.p_hit_a.covers(2.0 / 3.0, bias));
        let m = |a: f64, b: f64| closed_form(&ClosedForm::IntervalExitMean { a, b, x: 0.0 });
        let bias = shifted_bias(m, -1.0, 2.0, st.shift_a, st.shift_b).unwrap();
        assert!(st.mean_tau.covers(2.0, bias));
        // The grid exit comes late, so E[τ] is biased upward.
        assert!(st.mean_tau.mean > 2.0 - 4.0 * st.mean_tau.stderr);
    }

    #[test]
    fn symmetric_exit_moments() {
        let c = cfg(0.0, -1.0, 1.0, 1e-3, 10_000);
        let st = mc_exit_statistics(
            &DiffusionSpec::brownian(),
            &c,
            &Sequential,
            StreamPlan::new(71),
        )
        .unwrap();
        let sym = |f: &dyn Fn(f64) -> ClosedForm| {
            let base = closed_form(&f(1.0)).unwrap();
            (
                base,
                (closed_form(&f(1.0 + st.shift_b)).unwrap() - base).abs(),
            )
        };
        let (o, bias) = sym(&|a| ClosedForm::SymmetricExitSecondMoment { a, x: 0.0 });
        assert!(st.mean_tau_sq.covers(o, bias));
        let (o, bias) = sym(&|a| ClosedForm::SymmetricExitLaplace {
            a,
            x: 0.0,
            lambda: 0.5,
        });
        assert!(st.laplace[0].1.covers(o, bias));
        let (o, bias) = sym(&|a| ClosedForm::SymmetricExitUpperMean { a, x: 0.0 });
        assert!(st.tau_on_b.covers(o, bias));
    }

    #[test]
    fn exit_config_validation() {
        let bm = DiffusionSpec::brownian();
        assert!(mc_exit_statistics(
            &bm,
            &cfg(3.0, -1.0, 2.0, 1e-3, 10),
            &Sequential,
            StreamPlan::new(1)
        )
        .is_err());
        assert!(mc_exit_statistics(
            &bm,
            &cfg(0.0, -1.0, 2.0, 0.0, 10),
            &Sequential,
            StreamPlan::new(1)
        )
        .is_err());
    }

    #[test]
    fn ball_and_annulus() {
        let st = AdaptiveStep::new(1e-4, 0.05);
        let b = mc_ball_exit(
            &Sequential,
            StreamPlan::new(72),
            1.0,
            &[0.0; 3],
            None,
            st,
            4000,
            100.0,
        )
        .unwrap();
        assert!(b.mean_tau.covers(1.0 / 3.0, 0.02));
        assert!(b.p_inner_first.is_none());
        let a = mc_ball_exit(
            &Sequential,
            StreamPlan::new(73),
            1.0,
            &[2.0, 0.0, 0.0],
            Some(16.0),
            st,
            4000,
            1e4,
        )
        .unwrap();
        assert_eq!(a.unresolved, 0);
        let p = |r: f64, o: f64| {
            closed_form(&ClosedForm::AnnulusHitInner {
                dim: 3,
                inner: r,
                outer: o,
                norm_x: 2.0,
            })
        };
        // The inner boundary is shifted inward, the outer outward.
        let bias = shifted_bias(|lo, hi| p(-lo, hi), -1.0, 16.0, a.shift, a.shift).unwrap();
        assert!(a.p_inner_first.unwrap().covers(7.0 / 15.0, bias));
        assert!(mc_ball_exit(
            &Sequential,
            StreamPlan::new(1),
            1.0,
            &[2.0, 0.0],
            None,
            st,
            10,
            1.0
        )
        .is_err());
    }

    #[test]
    fn gbm_in_log_scale() {
        // r = 1: E[τ_4] from 1 is 2 log 4.
        let st = AdaptiveStep::new(1e-4, 0.25);
        let out = mc_drifted_exit(
            &Sequential,
            StreamPlan::new(74),
            0.5,
            1.0,
            0.0,
            None,
            Some(4f64.ln()),
            st,
            5000,
            1e3,
        )
        .unwrap();
        let mut acc = MomentAccumulator::default();
        for o in &out {
            assert_eq!(o.side, ExitSide::Upper);
            acc.push(o.time);
        }
        let oracle = closed_form(&ClosedForm::GbmMeanHitting {
            r: 1.0,
            x: 1.0,
            b: 4.0,
        })
        .unwrap();
        assert!(acc
            .estimate()
            .unwrap()
            .covers(oracle, boundary_shift(1.0, 1e-4) / 0.5));
    }

    #[test]
    fn drifted_hitting_probability_is_monotone() {
        let st = AdaptiveStep::new(1e-4, 0.25);
        let out = mc_drifted_exit(
            &Sequential,
            StreamPlan::new(75),
            -0.5,
            1.0,
            0.0,
            None,
            Some(1.0),
            st,
            4000,
            50.0,
        )
        .unwrap();
        let bound = closed_form(&ClosedForm::DriftedBmLaplace {
            a: 1.0,
            beta: 0.5,
            lambda: 0.0,
        })
        .unwrap();
        let mut prev = 0.0;
        for horizon in [1.0, 5.0, 20.0, 50.0] {
            let hits: Vec<f64> = out
                .iter()
                .map(|o| {
                    if o.side == ExitSide::Upper && o.time <= horizon {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let est = McEstimate::from_samples(&hits).unwrap();
            assert!(est.mean >= prev);
            assert!(est.mean <= bound + 4.0 * est.stderr);
            prev = est.mean;
        }
    }

    #[test]
    fn arcsine_law() {
        let xs = arcsine_occupation(&Sequential, StreamPlan::new(76), 1.0, 1e-3, 20_000).unwrap();
        assert!(ks_statistic(&xs, arcsine_cdf).unwrap() < 0.02);
        let below = xs.iter().filter(|&&x| x < 0.5).count() as f64 / xs.len() as f64;
        assert!((below - 0.5).abs() < 4.0 * (0.25 / xs.len() as f64).sqrt());
        let ys = arcsine_occupation(&Sequential, StreamPlan::new(77), 4.0, 4e-3, 20_000).unwrap();
        assert!(
            ks_two_sample(&xs, &ys).unwrap()
                < ks_two_sample_critical_value_1pct(xs.len(), ys.len())
        );
        assert!(arcsine_occupation(&Sequential, StreamPlan::new(76), 1.0, 0.01, 10).is_err());
        let _ = ks_critical_value_1pct(10);
    }

    #[test]
    fn ehrenfest_diffusion_limit() {
        let chain = FiniteChain::ehrenfest(400).unwrap();
        for (x, drift, var) in ehrenfest_rescaled_moments(&chain) {
            if x.abs() <= 1.0 {
                assert!((drift + 2.0 * x).abs() <= 0.05 * (2.0 * x).abs() + 1e-9);
                assert!((var - 1.0).abs() < 0.05);
            }
        }
    }
}
