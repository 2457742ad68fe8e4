use stoklab_core::brownian::{sample_bm_increments, uniform_grid};
use stoklab_core::ito::{
    isometry_audit, ito_integral_leftpoint, ito_integral_simple, stratonovich_integral_midpoint,
    SimpleIntegrand,
};
use stoklab_core::simcore::{ensemble, MomentAccumulator};
use stoklab_core::{Path, Result};

use super::Experiment;
use crate::params::{count, positive};
use crate::report::Row;
use crate::runner::Ctx;

/// Runs `f` on `paths` Brownian paths on a uniform grid and accumulates
/// each component of its output.
fn accumulate<const K: usize>(
    ctx: &Ctx,
    k: u64,
    horizon: f64,
    steps: usize,
    paths: usize,
    f: impl Fn(&Path) -> [f64; K] + Sync + Send,
) -> Result<[MomentAccumulator; K]> {
    let grid = uniform_grid(horizon, steps)?;
    let rows = ensemble(ctx.exec, ctx.plan(k), paths, |s| {
        sample_bm_increments(s, &grid).map(|bm| f(&bm))
    });
    let mut accs = [(); K].map(|_| MomentAccumulator::default());
    for r in rows {
        for (acc, x) in accs.iter_mut().zip(r?) {
            acc.push(x);
        }
    }
    Ok(accs)
}

pub const ITO_BDB: Experiment = Experiment {
    name: "ito-bdb",
    description: "Left-point and midpoint sums for the integral of B against itself",
    params: &[
        count("paths", "10000", "simulated paths"),
        count("steps", "4096", "grid steps on [0, t]"),
        positive("t", "1", "horizon"),
    ],
    run: ito_bdb,
};

fn ito_bdb(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps, t) = (ctx.count("paths"), ctx.count("steps"), ctx.get("t"));
    let dt = t / steps as f64;
    let [ito, strat] = accumulate(ctx, 0, t, steps, paths, |bm| {
        let b = *bm.last();
        let i = *ito_integral_leftpoint(|p| *p.current(), bm).last();
        let s = *stratonovich_integral_midpoint(|p| *p.current(), bm).last();
        [
            (i - (0.5 * b * b - 0.5 * t)).powi(2),
            (s - 0.5 * b * b).powi(2),
        ]
    })?;
    let budget = 4.0 * t * dt / 2.0;
    let ito = ito.estimate()?;
    ctx.push(Row::mc(
        "ito-bdb.ito_mean_square_error",
        &ito,
        t * dt / 2.0,
        0.0,
        "left-point sum minus (B_t^2 - t)/2 is half the quadratic-variation error, variance t dt / 2",
    ));
    ctx.push(Row::at_most(
        "ito-bdb.ito_mean_square_budget",
        ito.mean,
        Some(ito.stderr),
        budget,
        0.0,
        "four times the variance t dt / 2 of the quadratic-variation error",
    ));
    let strat = strat.estimate()?;
    ctx.push(Row::at_most(
        "ito-bdb.stratonovich_mean_square_budget",
        strat.mean,
        Some(strat.stderr),
        budget,
        0.0,
        "midpoint sum against B_t^2 / 2 with no correction term",
    ));
    Ok(())
}

pub const ITO_ISOMETRY: Experiment = Experiment {
    name: "ito-isometry",
    description: "Isometry and zero mean of Itô integrals of simple and deterministic integrands",
    params: &[
        count("paths", "100000", "simulated paths"),
        count(
            "level",
            "8",
            "the integrand is B frozen on a grid of mesh 2^-level",
        ),
        count(
            "steps",
            "1024",
            "grid steps for the deterministic integrands",
        ),
        positive("ou_t", "2", "horizon of the Ornstein-Uhlenbeck check"),
    ],
    run: ito_isometry,
};

fn ito_isometry(ctx: &mut Ctx) -> Result<()> {
    let paths = ctx.count("paths");
    let n = ctx.count("level") as i32;
    let cells = 1usize << n;
    let partition = uniform_grid(1.0, cells)?;
    let moments = partition[..cells].to_vec();
    let frozen = SimpleIntegrand::adapted(partition.clone(), |p| *p.current())?
        .with_second_moments(moments)?;
    let oracle = (2f64.powi(n) - 1.0) / 2f64.powi(n + 1);
    let source = "sum of k 2^-n times 2^-n over the cells: (2^n - 1) / 2^(n+1)";
    let rhs = frozen.exact_square_integral().unwrap_or(f64::NAN);
    ctx.push(Row::exact(
        "ito-isometry.frozen_rhs",
        rhs,
        oracle,
        1e-12,
        source,
    ));
    let (lhs, _) = isometry_audit(&frozen, ctx.exec, ctx.plan(0), paths)?;
    ctx.push(Row::mc(
        "ito-isometry.frozen_lhs",
        &lhs,
        oracle,
        0.0,
        source,
    ));

    let one = SimpleIntegrand::constant(vec![0.0, 1.0], vec![1.0])?;
    let (lhs, rhs) = isometry_audit(&one, ctx.exec, ctx.plan(1), paths)?;
    ctx.push(Row::exact(
        "ito-isometry.unit_rhs",
        rhs,
        1.0,
        0.0,
        "integral of 1 over [0, 1]",
    ));
    ctx.push(Row::mc(
        "ito-isometry.unit_lhs",
        &lhs,
        1.0,
        0.0,
        "E[B_1^2] = 1",
    ));

    // A bounded adapted integrand: the sign of B at the left end of each cell.
    let sign = SimpleIntegrand::adapted(partition.clone(), |p| {
        if *p.current() >= 0.0 {
            1.0
        } else {
            -1.0
        }
    })?;
    let mut acc = MomentAccumulator::default();
    for v in ensemble(ctx.exec, ctx.plan(2), paths, |s| {
        sample_bm_increments(s, &partition)
            .and_then(|bm| ito_integral_simple(&sign, &bm))
            .map(|i| *i.last())
    }) {
        acc.push(v?);
    }
    ctx.push(Row::mc(
        "ito-isometry.zero_mean",
        &acc.estimate()?,
        0.0,
        0.0,
        "Itô integrals have mean zero",
    ));

    let steps = ctx.count("steps");
    let dt = 1.0 / steps as f64;
    let [lin] = accumulate(ctx, 3, 1.0, steps, paths, |bm| {
        [ito_integral_leftpoint(|p| p.time(), bm).last().powi(2)]
    })?;
    // Left-point Riemann sum of s^2 misses 1/3 by dt/2 − dt²/6.
    ctx.push(Row::mc(
        "ito-isometry.time_integrand_variance",
        &lin.estimate()?,
        1.0 / 3.0,
        dt,
        "integral of s^2 over [0, 1]",
    ));

    let t = ctx.get("ou_t");
    let dt = t / steps as f64;
    let [ou] = accumulate(ctx, 4, t, steps, paths, |bm| {
        [(ito_integral_leftpoint(|p| p.time().exp(), bm).last() * (-t).exp()).powi(2)]
    })?;
    let oracle = 0.5 * (1.0 - (-2.0 * t).exp());
    let riemann: f64 = (0..steps)
        .map(|i| (2.0 * i as f64 * dt).exp() * dt)
        .sum::<f64>()
        * (-2.0 * t).exp();
    ctx.push(Row::mc(
        "ito-isometry.ou_variance",
        &ou.estimate()?,
        oracle,
        (riemann - oracle).abs(),
        "e^-t times the integral of e^s dB has variance (1 - e^-2t) / 2",
    ));
    Ok(())
}

pub const STRATONOVICH: Experiment = Experiment {
    name: "stratonovich",
    description: "Midpoint against left-point sums: the correction term and its absence for deterministic integrands",
    params: &[
        count("paths", "10000", "simulated paths"),
        count("steps", "4096", "grid steps on [0, t]"),
        positive("t", "1", "horizon"),
    ],
    run: stratonovich,
};

fn stratonovich(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps, t) = (ctx.count("paths"), ctx.count("steps"), ctx.get("t"));
    let dt = t / steps as f64;
    let [corr, lin, det] = accumulate(ctx, 0, t, steps, paths, |bm| {
        let g = |p: stoklab_core::simcore::Prefix<'_>| p.current().sin();
        let gap =
            stratonovich_integral_midpoint(g, bm).last() - ito_integral_leftpoint(g, bm).last();
        // ½∫cos(B) ds, trapezoidal.
        let v = bm.values();
        let half_int: f64 = 0.5
            * v.windows(2)
                .map(|w| 0.5 * (w[0].cos() + w[1].cos()) * dt)
                .sum::<f64>();
        let gap_b = stratonovich_integral_midpoint(|p| *p.current(), bm).last()
            - ito_integral_leftpoint(|p| *p.current(), bm).last();
        let gap_det = stratonovich_integral_midpoint(|p| p.time(), bm).last()
            - ito_integral_leftpoint(|p| p.time(), bm).last();
        [
            (gap - half_int).powi(2),
            (gap_b - 0.5 * t).powi(2),
            gap_det.powi(2),
        ]
    })?;
    let source = "midpoint minus left-point sum tends to half the integral of g'(B) ds";
    let corr = corr.estimate()?;
    ctx.push(Row::at_most(
        "stratonovich.sine_correction_mse",
        corr.mean,
        Some(corr.stderr),
        4.0 * t * dt / 2.0,
        0.0,
        source,
    ));
    let lin = lin.estimate()?;
    ctx.push(Row::at_most(
        "stratonovich.linear_correction_mse",
        lin.mean,
        Some(lin.stderr),
        4.0 * t * dt / 2.0,
        0.0,
        source,
    ));
    let det = det.estimate()?;
    // For g(s) = s the gap is ½ Σ dt·ΔB, variance t·dt²/4.
    ctx.push(Row::at_most(
        "stratonovich.deterministic_gap_mse",
        det.mean,
        Some(det.stderr),
        t * dt * dt,
        0.0,
        "no correction for deterministic integrands; variance t dt^2 / 4",
    ));
    Ok(())
}
