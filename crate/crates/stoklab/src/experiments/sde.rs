use std::sync::Arc;

use stoklab_core::brownian::{sample_bm_increments, uniform_grid};
use stoklab_core::numerics::ols_slope;
use stoklab_core::sde::{
    euler_maruyama, exact_solution, picard_iterate, strong_error_table, sup_distance,
    DiffusionSpec, ExactModel,
};
use stoklab_core::simcore::{combined_stderr, ensemble, MomentAccumulator};
use stoklab_core::Result;

use super::{proportion, Experiment};
use crate::params::{count, positive, real};
use crate::report::Row;
use crate::runner::Ctx;

pub const EULER_ORDER: Experiment = Experiment {
    name: "euler-order",
    description: "Strong error of Euler–Maruyama for geometric Brownian motion on shared noise",
    params: &[
        count("paths", "1000", "driving paths shared by all grids"),
        count("coarsest", "6", "coarsest grid has 2^coarsest steps"),
        count("finest", "12", "finest grid has 2^finest steps"),
        real("r", "1", "drift rate"),
        positive("sigma", "1", "volatility"),
        positive("t", "1", "horizon"),
    ],
    run: euler_order,
};

fn euler_order(ctx: &mut Ctx) -> Result<()> {
    let (lo, hi) = (ctx.count("coarsest"), ctx.count("finest"));
    if lo >= hi {
        return Err(super::invalid("need coarsest < finest"));
    }
    let steps: Vec<usize> = (lo..=hi).map(|k| 1usize << k).collect();
    let (r, sigma, t) = (ctx.get("r"), ctx.get("sigma"), ctx.get("t"));
    let model = ExactModel::Gbm { r, sigma };
    let table = strong_error_table(
        &model.spec(),
        &model,
        1.0,
        t,
        &steps,
        ctx.count("paths"),
        ctx.exec,
        ctx.plan(0),
    )?;
    let xs: Vec<f64> = table.iter().map(|row| row.dt.ln()).collect();
    let ys: Vec<f64> = table.iter().map(|row| row.mean_abs_error.ln()).collect();
    ctx.push(Row::exact(
        "euler-order.gbm_log_log_slope",
        ols_slope(&xs, &ys)?,
        0.5,
        0.15,
        "strong order one half for multiplicative noise",
    ));
    let zero = ExactModel::DriftedBm {
        mu: 0.0,
        sigma: 0.0,
    };
    let flat = strong_error_table(
        &zero.spec(),
        &zero,
        1.0,
        t,
        &steps[..2],
        10,
        ctx.exec,
        ctx.plan(1),
    )?;
    let worst = flat
        .iter()
        .map(|row| row.mean_abs_error)
        .fold(0.0, f64::max);
    ctx.push(Row::exact(
        "euler-order.constant_path_error",
        worst,
        0.0,
        0.0,
        "f = g = 0 leaves the start point fixed",
    ));
    Ok(())
}

pub const PICARD: Experiment = Experiment {
    name: "picard",
    description: "Picard iteration on a fixed grid: contraction, one-step convergence for additive noise, comparison with Euler",
    params: &[
        count("paths", "1000", "driving paths"),
        count("steps", "256", "grid steps on [0, 1]"),
        count("iterations", "6", "Picard iterations"),
        real("r", "0.5", "GBM drift rate"),
        positive("sigma", "0.5", "GBM volatility"),
    ],
    run: picard,
};

fn picard(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps, k) = (
        ctx.count("paths"),
        ctx.count("steps"),
        ctx.count("iterations"),
    );
    let (r, sigma) = (ctx.get("r"), ctx.get("sigma"));
    let grid = uniform_grid(1.0, steps)?;
    let gbm = ExactModel::Gbm { r, sigma };
    let spec = gbm.spec();
    let additive = DiffusionSpec::drifted_bm(1.0, 1.0);
    let runs = ensemble(
        ctx.exec,
        ctx.plan(0),
        paths,
        |s| -> Result<(bool, f64, Vec<f64>, f64, Vec<f64>)> {
            let bm = sample_bm_increments(s, &grid)?;
            let it = picard_iterate(&spec, 1.0, &bm, k)?;
            let d: Vec<f64> = it.windows(2).map(|w| sup_distance(&w[0], &w[1])).collect();
            let monotone = d.windows(2).all(|w| w[1] <= w[0]);
            let exact = *exact_solution(&gbm, &bm, 1.0)?.last();
            let euler = euler_maruyama(&spec, 1.0, &bm)?;
            let euler_err = (euler.last() - exact).abs();
            let iter_err: Vec<f64> = it.iter().map(|p| (p.last() - exact).abs()).collect();
            let gaps: Vec<f64> = it.iter().map(|p| sup_distance(p, &euler)).collect();
            let add = picard_iterate(&additive, 0.0, &bm, 2)?;
            Ok((
                monotone,
                euler_err,
                iter_err,
                sup_distance(&add[1], &add[2]),
                gaps,
            ))
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let frac = proportion(runs.iter().map(|r| r.0))?;
    ctx.push(Row::at_least(
        "picard.monotone_contraction_fraction",
        frac.mean,
        Some(frac.stderr),
        0.95,
        0.0,
        "successive sup-distances decrease on at least 95% of paths",
    ));
    let additive_gap = runs.iter().map(|r| r.3).fold(0.0, f64::max);
    ctx.push(Row::exact(
        "picard.additive_one_step",
        additive_gap,
        0.0,
        1e-12,
        "coefficients free of X: the first iterate is already the fixed point",
    ));
    let mean_gap = |j: usize| runs.iter().map(|r| r.4[j]).sum::<f64>() / runs.len() as f64;
    ctx.push(Row::at_most(
        "picard.final_iterate_euler_gap",
        mean_gap(k),
        None,
        mean_gap(k - 1),
        0.0,
        "iterates close in on the Euler path, the fixed point of the same left-point recursion",
    ));
    let mut euler = MomentAccumulator::default();
    runs.iter().for_each(|r| euler.push(r.1));
    let euler = euler.estimate()?;
    for j in 4..=k {
        let mut acc = MomentAccumulator::default();
        runs.iter().for_each(|r| acc.push(r.2[j]));
        let est = acc.estimate()?;
        let se = combined_stderr(&est, &euler);
        ctx.push(Row::at_most(
            format!("picard.iterate{j}_terminal_error"),
            est.mean,
            Some(se),
            euler.mean,
            4.0 * se,
            "terminal error of the Picard iterate against the Euler error on the same grid",
        ));
    }
    Ok(())
}

pub const SDE_EXACT: Experiment = Experiment {
    name: "sde-exact",
    description:
        "Closed-form SDE solutions against their moments, and Euler paths against known solutions",
    params: &[
        count("paths", "100000", "paths for the moment checks"),
        count("steps", "64", "grid steps for the moment checks"),
        positive("gamma", "1", "volatility of the exponential martingale"),
        count(
            "ou_steps",
            "1000",
            "Euler steps on [0, 1] for the Ornstein-Uhlenbeck variance",
        ),
        count("sine_paths", "2000", "paths for the sine identity"),
        count(
            "sine_steps",
            "10000",
            "Euler steps on [0, 1] for the sine identity",
        ),
    ],
    run: sde_exact,
};

fn sde_exact(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps) = (ctx.count("paths"), ctx.count("steps"));
    let gamma = ctx.get("gamma");
    let grid = uniform_grid(1.0, steps)?;
    let bridge_grid: Vec<f64> = grid[..steps].to_vec();
    let half = steps / 2;
    let mart = ExactModel::LinearMultiplicative { a: 0.0, gamma };
    let bridge = ExactModel::BrownianBridge { a: 0.0, b: 0.0 };
    let shrink = ExactModel::LinearAdditive {
        alpha: Arc::new(|t: f64| -(1.0 + t).ln()),
        sigma: Arc::new(|t: f64| 1.0 / (1.0 + t)),
    };
    let runs = ensemble(ctx.exec, ctx.plan(0), paths, |s| -> Result<[f64; 4]> {
        let bm = sample_bm_increments(s, &grid)?;
        let m = *exact_solution(&mart, &bm, 1.0)?.last();
        let y = exact_solution(&shrink, &bm, 0.0)?;
        let gap = y
            .values()
            .iter()
            .zip(bm.values())
            .zip(bm.times())
            .map(|((y, b), t)| (y - b / (1.0 + t)).abs())
            .fold(0.0, f64::max);
        let (bt, bv) = bm.into_parts();
        let short = stoklab_core::Path::new(bt[..steps].to_vec(), bv[..steps].to_vec())?;
        let x = exact_solution(&bridge, &short, 0.0)?;
        Ok([m, x.values()[half].powi(2), x.last().powi(2), gap])
    });
    let mut accs = [(); 3].map(|_| MomentAccumulator::default());
    let mut gap = 0.0f64;
    for r in runs {
        let r = r?;
        for (acc, x) in accs.iter_mut().zip(r) {
            acc.push(x);
        }
        gap = gap.max(r[3]);
    }
    ctx.push(Row::mc(
        "sde-exact.exp_martingale_mean",
        &accs[0].estimate()?,
        1.0,
        0.0,
        "exp(gamma B_t - gamma^2 t / 2) has mean 1",
    ));
    let t_half = bridge_grid[half];
    // The bridge variance uses a left-point sum of 1/(1−s)²; the exact grid
    // value is (1−t)² Σ dt/(1−s_i)².
    let discrete = |i: usize| {
        let t = bridge_grid[i];
        (1.0 - t).powi(2)
            * (0..i)
                .map(|j| (bridge_grid[j + 1] - bridge_grid[j]) / (1.0 - bridge_grid[j]).powi(2))
                .sum::<f64>()
    };
    let end = steps - 1;
    let t_end = bridge_grid[end];
    let v_half = t_half * (1.0 - t_half);
    ctx.push(Row::mc(
        "sde-exact.bridge_variance_mid",
        &accs[1].estimate()?,
        v_half,
        (discrete(half) - v_half).abs(),
        "bridge variance t(1 - t)",
    ));
    let v_end = t_end * (1.0 - t_end);
    ctx.push(Row::mc(
        "sde-exact.bridge_endpoint_mean_square",
        &accs[2].estimate()?,
        v_end,
        (discrete(end) - v_end).abs(),
        "mean-square distance to the endpoint t(1 - t) vanishes as t -> 1",
    ));
    ctx.push(Row::exact(
        "sde-exact.shrinking_noise_identity",
        gap,
        0.0,
        1e-12,
        "solution B_t / (1 + t) on grid points",
    ));

    // Euler OU variance against its closed form, with the exact grid bias.
    let n = ctx.count("ou_steps");
    let dt = 1.0 / n as f64;
    let ou = DiffusionSpec::ou(1.0, 1.0);
    let ou_grid = uniform_grid(1.0, n)?;
    let mut acc = MomentAccumulator::default();
    for x in ensemble(ctx.exec, ctx.plan(1), paths / 10, |s| {
        stoklab_core::sde::euler_maruyama_sampled(&ou, 0.0, &ou_grid, s).map(|p| *p.last())
    }) {
        acc.push(x?.powi(2));
    }
    let oracle = 0.5 * (1.0 - (-2.0f64).exp());
    let q = (1.0 - dt) * (1.0 - dt);
    let euler_var = dt * (1.0 - q.powi(n as i32)) / (1.0 - q);
    ctx.push(Row::mc(
        "sde-exact.ou_euler_variance",
        &acc.estimate()?,
        oracle,
        (euler_var - oracle).abs(),
        "OU variance sigma^2 (1 - e^-2t) / 2 at t = 1",
    ));

    // dX = −X/2 dt + √(1 − X²) dB from 0 follows sin(B) until |B| hits π/2.
    let sine_paths = ctx.count("sine_paths");
    let sine_errors = |ctx: &Ctx, k: u64, sn: usize| -> Result<Vec<f64>> {
        let sgrid = uniform_grid(1.0, sn)?;
        let sine = DiffusionSpec::sine();
        ensemble(ctx.exec, ctx.plan(k), sine_paths, |s| -> Result<f64> {
            let bm = sample_bm_increments(s, &sgrid)?;
            let x = euler_maruyama(&sine, 0.0, &bm)?;
            let stop = bm
                .values()
                .iter()
                .position(|b| b.abs() >= std::f64::consts::FRAC_PI_2)
                .unwrap_or(sn + 1);
            Ok(x.values()[..stop]
                .iter()
                .zip(bm.values())
                .map(|(x, b)| (x - b.sin()).abs())
                .fold(0.0, f64::max))
        })
        .into_iter()
        .collect()
    };
    let sn = ctx.count("sine_steps");
    let errs = sine_errors(ctx, 2, sn)?;
    let tol = SINE_ERROR_FACTOR * (1.0 / sn as f64).sqrt();
    let within = proportion(errs.iter().map(|&e| e <= tol))?;
    ctx.push(Row::at_least(
        "sde-exact.sine_tracking_fraction",
        within.mean,
        Some(within.stderr),
        0.99,
        0.0,
        "Euler path stays within 2.5 sqrt(dt) of sin(B) on 99% of paths",
    ));
    // Rate of the 99% sup-error between a 100x coarser grid and this one.
    let coarse = sine_errors(ctx, 3, (sn / 100).max(1))?;
    let q99 = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[(0.99 * v.len() as f64) as usize - 1]
    };
    let order = (q99(coarse) / q99(errs)).ln() / 100f64.ln();
    ctx.push(Row::exact(
        "sde-exact.sine_error_order",
        order,
        0.5,
        0.15,
        "Euler sup-error shrinks like dt^(1/2) since g g' = -X is not zero",
    ));
    Ok(())
}

/// Sup-error allowance for the sine identity, in units of √dt.
const SINE_ERROR_FACTOR: f64 = 2.5;
