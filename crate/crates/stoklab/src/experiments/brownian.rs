use std::f64::consts::PI;

use stoklab_core::brownian::{
    cauchy_cdf, discrete_max_bias, first_passage_cdf, max_law_cdf, reflect_at_level,
    sample_bm_dyadic, sample_bm_increments, sample_bm_max, sample_first_passage,
    sample_line_hit_2d, uniform_grid, DISCRETE_MAX_SHIFT,
};
use stoklab_core::numerics::{normal_cdf, normal_quantile};
use stoklab_core::simcore::{ensemble, ks_critical_value_1pct, ks_statistic, MomentAccumulator};
use stoklab_core::{McEstimate, Result};

use super::{proportion, Experiment};
use crate::params::{count, positive};
use crate::report::Row;
use crate::runner::Ctx;

pub const BM_MAXIMUM: Experiment = Experiment {
    name: "bm-maximum",
    description:
        "Running maximum of Brownian motion on a fine grid against the reflection-principle law",
    params: &[
        count("paths", "100000", "simulated paths"),
        count("steps", "10000", "grid steps on [0, t]"),
        positive("level", "1", "level L"),
        positive("t", "1", "horizon"),
    ],
    run: bm_maximum,
};

fn bm_maximum(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps) = (ctx.count("paths"), ctx.count("steps"));
    let (level, t) = (ctx.get("level"), ctx.get("t"));
    ctx.push(Row::exact(
        "bm-maximum.cdf_at_zero",
        max_law_cdf(0.0, t),
        1.0,
        0.0,
        "the running max is at least 0",
    ));
    let runs = ensemble(ctx.exec, ctx.plan(0), paths, |s| sample_bm_max(s, t, steps));
    let oracle = max_law_cdf(level, t);
    let source = "reflection principle: P[max B >= L] = 2 P[B_t >= L]";
    let est = proportion(runs.iter().map(|r| r.0 >= level))?;
    let bias = discrete_max_bias(level, t, t / steps as f64);
    ctx.push(Row::mc(
        "bm-maximum.p_max_above",
        &est,
        oracle,
        bias,
        source,
    ));
    let est = proportion(runs.iter().map(|r| r.1 >= level))?;
    ctx.push(Row::mc(
        "bm-maximum.p_terminal_above",
        &est,
        1.0 - normal_cdf(level / t.sqrt()),
        0.0,
        "B_t is N(0, t)",
    ));
    Ok(())
}

pub const FIRST_PASSAGE: Experiment = Experiment {
    name: "first-passage",
    description: "Exact first-passage times of Brownian motion: law, median, finiteness",
    params: &[
        count("samples", "100000", "sampled passage times"),
        positive("level", "1", "level a"),
    ],
    run: first_passage,
};

fn first_passage(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.count("samples");
    let a = ctx.get("level");
    let taus = ensemble(ctx.exec, ctx.plan(0), n, |s| sample_first_passage(s, a));
    let ks = ks_statistic(&taus, |t| first_passage_cdf(a, t))?;
    ctx.push(Row::at_most(
        "first-passage.ks",
        ks,
        None,
        ks_critical_value_1pct(n),
        0.0,
        "1% Kolmogorov critical value 1.63/sqrt(n) against P[tau <= t] = 2 P[B_t >= a]",
    ));
    let finite = taus.iter().filter(|t| t.is_finite()).count();
    ctx.push(Row::exact(
        "first-passage.finite_fraction",
        finite as f64 / n as f64,
        1.0,
        0.0,
        "every level is reached almost surely",
    ));
    let mut sorted = taus;
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let z = normal_quantile(0.75);
    let m = a * a / (z * z);
    // Sample median: stderr 1/(2 f(m) sqrt(n)) with f the passage-time density.
    let density = a / (2.0 * PI * m.powi(3)).sqrt() * (-a * a / (2.0 * m)).exp();
    let se = 1.0 / (2.0 * density * (n as f64).sqrt());
    ctx.push(Row::mc(
        "first-passage.median",
        &McEstimate::new(median, se, n as u64, 4.0),
        m,
        0.0,
        "median a^2 / z^2 with z the 0.75 normal quantile",
    ));
    Ok(())
}

pub const CAUCHY_HIT: Experiment = Experiment {
    name: "cauchy-hit",
    description: "Where planar Brownian motion from (0, 1) meets the axis: Cauchy law",
    params: &[count("samples", "100000", "sampled hitting points")],
    run: cauchy_hit,
};

fn cauchy_hit(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.count("samples");
    let mut xs = ensemble(ctx.exec, ctx.plan(0), n, sample_line_hit_2d);
    let source = "Cauchy law 1/(pi (1 + x^2))";
    ctx.push(Row::at_most(
        "cauchy-hit.ks",
        ks_statistic(&xs, cauchy_cdf)?,
        None,
        ks_critical_value_1pct(n),
        0.0,
        source,
    ));
    xs.sort_by(f64::total_cmp);
    // Density at the median is 1/π.
    let se = PI / (2.0 * (n as f64).sqrt());
    ctx.push(Row::mc(
        "cauchy-hit.median",
        &McEstimate::new(xs[n / 2], se, n as u64, 4.0),
        0.0,
        0.0,
        source,
    ));
    Ok(())
}

pub const BM_CONSTRUCTIONS: Experiment = Experiment {
    name: "bm-constructions",
    description: "Increment and midpoint constructions of Brownian motion; scaling and reflection",
    params: &[
        count("paths", "100000", "paths for the moment checks"),
        count("steps", "1000", "grid steps on [0, 1]"),
        count("depth", "10", "depth of the midpoint construction"),
        count("trees", "100", "trees for the increment law check"),
    ],
    run: bm_constructions,
};

const REFLECT_LEVEL: f64 = 0.5;

fn bm_constructions(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps) = (ctx.count("paths"), ctx.count("steps"));
    let grid = uniform_grid(1.0, steps)?;
    let i3 = (0.3 * steps as f64).round() as usize;
    let i7 = (0.7 * steps as f64).round() as usize;
    let (s, t) = (grid[i3], grid[i7]);
    let q = (0.25 * steps as f64).round() as usize;
    let rows = ensemble(ctx.exec, ctx.plan(0), paths, |st| -> Result<[f64; 4]> {
        let bm = sample_bm_increments(st, &grid)?;
        let v = bm.values();
        let reflected = reflect_at_level(&bm, REFLECT_LEVEL);
        Ok([
            v[steps] * v[steps],
            v[i3] * v[i7],
            4.0 * v[q] * v[q],
            reflected.last().powi(2),
        ])
    });
    let mut accs = [(); 4].map(|_| MomentAccumulator::default());
    for r in rows {
        for (acc, x) in accs.iter_mut().zip(r?) {
            acc.push(x);
        }
    }
    let t_q = grid[q];
    ctx.push(Row::mc(
        "bm-constructions.var_b1",
        &accs[0].estimate()?,
        1.0,
        0.0,
        "Var B_1 = 1",
    ));
    ctx.push(Row::mc(
        "bm-constructions.covariance",
        &accs[1].estimate()?,
        s.min(t),
        0.0,
        "E[B_s B_t] = min(s, t)",
    ));
    ctx.push(Row::mc(
        "bm-constructions.scaling",
        &accs[2].estimate()?,
        4.0 * t_q,
        0.0,
        "2 B_{t/4} has the variance of B_t",
    ));
    // On the grid the walk overshoots the level at its first crossing, so
    // E[B_1 - L; crossed] is the mean overshoot instead of 0.
    let overshoot = 4.0
        * REFLECT_LEVEL
        * DISCRETE_MAX_SHIFT
        * (1.0 / steps as f64).sqrt()
        * max_law_cdf(REFLECT_LEVEL, 1.0);
    ctx.push(Row::mc(
        "bm-constructions.reflected_var_b1",
        &accs[3].estimate()?,
        1.0,
        overshoot,
        "the path reflected after its first passage is again Brownian",
    ));

    let depth = ctx.count("depth") as u32;
    let mut stream = ctx.plan(1).stream(0);
    let coarse = sample_bm_dyadic(&mut stream, depth - 1)?;
    let mut fine = coarse.clone();
    fine.refine(&mut stream)?;
    let moved = coarse
        .values()
        .iter()
        .enumerate()
        .map(|(k, &x)| (fine.values()[2 * k] - x).abs())
        .fold(0.0, f64::max);
    ctx.push(Row::exact(
        "bm-constructions.refinement_consistency",
        moved,
        0.0,
        0.0,
        "adding midpoints leaves the coarser nodes unchanged",
    ));
    let trees = ctx.count("trees");
    let scale = 2f64.powf(depth as f64 / 2.0);
    let incs: Vec<f64> = ensemble(ctx.exec, ctx.plan(2), trees, |st| {
        sample_bm_dyadic(st, depth).map(|tree| {
            tree.values()
                .windows(2)
                .map(|w| (w[1] - w[0]) * scale)
                .collect::<Vec<_>>()
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .concat();
    ctx.push(Row::at_most(
        "bm-constructions.dyadic_increment_ks",
        ks_statistic(&incs, normal_cdf)?,
        None,
        ks_critical_value_1pct(incs.len()),
        0.0,
        "dyadic increments are N(0, 2^-depth); 1% Kolmogorov critical value",
    ));
    Ok(())
}
