use stoklab_core::diffusion::ehrenfest_rescaled_moments;
use stoklab_core::discrete::{
    gw_extinction_probability, polya_exact_law, sample_poisson, simulate_ehrenfest,
    simulate_extinction, simulate_galton_watson, simulate_polya, simulate_random_sum, FiniteChain,
    OffspringDistribution, TreeFate,
};
use stoklab_core::simcore::{ensemble, ks_critical_value_1pct, ks_statistic, MomentAccumulator};
use stoklab_core::Result;

use super::{frequency, invalid, Experiment};
use crate::params::{count, positive, real};
use crate::report::Row;
use crate::runner::Ctx;

pub const POLYA_LIMIT: Experiment = Experiment {
    name: "polya-limit",
    description: "Pólya urn: exact law by dynamic programming, simulated histogram, martingale drift, uniform limit",
    params: &[
        count("r0", "1", "initial red balls for the exact law"),
        count("v0", "1", "initial green balls for the exact law"),
        count("c", "1", "balls added per draw for the exact law"),
        count("exact_steps", "3", "draws for the exact law"),
        count("hist_r0", "2", "initial red balls for the histogram"),
        count("hist_v0", "1", "initial green balls for the histogram"),
        count("hist_c", "2", "balls added per draw for the histogram"),
        count("hist_steps", "8", "draws before the histogram is taken"),
        count("hist_paths", "1000000", "simulated urns for the histogram"),
        count("limit_steps", "1000", "draws for the limit check (unit urn)"),
        count("limit_paths", "10000", "simulated urns for the limit check"),
    ],
    run: polya_limit,
};

/// P[k red draws in n] = C(n,k) Π_{i<k}(r+ic) Π_{j<n−k}(v+jc) / Π_{m<n}(r+v+mc).
fn beta_binomial(r: u64, v: u64, c: u64, n: usize, k: usize) -> f64 {
    let (r, v, c) = (r as f64, v as f64, c as f64);
    let mut p = 1.0;
    for i in 0..k {
        p *= (r + i as f64 * c) * (n - i) as f64 / (i + 1) as f64;
    }
    for j in 0..n - k {
        p *= v + j as f64 * c;
    }
    for m in 0..n {
        p /= r + v + m as f64 * c;
    }
    p
}

fn polya_limit(ctx: &mut Ctx) -> Result<()> {
    let (r, v, c) = (
        ctx.count("r0") as u64,
        ctx.count("v0") as u64,
        ctx.count("c") as u64,
    );
    let n = ctx.count("exact_steps");
    let law = polya_exact_law(r, v, c, n)?;
    for (k, &(x, p)) in law.iter().enumerate() {
        let total = (r + v + n as u64 * c) as f64;
        ctx.push(Row::exact(
            format!("polya-limit.exact.n{n}.k{k}.value"),
            x,
            (r + k as u64 * c) as f64 / total,
            1e-15,
            "red count after k red draws over the total ball count",
        ));
        ctx.push(Row::exact(
            format!("polya-limit.exact.n{n}.k{k}.prob"),
            p,
            beta_binomial(r, v, c, n, k),
            1e-15,
            "beta-binomial product formula",
        ));
    }

    let (hr, hv, hc) = (
        ctx.count("hist_r0") as u64,
        ctx.count("hist_v0") as u64,
        ctx.count("hist_c") as u64,
    );
    let hn = ctx.count("hist_steps");
    let paths = ctx.count("hist_paths");
    let law = polya_exact_law(hr, hv, hc, hn)?;
    let runs = ensemble(ctx.exec, ctx.plan(0), paths, |s| -> Result<(f64, f64)> {
        let p = simulate_polya(s, hr, hv, hc, hn)?;
        let xs = p.values();
        Ok((xs[hn], xs[hn] - xs[hn - 1]))
    });
    let mut counts = vec![0usize; law.len()];
    let mut drift = MomentAccumulator::default();
    for run in runs {
        let (x, dx) = run?;
        let k = law
            .iter()
            .position(|a| (a.0 - x).abs() < 1e-12)
            .ok_or_else(|| invalid("urn left its lattice"))?;
        counts[k] += 1;
        drift.push(dx);
    }
    for (k, (&(_, p), &hits)) in law.iter().zip(&counts).enumerate() {
        ctx.push(Row::mc(
            format!("polya-limit.hist.n{hn}.k{k}"),
            &frequency(hits, paths, p),
            p,
            0.0,
            "exact law by dynamic programming over red-draw counts",
        ));
    }
    ctx.push(Row::mc(
        "polya-limit.martingale_increment",
        &drift.estimate()?,
        0.0,
        0.0,
        "the red proportion is a martingale, so its last increment has mean zero",
    ));

    // Unit urn: the proportion after n draws is uniform on {1/(n+2), …, (n+1)/(n+2)},
    // within 1/(n+2) of U(0, 1) in Kolmogorov distance.
    let ln = ctx.count("limit_steps");
    let lp = ctx.count("limit_paths");
    let xs: Vec<f64> = ensemble(ctx.exec, ctx.plan(1), lp, |s| {
        simulate_polya(s, 1, 1, 1, ln).map(|p| *p.last())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let ks = ks_statistic(&xs, |x| x.clamp(0.0, 1.0))?;
    let allowance = 1.0 / (ln + 2) as f64;
    ctx.push(Row::at_most(
        "polya-limit.limit_ks_uniform",
        ks,
        None,
        ks_critical_value_1pct(lp),
        allowance,
        "1% Kolmogorov critical value 1.63/sqrt(n) against the uniform limit law",
    ));
    Ok(())
}

pub const GW_EXTINCTION: Experiment = Experiment {
    name: "gw-extinction",
    description: "Galton–Watson: extinction probability as a generating-function fixed point against simulated trees",
    params: &[
        real("p0", "0.125", "probability of no offspring"),
        real("p1", "0.375", "probability of one child"),
        real("p2", "0.375", "probability of two children"),
        real("p3", "0.125", "probability of three children"),
        count("trees", "100000", "simulated trees"),
        count("max_gen", "1000", "generation budget per tree"),
        count("survival_threshold", "64", "population treated as surviving"),
        count("mean_paths", "20000", "trees for the normalized-size check"),
        count("mean_gens", "10", "generations for the normalized-size check"),
    ],
    run: gw_extinction,
};

fn gw_extinction(ctx: &mut Ctx) -> Result<()> {
    let probs = vec![ctx.get("p0"), ctx.get("p1"), ctx.get("p2"), ctx.get("p3")];
    let (p0, p2, p3) = (probs[0], probs[2], probs[3]);
    let offspring = OffspringDistribution::new(probs)?;
    if p3 <= 0.0 || offspring.mean() <= 1.0 {
        return Err(invalid(
            "the closed-form root needs p3 > 0 and mean offspring above 1",
        ));
    }
    // φ(s) − s = (s − 1)(p3 s² + (p2 + p3) s − p0) when p0 + p1 + p2 + p3 = 1.
    let closed = (-(p2 + p3) + ((p2 + p3).powi(2) + 4.0 * p3 * p0).sqrt()) / (2.0 * p3);
    let source = "smaller root of p3 s^2 + (p2+p3) s - p0, sqrt(5)-2 for the symmetric cubic law";
    let rho = gw_extinction_probability(&offspring);
    ctx.push(Row::exact(
        "gw-extinction.rho_fixed_point",
        rho,
        closed,
        1e-10,
        source,
    ));
    ctx.push(Row::exact(
        "gw-extinction.pgf_residual",
        offspring.pgf(rho) - rho,
        0.0,
        1e-12,
        "extinction probability is a fixed point of the generating function",
    ));

    let trees = ctx.count("trees");
    let max_gen = ctx.count("max_gen");
    let threshold = ctx.count("survival_threshold") as u64;
    let fates: Vec<TreeFate> = ensemble(ctx.exec, ctx.plan(0), trees, |s| {
        simulate_extinction(s, &offspring, 1, max_gen, threshold)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let undecided = fates
        .iter()
        .filter(|f| matches!(f, TreeFate::Undecided))
        .count();
    let est = super::proportion(fates.iter().map(|f| matches!(f, TreeFate::Extinct { .. })))?;
    // A tree that reached M individuals still dies out with probability ρ^M.
    let bias = closed.powi(threshold as i32);
    ctx.push(Row::mc(
        "gw-extinction.mc_extinction",
        &est,
        closed,
        bias,
        source,
    ));
    ctx.push(Row::exact(
        "gw-extinction.undecided_trees",
        undecided as f64,
        0.0,
        0.0,
        "every tree is classified within the generation budget",
    ));

    let mu = offspring.mean();
    let gens = ctx.count("mean_gens");
    let mut acc = MomentAccumulator::default();
    for p in ensemble(ctx.exec, ctx.plan(1), ctx.count("mean_paths"), |s| {
        simulate_galton_watson(s, &offspring, 1, gens)
    }) {
        acc.push(*p?.last() as f64 / mu.powi(gens as i32));
    }
    ctx.push(Row::mc(
        "gw-extinction.normalized_size_mean",
        &acc.estimate()?,
        1.0,
        0.0,
        "Z_n / mu^n is a martingale started at 1",
    ));
    Ok(())
}

pub const EHRENFEST: Experiment = Experiment {
    name: "ehrenfest",
    description: "Ehrenfest urn: binomial equilibrium, relaxation to one half, diffusion limit of the rescaled chain",
    params: &[
        count("n_small", "20", "balls for the equilibrium histogram"),
        count("paths", "20000", "independent chains for the histogram"),
        count("burn_in", "400", "steps before a chain is sampled"),
        count("n_mid", "100", "balls for the long-run average"),
        count("steps", "100000", "steps of the long-run chain"),
        count("n_large", "400", "balls for the diffusion limit"),
    ],
    run: ehrenfest,
};

fn ehrenfest(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.count("n_small");
    let paths = ctx.count("paths");
    let burn = ctx.count("burn_in");
    let mut counts = vec![0usize; n + 1];
    for p in ensemble(ctx.exec, ctx.plan(0), paths, |s| {
        simulate_ehrenfest(s, n, burn, 0)
    }) {
        let p = p?;
        // The chain has period 2. Of the last two states exactly one has the
        // parity of k, and it is distributed as 2·π(k) on that parity class.
        let xs = p.values();
        counts[xs[xs.len() - 1]] += 1;
        counts[xs[xs.len() - 2]] += 1;
    }
    let draws = 2 * paths;
    let mut binom = 0.5f64.powi(n as i32);
    for (k, &hits) in counts.iter().enumerate() {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        ctx.push(Row::mc(
            format!("ehrenfest.equilibrium.k{k}"),
            &frequency(hits, draws, binom),
            binom,
            0.0,
            "binomial(N, 1/2) equilibrium law",
        ));
    }

    let n_mid = ctx.count("n_mid");
    let steps = ctx.count("steps");
    let path = simulate_ehrenfest(&mut ctx.plan(1).stream(0), n_mid, steps, 0)?;
    let tail = &path.values()[steps / 10..];
    let avg = tail.iter().map(|&k| k as f64 / n_mid as f64).sum::<f64>() / tail.len() as f64;
    ctx.push(Row::exact(
        "ehrenfest.long_run_fraction",
        avg,
        0.5,
        0.01,
        "equilibrium mean N/2; allowance from the stationary variance 1/(4N)",
    ));

    let chain = FiniteChain::ehrenfest(ctx.count("n_large"))?;
    let (mut drift_err, mut var_err) = (0.0f64, 0.0f64);
    for (x, drift, var) in ehrenfest_rescaled_moments(&chain) {
        if x.abs() <= 1.0 {
            if x != 0.0 {
                drift_err = drift_err.max((drift + 2.0 * x).abs() / (2.0 * x).abs());
            }
            var_err = var_err.max((var - 1.0).abs());
        }
    }
    let source = "rescaled chain approaches dX = -2X dt + dB";
    ctx.push(Row::at_most(
        "ehrenfest.limit_drift_rel_error",
        drift_err,
        None,
        0.05,
        0.0,
        source,
    ));
    ctx.push(Row::at_most(
        "ehrenfest.limit_variance_error",
        var_err,
        None,
        0.05,
        0.0,
        source,
    ));
    Ok(())
}

pub const RANDOM_SUM: Experiment = Experiment {
    name: "random-sum",
    description: "Variance of sums with a random number of terms",
    params: &[
        count("samples", "400000", "simulated sums per model"),
        positive(
            "poisson_mean",
            "3",
            "mean number of terms in the compound model",
        ),
        real("xi_mean", "1", "mean of a term in the compound model"),
        positive("xi_var", "2", "variance of a term in the compound model"),
    ],
    run: random_sum,
};

fn random_sum(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.count("samples") as u64;
    let e = simulate_random_sum(
        &mut ctx.plan(0).stream(0),
        |s| s.below(6) + 1,
        |s| f64::from(u8::from(s.bernoulli(0.5))),
        n,
    )?;
    ctx.push(Row::mc(
        "random-sum.die_then_coins_variance",
        &e,
        77.0 / 48.0,
        0.0,
        "Var X = Var(xi) E[N] + E[xi]^2 Var(N) with N a die roll and xi a fair coin: 77/48",
    ));
    let (m, mu, var) = (
        ctx.get("poisson_mean"),
        ctx.get("xi_mean"),
        ctx.get("xi_var"),
    );
    let sd = var.sqrt();
    let e = simulate_random_sum(
        &mut ctx.plan(1).stream(0),
        |s| sample_poisson(s, m),
        |s| mu + sd * s.gaussian(),
        n,
    )?;
    ctx.push(Row::mc(
        "random-sum.compound_poisson_variance",
        &e,
        (var + mu * mu) * m,
        0.0,
        "compound Poisson: mean count times the second moment of a term",
    ));
    Ok(())
}
