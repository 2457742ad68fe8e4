use stoklab_core::discrete::{simple_walk, simulate_ehrenfest, FiniteChain};
use stoklab_core::martingale::{
    doob_decomposition_chain, doubling_strategy_laws, doubling_strategy_stakes,
    maximal_inequality_audit, predictable_transform, stopping_time, upcrossings, MaximalAudit,
    PathSummary, Region, StoppingRule,
};
use stoklab_core::simcore::{combined_stderr, ensemble, MomentAccumulator};
use stoklab_core::{Path, Result};

use super::{frequency, invalid, Experiment};
use crate::params::{count, positive};
use crate::report::Row;
use crate::runner::Ctx;

pub const DOUBLING_STRATEGY: Experiment = Experiment {
    name: "doubling-strategy",
    description:
        "Doubling strategy on a fair coin: exact wealth law and a simulated fair-game check",
    params: &[
        count("max_steps", "20", "largest horizon enumerated exactly"),
        count("mc_steps", "10", "horizon of the simulated games"),
        count("paths", "100000", "simulated games"),
    ],
    run: doubling_strategy,
};

fn doubling_strategy(ctx: &mut Ctx) -> Result<()> {
    let max_n = ctx.count("max_steps");
    let laws = doubling_strategy_laws(max_n)?;
    for (n, law) in laws.iter().enumerate().skip(1) {
        let ruin = 1.0 - 2f64.powi(n as i32);
        let prob = |v: f64| law.iter().find(|a| a.0 == v).map_or(0.0, |a| a.1);
        ctx.push(Row::exact(
            format!("doubling-strategy.p_ruin.n{n}"),
            prob(ruin),
            0.5f64.powi(n as i32),
            0.0,
            "all n tosses lost: wealth 1-2^n with probability 2^-n",
        ));
        ctx.push(Row::exact(
            format!("doubling-strategy.p_win.n{n}"),
            prob(1.0),
            1.0 - 0.5f64.powi(n as i32),
            0.0,
            "some toss won: wealth 1 with probability 1-2^-n",
        ));
        ctx.push(Row::exact(
            format!("doubling-strategy.support.n{n}"),
            law.len() as f64,
            2.0,
            0.0,
            "wealth takes only the values 1 and 1-2^n",
        ));
    }

    let n = ctx.count("mc_steps");
    let paths = ctx.count("paths");
    let wealth: Vec<f64> = ensemble(ctx.exec, ctx.plan(0), paths, |s| {
        let coin = simple_walk(s, n);
        predictable_transform(&doubling_strategy_stakes(&coin), &coin).map(|w| *w.last())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut acc = MomentAccumulator::default();
    wealth.iter().for_each(|&w| acc.push(w));
    ctx.push(Row::mc(
        "doubling-strategy.mc_mean_wealth",
        &acc.estimate()?,
        0.0,
        0.0,
        "a bounded-horizon transform of a martingale has mean zero",
    ));
    let p = 0.5f64.powi(n as i32);
    let ruined = wealth.iter().filter(|&&w| w < 0.0).count();
    ctx.push(Row::mc(
        "doubling-strategy.mc_p_ruin",
        &frequency(ruined, paths, p),
        p,
        0.0,
        "all n tosses lost with probability 2^-n",
    ));
    Ok(())
}

pub const DOOB_AUDIT: Experiment = Experiment {
    name: "doob-audit",
    description: "Maximal, Kolmogorov and upcrossing inequalities on walks; exact Doob decomposition of the Ehrenfest chain",
    params: &[
        count("paths", "100000", "simple random walks"),
        count("steps", "1000", "steps per walk"),
        positive("lambda", "60", "level for the maximal inequalities"),
        positive("band", "10", "upcrossing band [-band, band]; also the stopping level"),
        count("ehrenfest_n", "10", "balls in the chain for the exact decomposition"),
        count("ehrenfest_steps", "10000", "steps of the decomposed chain path"),
    ],
    run: doob_audit,
};

struct WalkStats {
    abs: PathSummary,
    sq: PathSummary,
    upcrossings: usize,
    terminal: f64,
    stopped: f64,
}

fn audit_row(ctx: &mut Ctx, id: &str, audit: &MaximalAudit, source: &str) {
    let se = combined_stderr(&audit.lhs, &audit.rhs);
    ctx.push(Row::at_most(
        format!("doob-audit.{id}"),
        audit.lhs.mean,
        Some(se),
        audit.rhs.mean,
        4.0 * se,
        source,
    ));
}

fn doob_audit(ctx: &mut Ctx) -> Result<()> {
    let (paths, steps) = (ctx.count("paths"), ctx.count("steps"));
    let lambda = ctx.get("lambda");
    let band = ctx.get("band");
    let stop = StoppingRule::FirstEntry(Region::Outside {
        lo: -band,
        hi: band,
    })
    .min(StoppingRule::FixedTime(steps));
    let stats: Vec<WalkStats> = ensemble(ctx.exec, ctx.plan(0), paths, |s| -> Result<WalkStats> {
        let walk = simple_walk(s, steps);
        let xs = walk.values();
        let abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let tau =
            stopping_time(&stop, &walk).ok_or_else(|| invalid("bounded rule did not stop"))?;
        Ok(WalkStats {
            abs: PathSummary::of(&abs),
            sq: PathSummary::of(&sq),
            upcrossings: upcrossings(&walk, -band, band)?,
            terminal: *walk.last(),
            stopped: xs[tau],
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let abs: Vec<PathSummary> = stats.iter().map(|w| w.abs).collect();
    let sq: Vec<PathSummary> = stats.iter().map(|w| w.sq).collect();
    let doob = maximal_inequality_audit(&abs, lambda, None)?;
    audit_row(
        ctx,
        "doob_maximal",
        &doob,
        "P[max |X| >= lambda] <= E[|X_n|] / lambda",
    );
    let kolmogorov = maximal_inequality_audit(&sq, lambda * lambda, None)?;
    audit_row(
        ctx,
        "kolmogorov",
        &kolmogorov,
        "P[max |X| >= lambda] <= E[X_n^2] / lambda^2",
    );
    let l2 = maximal_inequality_audit(&abs, lambda, Some(2.0))?;
    audit_row(ctx, "l2_maximal", &l2, "E[max |X|^2] <= 4 E[|X_n|^2]");

    // (b − a) E[U_n] ≤ E[(X_n − a)⁺] − E[(X_0 − a)⁺] with X_0 = 0, a = −band.
    let mut lhs = MomentAccumulator::default();
    let mut rhs = MomentAccumulator::default();
    for w in &stats {
        lhs.push(2.0 * band * w.upcrossings as f64);
        rhs.push((w.terminal + band).max(0.0) - band);
    }
    let (lhs, rhs) = (lhs.estimate()?, rhs.estimate()?);
    let se = combined_stderr(&lhs, &rhs);
    ctx.push(Row::at_most(
        "doob-audit.upcrossing",
        lhs.mean,
        Some(se),
        rhs.mean,
        4.0 * se,
        "(b-a) E[U_n] <= E[(X_n-a)+] - E[(X_0-a)+]",
    ));

    let mut stopped = MomentAccumulator::default();
    stats.iter().for_each(|w| stopped.push(w.stopped));
    ctx.push(Row::mc(
        "doob-audit.optional_stopping",
        &stopped.estimate()?,
        0.0,
        0.0,
        "a martingale stopped at a bounded time keeps its initial mean",
    ));

    // Exact decomposition of f(i) = i on the Ehrenfest chain.
    let n = ctx.count("ehrenfest_n");
    let chain = FiniteChain::ehrenfest(n)?;
    let path: Path<usize> = simulate_ehrenfest(
        &mut ctx.plan(1).stream(0),
        n,
        ctx.count("ehrenfest_steps"),
        0,
    )?;
    let dec = doob_decomposition_chain(&chain, |i| i as f64, &path)?;
    let (m, a, xs) = (
        dec.martingale_part.values(),
        dec.predictable_part.values(),
        path.values(),
    );
    let mut recon = 0.0f64;
    let mut incr = 0.0f64;
    for k in 0..xs.len() {
        recon = recon.max((m[k] + a[k] - xs[k] as f64).abs());
        if k > 0 {
            let expected = 1.0 - 2.0 * xs[k - 1] as f64 / n as f64;
            incr = incr.max((a[k] - a[k - 1] - expected).abs());
        }
    }
    ctx.push(Row::exact(
        "doob-audit.decomposition_reconstruction",
        recon,
        0.0,
        1e-12,
        "martingale part plus predictable part reproduces the path",
    ));
    ctx.push(Row::exact(
        "doob-audit.predictable_increment",
        incr,
        0.0,
        1e-12,
        "compensator increment 1 - 2 X_{n-1} / N from the transition probabilities",
    ));
    let mut resid = 0.0f64;
    for i in 0..=n {
        let drift = 1.0 - 2.0 * i as f64 / n as f64;
        resid = resid.max((chain.conditional_mean(i, |j| j as f64 - drift) - i as f64).abs());
    }
    ctx.push(Row::exact(
        "doob-audit.martingale_residual",
        resid,
        0.0,
        1e-10,
        "sum_j p_ij (j - compensator increment) equals i in every state",
    ));
    Ok(())
}
