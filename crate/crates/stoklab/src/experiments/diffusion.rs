use std::f64::consts::PI;

use stoklab_core::diffusion::{
    apply_adjoint, apply_generator, arcsine_cdf, arcsine_occupation, boundary_shift, closed_form,
    evolve_density, mc_ball_exit, mc_drifted_exit, mc_exit_statistics, shifted_bias,
    solve_exit_bvp, AdaptiveStep, BvpProblem, ClosedForm, DensityGrid, ExitConfig, ExitOutcome,
    ExitSide, GridFunction, TestFunction,
};
use stoklab_core::numerics::{normal_cdf, trapezoid};
use stoklab_core::sde::DiffusionSpec;
use stoklab_core::simcore::{
    ks_statistic, ks_two_sample, ks_two_sample_critical_value_1pct, MomentAccumulator,
};
use stoklab_core::Result;

use super::{invalid, proportion, Experiment};
use crate::params::{count, positive, real};
use crate::report::Row;
use crate::runner::Ctx;

fn cf(case: ClosedForm) -> Result<f64> {
    closed_form(&case)
}

fn solve_at(problem: BvpProblem, x: f64) -> Result<f64> {
    Ok(solve_exit_bvp(&problem)?.value_at(x))
}

fn check_resolved(ctx: &mut Ctx, id: &str, unresolved: usize) {
    ctx.push(Row::exact(
        id,
        unresolved as f64,
        0.0,
        0.0,
        "every path leaves a bounded region within the time budget",
    ));
}

pub const EXIT_INTERVAL: Experiment = Experiment {
    name: "exit-interval",
    description: "Exit of Brownian motion from an interval: Monte Carlo, boundary-value solver and closed forms",
    params: &[
        real("x0", "0", "start point"),
        real("a", "-1", "lower end"),
        real("b", "2", "upper end"),
        positive("sym_a", "1", "half-width of the symmetric interval"),
        positive("lambda", "0.5", "Laplace parameter"),
        positive("dt", "0.0001", "Euler step"),
        count("paths", "10000", "paths per interval"),
        positive("max_time", "100", "time budget per path"),
        count("bvp_n", "2048", "grid intervals for the boundary-value solver"),
    ],
    run: exit_interval,
};

fn exit_interval(ctx: &mut Ctx) -> Result<()> {
    let (x0, a, b) = (ctx.get("x0"), ctx.get("a"), ctx.get("b"));
    let (s, lambda) = (ctx.get("sym_a"), ctx.get("lambda"));
    let (dt, paths, max_time) = (ctx.get("dt"), ctx.count("paths"), ctx.get("max_time"));
    let bvp_n = ctx.count("bvp_n");
    let bm = DiffusionSpec::brownian();

    let cfg = ExitConfig {
        x0,
        a,
        b,
        dt,
        n_paths: paths,
        lambdas: vec![lambda],
        max_time,
    };
    let st = mc_exit_statistics(&bm, &cfg, ctx.exec, ctx.plan(0))?;
    check_resolved(ctx, "exit-interval.unresolved", st.unresolved);
    let p = |a: f64, b: f64| cf(ClosedForm::IntervalHitLower { a, b, x: x0 });
    let m = |a: f64, b: f64| cf(ClosedForm::IntervalExitMean { a, b, x: x0 });
    let p_src = "P[hit a before b] = (b - x)/(b - a)";
    let m_src = "E[tau] = (x - a)(b - x), |ab| from 0";
    ctx.push(Row::mc(
        "exit-interval.p_hit_a",
        &st.p_hit_a,
        p(a, b)?,
        shifted_bias(p, a, b, st.shift_a, st.shift_b)?,
        p_src,
    ));
    ctx.push(Row::mc(
        "exit-interval.mean_tau",
        &st.mean_tau,
        m(a, b)?,
        shifted_bias(m, a, b, st.shift_a, st.shift_b)?,
        m_src,
    ));

    let sym = ExitConfig {
        x0: 0.0,
        a: -s,
        b: s,
        dt,
        n_paths: paths,
        lambdas: vec![lambda],
        max_time,
    };
    let ss = mc_exit_statistics(&bm, &sym, ctx.exec, ctx.plan(1))?;
    check_resolved(ctx, "exit-interval.sym_unresolved", ss.unresolved);
    let lap = |w: f64| {
        cf(ClosedForm::SymmetricExitLaplace {
            a: w,
            x: 0.0,
            lambda,
        })
    };
    let sq = |w: f64| cf(ClosedForm::SymmetricExitSecondMoment { a: w, x: 0.0 });
    let lap_src = "E[exp(-lambda tau)] = 1/cosh(a sqrt(2 lambda)) from the centre";
    let sq_src = "E[tau^2] = 5 a^4 / 3 from the centre";
    let (lap0, sq0) = (lap(s)?, sq(s)?);
    ctx.push(Row::mc(
        "exit-interval.sym_laplace",
        &ss.laplace[0].1,
        lap0,
        (lap(s + ss.shift_b)? - lap0).abs(),
        lap_src,
    ));
    ctx.push(Row::mc(
        "exit-interval.sym_mean_tau_sq",
        &ss.mean_tau_sq,
        sq0,
        (sq(s + ss.shift_b)? - sq0).abs(),
        sq_src,
    ));

    let u = solve_at(BvpProblem::new(bm.clone(), a, b, 1.0, 0.0, bvp_n), x0)?;
    ctx.push(Row::exact(
        "exit-interval.bvp_p_hit_a",
        u,
        p(a, b)?,
        1e-3,
        p_src,
    ));
    let u = solve_at(
        BvpProblem::new(bm.clone(), a, b, 0.0, 0.0, bvp_n).with_source(|_| -1.0),
        x0,
    )?;
    ctx.push(Row::exact(
        "exit-interval.bvp_mean_tau",
        u,
        m(a, b)?,
        1e-3,
        m_src,
    ));
    let u = solve_at(
        BvpProblem::new(bm.clone(), -s, s, 1.0, 1.0, bvp_n).with_killing(move |_| lambda),
        0.0,
    )?;
    ctx.push(Row::exact(
        "exit-interval.bvp_sym_laplace",
        u,
        lap0,
        1e-3,
        lap_src,
    ));
    // E[τ²] = v with ½v″ = −2E_x[τ].
    let first: GridFunction =
        solve_exit_bvp(&BvpProblem::new(bm.clone(), -s, s, 0.0, 0.0, bvp_n).with_source(|_| -1.0))?;
    let u = solve_at(
        BvpProblem::new(bm.clone(), -s, s, 0.0, 0.0, bvp_n)
            .with_source(move |x| -2.0 * first.value_at(x)),
        0.0,
    )?;
    ctx.push(Row::exact(
        "exit-interval.bvp_sym_mean_tau_sq",
        u,
        sq0,
        1e-3,
        sq_src,
    ));

    // Second-order convergence of the solver on the mean exit time.
    let err = |n: usize| -> Result<f64> {
        let g = solve_exit_bvp(
            &BvpProblem::new(bm.clone(), -s, s, 1.0, 1.0, n).with_killing(move |_| lambda),
        )?;
        let k = (2.0 * lambda).sqrt();
        Ok((0..=n)
            .map(|i| (g.values[i] - (k * (-s + i as f64 * g.step())).cosh() / (k * s).cosh()).abs())
            .fold(0.0, f64::max))
    };
    let (e1, e2, e3) = (err(32)?, err(64)?, err(128)?);
    for (id, ratio) in [
        ("exit-interval.bvp_error_ratio_32_64", e1 / e2),
        ("exit-interval.bvp_error_ratio_64_128", e2 / e3),
    ] {
        ctx.push(Row::exact(
            id,
            ratio,
            4.0,
            0.5,
            "second-order scheme: halving h divides the error by 4",
        ));
    }
    Ok(())
}

pub const FEYNMAN_KAC: Experiment = Experiment {
    name: "feynman-kac",
    description: "Killed and conditioned exit functionals on a symmetric interval: Monte Carlo and boundary-value solver",
    params: &[
        real("x0", "0", "start point"),
        positive("a", "1", "half-width of the interval"),
        positive("lambda", "0.5", "killing rate"),
        positive("dt", "0.0001", "Euler step"),
        count("paths", "10000", "simulated paths"),
        count("bvp_n", "2048", "grid intervals for the boundary-value solver"),
    ],
    run: feynman_kac,
};

fn feynman_kac(ctx: &mut Ctx) -> Result<()> {
    let (x0, a, lambda) = (ctx.get("x0"), ctx.get("a"), ctx.get("lambda"));
    let (dt, paths, n) = (ctx.get("dt"), ctx.count("paths"), ctx.count("bvp_n"));
    let bm = DiffusionSpec::brownian();
    let cfg = ExitConfig {
        x0,
        a: -a,
        b: a,
        dt,
        n_paths: paths,
        lambdas: vec![lambda],
        max_time: 100.0,
    };
    let st = mc_exit_statistics(&bm, &cfg, ctx.exec, ctx.plan(0))?;
    check_resolved(ctx, "feynman-kac.unresolved", st.unresolved);
    let upper = |lo: f64, hi: f64| {
        // Shifting both ends keeps the formula's symmetric form only when
        // the shifts agree; recentre to handle the general case.
        let (c, w) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        cf(ClosedForm::SymmetricExitUpperMean { a: w, x: x0 - c })
    };
    let up_src = "E[tau; exit at +a] = (a^2 - x^2)(3a + x)/(6a)";
    ctx.push(Row::mc(
        "feynman-kac.mc_tau_on_upper",
        &st.tau_on_b,
        upper(-a, a)?,
        shifted_bias(upper, -a, a, st.shift_a, st.shift_b)?,
        up_src,
    ));
    let lap = |lo: f64, hi: f64| {
        let (c, w) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        cf(ClosedForm::SymmetricExitLaplace {
            a: w,
            x: x0 - c,
            lambda,
        })
    };
    let lap_src = "E[exp(-lambda tau)] = cosh(sqrt(2 lambda) x)/cosh(sqrt(2 lambda) a)";
    ctx.push(Row::mc(
        "feynman-kac.mc_laplace",
        &st.laplace[0].1,
        lap(-a, a)?,
        shifted_bias(lap, -a, a, st.shift_a, st.shift_b)?,
        lap_src,
    ));

    let k = (2.0 * lambda).sqrt();
    let g = solve_exit_bvp(
        &BvpProblem::new(bm.clone(), -a, a, 1.0, 1.0, n).with_killing(move |_| lambda),
    )?;
    let worst = (0..=n)
        .map(|i| (g.values[i] - (k * (-a + i as f64 * g.step())).cosh() / (k * a).cosh()).abs())
        .fold(0.0, f64::max);
    ctx.push(Row::exact(
        "feynman-kac.bvp_laplace_sup_error",
        worst,
        0.0,
        1e-4,
        lap_src,
    ));
    let u = solve_at(
        BvpProblem::new(bm.clone(), -a, a, 0.0, 1.0, n).with_killing(move |_| lambda),
        x0,
    )?;
    ctx.push(Row::exact(
        "feynman-kac.bvp_laplace_upper",
        u,
        cf(ClosedForm::SymmetricExitLaplaceUpper { a, x: x0, lambda })?,
        1e-4,
        "E[exp(-lambda tau); exit at +a] = sinh(sqrt(2 lambda)(x + a))/sinh(2 a sqrt(2 lambda))",
    ));
    // v = E[τ; exit at +a] solves ½v″ = −P_x[exit at +a] = −(x + a)/(2a).
    let u = solve_at(
        BvpProblem::new(bm, -a, a, 0.0, 0.0, n).with_source(move |x| -(x + a) / (2.0 * a)),
        x0,
    )?;
    ctx.push(Row::exact(
        "feynman-kac.bvp_tau_on_upper",
        u,
        upper(-a, a)?,
        1e-3,
        up_src,
    ));
    Ok(())
}

pub const BALL_EXIT: Experiment = Experiment {
    name: "ball-exit",
    description:
        "Exit time of a ball and hitting probabilities of an annulus for isotropic Brownian motion",
    params: &[
        count("dim", "3", "dimension"),
        positive("radius", "1", "ball radius"),
        positive(
            "start_norm",
            "2",
            "distance of the annulus start point from the origin",
        ),
        positive("outer", "16", "outer radius of the annulus"),
        positive("dt_min", "0.0001", "smallest step, used near the boundary"),
        positive("dt_max", "0.05", "largest step"),
        count("paths", "4000", "paths per check"),
        positive("slack", "0.02", "declared bias allowance for the exit time"),
    ],
    run: ball_exit,
};

fn start_point(dim: usize, norm: f64) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    x[0] = norm;
    x
}

/// Bias allowance for an annulus hit probability: the inner sphere is
/// overshot inward and the outer one outward.
fn annulus_bias(dim: usize, r: f64, norm: f64, outer: f64, shift: f64) -> Result<f64> {
    let p = |lo: f64, hi: f64| {
        cf(ClosedForm::AnnulusHitInner {
            dim,
            inner: -lo,
            outer: hi,
            norm_x: norm,
        })
    };
    shifted_bias(p, -r, outer, shift, shift)
}

fn ball_exit(ctx: &mut Ctx) -> Result<()> {
    let dim = ctx.count("dim");
    let (r, norm, outer) = (ctx.get("radius"), ctx.get("start_norm"), ctx.get("outer"));
    let step = AdaptiveStep::new(ctx.get("dt_min"), ctx.get("dt_max"));
    let paths = ctx.count("paths");
    let ball = mc_ball_exit(
        ctx.exec,
        ctx.plan(0),
        r,
        &vec![0.0; dim],
        None,
        step,
        paths,
        100.0,
    )?;
    check_resolved(ctx, "ball-exit.unresolved", ball.unresolved);
    let oracle = cf(ClosedForm::BallExitMean {
        dim,
        radius: r,
        norm_x: 0.0,
    })?;
    ctx.push(Row::mc(
        "ball-exit.mean_tau",
        &ball.mean_tau,
        oracle,
        ctx.get("slack"),
        "E[tau] = (R^2 - |x|^2)/n",
    ));

    let ann = mc_ball_exit(
        ctx.exec,
        ctx.plan(1),
        r,
        &start_point(dim, norm),
        Some(outer),
        step,
        paths,
        1e6,
    )?;
    check_resolved(ctx, "ball-exit.annulus_unresolved", ann.unresolved);
    let est = ann
        .p_inner_first
        .ok_or_else(|| invalid("annulus run returned no hitting probability"))?;
    let oracle = cf(ClosedForm::AnnulusHitInner {
        dim,
        inner: r,
        outer,
        norm_x: norm,
    })?;
    ctx.push(Row::mc(
        "ball-exit.annulus_p_inner_first",
        &est,
        oracle,
        annulus_bias(dim, r, norm, outer, ann.shift)?,
        "(phi(x) - phi(outer))/(phi(R) - phi(outer)) with phi(r) = r^(2-n)",
    ));
    Ok(())
}

pub const TRANSIENCE: Experiment = Experiment {
    name: "transience",
    description:
        "Probability that Brownian motion in three dimensions ever hits a ball, via a large annulus",
    params: &[
        count("dim", "3", "dimension, at least 3"),
        positive("radius", "1", "ball radius"),
        positive(
            "start_norm",
            "2",
            "distance of the start point from the origin",
        ),
        positive("outer", "128", "outer radius standing in for infinity"),
        positive("dt_min", "0.0001", "smallest step"),
        positive("dt_max", "10", "largest step"),
        count("paths", "4000", "simulated paths"),
    ],
    run: transience,
};

fn transience(ctx: &mut Ctx) -> Result<()> {
    let dim = ctx.count("dim");
    let (r, norm, outer) = (ctx.get("radius"), ctx.get("start_norm"), ctx.get("outer"));
    let step = AdaptiveStep::new(ctx.get("dt_min"), ctx.get("dt_max"));
    let ann = mc_ball_exit(
        ctx.exec,
        ctx.plan(0),
        r,
        &start_point(dim, norm),
        Some(outer),
        step,
        ctx.count("paths"),
        1e9,
    )?;
    check_resolved(ctx, "transience.unresolved", ann.unresolved);
    let est = ann
        .p_inner_first
        .ok_or_else(|| invalid("annulus run returned no hitting probability"))?;
    let limit = cf(ClosedForm::Transience {
        dim,
        radius: r,
        norm_x: norm,
    })?;
    let finite = cf(ClosedForm::AnnulusHitInner {
        dim,
        inner: r,
        outer,
        norm_x: norm,
    })?;
    ctx.push(Row::mc(
        "transience.p_hit_ball",
        &est,
        limit,
        annulus_bias(dim, r, norm, outer, ann.shift)? + (limit - finite).abs(),
        "(R/|x|)^(n-2), approached by the annulus as the outer radius grows",
    ));
    ctx.push(Row::at_most(
        "transience.limit_below_one",
        limit,
        None,
        1.0,
        -1e-12,
        "Brownian motion in three or more dimensions misses some balls",
    ));
    Ok(())
}

fn gaussian(var: f64) -> impl Fn(f64) -> f64 {
    move |x| (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

pub const FOKKER_PLANCK: Experiment = Experiment {
    name: "fokker-planck",
    description:
        "Forward equation for Brownian motion: heat-kernel evolution, semigroup and adjointness",
    params: &[
        real("lo", "-8", "left end of the grid"),
        positive("hi", "8", "right end of the grid"),
        count("intervals", "2048", "grid intervals"),
        positive("dt", "0.001", "time step"),
        positive("t", "1", "horizon"),
        positive("var0", "0.01", "variance of the initial Gaussian"),
    ],
    run: fokker_planck,
};

fn fokker_planck(ctx: &mut Ctx) -> Result<()> {
    let (lo, hi) = (ctx.get("lo"), ctx.get("hi"));
    let (n, dt, t, v0) = (
        ctx.count("intervals"),
        ctx.get("dt"),
        ctx.get("t"),
        ctx.get("var0"),
    );
    let bm = DiffusionSpec::brownian();
    let rho0 = DensityGrid::from_fn(lo, hi, n, gaussian(v0))?;
    let evo = evolve_density(&bm, &rho0, dt, t)?;
    ctx.push(Row::at_most(
        "fokker-planck.heat_l2_error",
        evo.density.l2_distance(gaussian(v0 + t)),
        None,
        1e-3,
        0.0,
        "heat kernel: N(0, v) evolves to N(0, v + t)",
    ));
    ctx.push(Row::at_most(
        "fokker-planck.mass_drift",
        evo.mass_drift.abs(),
        None,
        1e-3,
        0.0,
        "total mass is conserved",
    ));
    ctx.push(Row::at_most(
        "fokker-planck.boundary_mass",
        evo.boundary_mass,
        None,
        1e-6,
        0.0,
        "the grid is wide enough that no mass reaches the ends",
    ));
    let half = evolve_density(&bm, &rho0, dt, t / 2.0)?;
    let twice = evolve_density(&bm, &half.density, dt, t / 2.0)?;
    let gap = twice
        .density
        .values
        .iter()
        .zip(&evo.density.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    ctx.push(Row::exact(
        "fokker-planck.semigroup",
        gap,
        0.0,
        1e-12,
        "evolving by t/2 twice equals evolving by t",
    ));

    // Heat kernel at time 1: ∂ρ/∂t against L*ρ.
    let p = gaussian(1.0);
    let p1 = |x: f64| -x * gaussian(1.0)(x);
    let p2 = |x: f64| (x * x - 1.0) * gaussian(1.0)(x);
    let psi = TestFunction::new(&p).with_derivatives(&p1, &p2);
    let worst = (-400..=400)
        .map(|i| {
            let x = i as f64 * 0.01;
            // Central difference of N(0, t) in t at t = 1.
            let h = 1e-3;
            let dt = (gaussian(1.0 + h)(x) - gaussian(1.0 - h)(x)) / (2.0 * h);
            (apply_adjoint(&bm, &psi, x) - dt).abs()
        })
        .fold(0.0, f64::max);
    ctx.push(Row::exact(
        "fokker-planck.heat_kernel_residual",
        worst,
        0.0,
        1e-6,
        "the heat kernel solves the forward equation",
    ));

    // ⟨Lφ, ψ⟩ = ⟨φ, L*ψ⟩ for an OU generator and Gaussian bumps.
    let ou = DiffusionSpec::ou(1.0, 1.0);
    let phi = |x: f64| (-(x - 0.5).powi(2)).exp();
    let psi = |x: f64| (-(x + 0.3).powi(2) * 2.0).exp();
    let (fphi, fpsi) = (TestFunction::new(&phi), TestFunction::new(&psi));
    let m = 4000;
    let h = 16.0 / m as f64;
    let xs: Vec<f64> = (0..=m).map(|i| -8.0 + i as f64 * h).collect();
    let left: Vec<f64> = xs
        .iter()
        .map(|&x| apply_generator(&ou, &fphi, x) * psi(x))
        .collect();
    let right: Vec<f64> = xs
        .iter()
        .map(|&x| phi(x) * apply_adjoint(&ou, &fpsi, x))
        .collect();
    ctx.push(Row::exact(
        "fokker-planck.adjointness",
        trapezoid(&left, h) - trapezoid(&right, h),
        0.0,
        1e-5,
        "<L phi, psi> = <phi, L* psi> for compactly concentrated test functions",
    ));
    Ok(())
}

pub const OU_STATIONARY: Experiment = Experiment {
    name: "ou-stationary",
    description: "Stationary density of the Ornstein-Uhlenbeck process under the forward equation",
    params: &[
        count("intervals", "2048", "grid intervals on [-8, 8]"),
        positive("dt", "0.001", "time step"),
        positive("t", "1", "horizon"),
    ],
    run: ou_stationary,
};

fn ou_stationary(ctx: &mut Ctx) -> Result<()> {
    let (n, dt, t) = (ctx.count("intervals"), ctx.get("dt"), ctx.get("t"));
    let ou = DiffusionSpec::ou(1.0, 1.0);
    let pi = |x: f64| (-x * x).exp() / PI.sqrt();
    let d1 = |x: f64| -2.0 * x * pi(x);
    let d2 = |x: f64| (4.0 * x * x - 2.0) * pi(x);
    let psi = TestFunction::new(&pi).with_derivatives(&d1, &d2);
    let worst = (-600..=600)
        .map(|i| apply_adjoint(&ou, &psi, i as f64 * 0.01).abs())
        .fold(0.0, f64::max);
    let src = "exp(-x^2)/sqrt(pi) is stationary for dX = -X dt + dB";
    ctx.push(Row::exact(
        "ou-stationary.adjoint_residual",
        worst,
        0.0,
        1e-6,
        src,
    ));
    let rho0 = DensityGrid::from_fn(-8.0, 8.0, n, pi)?;
    let evo = evolve_density(&ou, &rho0, dt, t)?;
    ctx.push(Row::at_most(
        "ou-stationary.sup_change",
        evo.density.sup_distance(pi),
        None,
        1e-3,
        0.0,
        src,
    ));
    ctx.push(Row::at_most(
        "ou-stationary.mass_drift",
        evo.mass_drift.abs(),
        None,
        1e-3,
        0.0,
        "total mass is conserved",
    ));
    Ok(())
}

pub const GBM_HITTING: Experiment = Experiment {
    name: "gbm-hitting",
    description: "Hitting of levels by geometric Brownian motion, simulated exactly in log scale",
    params: &[
        real("r_prob", "0.25", "drift rate for the hitting probability"),
        positive("level", "4", "upper level b"),
        positive("eps", "0.0001", "lower level standing in for 0"),
        real(
            "r_mean",
            "1",
            "drift rate for the mean hitting time (above 1/2)",
        ),
        positive("dt_min", "0.0001", "smallest step"),
        positive("dt_max", "0.25", "largest step"),
        count("paths", "10000", "paths per check"),
        positive("max_time", "10000", "time budget per path"),
    ],
    run: gbm_hitting,
};

fn outcomes_resolved(ctx: &mut Ctx, id: &str, out: &[ExitOutcome]) {
    let n = out
        .iter()
        .filter(|o| o.side == ExitSide::Unresolved)
        .count();
    check_resolved(ctx, id, n);
}

fn gbm_hitting(ctx: &mut Ctx) -> Result<()> {
    let (r, b, eps) = (ctx.get("r_prob"), ctx.get("level"), ctx.get("eps"));
    let step = AdaptiveStep::new(ctx.get("dt_min"), ctx.get("dt_max"));
    let (paths, max_time) = (ctx.count("paths"), ctx.get("max_time"));
    if !(eps < 1.0 && 1.0 < b) {
        return Err(invalid("need eps < 1 < level"));
    }
    // log X is a Brownian motion with drift r − ½.
    let out = mc_drifted_exit(
        ctx.exec,
        ctx.plan(0),
        r - 0.5,
        1.0,
        0.0,
        Some(eps.ln()),
        Some(b.ln()),
        step,
        paths,
        max_time,
    )?;
    outcomes_resolved(ctx, "gbm-hitting.prob_unresolved", &out);
    let est = proportion(out.iter().map(|o| o.side == ExitSide::Upper))?;
    let limit = cf(ClosedForm::GbmHitBeforeZero { r, x: 1.0, b })?;
    let p = |la: f64, lb: f64| {
        cf(ClosedForm::GbmHitUpper {
            r,
            x: 1.0,
            lo: la.exp(),
            hi: lb.exp(),
        })
    };
    let shift = boundary_shift(1.0, step.dt_min);
    let bias =
        shifted_bias(p, eps.ln(), b.ln(), shift, shift)? + (limit - p(eps.ln(), b.ln())?).abs();
    ctx.push(Row::mc(
        "gbm-hitting.p_hit_level",
        &est,
        limit,
        bias,
        "P[hit b before 0] = (x/b)^gamma with gamma = 1 - 2r",
    ));

    let rm = ctx.get("r_mean");
    if rm <= 0.5 {
        return Err(invalid("the mean hitting time is finite only for r > 1/2"));
    }
    let out = mc_drifted_exit(
        ctx.exec,
        ctx.plan(1),
        rm - 0.5,
        1.0,
        0.0,
        None,
        Some(b.ln()),
        step,
        paths,
        max_time,
    )?;
    outcomes_resolved(ctx, "gbm-hitting.mean_unresolved", &out);
    let mut acc = MomentAccumulator::default();
    out.iter()
        .filter(|o| o.side == ExitSide::Upper)
        .for_each(|o| acc.push(o.time));
    let oracle = cf(ClosedForm::GbmMeanHitting { r: rm, x: 1.0, b })?;
    // An overshoot of δ in log scale is worth δ/(r − ½) in time.
    ctx.push(Row::mc(
        "gbm-hitting.mean_time",
        &acc.estimate()?,
        oracle,
        shift / (rm - 0.5),
        "E[tau_b] = log(b/x)/(r - 1/2)",
    ));
    Ok(())
}

pub const ARCSINE: Experiment = Experiment {
    name: "arcsine",
    description:
        "Fraction of time Brownian motion spends above zero: arcsine law and scale invariance",
    params: &[
        count("paths", "20000", "simulated paths per horizon"),
        positive(
            "dt",
            "0.0001",
            "step at horizon 1 (scaled with the horizon)",
        ),
        positive("t2", "4", "second horizon for the scale check"),
    ],
    run: arcsine,
};

fn arcsine(ctx: &mut Ctx) -> Result<()> {
    let (paths, dt, t2) = (ctx.count("paths"), ctx.get("dt"), ctx.get("t2"));
    let xs = arcsine_occupation(ctx.exec, ctx.plan(0), 1.0, dt, paths)?;
    ctx.push(Row::at_most(
        "arcsine.ks",
        ks_statistic(&xs, arcsine_cdf)?,
        None,
        0.02,
        0.0,
        "(2/pi) arcsin(sqrt(u)); allowance covers the grid bias",
    ));
    let below = proportion(xs.iter().map(|&x| x < 0.5))?;
    ctx.push(Row::mc(
        "arcsine.symmetry",
        &below,
        0.5,
        0.0,
        "the law is symmetric about 1/2",
    ));
    let ys = arcsine_occupation(ctx.exec, ctx.plan(1), t2, dt * t2, paths)?;
    ctx.push(Row::at_most(
        "arcsine.scale_invariance_ks",
        ks_two_sample(&xs, &ys)?,
        None,
        ks_two_sample_critical_value_1pct(xs.len(), ys.len()),
        0.0,
        "X_t has the law of X_1; two-sample 1% critical value",
    ));
    Ok(())
}

pub const OU_EXIT: Experiment = Experiment {
    name: "ou-exit",
    description: "Exit probabilities of the Ornstein-Uhlenbeck process: quadrature, boundary-value solver, Monte Carlo",
    params: &[
        real("a", "-1", "lower end"),
        real("b", "2", "upper end"),
        real("x0", "0.5", "start point"),
        positive("sigma", "1", "noise level"),
        positive("dt", "0.0001", "Euler step"),
        count("paths", "10000", "simulated paths"),
        count("bvp_n", "2048", "grid intervals for the boundary-value solver"),
    ],
    run: ou_exit,
};

fn ou_exit(ctx: &mut Ctx) -> Result<()> {
    let (a, b, x0, sigma) = (ctx.get("a"), ctx.get("b"), ctx.get("x0"), ctx.get("sigma"));
    let (dt, paths, n) = (ctx.get("dt"), ctx.count("paths"), ctx.count("bvp_n"));
    let src = "ratio of integrals of exp(y^2/sigma^2) from x to b and from a to b";
    ctx.push(Row::exact(
        "ou-exit.symmetric_quadrature",
        cf(ClosedForm::OuHitLower {
            a: -1.0,
            b: 1.0,
            x: 0.0,
            sigma: 1.0,
        })?,
        0.5,
        1e-10,
        "symmetric integrand: one half from the centre",
    ));
    let p = |lo: f64, hi: f64| {
        cf(ClosedForm::OuHitLower {
            a: lo,
            b: hi,
            x: x0,
            sigma,
        })
    };
    let oracle = p(a, b)?;
    let spec = DiffusionSpec::ou(1.0, sigma);
    let u = solve_at(BvpProblem::new(spec.clone(), a, b, 1.0, 0.0, n), x0)?;
    ctx.push(Row::exact("ou-exit.bvp_p_hit_a", u, oracle, 1e-3, src));
    let cfg = ExitConfig {
        x0,
        a,
        b,
        dt,
        n_paths: paths,
        lambdas: vec![],
        max_time: 100.0,
    };
    let st = mc_exit_statistics(&spec, &cfg, ctx.exec, ctx.plan(0))?;
    check_resolved(ctx, "ou-exit.unresolved", st.unresolved);
    ctx.push(Row::mc(
        "ou-exit.mc_p_hit_a",
        &st.p_hit_a,
        oracle,
        shifted_bias(p, a, b, st.shift_a, st.shift_b)?,
        src,
    ));
    Ok(())
}

pub const DRIFTED_BM: Experiment = Experiment {
    name: "drifted-bm",
    description: "Brownian motion with negative drift: passage probabilities by horizon and the Laplace transform",
    params: &[
        positive("level", "1", "level a"),
        positive("beta", "0.5", "drift is -beta"),
        positive("lambda", "0.5", "Laplace parameter"),
        positive("dt_min", "0.0001", "smallest step"),
        positive("dt_max", "0.25", "largest step"),
        count("paths", "10000", "simulated paths"),
        positive("horizon", "50", "longest horizon"),
    ],
    run: drifted_bm,
};

/// P[τ_a ≤ t] for B_t − βt.
fn passage_cdf(a: f64, beta: f64, t: f64) -> f64 {
    let s = t.sqrt();
    normal_cdf((-a - beta * t) / s) + (-2.0 * a * beta).exp() * normal_cdf((-a + beta * t) / s)
}

fn drifted_bm(ctx: &mut Ctx) -> Result<()> {
    let (a, beta, lambda) = (ctx.get("level"), ctx.get("beta"), ctx.get("lambda"));
    let step = AdaptiveStep::new(ctx.get("dt_min"), ctx.get("dt_max"));
    let (paths, horizon) = (ctx.count("paths"), ctx.get("horizon"));
    let out = mc_drifted_exit(
        ctx.exec,
        ctx.plan(0),
        -beta,
        1.0,
        0.0,
        None,
        Some(a),
        step,
        paths,
        horizon,
    )?;
    let ever = cf(ClosedForm::DriftedBmLaplace {
        a,
        beta,
        lambda: 0.0,
    })?;
    let shift = boundary_shift(1.0, step.dt_min);
    let mut prev = 0.0;
    for frac in [0.02, 0.1, 0.4, 1.0] {
        let h = frac * horizon;
        let est = proportion(out.iter().map(|o| o.side == ExitSide::Upper && o.time <= h))?;
        let id = format!("drifted-bm.p_hit_by_{h}");
        ctx.push(Row::at_most(
            format!("{id}.bound"),
            est.mean,
            Some(est.stderr),
            ever,
            4.0 * est.stderr,
            "bounded by the passage probability exp(-2 a beta)",
        ));
        ctx.push(Row::at_least(
            format!("{id}.monotone"),
            est.mean,
            None,
            prev,
            0.0,
            "nondecreasing in the horizon",
        ));
        prev = est.mean;
    }
    let est = proportion(out.iter().map(|o| o.side == ExitSide::Upper))?;
    let tail = ever - passage_cdf(a, beta, horizon);
    let lvl = |a: f64| {
        cf(ClosedForm::DriftedBmLaplace {
            a,
            beta,
            lambda: 0.0,
        })
    };
    ctx.push(Row::mc(
        "drifted-bm.p_hit_ever",
        &est,
        ever,
        tail.abs() + (lvl(a)? - lvl(a - shift)?).abs(),
        "general Laplace formula at lambda = 0: exp(-2 a beta)",
    ));
    let mut acc = MomentAccumulator::default();
    out.iter().for_each(|o| {
        acc.push(if o.side == ExitSide::Upper {
            (-lambda * o.time).exp()
        } else {
            0.0
        })
    });
    let lap = |a: f64| cf(ClosedForm::DriftedBmLaplace { a, beta, lambda });
    ctx.push(Row::mc(
        "drifted-bm.laplace",
        &acc.estimate()?,
        lap(a)?,
        (lap(a)? - lap(a - shift)?).abs() + (-lambda * horizon).exp(),
        "E[exp(-lambda tau)] = exp(-a(beta + sqrt(beta^2 + 2 lambda)))",
    ));
    Ok(())
}
