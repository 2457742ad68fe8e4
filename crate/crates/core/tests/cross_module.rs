use proptest::prelude::*;
use stoklab_core::brownian::{sample_bm_increments, uniform_grid};
use stoklab_core::diffusion::{closed_form, solve_exit_bvp, BvpProblem, ClosedForm};
use stoklab_core::discrete::polya_exact_law;
use stoklab_core::ito::ito_integral_leftpoint;
use stoklab_core::sde::{euler_maruyama, DiffusionSpec};
use stoklab_core::simcore::ensemble;
use stoklab_core::{Executor, Sequential, StreamPlan};

/// Runs indices back to front, to check that results are keyed by index and
/// not by execution order.
struct Reversed;

impl Executor for Reversed {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let mut out: Vec<T> = (0..n).rev().map(f).collect();
        out.reverse();
        out
    }
}

#[test]
fn ensemble_ignores_execution_order() {
    let grid = uniform_grid(1.0, 64).unwrap();
    let run = |exec: &dyn Fn(StreamPlan) -> Vec<f64>| exec(StreamPlan::new(11).offset(5));
    let a = run(&|p| ensemble(&Sequential, p, 200, |s| *sample_bm_increments(s, &grid).unwrap().last()));
    let b = run(&|p| ensemble(&Reversed, p, 200, |s| *sample_bm_increments(s, &grid).unwrap().last()));
    assert_eq!(a, b);
}

#[test]
fn euler_with_unit_noise_is_the_driving_path() {
    let grid = uniform_grid(2.0, 500).unwrap();
    let bm = sample_bm_increments(&mut StreamPlan::new(3).stream(0), &grid).unwrap();
    let x = euler_maruyama(&DiffusionSpec::brownian(), 1.5, &bm).unwrap();
    for (xi, bi) in x.values().iter().zip(bm.values()) {
        assert!((xi - 1.5 - bi).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Left-point sums telescope: sum 2B dB = B_T^2 - sum (dB)^2, path by path.
    #[test]
    fn leftpoint_sum_of_2b_telescopes(seed in any::<u64>(), steps in 1usize..300) {
        let grid = uniform_grid(1.0, steps).unwrap();
        let bm = sample_bm_increments(&mut StreamPlan::new(seed).stream(0), &grid).unwrap();
        let ito = ito_integral_leftpoint(|p| 2.0 * p.current(), &bm);
        let qv: f64 = bm.values().windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        let bt = *bm.last();
        prop_assert!((ito.last() - (bt * bt - qv)).abs() < 1e-9);
    }

    #[test]
    fn bvp_matches_ou_exit_quadrature(a in -2.0f64..-0.2, b in 0.2f64..2.0, frac in 0.1f64..0.9, sigma in 0.5f64..2.0) {
        let x = a + frac * (b - a);
        let exact = closed_form(&ClosedForm::OuHitLower { a, b, x, sigma }).unwrap();
        let u = solve_exit_bvp(&BvpProblem::new(DiffusionSpec::ou(1.0, sigma), a, b, 1.0, 0.0, 1024)).unwrap();
        prop_assert!((u.value_at(x) - exact).abs() < 1e-3, "{} vs {}", u.value_at(x), exact);
    }

    // The proportion of red balls is a martingale, so the exact law keeps
    // the initial mean at every step.
    #[test]
    fn polya_exact_law_keeps_its_mean(r0 in 1u64..5, v0 in 1u64..5, c in 1u64..4, n in 0usize..15) {
        let law = polya_exact_law(r0, v0, c, n).unwrap();
        let mass: f64 = law.iter().map(|a| a.1).sum();
        let mean: f64 = law.iter().map(|a| a.0 * a.1).sum();
        prop_assert!((mass - 1.0).abs() < 1e-12);
        prop_assert!((mean - r0 as f64 / (r0 + v0) as f64).abs() < 1e-12);
    }
}
