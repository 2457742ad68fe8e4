use alloc::boxed::Box;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::invalid;
use crate::numerics::solve_tridiagonal;
use crate::sde::DiffusionSpec;
use crate::{Error, Result};

/// Coarsest grid the solver accepts.
pub const BVP_MIN_INTERVALS: usize = 16;

type Field = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// ½g²u″ + fu′ − qu = θ on (a, b) with u(a), u(b) given.
pub struct BvpProblem {
    pub spec: DiffusionSpec,
    pub a: f64,
    pub b: f64,
    pub source: Field,
    pub killing: Field,
    pub u_a: f64,
    pub u_b: f64,
    pub intervals: usize,
}

impl BvpProblem {
    /// Lu = 0 with the given boundary values and no killing.
    pub fn new(spec: DiffusionSpec, a: f64, b: f64, u_a: f64, u_b: f64, intervals: usize) -> Self {
        Self {
            spec,
            a,
            b,
            source: Box::new(|_| 0.0),
            killing: Box::new(|_| 0.0),
            u_a,
            u_b,
            intervals,
        }
    }

    pub fn with_source(mut self, theta: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Box::new(theta);
        self
    }

    pub fn with_killing(mut self, q: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.killing = Box::new(q);
        self
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.intervals as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }
}

/// Values on the nodes `a + i·h`, `i = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    /// Linear interpolation; `x` is clamped to `[a, b]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.values.len() - 1;
        let s = ((x - self.a) / self.step()).clamp(0.0, n as f64);
        let k = (s.floor() as usize).min(n - 1);
        let w = s - k as f64;
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }
}

/// Central-difference solve of the Dirichlet problem.
///
/// Refuses grids where |f|·h > g² at some node (the scheme would lose its
/// maximum principle) and reports the N that would satisfy it.
pub fn solve_exit_bvp(problem: &BvpProblem) -> Result<GridFunction> {
    let n = problem.intervals;
    if !(problem.a < problem.b) {
        return Err(invalid!(
            "BVP needs a < b (got [{}, {}])",
            problem.a,
            problem.b
        ));
    }
    if n < BVP_MIN_INTERVALS {
        return Err(invalid!(
            "BVP needs at least {BVP_MIN_INTERVALS} intervals, got {n}"
        ));
    }
    let h = problem.step();
    let spec = &problem.spec;
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let x = problem.node(i);
        let g = spec.diffusion(x, 0.0);
        let f = spec.drift(x, 0.0);
        worst = worst.max(f.abs() / (g * g));
        if problem.killing.as_ref()(x) < 0.0 {
            return Err(invalid!("killing rate is negative at x = {x}"));
        }
    }
    if !worst.is_finite() || worst * h > 1.0 {
        let required_n = if worst.is_finite() {
            ((problem.b - problem.a) * worst).ceil() as usize
        } else {
            usize::MAX
        };
        return Err(Error::Peclet { required_n });
    }
    let m = n - 1;
    let mut lower = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 1..n {
        let x = problem.node(i);
        let d = 0.5 * spec.diffusion(x, 0.0).powi(2) / (h * h);
        let c = spec.drift(x, 0.0) / (2.0 * h);
        let lo = d - c;
        let up = d + c;
        let mut r = problem.source.as_ref()(x);
        if i == 1 {
            r -= lo * problem.u_a;
        }
        if i == n - 1 {
            r -= up * problem.u_b;
        }
        lower.push(lo);
        diag.push(-2.0 * d - problem.killing.as_ref()(x));
        upper.push(up);
        rhs.push(r);
    }
    let inner = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(problem.u_a);
    values.extend(inner);
    values.push(problem.u_b);
    Ok(GridFunction {
        a: problem.a,
        b: problem.b,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{closed_form, ClosedForm};

    #[test]
    fn bm_exit_probability_and_mean() {
        let p = solve_exit_bvp(&BvpProblem::new(
            DiffusionSpec::brownian(),
            -1.0,
            2.0,
            1.0,
            0.0,
            2048,
        ))
        .unwrap();
        assert!((p.value_at(0.0) - 2.0 / 3.0).abs() < 1e-4);
        let t = solve_exit_bvp(
            &BvpProblem::new(DiffusionSpec::brownian(), -1.0, 2.0, 0.0, 0.0, 2048)
                .with_source(|_| -1.0),
        )
        .unwrap();
        assert!((t.value_at(0.0) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn killing_gives_laplace_transform() {
        let pr = BvpProblem::new(DiffusionSpec::brownian(), -1.0, 1.0, 1.0, 1.0, 2048)
            .with_killing(|_| 0.5);
        let u = solve_exit_bvp(&pr).unwrap();
        assert!((u.value_at(0.0) - 1.0 / 1.0f64.cosh()).abs() < 1e-4);
        assert!((u.value_at(0.0) - 0.64805).abs() < 1e-4);
    }

    #[test]
    fn second_order_convergence() {
        // E[τ²] on [−1, 1] solves Lv = −2E[τ] with E_x[τ] = 1 − x².
        let mut errs = Vec::new();
        for n in [64, 128, 256, 512] {
            let pr = BvpProblem::new(DiffusionSpec::ou(1.0, 1.0), -1.0, 1.0, 0.0, 0.0, n)
                .with_source(|x| -(x * x).exp());
            let u = solve_exit_bvp(&pr).unwrap();
            let fine = solve_exit_bvp(
                &BvpProblem::new(DiffusionSpec::ou(1.0, 1.0), -1.0, 1.0, 0.0, 0.0, 8192)
                    .with_source(|x| -(x * x).exp()),
            )
            .unwrap();
            errs.push((u.value_at(0.5) - fine.value_at(0.5)).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "{errs:?}");
        }
        let mut errs = Vec::new();
        for n in [64, 128, 256] {
            let pr = BvpProblem::new(DiffusionSpec::brownian(), -1.0, 1.0, 0.0, 0.0, n)
                .with_source(|x| -2.0 * (1.0 - x * x));
            let v = solve_exit_bvp(&pr).unwrap().value_at(0.0);
            errs.push(
                (v - closed_form(&ClosedForm::SymmetricExitSecondMoment { a: 1.0, x: 0.0 })
                    .unwrap())
                .abs(),
            );
        }
        for w in errs.windows(2) {
            assert!((3.5..4.5).contains(&(w[0] / w[1])), "{errs:?}");
        }
    }

    #[test]
    fn peclet_guard() {
        let spec = DiffusionSpec::drifted_bm(100.0, 1.0);
        let err =
            solve_exit_bvp(&BvpProblem::new(spec.clone(), 0.0, 1.0, 0.0, 1.0, 32)).unwrap_err();
        assert_eq!(err, Error::Peclet { required_n: 100 });
        assert!(solve_exit_bvp(&BvpProblem::new(spec, 0.0, 1.0, 0.0, 1.0, 100)).is_ok());
        assert!(solve_exit_bvp(&BvpProblem::new(
            DiffusionSpec::brownian(),
            0.0,
            1.0,
            0.0,
            1.0,
            8
        ))
        .is_err());
        assert!(solve_exit_bvp(&BvpProblem::new(
            DiffusionSpec::brownian(),
            1.0,
            1.0,
            0.0,
            1.0,
            64
        ))
        .is_err());
    }
}
