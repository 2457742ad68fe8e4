use crate::sde::{fd_step, DiffusionSpec};

/// A real function with optional analytic first and second derivatives.
#[derive(Clone, Copy)]
pub struct TestFunction<'a> {
    value: &'a dyn Fn(f64) -> f64,
    first: Option<&'a dyn Fn(f64) -> f64>,
    second: Option<&'a dyn Fn(f64) -> f64>,
}

impl<'a> TestFunction<'a> {
    pub fn new(value: &'a dyn Fn(f64) -> f64) -> Self {
        Self {
            value,
            first: None,
            second: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        first: &'a dyn Fn(f64) -> f64,
        second: &'a dyn Fn(f64) -> f64,
    ) -> Self {
        self.first = Some(first);
        self.second = Some(second);
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn first(&self, x: f64) -> f64 {
        match self.first {
            Some(d) => d(x),
            None => {
                let h = fd_step(x);
                (self.value(x + h) - self.value(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn second(&self, x: f64) -> f64 {
        match self.second {
            Some(d) => d(x),
            None => {
                let h = fd_step(x);
                (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h)
            }
        }
    }

    fn is_analytic(&self) -> bool {
        self.first.is_some() && self.second.is_some()
    }
}

/// (Lφ)(x) = f(x)φ′(x) + ½g(x)²φ″(x), coefficients read at t = 0.
pub fn apply_generator(spec: &DiffusionSpec, phi: &TestFunction<'_>, x: f64) -> f64 {
    let g = spec.diffusion(x, 0.0);
    spec.drift(x, 0.0) * phi.first(x) + 0.5 * g * g * phi.second(x)
}

/// (L*ψ)(y) = ½(g²ψ)″ − (fψ)′.
///
/// With analytic derivatives of ψ the products are expanded, using the
/// spec's first derivatives of f and g (and a central difference of g′ for
/// g″). Otherwise the products are differenced directly.
pub fn apply_adjoint(spec: &DiffusionSpec, psi: &TestFunction<'_>, y: f64) -> f64 {
    if psi.is_analytic() {
        let f = spec.drift(y, 0.0);
        let fx = spec.drift_dx(y, 0.0);
        let g = spec.diffusion(y, 0.0);
        let gx = spec.diffusion_dx(y, 0.0);
        let h = fd_step(y);
        let gxx = (spec.diffusion_dx(y + h, 0.0) - spec.diffusion_dx(y - h, 0.0)) / (2.0 * h);
        let (p, p1, p2) = (psi.value(y), psi.first(y), psi.second(y));
        let g2 = g * g;
        let g2_x = 2.0 * g * gx;
        let g2_xx = 2.0 * (gx * gx + g * gxx);
        0.5 * (g2_xx * p + 2.0 * g2_x * p1 + g2 * p2) - (fx * p + f * p1)
    } else {
        let h = fd_step(y);
        let a = |x: f64| {
            let g = spec.diffusion(x, 0.0);
            g * g * psi.value(x)
        };
        let b = |x: f64| spec.drift(x, 0.0) * psi.value(x);
        0.5 * (a(y + h) - 2.0 * a(y) + a(y - h)) / (h * h) - (b(y + h) - b(y - h)) / (2.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{normal_pdf, trapezoid};
    use alloc::vec::Vec;
    use core::f64::consts::PI;
    use num_traits::Float;

    #[test]
    fn generator_examples() {
        let bm = DiffusionSpec::brownian();
        let sq = |x: f64| x * x;
        for x in [-2.0, 0.0, 0.7, 5.0] {
            assert!((apply_generator(&bm, &TestFunction::new(&sq), x) - 1.0).abs() < 1e-4);
            assert!(apply_generator(&bm, &TestFunction::new(&|_| 4.0), x).abs() < 1e-12);
        }
        let ou = DiffusionSpec::ou(1.0, 1.0);
        let id = |x: f64| x;
        let one = |_: f64| 1.0;
        let zero = |_: f64| 0.0;
        for x in [-3.0, -0.5, 0.0, 1.25] {
            let phi = TestFunction::new(&id).with_derivatives(&one, &zero);
            assert_eq!(apply_generator(&ou, &phi, x), -x);
            // Central second differences at h ≈ 1e-5 carry ~1e-6 roundoff.
            assert!((apply_generator(&ou, &TestFunction::new(&id), x) + x).abs() < 1e-5);
        }
    }

    #[test]
    fn ou_stationary_density_is_annihilated() {
        let ou = DiffusionSpec::ou(1.0, 1.0);
        let c = 1.0 / PI.sqrt();
        let rho = |x: f64| c * (-x * x).exp();
        let d1 = |x: f64| -2.0 * x * rho(x);
        let d2 = |x: f64| (4.0 * x * x - 2.0) * rho(x);
        let psi = TestFunction::new(&rho).with_derivatives(&d1, &d2);
        for i in -40..=40 {
            let y = f64::from(i) * 0.1;
            assert!(apply_adjoint(&ou, &psi, y).abs() < 1e-6);
        }
        assert_eq!(apply_adjoint(&ou, &TestFunction::new(&|_| 0.0), 0.3), 0.0);
    }

    #[test]
    fn heat_kernel_solves_forward_equation() {
        let bm = DiffusionSpec::brownian();
        let t = 1.0;
        let rho = |x: f64| normal_pdf(x / t.sqrt()) / t.sqrt();
        for i in -30..=30 {
            let y = f64::from(i) * 0.1;
            // ∂ρ/∂t for the N(0, t) density.
            let dt = rho(y) * (y * y / (t * t) - 1.0 / t) / 2.0;
            let d1 = |x: f64| -x / t * rho(x);
            let d2 = |x: f64| (x * x / (t * t) - 1.0 / t) * rho(x);
            let psi = TestFunction::new(&rho).with_derivatives(&d1, &d2);
            assert!((apply_adjoint(&bm, &psi, y) - dt).abs() < 1e-6);
        }
    }

    #[test]
    fn adjointness_on_a_grid() {
        let spec = DiffusionSpec::new(|x, _| -x + 0.3 * x.sin(), |x, _| 1.0 + 0.2 * x.cos());
        let bump = |c: f64, w: f64| move |x: f64| (-(x - c) * (x - c) / (w * w)).exp();
        let phi = bump(0.5, 0.7);
        let psi = bump(-0.3, 0.6);
        for n in [200, 400, 800] {
            let h = 12.0 / n as f64;
            let xs: Vec<f64> = (0..=n).map(|i| -6.0 + i as f64 * h).collect();
            let lhs: Vec<f64> = xs
                .iter()
                .map(|&x| apply_generator(&spec, &TestFunction::new(&phi), x) * psi(x))
                .collect();
            let rhs: Vec<f64> = xs
                .iter()
                .map(|&x| phi(x) * apply_adjoint(&spec, &TestFunction::new(&psi), x))
                .collect();
            let gap = (trapezoid(&lhs, h) - trapezoid(&rhs, h)).abs();
            assert!(gap < 1e-5, "n={n} gap={gap}");
        }
    }
}
