use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::invalid;
use crate::numerics::{solve_tridiagonal, trapezoid};
use crate::sde::DiffusionSpec;
use crate::Result;

/// Relative mass drift above which the result carries a warning.
pub const MASS_DRIFT_WARNING: f64 = 1e-3;

/// A density sampled at `a + i·h`, `i = 0..=N`, at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub a: f64,
    pub b: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl DensityGrid {
    pub fn from_fn(a: f64, b: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(a < b) || intervals < 2 {
            return Err(invalid!(
                "density grid needs a < b and at least 2 intervals"
            ));
        }
        let h = (b - a) / intervals as f64;
        let values = (0..=intervals).map(|i| f(a + i as f64 * h)).collect();
        Ok(Self {
            a,
            b,
            values,
            time: 0.0,
        })
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.step()
    }

    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.step())
    }

    /// √(∫(ρ − φ)²) by the trapezoid rule.
    pub fn l2_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sq: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - f(self.node(i))).powi(2))
            .collect();
        trapezoid(&sq, self.step()).sqrt()
    }

    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - f(self.node(i))).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEvolution {
    pub density: DensityGrid,
    /// (final mass − initial mass)/initial mass.
    pub mass_drift: f64,
    /// Mass within one cell of either end at the final time.
    pub boundary_mass: f64,
    pub warning: Option<String>,
}

/// Implicit-Euler steps of ∂ρ/∂t = ½(g²ρ)″ − (fρ)′ with ρ = 0 at both ends.
pub fn evolve_density(
    spec: &DiffusionSpec,
    rho0: &DensityGrid,
    dt: f64,
    horizon: f64,
) -> Result<DensityEvolution> {
    if !(dt > 0.0) || !(horizon >= 0.0) {
        return Err(invalid!("need dt > 0 and T ≥ 0"));
    }
    let n = rho0.values.len() - 1;
    let h = rho0.step();
    let steps = (horizon / dt).round() as usize;
    if ((steps as f64) * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(invalid!("T = {horizon} is not a multiple of dt = {dt}"));
    }
    let g2: Vec<f64> = (0..=n)
        .map(|i| spec.diffusion(rho0.node(i), 0.0).powi(2))
        .collect();
    let f: Vec<f64> = (0..=n).map(|i| spec.drift(rho0.node(i), 0.0)).collect();
    // Interior unknowns 1..n-1; (I − dt·A)ρ_new = ρ_old.
    let m = n - 1;
    let mut lower = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for i in 1..n {
        lower.push(-dt * (0.5 * g2[i - 1] / (h * h) + f[i - 1] / (2.0 * h)));
        diag.push(1.0 + dt * g2[i] / (h * h));
        upper.push(-dt * (0.5 * g2[i + 1] / (h * h) - f[i + 1] / (2.0 * h)));
    }
    let mass0 = rho0.mass();
    let mut rho = rho0.values.clone();
    rho[0] = 0.0;
    rho[n] = 0.0;
    for _ in 0..steps {
        let inner = solve_tridiagonal(&lower, &diag, &upper, &rho[1..n])?;
        rho[1..n].copy_from_slice(&inner);
    }
    let density = DensityGrid {
        a: rho0.a,
        b: rho0.b,
        values: rho,
        time: rho0.time + horizon,
    };
    let mass = density.mass();
    let mass_drift = (mass - mass0) / mass0;
    let boundary_mass = 0.5
        * h
        * (density.values[0] + density.values[1] + density.values[n - 1] + density.values[n]);
    let warning = (mass_drift.abs() > MASS_DRIFT_WARNING)
        .then(|| format!("mass drifted by {mass_drift:.3e}; widen the grid or refine the steps"));
    Ok(DensityEvolution {
        density,
        mass_drift,
        boundary_mass,
        warning,
    })
}
