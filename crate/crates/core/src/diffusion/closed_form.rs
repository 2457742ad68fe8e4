use num_traits::Float;

use crate::error::invalid;
use crate::numerics::adaptive_simpson;
use crate::Result;

/// Closed-form identities for Brownian motion and simple diffusions.
///
/// Interval cases refer to standard Brownian motion started at `x` in
/// `(a, b)` and exiting at τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    /// P[B hits a before b] = (b − x)/(b − a).
    IntervalHitLower { a: f64, b: f64, x: f64 },
    /// E[τ] = (x − a)(b − x).
    IntervalExitMean { a: f64, b: f64, x: f64 },
    /// E[e^{−λτ}] on (−a, a) = cosh(√(2λ)x)/cosh(√(2λ)a).
    SymmetricExitLaplace { a: f64, x: f64, lambda: f64 },
    /// E[e^{−λτ}; exit at +a] on (−a, a) = sinh(√(2λ)(x + a))/sinh(2√(2λ)a).
    SymmetricExitLaplaceUpper { a: f64, x: f64, lambda: f64 },
    /// E[τ²] on (−a, a) = (x⁴ − 6a²x² + 5a⁴)/3.
    SymmetricExitSecondMoment { a: f64, x: f64 },
    /// E[τ; exit at +a] on (−a, a) = (a² − x²)(3a + x)/(6a).
    SymmetricExitUpperMean { a: f64, x: f64 },
    /// E[τ] for the ball of radius R in dimension n = (R² − ‖x‖²)/n.
    BallExitMean {
        dim: usize,
        radius: f64,
        norm_x: f64,
    },
    /// P[hit the inner sphere before the outer] in the annulus.
    AnnulusHitInner {
        dim: usize,
        inner: f64,
        outer: f64,
        norm_x: f64,
    },
    /// P[ever hit the ball of radius R] = (R/‖x‖)^{n−2}, n ≥ 3.
    Transience {
        dim: usize,
        radius: f64,
        norm_x: f64,
    },
    /// GBM dX = rX dt + X dB between levels lo < x < hi: P[hit hi first].
    GbmHitUpper { r: f64, x: f64, lo: f64, hi: f64 },
    /// GBM: P[hit b before reaching 0] = (x/b)^γ with γ = 1 − 2r > 0.
    GbmHitBeforeZero { r: f64, x: f64, b: f64 },
    /// GBM: E[τ_b] = log(b/x)/(r − ½) for r > ½, x < b.
    GbmMeanHitting { r: f64, x: f64, b: f64 },
    /// B_t − βt started at 0, level a > 0: E[e^{−λτ_a}; τ_a < ∞] =
    /// e^{−a(β + √(β² + 2λ))}.
    DriftedBmLaplace { a: f64, beta: f64, lambda: f64 },
    /// OU dX = −X dt + σ dB on (a, b): P[hit a first] = ∫_x^b e^{y²/σ²}dy / ∫_a^b e^{y²/σ²}dy.
    OuHitLower { a: f64, b: f64, x: f64, sigma: f64 },
}

fn check_interval(a: f64, b: f64, x: f64) -> Result<()> {
    if !(a < x && x < b) {
        return Err(invalid!("need a < x < b (got a = {a}, x = {x}, b = {b})"));
    }
    Ok(())
}

fn check_symmetric(a: f64, x: f64) -> Result<()> {
    check_interval(-a, a, x)
}

fn check_lambda(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(invalid!(
            "Laplace parameter must be nonnegative, got {lambda}"
        ));
    }
    Ok((2.0 * lambda).sqrt())
}

/// Radial harmonic function: log r in the plane, r^{2−n} above.
fn radial(dim: usize, r: f64) -> f64 {
    if dim == 2 {
        r.ln()
    } else {
        r.powi(2 - dim as i32)
    }
}

fn gbm_scale(gamma: f64, x: f64) -> f64 {
    if gamma == 0.0 {
        x.ln()
    } else {
        x.powf(gamma)
    }
}

pub fn closed_form(case: &ClosedForm) -> Result<f64> {
    match *case {
        ClosedForm::IntervalHitLower { a, b, x } => {
            check_interval(a, b, x)?;
            Ok((b - x) / (b - a))
        }
        ClosedForm::IntervalExitMean { a, b, x } => {
            check_interval(a, b, x)?;
            Ok((x - a) * (b - x))
        }
        ClosedForm::SymmetricExitLaplace { a, x, lambda } => {
            check_symmetric(a, x)?;
            let k = check_lambda(lambda)?;
            Ok((k * x).cosh() / (k * a).cosh())
        }
        ClosedForm::SymmetricExitLaplaceUpper { a, x, lambda } => {
            check_symmetric(a, x)?;
            let k = check_lambda(lambda)?;
            if k == 0.0 {
                return Ok((x + a) / (2.0 * a));
            }
            Ok((k * (x + a)).sinh() / (2.0 * k * a).sinh())
        }
        ClosedForm::SymmetricExitSecondMoment { a, x } => {
            check_symmetric(a, x)?;
            let (a2, x2) = (a * a, x * x);
            Ok((x2 * x2 - 6.0 * a2 * x2 + 5.0 * a2 * a2) / 3.0)
        }
        ClosedForm::SymmetricExitUpperMean { a, x } => {
            check_symmetric(a, x)?;
            Ok((a * a - x * x) * (3.0 * a + x) / (6.0 * a))
        }
        ClosedForm::BallExitMean {
            dim,
            radius,
            norm_x,
        } => {
            if dim == 0 || !(0.0 <= norm_x && norm_x < radius) {
                return Err(invalid!("need dim ≥ 1 and 0 ≤ ‖x‖ < R"));
            }
            Ok((radius * radius - norm_x * norm_x) / dim as f64)
        }
        ClosedForm::AnnulusHitInner {
            dim,
            inner,
            outer,
            norm_x,
        } => {
            if dim < 2 || !(0.0 < inner && inner < norm_x && norm_x < outer) {
                return Err(invalid!("need dim ≥ 2 and 0 < R < ‖x‖ < outer"));
            }
            let (fx, fi, fo) = (radial(dim, norm_x), radial(dim, inner), radial(dim, outer));
            Ok((fx - fo) / (fi - fo))
        }
        ClosedForm::Transience {
            dim,
            radius,
            norm_x,
        } => {
            if dim < 3 || !(0.0 < radius && radius < norm_x) {
                return Err(invalid!("need dim ≥ 3 and 0 < R < ‖x‖"));
            }
            Ok((radius / norm_x).powi(dim as i32 - 2))
        }
        ClosedForm::GbmHitUpper { r, x, lo, hi } => {
            if !(0.0 < lo) {
                return Err(invalid!("GBM levels must be positive"));
            }
            check_interval(lo, hi, x)?;
            let g = 1.0 - 2.0 * r;
            Ok((gbm_scale(g, x) - gbm_scale(g, lo)) / (gbm_scale(g, hi) - gbm_scale(g, lo)))
        }
        ClosedForm::GbmHitBeforeZero { r, x, b } => {
            let g = 1.0 - 2.0 * r;
            if !(g > 0.0) || !(0.0 < x && x < b) {
                return Err(invalid!("need r < 1/2 and 0 < x < b"));
            }
            Ok((x / b).powf(g))
        }
        ClosedForm::GbmMeanHitting { r, x, b } => {
            if !(r > 0.5) || !(0.0 < x && x < b) {
                return Err(invalid!("need r > 1/2 and 0 < x < b"));
            }
            Ok((b / x).ln() / (r - 0.5))
        }
        ClosedForm::DriftedBmLaplace { a, beta, lambda } => {
            if !(a > 0.0) || !(beta >= 0.0) {
                return Err(invalid!("need a > 0 and drift β ≥ 0"));
            }
            check_lambda(lambda)?;
            Ok((-a * (beta + (beta * beta + 2.0 * lambda).sqrt())).exp())
        }
        ClosedForm::OuHitLower { a, b, x, sigma } => {
            check_interval(a, b, x)?;
            if !(sigma > 0.0) {
                return Err(invalid!("σ must be positive"));
            }
            // Factor out the largest exponent so nothing overflows.
            let peak = a.abs().max(b.abs()).powi(2) / (sigma * sigma);
            let w = |y: f64| (y * y / (sigma * sigma) - peak).exp();
            let num = adaptive_simpson(w, x, b, 1e-12)?;
            let den = adaptive_simpson(w, a, b, 1e-12)?;
            Ok(num / den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(c: ClosedForm) -> f64 {
        closed_form(&c).unwrap()
    }

    #[test]
    fn catalog_examples() {
        assert!(
            (cf(ClosedForm::GbmHitBeforeZero {
                r: 0.25,
                x: 1.0,
                b: 4.0
            }) - 0.5)
                .abs()
                < 1e-15
        );
        assert!(
            (cf(ClosedForm::GbmMeanHitting {
                r: 1.0,
                x: 1.0,
                b: 4.0
            }) - 2.772_588_722_239_781)
                .abs()
                < 1e-12
        );
        assert!(
            (cf(ClosedForm::OuHitLower {
                a: -1.0,
                b: 1.0,
                x: 0.0,
                sigma: 1.0
            }) - 0.5)
                .abs()
                < 1e-10
        );
        assert!(
            (cf(ClosedForm::IntervalHitLower {
                a: -1.0,
                b: 2.0,
                x: 0.0
            }) - 2.0 / 3.0)
                .abs()
                < 1e-15
        );
        assert_eq!(
            cf(ClosedForm::IntervalExitMean {
                a: -1.0,
                b: 2.0,
                x: 0.0
            }),
            2.0
        );
        assert!(
            (cf(ClosedForm::SymmetricExitLaplace {
                a: 1.0,
                x: 0.0,
                lambda: 0.5
            }) - 0.648_054_273_663_885_4)
                .abs()
                < 1e-15
        );
        assert!(
            (cf(ClosedForm::SymmetricExitSecondMoment { a: 1.0, x: 0.0 }) - 5.0 / 3.0).abs()
                < 1e-15
        );
        assert_eq!(
            cf(ClosedForm::SymmetricExitUpperMean { a: 1.0, x: 0.0 }),
            0.5
        );
        assert!(
            (cf(ClosedForm::BallExitMean {
                dim: 3,
                radius: 1.0,
                norm_x: 0.0
            }) - 1.0 / 3.0)
                .abs()
                < 1e-15
        );
        assert!(
            (cf(ClosedForm::AnnulusHitInner {
                dim: 3,
                inner: 1.0,
                outer: 16.0,
                norm_x: 2.0
            }) - 7.0 / 15.0)
                .abs()
                < 1e-15
        );
        assert!(
            (cf(ClosedForm::AnnulusHitInner {
                dim: 3,
                inner: 1.0,
                outer: 128.0,
                norm_x: 2.0
            }) - 63.0 / 127.0)
                .abs()
                < 1e-15
        );
        assert_eq!(
            cf(ClosedForm::Transience {
                dim: 3,
                radius: 1.0,
                norm_x: 2.0
            }),
            0.5
        );
    }

    #[test]
    fn internal_consistency() {
        // Laplace at λ → 0 recovers probabilities; upper + lower = total.
        let up = cf(ClosedForm::SymmetricExitLaplaceUpper {
            a: 1.0,
            x: 0.3,
            lambda: 0.0,
        });
        assert!((up - 0.65).abs() < 1e-15);
        let lam = 0.7;
        let total = cf(ClosedForm::SymmetricExitLaplace {
            a: 1.0,
            x: 0.3,
            lambda: lam,
        });
        let upper = cf(ClosedForm::SymmetricExitLaplaceUpper {
            a: 1.0,
            x: 0.3,
            lambda: lam,
        });
        let lower = cf(ClosedForm::SymmetricExitLaplaceUpper {
            a: 1.0,
            x: -0.3,
            lambda: lam,
        });
        assert!((upper + lower - total).abs() < 1e-14);
        // GBM with r = ½ is driftless in log scale.
        let p = cf(ClosedForm::GbmHitUpper {
            r: 0.5,
            x: 1.0,
            lo: 0.5,
            hi: 2.0,
        });
        assert!((p - 0.5).abs() < 1e-15);
        // As lo → 0 the two-sided GBM formula tends to (x/b)^γ.
        let p = cf(ClosedForm::GbmHitUpper {
            r: 0.25,
            x: 1.0,
            lo: 1e-12,
            hi: 4.0,
        });
        assert!((p - 0.5).abs() < 1e-5);
        // Transience is the outer → ∞ limit of the annulus.
        let p = cf(ClosedForm::AnnulusHitInner {
            dim: 3,
            inner: 1.0,
            outer: 1e9,
            norm_x: 2.0,
        });
        assert!((p - 0.5).abs() < 1e-8);
        // At λ = 0 the drifted formula is e^{−2aβ}.
        let p = cf(ClosedForm::DriftedBmLaplace {
            a: 1.0,
            beta: 0.5,
            lambda: 0.0,
        });
        assert!((p - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ou_exit_is_accurate_for_small_sigma() {
        // Small σ: exit through the endpoint nearer to 0.
        let p = cf(ClosedForm::OuHitLower {
            a: -1.0,
            b: 2.0,
            x: 0.0,
            sigma: 0.3,
        });
        assert!(p > 0.999 && p <= 1.0);
        let p = cf(ClosedForm::OuHitLower {
            a: -1.0,
            b: 1.0,
            x: 0.4,
            sigma: 0.2,
        });
        assert!((0.0..=1.0).contains(&p));
        let sym = cf(ClosedForm::OuHitLower {
            a: -1.0,
            b: 1.0,
            x: -0.4,
            sigma: 0.2,
        });
        assert!((p + sym - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_parameters() {
        assert!(closed_form(&ClosedForm::IntervalHitLower {
            a: 1.0,
            b: 0.0,
            x: 0.5
        })
        .is_err());
        assert!(closed_form(&ClosedForm::GbmMeanHitting {
            r: 0.25,
            x: 1.0,
            b: 4.0
        })
        .is_err());
        assert!(closed_form(&ClosedForm::SymmetricExitLaplace {
            a: 1.0,
            x: 0.0,
            lambda: -1.0
        })
        .is_err());
        assert!(closed_form(&ClosedForm::Transience {
            dim: 2,
            radius: 1.0,
            norm_x: 2.0
        })
        .is_err());
        assert!(closed_form(&ClosedForm::OuHitLower {
            a: -1.0,
            b: 1.0,
            x: 0.0,
            sigma: 0.0
        })
        .is_err());
    }
}
