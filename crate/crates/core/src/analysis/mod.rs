//! Constants of the convergence theory and checks of its inequalities on
//! recorded runs.
//!
//! The curvature enters only through `κ̂ = √|κ|`, where `κ ≤ 0` is a lower bound
//! on the sectional curvature. The orthant is flat (`κ̂ = 0`). For the SPD cone
//! with the affine-invariant metric the sectional curvature lies in `[−1/2, 0]`,
//! so [`CurvatureParams::spd_affine_invariant`] uses `κ̂ = 1/√2`.
//!
//! With `s = κ̂√ρ` the radius and the constant `C` are
//!
//! ```text
//! R = (1/κ̂) arccosh(cosh(κ̂ d₀) · exp(½ s sinh s))
//! C = (sinh s / s) · [1 + arccosh(cosh(κ̂ d₀) · exp(½ s sinh s))]
//! ```
//!
//! As `κ̂ → 0`, `R → √(d₀² + ρ)` and `C → 1`. The arccosh term equals `κ̂ R`,
//! so the bracket is `1 + κ̂ R`, matching the `1 + κ̂ d` factor from which `C`
//! is built.

mod checks;
mod profile;

pub use checks::{
    check_desgen, check_descent, check_fejer, check_lemli, complexity_traces, quasi_fejer_excess, BoundTrace,
    ComplexityTraces,
};
pub use profile::{performance_profile, PerformanceProfile};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::solver::StepsizeStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParams {
    pub kappa_hat: f64,
}

impl CurvatureParams {
    pub fn new(kappa_hat: f64) -> Result<Self> {
        if !(kappa_hat >= 0.0 && kappa_hat.is_finite()) {
            return Err(invalid(format!("kappa_hat must be finite and non-negative, got {kappa_hat}")));
        }
        Ok(Self { kappa_hat })
    }

    /// From a curvature lower bound `κ ≤ 0`.
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if kappa > 0.0 {
            return Err(invalid("curvature lower bound must be non-positive"));
        }
        Self::new(kappa.abs().sqrt())
    }

    pub fn flat() -> Self {
        Self { kappa_hat: 0.0 }
    }

    /// `κ̂ = 1/√2` for the affine-invariant SPD metric.
    pub fn spd_affine_invariant() -> Self {
        Self { kappa_hat: std::f64::consts::FRAC_1_SQRT_2 }
    }

    pub fn is_flat(&self) -> bool {
        self.kappa_hat == 0.0
    }
}

/// `ρ`: `2Δ/L` (Lipschitz), `Δ/(βL₀)` (adaptive), `Δ/β` (Armijo), `Δ = f₀ − f*`.
pub fn rho_bound(strategy: &StepsizeStrategy, f0: f64, fstar: f64) -> Result<f64> {
    let delta = f0 - fstar;
    if !(delta >= 0.0) {
        return Err(invalid(format!("f0 = {f0} is below fstar = {fstar}")));
    }
    strategy.validate()?;
    match *strategy {
        StepsizeStrategy::Lipschitz { l } => Ok(2.0 * delta / l),
        StepsizeStrategy::Adaptive { beta, l0, .. } => Ok(delta / (beta * l0)),
        StepsizeStrategy::Armijo { beta } => Ok(delta / beta),
        StepsizeStrategy::EuclideanArmijo { .. } => Err(invalid("rho is defined for Riemannian strategies only")),
    }
}

/// `ln cosh x` without overflow.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-2.0 * x).exp().ln_1p()
    } else {
        (2.0 * (0.5 * x).sinh().powi(2)).ln_1p()
    }
}

/// `arccosh(e^y)` for `y ≥ 0`, accurate near zero.
pub(crate) fn acosh_exp(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    y + (-(-2.0 * y).exp_m1()).sqrt().ln_1p()
}

/// `sinh(s)/s`.
pub(crate) fn sinhc(s: f64) -> f64 {
    if s.abs() < 1e-8 {
        1.0
    } else {
        s.sinh() / s
    }
}

fn check_rho_d0(rho: f64, d0: f64) -> Result<()> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be finite and non-negative, got {rho}")));
    }
    if !(d0 >= 0.0 && d0.is_finite()) {
        return Err(invalid(format!("d0 must be finite and non-negative, got {d0}")));
    }
    Ok(())
}

/// `ln cosh(κ̂d₀) + ½ s sinh s` with `s = κ̂√ρ`, i.e. the log of the arccosh argument.
fn radius_log_arg(k: f64, rho: f64, d0: f64) -> Result<f64> {
    let s = k * rho.sqrt();
    let y = ln_cosh(k * d0) + 0.5 * s * s.sinh();
    if !y.is_finite() {
        return Err(Error::Overflow { magnitude: s });
    }
    Ok(y)
}

/// Radius bound on `d(p_k, q)` along the whole run.
pub fn fejer_radius(curvature: CurvatureParams, rho: f64, d0: f64) -> Result<f64> {
    check_rho_d0(rho, d0)?;
    let k = curvature.kappa_hat;
    if k == 0.0 {
        return Ok((d0 * d0 + rho).sqrt());
    }
    Ok(acosh_exp(radius_log_arg(k, rho, d0)?) / k)
}

/// The constant `C` of the complexity bounds; exactly 1 when `κ̂ = 0`.
pub fn c_rho_kappa(rho: f64, curvature: CurvatureParams, d0: f64) -> Result<f64> {
    check_rho_d0(rho, d0)?;
    let k = curvature.kappa_hat;
    if k == 0.0 {
        return Ok(1.0);
    }
    let s = k * rho.sqrt();
    let c = sinhc(s) * (1.0 + acosh_exp(radius_log_arg(k, rho, d0)?));
    if !c.is_finite() {
        return Err(Error::Overflow { magnitude: s });
    }
    Ok(c)
}

/// Constants of the value-gap bound for the two stepsize rules it covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundConstants {
    /// Constant step `1/L`.
    Lipschitz { l: f64 },
    /// Adaptive rule started at `L₀` with growth factor `η`; `l` is a valid Lipschitz constant.
    Adaptive { l: f64, l0: f64, eta: f64 },
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("iteration count N must be at least 1"));
    }
    Ok(())
}

/// Upper bound on `f(p_N) − f*`: `[L d₀² + 2(C−1)Δ₀]/(2N)` for the constant step,
/// `ηL[L₀ d₀² + 2(C−1)Δ₀]/(2 N L₀)` for the adaptive rule.
pub fn complexity_value_bound(n: usize, consts: BoundConstants, d0: f64, delta0: f64, c: f64) -> Result<f64> {
    check_n(n)?;
    let n = n as f64;
    Ok(match consts {
        BoundConstants::Lipschitz { l } => (l * d0 * d0 + 2.0 * (c - 1.0) * delta0) / (2.0 * n),
        BoundConstants::Adaptive { l, l0, eta } => {
            eta * l * (l0 * d0 * d0 + 2.0 * (c - 1.0) * delta0) / (2.0 * n * l0)
        }
    })
}

/// Upper bound on `min_{k≤N} ‖grad f(p_k)‖`: `2 √(L[L d₀² + 2(C−1)Δ₀]) / N`.
pub fn complexity_grad_bound(n: usize, l: f64, d0: f64, delta0: f64, c: f64) -> Result<f64> {
    check_n(n)?;
    Ok(2.0 * (l * (l * d0 * d0 + 2.0 * (c - 1.0) * delta0)).sqrt() / n as f64)
}

/// The convexity-free bound `√(2LΔ₀) / √(N+1)`.
pub fn nonconvex_grad_bound(n: usize, l: f64, delta0: f64) -> f64 {
    (2.0 * l * delta0).sqrt() / ((n + 1) as f64).sqrt()
}

/// `t̄ = 1/(4r coth 4r) = tanh(4r)/(4r)`.
pub fn afsari_stepsize(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    let x = 4.0 * r;
    Ok(if x < 1e-8 { 1.0 } else { x.tanh() / x })
}
