//! Benchmark objectives on the orthant and the SPD cone.
//!
//! Each objective exposes its value, Euclidean gradient `f'` (used by the
//! stopping rule), Riemannian gradient (used by the step), the action of the
//! Riemannian hessian (diagnostics only) and whatever is known in closed form:
//! a Lipschitz bound for the Riemannian gradient, a minimizer, the optimal value.
//!
//! Optimal values of the two log-determinant problems come from the scalar
//! reduction `s = ln det X`. For `a s² − b s` the minimum over `s` is at
//! `s = b / 2a` with value `−b² / 4a`. For `a ln(e^{b₁ s} + b₂) − c s` the
//! derivative `a b₁ σ(s) − c` with `σ = e^{b₁ s} / (e^{b₁ s} + b₂)` vanishes at
//! `e^{b₁ s} = c b₂ / (a b₁ − c)`, which gives
//! `f* = a ln(a b₁ b₂ / (a b₁ − c)) − (c / b₁) ln(c b₂ / (a b₁ − c))`.

mod orthant_problems;
mod spd_problems;

pub use orthant_problems::{
    com_orthant, log2log, loglog, ComOrthant, ComOrthantData, Log2Log, LogLog, Problem1Params,
    Problem2Params,
};
pub use spd_problems::{
    karcher_spd, logdet2, logdetratio, KarcherSpd, KarcherSpdData, LogDet2, LogDetRatio,
    Problem3Params, Problem4Params,
};

use crate::error::{Error, Result};
use crate::geometry::{self, ManifoldKind, Point, Tangent};

/// A differentiable function on one of the supported manifolds.
pub trait Objective: Send + Sync {
    fn name(&self) -> &str;

    fn kind(&self) -> ManifoldKind;

    fn value(&self, p: &Point) -> Result<f64>;

    /// Euclidean gradient `f'(p)`.
    fn egrad(&self, p: &Point) -> Result<Tangent>;

    /// Riemannian gradient; defaults to converting [`Objective::egrad`].
    fn rgrad(&self, p: &Point) -> Result<Tangent> {
        let g = self.egrad(p)?;
        geometry::egrad_to_rgrad(self.kind(), p, &g)
    }

    /// `(f'(p), grad f(p))` in one call, sharing work where possible.
    fn gradients(&self, p: &Point) -> Result<(Tangent, Tangent)> {
        let g = self.egrad(p)?;
        let r = geometry::egrad_to_rgrad(self.kind(), p, &g)?;
        Ok((g, r))
    }

    /// Whether [`Objective::rgrad`] is a closed form rather than the generic conversion.
    fn has_rgrad_shortcut(&self) -> bool {
        false
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    fn known_minimizer(&self) -> Option<Point> {
        None
    }

    fn known_fstar(&self) -> Option<f64> {
        self.known_minimizer().and_then(|x| self.value(&x).ok())
    }

    /// Riemannian hessian applied to `v`.
    fn hess_apply(&self, p: &Point, v: &Tangent) -> Result<Tangent> {
        let _ = (p, v);
        Err(Error::MissingData("hessian"))
    }
}

/// `ln(eᵃ + eᵇ)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `1 / (1 + e^{−z})`.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(crate::error::invalid(msg()))
    }
}

pub(crate) fn check_kind(kind: ManifoldKind, p: &Point) -> Result<()> {
    geometry::check_point(kind, p)
}
