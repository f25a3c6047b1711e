//! The positive orthant `ℝⁿ₊₊` with the metric `G(x) = diag(x₁⁻², …, xₙ⁻²)`.
//!
//! The map `x ↦ ln x` is an isometry onto flat `ℝⁿ`, so geodesics are
//! `t ↦ x ∘ exp(t v / x)` and the distance is the Euclidean distance between
//! log-coordinates. Curvature is zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest `|vᵢ / xᵢ|` accepted by [`exp`] before reporting overflow.
pub const EXP_ARG_LIMIT: f64 = 700.0;

/// A point of the positive orthant: every coordinate finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantPoint(DVector<f64>);

impl OrthantPoint {
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for (index, &value) in x.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("orthant point"));
            }
            if value <= 0.0 {
                return Err(Error::NonPositive { index, value });
            }
        }
        Ok(Self(x))
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(x))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Log-coordinates `(ln x₁, …, ln xₙ)`.
    pub fn log_coords(&self) -> DVector<f64> {
        self.0.map(f64::ln)
    }
}

fn check_len(x: &OrthantPoint, v: &DVector<f64>) -> Result<()> {
    if v.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: v.len() });
    }
    Ok(())
}

/// `Σ uᵢ vᵢ / xᵢ²`.
pub fn inner(x: &OrthantPoint, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_len(x, u)?;
    check_len(x, v)?;
    Ok(x.0
        .iter()
        .zip(u.iter().zip(v.iter()))
        .map(|(xi, (ui, vi))| (ui / xi) * (vi / xi))
        .sum())
}

pub fn norm(x: &OrthantPoint, v: &DVector<f64>) -> Result<f64> {
    check_len(x, v)?;
    Ok(x.0
        .iter()
        .zip(v.iter())
        .map(|(xi, vi)| (vi / xi).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `exp_x(v) = (x₁ e^{v₁/x₁}, …, xₙ e^{vₙ/xₙ})`.
pub fn exp(x: &OrthantPoint, v: &DVector<f64>) -> Result<OrthantPoint> {
    check_len(x, v)?;
    let mut out = DVector::zeros(x.dim());
    for i in 0..x.dim() {
        let arg = v[i] / x.0[i];
        if !arg.is_finite() || arg.abs() > EXP_ARG_LIMIT {
            return Err(Error::Overflow { magnitude: arg.abs() });
        }
        let yi = x.0[i] * arg.exp();
        if !yi.is_finite() || yi <= 0.0 {
            return Err(Error::Overflow { magnitude: arg.abs() });
        }
        out[i] = yi;
    }
    Ok(OrthantPoint(out))
}

/// `d(x, y) = sqrt(Σ ln²(yᵢ / xᵢ))`.
pub fn dist(x: &OrthantPoint, y: &OrthantPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok(x.0
        .iter()
        .zip(y.0.iter())
        .map(|(xi, yi)| (yi / xi).ln().powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `grad f(x) = diag(x)² f'(x)`.
pub fn egrad_to_rgrad(x: &OrthantPoint, g: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(x, g)?;
    Ok(x.0.zip_map(g, |xi, gi| xi * xi * gi))
}

/// `‖grad f(x)‖ = sqrt(Σ (xᵢ ∂ᵢf)²)` straight from the Euclidean gradient.
pub fn rgrad_norm(x: &OrthantPoint, g: &DVector<f64>) -> Result<f64> {
    check_len(x, g)?;
    Ok(x.0.zip_map(g, |xi, gi| xi * gi).norm())
}

/// Riemannian hessian action `[diag(x)² f''(x) + diag(x) diag(f'(x))] v`.
pub fn hess_apply(
    x: &OrthantPoint,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_len(x, g)?;
    check_len(x, v)?;
    if h.nrows() != x.dim() || h.ncols() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: h.nrows().max(h.ncols()) });
    }
    let hv = h * v;
    Ok(DVector::from_fn(x.dim(), |i, _| {
        let xi = x.0[i];
        xi * xi * hv[i] + xi * g[i] * v[i]
    }))
}
