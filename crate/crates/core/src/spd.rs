//! The cone `ℙⁿ₊₊` of symmetric positive definite matrices with the
//! affine-invariant metric `⟨U, V⟩_X = tr(V X⁻¹ U X⁻¹)`, and the symmetric
//! eigendecomposition kernel every matrix function in the crate goes through.
//!
//! An [`SpdMatrix`] stores its eigendecomposition next to the matrix, so
//! validation, `X^{±1/2}`, `X⁻¹`, `ln X` and `ln det X` all share a single
//! decomposition per point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative Frobenius asymmetry accepted when building a [`SymMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Largest eigenvalue magnitude accepted by the matrix exponential.
pub const EXP_ARG_LIMIT: f64 = 700.0;

/// A real symmetric matrix, stored exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Validates symmetry within [`SYMMETRY_TOL`] and stores `(M + Mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let scale = m.norm();
        let asym = (&m - m.transpose()).norm();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry: if scale > 0.0 { asym / scale } else { asym } });
        }
        Ok(Self::symmetrized(m))
    }

    /// Stores `(M + Mᵀ)/2` without a tolerance check; `M` must be square and finite.
    pub fn symmetrize(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(&self.0 * t)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(())
}

/// Spectral decomposition `M = Q diag(λ) Qᵀ` with eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigPair {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl EigPair {
    /// `Q diag(f(λ)) Qᵀ`, symmetrized.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            scaled.column_mut(j).scale_mut(fj);
        }
        SymMatrix::symmetrized(scaled * self.vectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(|l| l)
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sym_eig(m: &SymMatrix) -> Result<EigPair> {
    let n = m.dim();
    let eig = SymmetricEigen::try_new(m.0.clone(), f64::EPSILON, 1000 + 100 * n)
        .ok_or(Error::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    Ok(EigPair { vectors, values })
}

/// Scalar functions lifted to symmetric matrices through the eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFn {
    Log,
    Exp,
    Sqrt,
    InvSqrt,
    Inverse,
}

impl MatrixFn {
    pub fn eval(self, lam: f64) -> f64 {
        match self {
            MatrixFn::Log => lam.ln(),
            MatrixFn::Exp => lam.exp(),
            MatrixFn::Sqrt => lam.sqrt(),
            MatrixFn::InvSqrt => 1.0 / lam.sqrt(),
            MatrixFn::Inverse => 1.0 / lam,
        }
    }

    fn needs_positive(self) -> bool {
        !matches!(self, MatrixFn::Exp)
    }
}

fn check_fn_domain(eig: &EigPair, f: MatrixFn) -> Result<()> {
    if f.needs_positive() && eig.smallest() <= 0.0 {
        return Err(Error::NotPositiveDefinite { eigenvalue: eig.smallest(), largest: eig.largest() });
    }
    if f == MatrixFn::Exp {
        let magnitude = eig.largest().abs().max(eig.smallest().abs());
        if magnitude > EXP_ARG_LIMIT {
            return Err(Error::Overflow { magnitude });
        }
    }
    Ok(())
}

/// `Q diag(f(λ)) Qᵀ` for a symmetric input.
pub fn spd_fn(m: &SymMatrix, f: MatrixFn) -> Result<SymMatrix> {
    let eig = sym_eig(m)?;
    check_fn_domain(&eig, f)?;
    Ok(eig.compose(|l| f.eval(l)))
}

/// A symmetric positive definite matrix together with its eigendecomposition.
///
/// Construction requires `λ_min > n · ε · λ_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    mat: SymMatrix,
    eig: EigPair,
}

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::from_sym(SymMatrix::new(m)?)
    }

    pub fn from_sym(mat: SymMatrix) -> Result<Self> {
        let eig = sym_eig(&mat)?;
        Self::from_parts(mat, eig)
    }

    fn from_parts(mat: SymMatrix, eig: EigPair) -> Result<Self> {
        let n = mat.dim() as f64;
        let (lo, hi) = (eig.smallest(), eig.largest());
        if hi <= 0.0 || lo <= n * f64::EPSILON * hi {
            return Err(Error::NotPositiveDefinite { eigenvalue: lo, largest: hi });
        }
        Ok(Self { mat, eig })
    }

    /// Matrix exponential of a symmetric matrix; the result is SPD.
    pub fn exp_of(w: &SymMatrix) -> Result<Self> {
        let eig = sym_eig(w)?;
        check_fn_domain(&eig, MatrixFn::Exp)?;
        let exp_eig = EigPair { vectors: eig.vectors, values: eig.values.map(f64::exp) };
        let mat = exp_eig.reconstruct();
        Self::from_parts(mat, exp_eig)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(
            SymMatrix::identity(n),
            EigPair { vectors: DMatrix::identity(n, n), values: DVector::from_element(n, 1.0) },
        )
        .expect("identity is SPD")
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.mat.matrix()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.mat
    }

    pub fn eig(&self) -> &EigPair {
        &self.eig
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn func(&self, f: MatrixFn) -> SymMatrix {
        self.eig.compose(|l| f.eval(l))
    }

    pub fn inverse(&self) -> SymMatrix {
        self.func(MatrixFn::Inverse)
    }

    pub fn sqrt(&self) -> SymMatrix {
        self.func(MatrixFn::Sqrt)
    }

    pub fn inv_sqrt(&self) -> SymMatrix {
        self.func(MatrixFn::InvSqrt)
    }

    pub fn log(&self) -> SymMatrix {
        self.func(MatrixFn::Log)
    }

    /// `ln det X` as the sum of log-eigenvalues.
    pub fn ln_det(&self) -> f64 {
        self.eig.values.iter().map(|l| l.ln()).sum()
    }
}

fn check_same_dim(n: usize, found: usize) -> Result<()> {
    if n != found {
        return Err(Error::DimensionMismatch { expected: n, found });
    }
    Ok(())
}

/// `X^{-1/2} M X^{-1/2}`, symmetrized.
fn whiten(x_inv_sqrt: &SymMatrix, m: &DMatrix<f64>) -> SymMatrix {
    let s = x_inv_sqrt.matrix();
    SymMatrix::symmetrized(s * m * s)
}

/// `tr(V X⁻¹ U X⁻¹)`.
pub fn inner(x: &SpdMatrix, u: &SymMatrix, v: &SymMatrix) -> Result<f64> {
    check_same_dim(x.dim(), u.dim())?;
    check_same_dim(x.dim(), v.dim())?;
    let xi = x.inverse();
    let p = xi.matrix() * u.matrix();
    let q = xi.matrix() * v.matrix();
    Ok(p.component_mul(&q.transpose()).sum())
}

/// `‖V‖_X = ‖X^{-1/2} V X^{-1/2}‖_F`.
pub fn norm(x: &SpdMatrix, v: &SymMatrix) -> Result<f64> {
    check_same_dim(x.dim(), v.dim())?;
    Ok(whiten(&x.inv_sqrt(), v.matrix()).matrix().norm())
}

/// `exp_X(V) = X^{1/2} exp(X^{-1/2} V X^{-1/2}) X^{1/2}`.
pub fn exp(x: &SpdMatrix, v: &SymMatrix) -> Result<SpdMatrix> {
    check_same_dim(x.dim(), v.dim())?;
    let sqrt = x.sqrt();
    let inv_sqrt = x.inv_sqrt();
    let w = whiten(&inv_sqrt, v.matrix());
    let eig = sym_eig(&w)?;
    check_fn_domain(&eig, MatrixFn::Exp)?;
    // X^{1/2} P diag(e^{μ/2}), so the result is B Bᵀ
    let mut b = sqrt.matrix() * &eig.vectors;
    for (j, &mu) in eig.values.iter().enumerate() {
        b.column_mut(j).scale_mut((0.5 * mu).exp());
    }
    let out = SymMatrix::symmetrized(&b * b.transpose());
    SpdMatrix::from_sym(out)
}

/// `d(X, A) = ‖ln(X^{-1/2} A X^{-1/2})‖_F`.
pub fn dist(x: &SpdMatrix, a: &SpdMatrix) -> Result<f64> {
    check_same_dim(x.dim(), a.dim())?;
    let m = whiten(&x.inv_sqrt(), a.matrix());
    let eig = sym_eig(&m)?;
    check_fn_domain(&eig, MatrixFn::Log)?;
    Ok(eig.values.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// `grad f(X) = X f'(X) X`.
pub fn egrad_to_rgrad(x: &SpdMatrix, g: &SymMatrix) -> Result<SymMatrix> {
    check_same_dim(x.dim(), g.dim())?;
    Ok(SymMatrix::symmetrized(x.matrix() * g.matrix() * x.matrix()))
}

/// `‖grad f(X)‖ = sqrt(tr((X f'(X))²))`, evaluated as `‖X^{1/2} G X^{1/2}‖_F`.
pub fn rgrad_norm(x: &SpdMatrix, g: &SymMatrix) -> Result<f64> {
    check_same_dim(x.dim(), g.dim())?;
    let s = x.sqrt();
    Ok((s.matrix() * g.matrix() * s.matrix()).norm())
}

/// Riemannian hessian action `X f''(X)[V] X + ½(V f'(X) X + X f'(X) V)`.
///
/// `euclid_hess` applies the Euclidean hessian to a direction.
pub fn hess_apply(
    x: &SpdMatrix,
    g: &SymMatrix,
    euclid_hess: impl Fn(&SymMatrix) -> Result<SymMatrix>,
    v: &SymMatrix,
) -> Result<SymMatrix> {
    check_same_dim(x.dim(), g.dim())?;
    check_same_dim(x.dim(), v.dim())?;
    let xm = x.matrix();
    let hv = euclid_hess(v)?;
    check_same_dim(x.dim(), hv.dim())?;
    let first = xm * hv.matrix() * xm;
    let vgx = v.matrix() * g.matrix() * xm;
    let xgv = xm * g.matrix() * v.matrix();
    Ok(SymMatrix::symmetrized(first + (vgx + xgv) * 0.5))
}
