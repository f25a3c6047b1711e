use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_kind, log_add_exp, require, sigmoid, Objective};
use crate::error::{Error, Result};
use crate::geometry::{ManifoldKind, Point, Tangent};
use crate::spd::{self, sym_eig, SpdMatrix, SymMatrix};

fn spd_point(p: &Point) -> &SpdMatrix {
    p.as_spd().expect("kind checked by caller")
}

fn tangent_sym(v: &Tangent) -> Result<&SymMatrix> {
    v.as_spd().ok_or_else(|| Error::KindMismatch {
        expected: "symmetric tangent".into(),
        found: v.shape_kind().to_string(),
    })
}

fn check_n(n: usize) -> Result<()> {
    require(n >= 1, || "matrix size must be at least 1".into())
}

/// Riemannian hessian of `g(ln det X)`: `g''(s) tr(X⁻¹V) X`.
fn logdet_hessian(x: &SpdMatrix, g1: f64, g2: f64, v: &SymMatrix) -> Result<SymMatrix> {
    let xi = x.inverse();
    let egrad = xi.scale(g1);
    spd::hess_apply(
        x,
        &egrad,
        |v| {
            let tr = (xi.matrix() * v.matrix()).trace();
            let first = xi.matrix() * (g2 * tr);
            let second = xi.matrix() * v.matrix() * xi.matrix() * g1;
            SymMatrix::symmetrize(first - second)
        },
        v,
    )
}

/// `a ln²(det X) − b ln(det X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem3Params {
    pub a: f64,
    pub b: f64,
}

impl Default for Problem3Params {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0 }
    }
}

impl Problem3Params {
    pub fn validate(&self) -> Result<()> {
        require(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite(), || {
            format!("need a, b > 0 (a={}, b={})", self.a, self.b)
        })
    }
}

#[derive(Debug, Clone)]
pub struct LogDet2 {
    p: Problem3Params,
    n: usize,
}

pub fn logdet2(params: Problem3Params, n: usize) -> Result<LogDet2> {
    params.validate()?;
    check_n(n)?;
    Ok(LogDet2 { p: params, n })
}

impl LogDet2 {
    pub fn params(&self) -> Problem3Params {
        self.p
    }

    /// `g'(s) = 2 a s − b` at `s = ln det X`.
    fn slope(&self, x: &SpdMatrix) -> f64 {
        2.0 * self.p.a * x.ln_det() - self.p.b
    }

    /// The scalar critical point `e^{b / 2an} I`; every `X` with `det X = e^{b/2a}` is optimal.
    pub fn scalar_minimizer(&self) -> SpdMatrix {
        let t = (self.p.b / (2.0 * self.p.a * self.n as f64)).exp();
        SpdMatrix::from_diagonal(&vec![t; self.n]).expect("positive diagonal")
    }
}

impl Objective for LogDet2 {
    fn name(&self) -> &str {
        "logdet2"
    }

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Spd(self.n)
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_kind(self.kind(), p)?;
        let s = spd_point(p).ln_det();
        Ok(self.p.a * s * s - self.p.b * s)
    }

    fn egrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        Ok(Tangent::Spd(x.inverse().scale(self.slope(x))))
    }

    fn rgrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        Ok(Tangent::Spd(x.as_sym().scale(self.slope(x))))
    }

    fn gradients(&self, p: &Point) -> Result<(Tangent, Tangent)> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        let k = self.slope(x);
        Ok((Tangent::Spd(x.inverse().scale(k)), Tangent::Spd(x.as_sym().scale(k))))
    }

    fn has_rgrad_shortcut(&self) -> bool {
        true
    }

    /// `2 a n`: the hessian `V ↦ 2a tr(X⁻¹V) X` has norm `2a ‖X‖²_X = 2an`.
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(2.0 * self.p.a * self.n as f64)
    }

    fn known_fstar(&self) -> Option<f64> {
        Some(-self.p.b * self.p.b / (4.0 * self.p.a))
    }

    fn hess_apply(&self, p: &Point, v: &Tangent) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        logdet_hessian(x, self.slope(x), 2.0 * self.p.a, tangent_sym(v)?).map(Tangent::Spd)
    }
}

/// `a ln(det(X)^{b₁} + b₂) − c ln(det X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem4Params {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
}

impl Default for Problem4Params {
    fn default() -> Self {
        Self { a: 1.0, b1: 1.0, b2: 1.0, c: 0.5 }
    }
}

impl Problem4Params {
    pub fn validate(&self) -> Result<()> {
        let Self { a, b1, b2, c } = *self;
        require([a, b1, b2, c].iter().all(|v| v.is_finite() && *v > 0.0), || {
            "a, b1, b2, c must be positive".into()
        })?;
        require(c < a * b1, || format!("need c < a b1 (c={c}, a b1={})", a * b1))
    }
}

#[derive(Debug, Clone)]
pub struct LogDetRatio {
    p: Problem4Params,
    n: usize,
}

pub fn logdetratio(params: Problem4Params, n: usize) -> Result<LogDetRatio> {
    params.validate()?;
    check_n(n)?;
    Ok(LogDetRatio { p: params, n })
}

impl LogDetRatio {
    pub fn params(&self) -> Problem4Params {
        self.p
    }

    /// `σ = e^{b₁ s} / (e^{b₁ s} + b₂)`.
    fn share(&self, s: f64) -> f64 {
        sigmoid(self.p.b1 * s - self.p.b2.ln())
    }

    fn slope(&self, s: f64) -> f64 {
        self.p.a * self.p.b1 * self.share(s) - self.p.c
    }

    /// Log-determinant at which the gradient vanishes.
    pub fn critical_ln_det(&self) -> f64 {
        let Problem4Params { a, b1, b2, c } = self.p;
        (c * b2 / (a * b1 - c)).ln() / b1
    }
}

impl Objective for LogDetRatio {
    fn name(&self) -> &str {
        "logdetratio"
    }

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Spd(self.n)
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_kind(self.kind(), p)?;
        let s = spd_point(p).ln_det();
        Ok(self.p.a * log_add_exp(self.p.b1 * s, self.p.b2.ln()) - self.p.c * s)
    }

    fn egrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        Ok(Tangent::Spd(x.inverse().scale(self.slope(x.ln_det()))))
    }

    fn rgrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        Ok(Tangent::Spd(x.as_sym().scale(self.slope(x.ln_det()))))
    }

    fn gradients(&self, p: &Point) -> Result<(Tangent, Tangent)> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        let k = self.slope(x.ln_det());
        Ok((Tangent::Spd(x.inverse().scale(k)), Tangent::Spd(x.as_sym().scale(k))))
    }

    fn has_rgrad_shortcut(&self) -> bool {
        true
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.p.a * self.p.b1 * self.p.b1 * self.n as f64)
    }

    fn known_fstar(&self) -> Option<f64> {
        let Problem4Params { a, b1, b2, c } = self.p;
        let r = a * b1 - c;
        Some(a * (a * b1 * b2 / r).ln() - (c / b1) * (c * b2 / r).ln())
    }

    fn hess_apply(&self, p: &Point, v: &Tangent) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        let s = x.ln_det();
        let sig = self.share(s);
        let g2 = self.p.a * self.p.b1 * self.p.b1 * sig * (1.0 - sig);
        logdet_hessian(x, self.slope(s), g2, tangent_sym(v)?).map(Tangent::Spd)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawMatrices {
    matrices: Vec<Vec<Vec<f64>>>,
}

/// SPD anchors `A₁, …, A_m` of equal size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrices", into = "RawMatrices")]
pub struct KarcherSpdData {
    mats: Vec<SpdMatrix>,
}

impl KarcherSpdData {
    pub fn new(mats: Vec<SpdMatrix>) -> Result<Self> {
        let first = mats.first().ok_or(Error::MissingData("karcher mean needs at least one matrix"))?;
        let n = first.dim();
        for a in &mats {
            if a.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.dim() });
            }
        }
        Ok(Self { mats })
    }

    pub fn matrices(&self) -> &[SpdMatrix] {
        &self.mats
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    /// `exp((1/m) Σ ln Aᵢ)`.
    pub fn explog_mean(&self) -> Result<SpdMatrix> {
        let n = self.dim();
        let mut acc = DMatrix::zeros(n, n);
        for a in &self.mats {
            acc += a.log().matrix();
        }
        acc /= self.mats.len() as f64;
        SpdMatrix::exp_of(&SymMatrix::symmetrize(acc)?)
    }

    /// `maxᵢ d(X, Aᵢ)`.
    pub fn radius_from(&self, x: &SpdMatrix) -> Result<f64> {
        self.mats.iter().try_fold(0.0f64, |r, a| Ok(r.max(spd::dist(x, a)?)))
    }

    fn all_diagonal(&self) -> bool {
        self.mats.iter().all(|a| {
            let m = a.matrix();
            (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
        })
    }
}

impl TryFrom<RawMatrices> for KarcherSpdData {
    type Error = Error;

    fn try_from(raw: RawMatrices) -> Result<Self> {
        let mut mats = Vec::with_capacity(raw.matrices.len());
        for rows in raw.matrices {
            let n = rows.len();
            if let Some(bad) = rows.iter().find(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            mats.push(SpdMatrix::new(DMatrix::from_row_slice(n, n, &flat))?);
        }
        Self::new(mats)
    }
}

impl From<KarcherSpdData> for RawMatrices {
    fn from(d: KarcherSpdData) -> Self {
        RawMatrices {
            matrices: d
                .mats
                .iter()
                .map(|a| {
                    let m = a.matrix();
                    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
                })
                .collect(),
        }
    }
}

/// `½ Σᵢ ‖ln(X^{-1/2} Aᵢ X^{-1/2})‖²_F`.
#[derive(Debug, Clone)]
pub struct KarcherSpd {
    data: KarcherSpdData,
}

pub fn karcher_spd(data: KarcherSpdData) -> Result<KarcherSpd> {
    Ok(KarcherSpd { data })
}

impl KarcherSpd {
    pub fn data(&self) -> &KarcherSpdData {
        &self.data
    }

    /// `Σᵢ ln(X^{-1/2} Aᵢ X^{-1/2})` together with `X^{1/2}` and `X^{-1/2}`.
    fn log_sum(&self, x: &SpdMatrix) -> Result<(DMatrix<f64>, SymMatrix, SymMatrix)> {
        let n = x.dim();
        let sqrt = x.sqrt();
        let isqrt = x.inv_sqrt();
        let mut acc = DMatrix::zeros(n, n);
        for a in &self.data.mats {
            let m = SymMatrix::symmetrize(isqrt.matrix() * a.matrix() * isqrt.matrix())?;
            let eig = sym_eig(&m)?;
            if eig.smallest() <= 0.0 {
                return Err(Error::NotPositiveDefinite { eigenvalue: eig.smallest(), largest: eig.largest() });
            }
            acc += eig.compose(f64::ln).matrix();
        }
        Ok((acc, sqrt, isqrt))
    }
}

impl Objective for KarcherSpd {
    fn name(&self) -> &str {
        "karcher_spd"
    }

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Spd(self.data.dim())
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_kind(self.kind(), p)?;
        let x = spd_point(p);
        let mut total = 0.0;
        for a in &self.data.mats {
            let d = spd::dist(x, a)?;
            total += d * d;
        }
        Ok(0.5 * total)
    }

    /// `f'(X) = X⁻¹ grad f(X) X⁻¹ = −X^{-1/2} (Σ ln Mᵢ) X^{-1/2}`.
    fn egrad(&self, p: &Point) -> Result<Tangent> {
        Ok(self.gradients(p)?.0)
    }

    /// `grad f(X) = −X^{1/2} (Σ ln Mᵢ) X^{1/2}` with `Mᵢ = X^{-1/2} Aᵢ X^{-1/2}`.
    fn rgrad(&self, p: &Point) -> Result<Tangent> {
        Ok(self.gradients(p)?.1)
    }

    fn gradients(&self, p: &Point) -> Result<(Tangent, Tangent)> {
        check_kind(self.kind(), p)?;
        let (l, sqrt, isqrt) = self.log_sum(spd_point(p))?;
        let r = SymMatrix::symmetrize(-(sqrt.matrix() * &l * sqrt.matrix()))?;
        let g = SymMatrix::symmetrize(-(isqrt.matrix() * &l * isqrt.matrix()))?;
        Ok((Tangent::Spd(g), Tangent::Spd(r)))
    }

    fn has_rgrad_shortcut(&self) -> bool {
        true
    }

    /// Known for a single anchor and for commuting diagonal anchors.
    fn known_minimizer(&self) -> Option<Point> {
        if self.data.mats.len() == 1 {
            return Some(Point::Spd(self.data.mats[0].clone()));
        }
        if self.data.all_diagonal() {
            return self.data.explog_mean().ok().map(Point::Spd);
        }
        None
    }
}
