use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_kind, log_add_exp, require, sigmoid, Objective};
use crate::error::{Error, Result};
use crate::geometry::{ManifoldKind, Point, Tangent};
use crate::orthant::{self, OrthantPoint};

fn coords(p: &Point) -> &DVector<f64> {
    p.as_orthant().expect("kind checked by caller").coords()
}

fn tangent_vec(v: &Tangent) -> Result<&DVector<f64>> {
    v.as_orthant().ok_or_else(|| Error::KindMismatch {
        expected: "orthant tangent".into(),
        found: v.shape_kind().to_string(),
    })
}

fn check_lengths(n: usize, vs: &[(&str, &Vec<f64>)]) -> Result<()> {
    require(n >= 1, || "parameter vectors must be non-empty".into())?;
    for (name, v) in vs {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        require(v.iter().all(|x| x.is_finite()), || format!("{name} has non-finite entries"))?;
    }
    Ok(())
}

/// `Σᵢ −aᵢ e^{−bᵢ xᵢ} + cᵢ ln²xᵢ + dᵢ ln xᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem1Params {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl Problem1Params {
    /// The same scalar parameters in every coordinate.
    pub fn uniform(n: usize, a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a: vec![a; n], b: vec![b; n], c: vec![c; n], d: vec![d; n] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        check_lengths(n, &[("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)])?;
        for i in 0..n {
            let (a, b, c, d) = (self.a[i], self.b[i], self.c[i], self.d[i]);
            require(a >= 0.0 && b >= 0.0 && d >= 0.0, || format!("a, b, d must be non-negative at {i}"))?;
            require(c > a && c > 0.0, || format!("need c > a at {i} (a={a}, c={c})"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Log2Log {
    p: Problem1Params,
}

pub fn log2log(params: Problem1Params) -> Result<Log2Log> {
    params.validate()?;
    Ok(Log2Log { p: params })
}

impl Log2Log {
    pub fn params(&self) -> &Problem1Params {
        &self.p
    }

    /// Euclidean second derivative of coordinate `i`.
    pub fn second_derivative(&self, i: usize, x: f64) -> f64 {
        let (a, b, c, d) = (self.p.a[i], self.p.b[i], self.p.c[i], self.p.d[i]);
        -a * b * b * (-b * x).exp() + 2.0 * c * (1.0 - x.ln()) / (x * x) - d / (x * x)
    }

    /// Diagonal of the Riemannian hessian, `aᵢbᵢe^{−bᵢxᵢ}(xᵢ − bᵢxᵢ²) + 2cᵢ`.
    pub fn riemannian_hessian_diag(&self, x: &OrthantPoint) -> DVector<f64> {
        DVector::from_fn(x.dim(), |i, _| {
            let (a, b, c) = (self.p.a[i], self.p.b[i], self.p.c[i]);
            let xi = x.coords()[i];
            a * b * (-b * xi).exp() * (xi - b * xi * xi) + 2.0 * c
        })
    }
}

impl Objective for Log2Log {
    fn name(&self) -> &str {
        "log2log"
    }

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Orthant(self.p.dim())
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        Ok((0..x.len())
            .map(|i| {
                let (a, b, c, d) = (self.p.a[i], self.p.b[i], self.p.c[i], self.p.d[i]);
                let l = x[i].ln();
                -a * (-b * x[i]).exp() + c * l * l + d * l
            })
            .sum())
    }

    fn egrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        Ok(Tangent::Orthant(DVector::from_fn(x.len(), |i, _| {
            let (a, b, c, d) = (self.p.a[i], self.p.b[i], self.p.c[i], self.p.d[i]);
            let xi = x[i];
            a * b * (-b * xi).exp() + (2.0 * c * xi.ln() + d) / xi
        })))
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some((0..self.p.dim()).map(|i| (self.p.a[i] + 2.0 * self.p.c[i]).powi(2)).sum())
    }

    fn hess_apply(&self, p: &Point, v: &Tangent) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = p.as_orthant().expect("kind checked");
        let g = self.egrad(p)?;
        let h = DMatrix::from_diagonal(&DVector::from_fn(x.dim(), |i, _| {
            self.second_derivative(i, x.coords()[i])
        }));
        orthant::hess_apply(x, g.as_orthant().expect("orthant"), &h, tangent_vec(v)?).map(Tangent::Orthant)
    }
}

/// `Σᵢ aᵢ ln(xᵢ^{dᵢ} + bᵢ) − cᵢ ln xᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem2Params {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl Problem2Params {
    pub fn uniform(n: usize, a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a: vec![a; n], b: vec![b; n], c: vec![c; n], d: vec![d; n] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        check_lengths(n, &[("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)])?;
        for i in 0..n {
            let (a, b, c, d) = (self.a[i], self.b[i], self.c[i], self.d[i]);
            require(a > 0.0 && b > 0.0 && c > 0.0, || format!("a, b, c must be positive at {i}"))?;
            require(d >= 2.0, || format!("need d >= 2 at {i} (d={d})"))?;
            require(c < a * d, || format!("need c < a d at {i}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LogLog {
    p: Problem2Params,
}

pub fn loglog(params: Problem2Params) -> Result<LogLog> {
    params.validate()?;
    Ok(LogLog { p: params })
}

impl LogLog {
    pub fn params(&self) -> &Problem2Params {
        &self.p
    }

    /// `sᵢ = xᵢ^{dᵢ} / (xᵢ^{dᵢ} + bᵢ)`.
    fn share(&self, i: usize, x: f64) -> f64 {
        sigmoid(self.p.d[i] * x.ln() - self.p.b[i].ln())
    }

    /// `maxᵢ aᵢdᵢ²/4`, the exact supremum of the Riemannian hessian norm.
    pub fn tight_lipschitz(&self) -> f64 {
        (0..self.p.dim())
            .map(|i| self.p.a[i] * self.p.d[i] * self.p.d[i] / 4.0)
            .fold(0.0, f64::max)
    }

    pub fn minimizer(&self) -> OrthantPoint {
        let x = DVector::from_fn(self.p.dim(), |i, _| {
            let (a, b, c, d) = (self.p.a[i], self.p.b[i], self.p.c[i], self.p.d[i]);
            (b * c / (a * d - c)).powf(1.0 / d)
        });
        OrthantPoint::new(x).expect("constraints make the minimizer positive")
    }
}

impl Objective for LogLog {
    fn name(&self) -> &str {
        "loglog"
    }

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Orthant(self.p.dim())
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        Ok((0..x.len())
            .map(|i| {
                let l = x[i].ln();
                self.p.a[i] * log_add_exp(self.p.d[i] * l, self.p.b[i].ln()) - self.p.c[i] * l
            })
            .sum())
    }

    fn egrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        Ok(Tangent::Orthant(DVector::from_fn(x.len(), |i, _| {
            let s = self.share(i, x[i]);
            (self.p.a[i] * self.p.d[i] * s - self.p.c[i]) / x[i]
        })))
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some((0..self.p.dim()).map(|i| (self.p.a[i] * self.p.d[i].powi(2)).powi(2)).sum())
    }

    fn known_minimizer(&self) -> Option<Point> {
        Some(Point::Orthant(self.minimizer()))
    }

    fn hess_apply(&self, p: &Point, v: &Tangent) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = p.as_orthant().expect("kind checked");
        let g = self.egrad(p)?;
        let h = DMatrix::from_diagonal(&DVector::from_fn(x.dim(), |i, _| {
            let (a, c, d) = (self.p.a[i], self.p.c[i], self.p.d[i]);
            let xi = x.coords()[i];
            let s = self.share(i, xi);
            (a * d * (d * s * (1.0 - s) - s) + c) / (xi * xi)
        }));
        orthant::hess_apply(x, g.as_orthant().expect("orthant"), &h, tangent_vec(v)?).map(Tangent::Orthant)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPoints {
    points: Vec<Vec<f64>>,
}

/// Anchor points `w¹, …, wᵐ` for the orthant center of mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoints", into = "RawPoints")]
pub struct ComOrthantData {
    points: Vec<OrthantPoint>,
}

impl ComOrthantData {
    pub fn new(points: Vec<OrthantPoint>) -> Result<Self> {
        let first = points.first().ok_or(Error::MissingData("center of mass needs at least one point"))?;
        let n = first.dim();
        for p in &points {
            if p.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[OrthantPoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Entrywise geometric mean `(Πⱼ wᵢʲ)^{1/m}`.
    pub fn geometric_mean(&self) -> OrthantPoint {
        let m = self.points.len() as f64;
        let mut acc = DVector::zeros(self.dim());
        for p in &self.points {
            acc += p.log_coords();
        }
        OrthantPoint::new(acc.map(|s| (s / m).exp())).expect("exp is positive")
    }
}

impl TryFrom<RawPoints> for ComOrthantData {
    type Error = Error;

    fn try_from(raw: RawPoints) -> Result<Self> {
        let pts = raw.points.iter().map(|p| OrthantPoint::from_slice(p)).collect::<Result<Vec<_>>>()?;
        Self::new(pts)
    }
}

impl From<ComOrthantData> for RawPoints {
    fn from(d: ComOrthantData) -> Self {
        RawPoints { points: d.points.iter().map(|p| p.coords().as_slice().to_vec()).collect() }
    }
}

/// `½ Σⱼ d²(wʲ, x)`.
#[derive(Debug, Clone)]
pub struct ComOrthant {
    data: ComOrthantData,
    // logs[i] = Σⱼ ln wᵢʲ
    log_sum: DVector<f64>,
}

pub fn com_orthant(data: ComOrthantData) -> Result<ComOrthant> {
    let mut log_sum = DVector::zeros(data.dim());
    for p in data.points() {
        log_sum += p.log_coords();
    }
    Ok(ComOrthant { data, log_sum })
}

impl ComOrthant {
    pub fn data(&self) -> &ComOrthantData {
        &self.data
    }

    fn m(&self) -> f64 {
        self.data.points.len() as f64
    }

    /// `Σⱼ ln(xᵢ / wᵢʲ)` per coordinate.
    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = self.m();
        DVector::from_fn(x.len(), |i, _| m * x[i].ln() - self.log_sum[i])
    }
}

impl Objective for ComOrthant {
    fn name(&self) -> &str {
        "com_orthant"
    }

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Orthant(self.data.dim())
    }

    fn value(&self, p: &Point) -> Result<f64> {
        check_kind(self.kind(), p)?;
        let lx = p.as_orthant().expect("kind checked").log_coords();
        Ok(0.5
            * self
                .data
                .points
                .iter()
                .map(|w| (&lx - w.log_coords()).norm_squared())
                .sum::<f64>())
    }

    fn egrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        let r = self.residual(x);
        Ok(Tangent::Orthant(r.zip_map(x, |ri, xi| ri / xi)))
    }

    fn rgrad(&self, p: &Point) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        let r = self.residual(x);
        Ok(Tangent::Orthant(r.zip_map(x, |ri, xi| ri * xi)))
    }

    fn gradients(&self, p: &Point) -> Result<(Tangent, Tangent)> {
        check_kind(self.kind(), p)?;
        let x = coords(p);
        let r = self.residual(x);
        Ok((
            Tangent::Orthant(r.zip_map(x, |ri, xi| ri / xi)),
            Tangent::Orthant(r.zip_map(x, |ri, xi| ri * xi)),
        ))
    }

    fn has_rgrad_shortcut(&self) -> bool {
        true
    }

    /// The hessian is `m` times the identity in log-coordinates.
    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.m())
    }

    fn known_minimizer(&self) -> Option<Point> {
        Some(Point::Orthant(self.data.geometric_mean()))
    }

    fn hess_apply(&self, p: &Point, v: &Tangent) -> Result<Tangent> {
        check_kind(self.kind(), p)?;
        let x = p.as_orthant().expect("kind checked");
        let xs = x.coords();
        let (g, _) = self.gradients(p)?;
        let m = self.m();
        let r = self.residual(xs);
        let h = DMatrix::from_diagonal(&DVector::from_fn(x.dim(), |i, _| (m - r[i]) / (xs[i] * xs[i])));
        orthant::hess_apply(x, g.as_orthant().expect("orthant"), &h, tangent_vec(v)?).map(Tangent::Orthant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn pt(x: &[f64]) -> Point {
        Point::Orthant(OrthantPoint::from_slice(x).unwrap())
    }

    #[test]
    fn log2log_hand_example() {
        let f = log2log(Problem1Params::uniform(1, 0.0, 1.0, 1.0, 0.0)).unwrap();
        let p = pt(&[E]);
        assert!((f.value(&p).unwrap() - 1.0).abs() < 1e-15);
        let g = f.egrad(&p).unwrap();
        assert!((g.as_orthant().unwrap()[0] - 2.0 / E).abs() < 1e-15);
    }

    #[test]
    fn log2log_is_not_euclidean_convex_at_one() {
        // f''(1) = −a b² e^{−b} + 2c − d
        let f = log2log(Problem1Params::uniform(1, 3.77, 8.17, 11.10, 5.92)).unwrap();
        let g = log2log(Problem1Params::uniform(1, 1.0, 1.0, 1.5, 5.0)).unwrap();
        assert!(f.second_derivative(0, 1.0) > 0.0);
        assert!(g.second_derivative(0, 1.0) < 0.0);
    }

    #[test]
    fn log2log_params_are_validated() {
        assert!(log2log(Problem1Params::uniform(2, 2.0, 1.0, 1.0, 1.0)).is_err());
        assert!(log2log(Problem1Params::uniform(2, 1.0, -1.0, 2.0, 1.0)).is_err());
        let mut p = Problem1Params::uniform(2, 1.0, 1.0, 2.0, 1.0);
        p.d.pop();
        assert!(log2log(p).is_err());
    }

    #[test]
    fn log2log_hessian_matches_closed_diagonal() {
        let f = log2log(Problem1Params::uniform(2, 3.0, 2.0, 4.0, 1.0)).unwrap();
        let x = OrthantPoint::from_slice(&[0.7, 2.5]).unwrap();
        let p = Point::Orthant(x.clone());
        let v = Tangent::Orthant(DVector::from_column_slice(&[1.0, -2.0]));
        let hv = f.hess_apply(&p, &v).unwrap();
        let diag = f.riemannian_hessian_diag(&x);
        let expect = diag.component_mul(v.as_orthant().unwrap());
        assert!((hv.as_orthant().unwrap() - expect).norm() < 1e-12);
    }

    #[test]
    fn loglog_minimizer() {
        let f = loglog(Problem2Params::uniform(3, 1.0, 1.0, 1.0, 2.0)).unwrap();
        let x = f.known_minimizer().unwrap();
        assert!(x.flat().iter().all(|&c| (c - 1.0).abs() < 1e-15));
        let g = f.rgrad(&x).unwrap();
        assert!(g.flat_norm() < 1e-10);
        assert_eq!(f.lipschitz_bound(), Some(3.0 * 16.0));
        assert_eq!(f.tight_lipschitz(), 1.0);
    }

    #[test]
    fn loglog_constraints() {
        assert!(loglog(Problem2Params::uniform(1, 1.0, 1.0, 2.5, 2.0)).is_err());
        assert!(loglog(Problem2Params::uniform(1, 1.0, 1.0, 0.5, 1.5)).is_err());
        assert!(loglog(Problem2Params::uniform(1, 1.0, 0.0, 0.5, 2.0)).is_err());
    }

    #[test]
    fn loglog_value_is_stable_for_large_x() {
        let f = loglog(Problem2Params::uniform(1, 2.0, 3.0, 1.0, 10.0)).unwrap();
        let v = f.value(&pt(&[1e80])).unwrap();
        let expected = 2.0 * 10.0 * 1e80f64.ln() - 1e80f64.ln();
        assert!((v - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn com_orthant_examples() {
        let one = com_orthant(ComOrthantData::new(vec![OrthantPoint::from_slice(&[3.0, 0.2]).unwrap()]).unwrap()).unwrap();
        let w = one.known_minimizer().unwrap();
        assert!((w.flat()[0] - 3.0).abs() < 1e-15);
        assert!(one.known_fstar().unwrap().abs() < 1e-30);

        let two = com_orthant(
            ComOrthantData::new(vec![OrthantPoint::from_slice(&[1.0]).unwrap(), OrthantPoint::from_slice(&[4.0]).unwrap()])
                .unwrap(),
        )
        .unwrap();
        let x = two.known_minimizer().unwrap();
        assert!((x.flat()[0] - 2.0).abs() < 1e-15);
        assert!(two.rgrad(&x).unwrap().flat_norm() < 1e-15);
        assert_eq!(two.lipschitz_bound(), Some(2.0));
    }

    #[test]
    fn com_orthant_hessian_is_m_times_identity() {
        let data = ComOrthantData::new(vec![
            OrthantPoint::from_slice(&[1.0, 5.0]).unwrap(),
            OrthantPoint::from_slice(&[4.0, 0.5]).unwrap(),
            OrthantPoint::from_slice(&[9.0, 2.0]).unwrap(),
        ])
        .unwrap();
        let f = com_orthant(data).unwrap();
        let v = Tangent::Orthant(DVector::from_column_slice(&[0.3, -1.1]));
        let hv = f.hess_apply(&pt(&[7.0, 0.01]), &v).unwrap();
        assert!((hv.as_orthant().unwrap() - v.as_orthant().unwrap() * 3.0).norm() < 1e-12);
    }

    #[test]
    fn com_orthant_data_round_trips_through_serde_shape() {
        let data = ComOrthantData::new(vec![OrthantPoint::from_slice(&[1.0, 2.0]).unwrap()]).unwrap();
        let raw: RawPoints = data.clone().into();
        assert_eq!(ComOrthantData::try_from(raw).unwrap(), data);
        let bad = RawPoints { points: vec![vec![1.0, 2.0], vec![1.0]] };
        assert!(ComOrthantData::try_from(bad).is_err());
        assert!(ComOrthantData::new(vec![]).is_err());
    }
}
