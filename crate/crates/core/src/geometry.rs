//! Manifold-agnostic points, tangents and geometry operations.
//!
//! Every function here dispatches on [`ManifoldKind`] to the concrete
//! implementations in [`crate::orthant`] and [`crate::spd`]. All operations are
//! pure; nothing is cached across calls beyond what a [`Point`] already holds.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::orthant::{self, OrthantPoint};
use crate::spd::{self, SpdMatrix, SymMatrix};

/// Which manifold a point lives on, with its dimension parameter `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    /// `ℝⁿ₊₊` with `G(x) = diag(x⁻²)`.
    Orthant(usize),
    /// `n × n` SPD matrices with the affine-invariant metric.
    Spd(usize),
}

impl ManifoldKind {
    pub fn n(&self) -> usize {
        match *self {
            ManifoldKind::Orthant(n) | ManifoldKind::Spd(n) => n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::InvalidParameter("manifold dimension must be at least 1".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Orthant(n) => write!(f, "orthant({n})"),
            ManifoldKind::Spd(n) => write!(f, "spd({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Orthant(OrthantPoint),
    Spd(SpdMatrix),
}

/// Tangent vectors and Euclidean gradients share this shape-level type.
#[derive(Debug, Clone, PartialEq)]
pub enum Tangent {
    Orthant(DVector<f64>),
    Spd(SymMatrix),
}

impl Point {
    pub fn kind(&self) -> ManifoldKind {
        match self {
            Point::Orthant(x) => ManifoldKind::Orthant(x.dim()),
            Point::Spd(x) => ManifoldKind::Spd(x.dim()),
        }
    }

    pub fn as_orthant(&self) -> Option<&OrthantPoint> {
        match self {
            Point::Orthant(x) => Some(x),
            Point::Spd(_) => None,
        }
    }

    pub fn as_spd(&self) -> Option<&SpdMatrix> {
        match self {
            Point::Spd(x) => Some(x),
            Point::Orthant(_) => None,
        }
    }

    /// Re-runs the validity check from the raw coordinates.
    pub fn revalidate(&self) -> Result<()> {
        match self {
            Point::Orthant(x) => OrthantPoint::new(x.coords().clone()).map(|_| ()),
            Point::Spd(x) => SpdMatrix::new(x.matrix().clone()).map(|_| ()),
        }
    }

    /// Coordinates flattened entrywise (row-major for matrices).
    pub fn flat(&self) -> Vec<f64> {
        match self {
            Point::Orthant(x) => x.coords().as_slice().to_vec(),
            Point::Spd(x) => row_major(x.matrix()),
        }
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

impl Tangent {
    pub fn zeros(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Orthant(n) => Tangent::Orthant(DVector::zeros(n)),
            ManifoldKind::Spd(n) => Tangent::Spd(SymMatrix::zeros(n)),
        }
    }

    pub fn shape_kind(&self) -> ManifoldKind {
        match self {
            Tangent::Orthant(v) => ManifoldKind::Orthant(v.len()),
            Tangent::Spd(v) => ManifoldKind::Spd(v.dim()),
        }
    }

    pub fn scale(&self, t: f64) -> Tangent {
        match self {
            Tangent::Orthant(v) => Tangent::Orthant(v * t),
            Tangent::Spd(v) => Tangent::Spd(v.scale(t)),
        }
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, t: f64, other: &Tangent) -> Result<Tangent> {
        match (self, other) {
            (Tangent::Orthant(a), Tangent::Orthant(b)) if a.len() == b.len() => {
                Ok(Tangent::Orthant(a + b * t))
            }
            (Tangent::Spd(a), Tangent::Spd(b)) if a.dim() == b.dim() => {
                Ok(Tangent::Spd(SymMatrix::symmetrized(a.matrix() + b.matrix() * t)))
            }
            _ => Err(shape_mismatch(self.shape_kind(), other.shape_kind())),
        }
    }

    /// Flat pairing `gᵀv` (vectors) or `tr(g v)` (symmetric matrices).
    pub fn flat_pairing(&self, other: &Tangent) -> Result<f64> {
        match (self, other) {
            (Tangent::Orthant(a), Tangent::Orthant(b)) if a.len() == b.len() => Ok(a.dot(b)),
            (Tangent::Spd(a), Tangent::Spd(b)) if a.dim() == b.dim() => {
                Ok(a.matrix().component_mul(b.matrix()).sum())
            }
            _ => Err(shape_mismatch(self.shape_kind(), other.shape_kind())),
        }
    }

    /// Entrywise maximum absolute value.
    pub fn inf_norm(&self) -> f64 {
        let it: Box<dyn Iterator<Item = &f64>> = match self {
            Tangent::Orthant(v) => Box::new(v.iter()),
            Tangent::Spd(v) => Box::new(v.matrix().iter()),
        };
        it.fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Euclidean (Frobenius) norm of the coordinates.
    pub fn flat_norm(&self) -> f64 {
        match self {
            Tangent::Orthant(v) => v.norm(),
            Tangent::Spd(v) => v.matrix().norm(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Tangent::Orthant(v) => v.iter().all(|x| x.is_finite()),
            Tangent::Spd(v) => v.matrix().iter().all(|x| x.is_finite()),
        }
    }

    pub fn as_orthant(&self) -> Option<&DVector<f64>> {
        match self {
            Tangent::Orthant(v) => Some(v),
            Tangent::Spd(_) => None,
        }
    }

    pub fn as_spd(&self) -> Option<&SymMatrix> {
        match self {
            Tangent::Spd(v) => Some(v),
            Tangent::Orthant(_) => None,
        }
    }
}

fn shape_mismatch(expected: ManifoldKind, found: ManifoldKind) -> Error {
    match (expected, found) {
        (ManifoldKind::Orthant(a), ManifoldKind::Orthant(b)) | (ManifoldKind::Spd(a), ManifoldKind::Spd(b)) => {
            Error::DimensionMismatch { expected: a, found: b }
        }
        _ => Error::KindMismatch { expected: expected.to_string(), found: found.to_string() },
    }
}

pub(crate) fn check_point(kind: ManifoldKind, p: &Point) -> Result<()> {
    kind.validate()?;
    if p.kind() != kind {
        return Err(shape_mismatch(kind, p.kind()));
    }
    Ok(())
}

fn check_tangent(kind: ManifoldKind, v: &Tangent) -> Result<()> {
    if v.shape_kind() != kind {
        return Err(shape_mismatch(kind, v.shape_kind()));
    }
    Ok(())
}

/// Riemannian inner product `⟨u, v⟩_p`.
pub fn inner(kind: ManifoldKind, p: &Point, u: &Tangent, v: &Tangent) -> Result<f64> {
    check_point(kind, p)?;
    check_tangent(kind, u)?;
    check_tangent(kind, v)?;
    match (p, u, v) {
        (Point::Orthant(x), Tangent::Orthant(u), Tangent::Orthant(v)) => orthant::inner(x, u, v),
        (Point::Spd(x), Tangent::Spd(u), Tangent::Spd(v)) => spd::inner(x, u, v),
        _ => unreachable!("kinds checked above"),
    }
}

pub fn norm(kind: ManifoldKind, p: &Point, v: &Tangent) -> Result<f64> {
    check_point(kind, p)?;
    check_tangent(kind, v)?;
    match (p, v) {
        (Point::Orthant(x), Tangent::Orthant(v)) => orthant::norm(x, v),
        (Point::Spd(x), Tangent::Spd(v)) => spd::norm(x, v),
        _ => unreachable!("kinds checked above"),
    }
}

/// Exponential map `exp_p(v)`; never projects, reports overflow instead.
pub fn exp_map(kind: ManifoldKind, p: &Point, v: &Tangent) -> Result<Point> {
    check_point(kind, p)?;
    check_tangent(kind, v)?;
    match (p, v) {
        (Point::Orthant(x), Tangent::Orthant(v)) => orthant::exp(x, v).map(Point::Orthant),
        (Point::Spd(x), Tangent::Spd(v)) => spd::exp(x, v).map(Point::Spd),
        _ => unreachable!("kinds checked above"),
    }
}

/// Riemannian distance.
pub fn dist(kind: ManifoldKind, p: &Point, q: &Point) -> Result<f64> {
    check_point(kind, p)?;
    check_point(kind, q)?;
    match (p, q) {
        (Point::Orthant(x), Point::Orthant(y)) => orthant::dist(x, y),
        (Point::Spd(x), Point::Spd(y)) => spd::dist(x, y),
        _ => unreachable!("kinds checked above"),
    }
}

/// Converts a Euclidean gradient into the Riemannian gradient at `p`.
pub fn egrad_to_rgrad(kind: ManifoldKind, p: &Point, g: &Tangent) -> Result<Tangent> {
    check_point(kind, p)?;
    check_tangent(kind, g)?;
    match (p, g) {
        (Point::Orthant(x), Tangent::Orthant(g)) => orthant::egrad_to_rgrad(x, g).map(Tangent::Orthant),
        (Point::Spd(x), Tangent::Spd(g)) => spd::egrad_to_rgrad(x, g).map(Tangent::Spd),
        _ => unreachable!("kinds checked above"),
    }
}

/// `‖grad f(p)‖` computed directly from the Euclidean gradient.
pub fn rgrad_norm(kind: ManifoldKind, p: &Point, g: &Tangent) -> Result<f64> {
    check_point(kind, p)?;
    check_tangent(kind, g)?;
    match (p, g) {
        (Point::Orthant(x), Tangent::Orthant(g)) => orthant::rgrad_norm(x, g),
        (Point::Spd(x), Tangent::Spd(g)) => spd::rgrad_norm(x, g),
        _ => unreachable!("kinds checked above"),
    }
}
