//! Random instances and starting points for every experiment.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use riemgrad::objectives::{
    ComOrthantData, KarcherSpdData, Problem1Params, Problem2Params, Problem3Params, Problem4Params,
};
use riemgrad::orthant::OrthantPoint;
use riemgrad::spd::SpdMatrix;

use crate::rng::{open, open_zero};

/// Problem 1: scalars `a, b, d ∈ (0, 10]`, `c ∈ (1.1a, 5a)`, shared by every coordinate.
pub fn gen_problem1(n: usize, r: &mut impl Rng) -> Problem1Params {
    let a = open_zero(r, 10.0);
    let b = open_zero(r, 10.0);
    let d = open_zero(r, 10.0);
    let c = open(r, 1.1 * a, 5.0 * a);
    Problem1Params::uniform(n, a, b, c, d)
}

/// Problem 2: `a, b ∈ (0, 10]`, `d ∈ (2, 10)`, `c = μ a d` with `μ ∈ (0, 1)`,
/// shared by every coordinate.
pub fn gen_problem2(n: usize, r: &mut impl Rng) -> Problem2Params {
    let a = open_zero(r, 10.0);
    let b = open_zero(r, 10.0);
    let d = open(r, 2.0, 10.0);
    let mu = open(r, 0.0, 1.0);
    Problem2Params::uniform(n, a, b, mu * a * d, d)
}

pub fn gen_problem3() -> Problem3Params {
    Problem3Params::default()
}

pub fn gen_problem4() -> Problem4Params {
    Problem4Params { a: 1.0, b1: 1.0, b2: 1.0, c: 0.5 }
}

/// Uniform start in the box `(0, hi]ⁿ`.
pub fn orthant_start(n: usize, hi: f64, r: &mut impl Rng) -> OrthantPoint {
    OrthantPoint::new(DVector::from_fn(n, |_, _| open_zero(r, hi))).expect("positive by construction")
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed by `R`'s diagonal).
pub fn random_orthogonal(n: usize, r: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let rd = qr.r().diagonal();
    for j in 0..n {
        if rd[j] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `U D Uᵀ` with eigenvalues uniform on `(lo, hi)` (`(0, hi]` when `lo = 0`).
/// Redraws in the rare case rounding leaves the result numerically singular.
pub fn random_spd(n: usize, lo: f64, hi: f64, r: &mut impl Rng) -> SpdMatrix {
    loop {
        let u = random_orthogonal(n, r);
        let d = DVector::from_fn(n, |_, _| if lo == 0.0 { open_zero(r, hi) } else { open(r, lo, hi) });
        let m = &u * DMatrix::from_diagonal(&d) * u.transpose();
        if let Ok(x) = SpdMatrix::new((&m + m.transpose()) * 0.5) {
            return x;
        }
    }
}

/// Karcher mean instance with the explog start and the radius `maxᵢ d(X₀, Aᵢ)`.
#[derive(Debug, Clone)]
pub struct KarcherInstance {
    pub data: KarcherSpdData,
    pub start: SpdMatrix,
    pub radius: f64,
}

/// `m` matrices with eigenvalues in `(0, 100)`.
pub fn gen_karcher_spd(n: usize, m: usize, r: &mut impl Rng) -> KarcherInstance {
    let mats = (0..m).map(|_| random_spd(n, 0.0, 100.0, r)).collect();
    let data = KarcherSpdData::new(mats).expect("same size, SPD");
    let start = data.explog_mean().expect("explog mean of SPD matrices");
    let radius = data.radius_from(&start).expect("distance to SPD anchors");
    KarcherInstance { data, start, radius }
}

#[derive(Debug, Clone)]
pub struct ComInstance {
    pub data: ComOrthantData,
    pub solution: OrthantPoint,
}

/// `m` anchors with entries uniform on `(0, hi]`.
pub fn gen_com_orthant(n: usize, m: usize, hi: f64, r: &mut impl Rng) -> ComInstance {
    let pts = (0..m).map(|_| orthant_start(n, hi, r)).collect();
    let data = ComOrthantData::new(pts).expect("positive anchors");
    let solution = data.geometric_mean();
    ComInstance { data, solution }
}
