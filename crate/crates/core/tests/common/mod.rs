#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use riemgrad::orthant::OrthantPoint;
use riemgrad::spd::{SpdMatrix, SymMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(r: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * r.sample::<f64, _>(StandardNormal))
}

/// Positive point with log-coordinates uniform in `(−spread, spread)`.
pub fn orthant_point(r: &mut ChaCha8Rng, n: usize, spread: f64) -> OrthantPoint {
    OrthantPoint::new(DVector::from_fn(n, |_, _| r.random_range(-spread..spread).exp())).unwrap()
}

pub fn orthogonal(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// `U D Uᵀ` with `D` uniform in `(lo, hi)`.
pub fn spd(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> SpdMatrix {
    let u = orthogonal(r, n);
    let d = DVector::from_fn(n, |_, _| r.random_range(lo..hi));
    SpdMatrix::new(&u * DMatrix::from_diagonal(&d) * u.transpose()).unwrap()
}

pub fn sym(r: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| scale * r.sample::<f64, _>(StandardNormal));
    SymMatrix::symmetrize((&g + g.transpose()) * 0.5).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
