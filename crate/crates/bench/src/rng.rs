//! Seeded random streams.
//!
//! Every draw comes from ChaCha8 seeded with the experiment seed. Instances
//! and starting points get their own stream number, so a run's random input
//! depends only on `(seed, purpose, index)` and never on scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; part of the stream number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Instance = 1,
    Start = 2,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((purpose as u64) << 48) | (index & ((1 << 48) - 1)));
    r
}

/// Stream for start `run` of instance `instance`.
pub fn start_stream(seed: u64, instance: usize, run: usize) -> ChaCha8Rng {
    stream(seed, Purpose::Start, ((instance as u64) << 24) | run as u64)
}

/// Uniform on `(0, hi]`.
pub fn open_zero(r: &mut impl Rng, hi: f64) -> f64 {
    hi * (1.0 - r.random::<f64>())
}

/// Uniform on `(lo, hi)`, both ends excluded.
pub fn open(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let u: f64 = r.random();
        let v = lo + (hi - lo) * u;
        if v > lo && v < hi {
            return v;
        }
    }
}
