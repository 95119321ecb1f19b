//! Seeded sampling helpers. All randomness in this crate flows through
//! `ChaCha8Rng` with caller-supplied seeds so every run is reproducible.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;
use rand_core::RngCore;

/// Uniform in [0, 1), 53-bit resolution.
pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn uniform_in(rng: &mut impl RngCore, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(rng)
}

/// Standard normal via Box-Muller. One draw per call; simplicity over thrift.
pub(crate) fn std_normal(rng: &mut impl RngCore) -> f64 {
    let u1 = 1.0 - unit_f64(rng); // (0, 1] so the log is finite
    let u2 = unit_f64(rng);
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

/// Uniform draw from the closed ball of the given radius around `center`.
pub(crate) fn sample_ball(rng: &mut impl RngCore, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let mut dir: Vec<f64> = (0..d).map(|_| std_normal(rng)).collect();
    let mut norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        dir[0] = 1.0;
        norm = 1.0;
    }
    let r = radius * unit_f64(rng).powf(1.0 / d as f64);
    center
        .iter()
        .zip(&dir)
        .map(|(c, u)| c + r * u / norm)
        .collect()
}
