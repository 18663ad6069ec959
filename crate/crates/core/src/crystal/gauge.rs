//! Phase conventions for field-free eigenvectors.

use std::sync::Arc;

use ndarray::ArrayViewMut1;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::registry::{Named, Registry};

pub trait GaugeFixing: Named + Send + Sync {
    /// Multiply the plane-wave coefficients of one band by a unit phase.
    fn fix(&self, k: f64, band: usize, coeffs: ArrayViewMut1<C64>);
}

/// Largest-modulus coefficient made real and positive (first index wins ties).
pub struct MaxRealPositive;

impl Named for MaxRealPositive {
    fn name(&self) -> &'static str {
        "max-real-positive"
    }
    fn describe(&self) -> &'static str {
        "largest plane-wave coefficient real positive"
    }
}

impl GaugeFixing for MaxRealPositive {
    fn fix(&self, _k: f64, _band: usize, mut coeffs: ArrayViewMut1<C64>) {
        let max = coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if max == 0.0 {
            return;
        }
        let pivot = coeffs.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap();
        let p = coeffs[pivot];
        let phase = p.conj() / p.norm();
        coeffs.mapv_inplace(|z| z * phase);
    }
}

/// Deterministic pseudo-random phase per (k, band); observables must not notice.
pub struct RandomPhase {
    pub seed: u64,
}

impl Named for RandomPhase {
    fn name(&self) -> &'static str {
        "random-phase"
    }
    fn describe(&self) -> &'static str {
        "seeded random phase per (k, band)"
    }
}

impl GaugeFixing for RandomPhase {
    fn fix(&self, k: f64, band: usize, coeffs: ArrayViewMut1<C64>) {
        let seed = self.seed ^ k.to_bits().rotate_left(17) ^ (band as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let theta: f64 = ChaCha8Rng::seed_from_u64(seed).random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let mut coeffs = coeffs;
        let phase = C64::from_polar(1.0, theta);
        coeffs.mapv_inplace(|z| z * phase);
    }
}

pub fn registry() -> Registry<dyn GaugeFixing> {
    Registry::<dyn GaugeFixing>::new("gauge-fixing strategy")
        .with(Arc::new(MaxRealPositive))
        .with(Arc::new(RandomPhase { seed: 0x5eed }))
}
