#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superint_core::{PhaseState, PolarState, PotentialSpec, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v1(k: Rational) -> PotentialSpec {
    PotentialSpec::V1 {
        omega0: 1.0,
        k,
        ka: 1.0,
        kb: 0.4,
    }
}

pub fn v2(k: Rational) -> PotentialSpec {
    PotentialSpec::V2 {
        omega0: 1.0,
        k,
        ka: 1.0,
        kb: 0.4,
    }
}

pub fn rational(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Polar state with r in [0.5, 1.5], |p_r|, |p_φ| <= 1 and φ in the central
/// 60% of the potential's wedge.
pub fn wedge_state(rng: &mut ChaCha8Rng, pot: &PotentialSpec) -> PolarState {
    let (a, b) = pot.wedge().unwrap();
    PolarState::new(
        rng.random_range(0.5..1.5),
        a + (b - a) * rng.random_range(0.2..0.8),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

pub fn wedge_phase(rng: &mut ChaCha8Rng, pot: &PotentialSpec) -> PhaseState {
    wedge_state(rng, pot).into()
}

/// `|a - b| / max(|b|, 1)`.
pub fn scaled_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
