//! Seeded state samplers shared by the verification suite and the
//! acceptance run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superint_core::{CartesianState, PolarState, PotentialSpec};

/// FNV-1a, used to give each named check its own stream from one seed.
fn fnv1a(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Generator for the check `name` under the master `seed`.
pub fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(name))
}

/// Polar state with `r ∈ [0.5, 1.5]`, `|p_r|, |p_φ| ≤ 1` and `φ` in the
/// central 60% of the potential's wedge.
pub fn wedge_state(rng: &mut impl Rng, pot: &PotentialSpec) -> PolarState {
    let (a, b) = pot.wedge().expect("polar family");
    PolarState::new(
        rng.random_range(0.5..1.5),
        a + (b - a) * rng.random_range(0.2..0.8),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

/// Cartesian state with every coordinate in `[-2, 2]`.
pub fn box_state(rng: &mut impl Rng) -> CartesianState {
    CartesianState::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

/// Cartesian state in the positive quadrant, at least `0.3` from both axes.
pub fn quadrant_state(rng: &mut impl Rng) -> CartesianState {
    CartesianState::new(
        rng.random_range(0.3..2.0),
        rng.random_range(0.3..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

/// State for the central-potential characterisation: `r ∈ [0.5, 2]`,
/// `|p_r| ≤ 2`, `0.1 ≤ |p_φ| ≤ 2`. The lower bound on `|p_φ|` keeps the
/// state generic: the rotation-law defect is proportional to `p_φ`.
pub fn step1_state(rng: &mut impl Rng) -> PolarState {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    PolarState::new(
        rng.random_range(0.5..2.0),
        rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.random_range(-2.0..2.0),
        sign * rng.random_range(0.1..2.0),
    )
}

/// Angle at fraction `u` of the open interval `(lo, hi)`.
pub fn angle_in(lo: f64, hi: f64, u: f64) -> f64 {
    lo + (hi - lo) * u
}
