mod common;

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use common::*;
use num_complex::Complex;
use rand::Rng;
use superint_core::bracket::{evolution_residual, BracketConfig, Evolving};
use superint_core::observables::*;
use superint_core::{to_cartesian, CartesianState, PolarState, PotentialSpec, Rational};

fn random_cartesian(rng: &mut impl Rng, lo: f64) -> CartesianState {
    let mut coord = || {
        let v: f64 = rng.random_range(lo..2.0);
        if rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    };
    CartesianState::new(coord(), coord(), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}

#[test]
fn oscillator_factor_examples() {
    let (ax, _) = eval_a(&CartesianState::new(1.0, 0.0, 0.0, 0.0), 1, 1, 1.0).unwrap();
    assert_eq!(ax, Complex::new(0.0, 1.0));
}

#[test]
fn oscillator_factor_moduli() {
    let mut rng = rng(37);
    for (nx, ny) in [(1, 1), (2, 1), (3, 2)] {
        let omega0 = 0.8;
        let pot = PotentialSpec::Ho {
            omega1: nx as f64 * omega0,
            omega2: ny as f64 * omega0,
        };
        for _ in 0..200 {
            let s = random_cartesian(&mut rng, 0.0);
            let (ax, ay) = eval_a(&s, nx, ny, omega0).unwrap();
            let (ex, ey) = axis_energies(&s, &pot).unwrap();
            assert!(scaled_err(ax.norm_sqr(), 2.0 * ex) < 1e-13);
            assert!(scaled_err(ay.norm_sqr(), 2.0 * ey) < 1e-13);
            // |A_xx|² = (2E_x)^{n_x + n_y}
            let axx = eval_a_ij(ax, ax, nx, ny);
            let want = (2.0 * ex).powi((nx + ny) as i32);
            assert!(scaled_err(axx.norm_sqr(), want) < 1e-12, "{} {}", axx.norm_sqr(), want);
        }
    }
}

#[test]
fn isotropic_product_is_angular_momentum() {
    let mut rng = rng(41);
    for _ in 0..100 {
        let s = random_cartesian(&mut rng, 0.0);
        let omega0 = 1.7;
        let (ax, ay) = eval_a(&s, 1, 1, omega0).unwrap();
        let axy = eval_a_ij(ax, ay, 1, 1);
        let l = s.x * s.py - s.y * s.px;
        assert!(scaled_err(axy.im, omega0 * l) < 1e-13);
    }
}

#[test]
fn smorodinsky_winternitz_factor_examples() {
    let pot = PotentialSpec::GenSw {
        omega0: 1.0,
        nx: 1,
        ny: 1,
        k1: 0.0,
        k2: 0.0,
    };
    let mut rng = rng(43);
    for _ in 0..100 {
        let s = random_cartesian(&mut rng, 0.1);
        let (bx, _) = eval_b(&s, &pot).unwrap();
        let want = (s.px * s.px + s.x * s.x).powi(2);
        assert!(scaled_err(bx.norm_sqr(), want) < 1e-13);
    }
}

#[test]
fn smorodinsky_winternitz_moduli() {
    let mut rng = rng(47);
    for (nx, ny) in [(1, 1), (1, 3), (2, 3)] {
        let (omega0, k1, k2) = (0.9, 0.3, 0.7);
        let pot = PotentialSpec::GenSw { omega0, nx, ny, k1, k2 };
        for _ in 0..200 {
            let s = random_cartesian(&mut rng, 0.2);
            let (bx, by) = eval_b(&s, &pot).unwrap();
            let (ex, ey) = axis_energies(&s, &pot).unwrap();
            let wx = 4.0 * (ex * ex - k1 * (nx * nx) as f64 * omega0 * omega0);
            let wy = 4.0 * (ey * ey - k2 * (ny * ny) as f64 * omega0 * omega0);
            assert!(scaled_err(bx.norm_sqr(), wx) < 1e-10);
            assert!(scaled_err(by.norm_sqr(), wy) < 1e-10);
        }
    }
}

#[test]
fn b_factors_need_a_barrier_free_axis() {
    let pot = PotentialSpec::GenSw {
        omega0: 1.0,
        nx: 1,
        ny: 1,
        k1: 0.3,
        k2: 0.3,
    };
    assert!(eval_b(&CartesianState::new(0.0, 1.0, 0.0, 0.0), &pot).is_err());
}

fn v1_k2_kb0() -> PotentialSpec {
    PotentialSpec::V1 {
        omega0: 1.0,
        k: Rational::integer(2),
        ka: 1.0,
        kb: 0.0,
    }
}

#[test]
fn polar_constant_examples() {
    let s = PolarState::new(1.0, FRAC_PI_4, 0.0, 1.0);
    let pot = v1_k2_kb0();
    let j = eval_j(&s, &pot).unwrap();
    assert!((j.j1 - 3.0).abs() < 1e-14 && (j.j2 - 2.0).abs() < 1e-14);
    let f = eval_mn(&s, &pot).unwrap();
    assert!((f.m - Complex::new(0.0, -1.0)).norm() < 1e-14);
    assert!((f.n - Complex::new(0.0, SQRT_2)).norm() < 1e-14);
    assert!((f.lambda - SQRT_2).abs() < 1e-14);
    let k = eval_k(&s, &pot).unwrap();
    assert!((k - Complex::new(2.0, 0.0)).norm() < 1e-13, "{k}");
}

#[test]
fn pure_oscillator_limit() {
    let pot = PotentialSpec::V1 {
        omega0: 1.0,
        k: Rational::integer(2),
        ka: 0.0,
        kb: 0.0,
    };
    let mut rng = rng(53);
    for _ in 0..50 {
        let s = wedge_state(&mut rng, &pot);
        let j = eval_j(&s, &pot).unwrap();
        assert!((j.j2 - s.pphi * s.pphi).abs() < 1e-15);
        let lambda = eval_mn(&s, &pot).unwrap().lambda;
        assert!((lambda - s.pphi.abs() / (s.r * s.r)).abs() < 1e-14);
    }
}

#[test]
fn factors_require_positive_j2() {
    let pot = PotentialSpec::V1 {
        omega0: 1.0,
        k: Rational::integer(2),
        ka: 0.0,
        kb: 0.0,
    };
    assert!(eval_mn(&PolarState::new(1.0, 0.5, 0.3, 0.0), &pot).is_err());
}

#[test]
fn moduli_are_functions_of_separation_constants() {
    let mut rng = rng(59);
    for k in ["1", "2", "3", "3/2"] {
        let pot = v1(rational(k));
        for _ in 0..100 {
            let s = wedge_state(&mut rng, &pot);
            let j = eval_j(&s, &pot).unwrap();
            let f = eval_mn(&s, &pot).unwrap();
            let m2 = j.j1 * j.j1 - 4.0 * j.j2;
            let n2 = 0.4 * 0.4 / 4.0 + j.j2 * j.j2 - 1.0 * j.j2;
            assert!(scaled_err(f.m.norm_sqr(), m2) < 1e-12);
            assert!(scaled_err(f.n.norm_sqr(), n2) < 1e-12);
        }
    }
}

#[test]
fn n2_is_n_of_the_rotated_state() {
    let mut rng = rng(61);
    for k in ["1", "2", "3", "3/2"] {
        let kr = rational(k);
        let kf = kr.to_f64();
        let (p1, p2) = (v1(kr), v2(kr));
        for _ in 0..100 {
            let s = wedge_state(&mut rng, &p2);
            let rotated = PolarState::new(s.r, s.phi - PI / (2.0 * kf), s.pr, s.pphi);
            let n2 = eval_n2(&s, &p2).unwrap();
            let n = eval_mn(&rotated, &p1).unwrap().n;
            // F2(φ) = F1(φ − π/(2k)), so J2 agrees and N2(φ) = N(φ − π/(2k)).
            assert!((n2.re - n.re).abs() < 1e-12 && (n2.im - n.im).abs() < 1e-12, "{n2} {n}");
            assert!((eval_mn(&s, &p2).unwrap().n - n2).norm() < 1e-15);
        }
    }
}

#[test]
fn n2_with_unswapped_trig_fails_its_evolution_law() {
    // An N2 that keeps N's cos/sin placement; its bracket with H does
    // not follow ikλ N2.
    let pot = v2(rational("2"));
    let s = PolarState::new(1.1, 0.2, 0.3, 0.5);
    let cfg = BracketConfig::dual();
    let good = evolution_residual(Evolving::N2, &s.into(), &pot, &cfg).unwrap();
    assert!(good.relative() < 1e-12);
    let j = eval_j(&s, &pot).unwrap();
    let (sk, ck) = (2.0 * s.phi).sin_cos();
    let unswapped = Complex::new(0.2 + j.j2 * ck, j.j2.sqrt() * s.pphi * sk);
    assert!((unswapped - eval_n2(&s, &pot).unwrap()).norm() > 0.1);
}

#[test]
fn k_uses_reduced_rational_powers() {
    let pot = v1(rational("3/2"));
    let s = PolarState::new(1.0, 1.0, 0.2, 0.4);
    let f = eval_mn(&s, &pot).unwrap();
    let want = f.m.powu(3) * f.n.conj().powu(4);
    assert!((eval_k(&s, &pot).unwrap() - want).norm() < 1e-12 * want.norm());
    // 6/4 reduces to 3/2.
    let same = v1(Rational::new(6, 4).unwrap());
    assert_eq!(eval_k(&s, &same).unwrap(), eval_k(&s, &pot).unwrap());
}

#[test]
fn ttw_factors_follow_the_doubled_f1() {
    let ttw = PotentialSpec::Ttw {
        omega0: 1.0,
        k: rational("2"),
        alpha: 0.5,
        beta: 0.8,
    };
    let f1 = PotentialSpec::V1 {
        omega0: 1.0,
        k: rational("4"),
        ka: 2.6,
        kb: 0.6,
    };
    let s = PolarState::new(1.0, 0.3, 0.1, 0.4);
    assert!((eval_k(&s, &ttw).unwrap() - eval_k(&s, &f1).unwrap()).norm() < 1e-12);
}

#[test]
fn observables_match_across_charts() {
    let mut rng = rng(67);
    let pot = v1(rational("3"));
    for q in [Quantity::J1, Quantity::J2, Quantity::M, Quantity::N, Quantity::K] {
        let obs = PhaseObservable::new(q, pot);
        for _ in 0..50 {
            let p = wedge_state(&mut rng, &pot);
            let c = to_cartesian(p).unwrap();
            let a = obs.eval_f64(&superint_core::PhaseState::from(p).canonical()).unwrap();
            let b = obs.eval_f64(&superint_core::PhaseState::from(c).canonical()).unwrap();
            assert!((a - b).norm() <= 1e-11 * a.norm().max(1.0), "{q:?}: {a} {b}");
        }
    }
}
