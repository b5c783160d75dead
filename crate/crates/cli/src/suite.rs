//! The residual and identity suite behind `superint verify`.
//!
//! Each check draws its own samples from a stream derived from the master
//! seed and the check name, evaluates them on the rayon pool, and reduces
//! the per-sample metrics in sample order. Metrics on quantities that can
//! be large are scaled by `max(|F|, 1)`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use superint_core::bracket::{evolution_residual, independence_rank, step1_check, BracketConfig, Evolving};
use superint_core::observables::{
    axis_energies, eval_b, eval_j, eval_mn, Component, Observable, Part, PhaseObservable, Quantity,
};
use superint_core::potentials::{
    eval_f1, eval_f2, f1_cartesian, f2_cartesian, ttw_angular, ttw_tilde_angular, AngularFunction,
};
use superint_core::{to_polar, CartesianState, PhaseState, PotentialSpec, Rational};

use crate::config::VerificationConfig;
use crate::sampling::{angle_in, box_state, quadrant_state, step1_state, stream, wedge_state};

/// How a check's per-sample metrics are reduced and compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Worst (largest) sample must be below the threshold.
    MaxBelow,
    /// Smallest sample must exceed the threshold.
    MinAbove,
    /// Fraction of samples scoring 1 must reach the threshold.
    FractionAtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

impl SampleStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Self {
            min: sorted[0],
            max: sorted[n - 1],
            mean: sorted.iter().sum::<f64>() / n as f64,
            median,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub metric: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub rule: Rule,
    pub pass: bool,
    pub samples: usize,
    pub errors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<SampleStats>,
}

impl CheckResult {
    fn reduce(name: String, metric: &'static str, rule: Rule, threshold: f64, outcomes: Vec<Result<f64, String>>) -> Self {
        let samples = outcomes.len();
        let mut values = Vec::with_capacity(samples);
        let mut errors = 0;
        let mut first_error = None;
        for o in outcomes {
            match o {
                Ok(v) => values.push(v),
                Err(e) => {
                    errors += 1;
                    first_error.get_or_insert(e);
                }
            }
        }
        let stats = SampleStats::of(&values);
        let value = match (&stats, rule) {
            (None, _) => f64::NAN,
            (Some(s), Rule::MaxBelow) => s.max,
            (Some(s), Rule::MinAbove) => s.min,
            (Some(_), Rule::FractionAtLeast) => values.iter().sum::<f64>() / samples as f64,
        };
        let within = match rule {
            Rule::MaxBelow => value < threshold,
            Rule::MinAbove => value > threshold,
            Rule::FractionAtLeast => value >= threshold,
        };
        // A fraction already counts failed samples against the check.
        let pass = within && (errors == 0 || rule == Rule::FractionAtLeast);
        Self {
            name,
            metric,
            value,
            threshold,
            rule,
            pass,
            samples,
            errors,
            first_error,
            stats,
        }
    }
}

/// Sampling and derivative settings shared by every check.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub bracket: BracketConfig,
    pub samples: usize,
    pub seed: u64,
}

impl Settings {
    pub fn from_config(cfg: &VerificationConfig) -> Self {
        Self {
            bracket: cfg.bracket(),
            samples: cfg.samples,
            seed: cfg.seed,
        }
    }
}

/// Draw `n` inputs sequentially from the check's stream, then evaluate them
/// in parallel, keeping sample order.
fn sweep<T, G, F>(settings: &Settings, name: &str, n: usize, mut draw: G, eval: F) -> Vec<Result<f64, String>>
where
    T: Send + Sync,
    G: FnMut(&mut rand_chacha::ChaCha8Rng) -> T,
    F: Fn(&T) -> Result<f64, superint_core::Error> + Sync,
{
    let mut rng = stream(settings.seed, name);
    let inputs: Vec<T> = (0..n).map(|_| draw(&mut rng)).collect();
    inputs
        .par_iter()
        .map(|x| eval(x).map_err(|e| e.to_string()))
        .collect()
}

fn scaled(residual: f64, magnitude: f64) -> f64 {
    residual / magnitude.abs().max(1.0)
}

fn polar(family: &str, k: Rational) -> PotentialSpec {
    let (omega0, ka, kb) = (1.0, 1.0, 0.4);
    match family {
        "V1" => PotentialSpec::V1 { omega0, k, ka, kb },
        _ => PotentialSpec::V2 { omega0, k, ka, kb },
    }
}

const POLAR_INDICES: [(u64, u64); 5] = [(1, 1), (2, 1), (3, 1), (4, 1), (3, 2)];

fn rationals() -> impl Iterator<Item = Rational> {
    POLAR_INDICES.iter().map(|&(p, q)| Rational::new(p, q).expect("valid index"))
}

fn evolution_check(settings: &Settings, name: String, which: Evolving, pot: PotentialSpec, threshold: f64) -> CheckResult {
    let cfg = settings.bracket;
    let outcomes = match pot {
        PotentialSpec::Ho { .. } => sweep(settings, &name, settings.samples, |r| PhaseState::from(box_state(r)), |s| {
            evolution_residual(which, s, &pot, &cfg).map(|r| scaled(r.residual, r.magnitude))
        }),
        PotentialSpec::GenSw { .. } => {
            sweep(settings, &name, settings.samples, |r| PhaseState::from(quadrant_state(r)), |s| {
                evolution_residual(which, s, &pot, &cfg).map(|r| scaled(r.residual, r.magnitude))
            })
        }
        _ => sweep(settings, &name, settings.samples, |r| PhaseState::from(wedge_state(r, &pot)), |s| {
            evolution_residual(which, s, &pot, &cfg).map(|r| scaled(r.residual, r.magnitude))
        }),
    };
    CheckResult::reduce(name, "|{F,H} - rho F| / max(|F|, 1)", Rule::MaxBelow, threshold, outcomes)
}

/// Evolution laws `{F, H} = ρ F` for `A_x`, `B_x`, `B_y`, `M`, `N`, `N2`
/// and the constants `K`, `J1`, `J2`.
pub fn evolution_checks(settings: &Settings) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for nx in 1..=3u32 {
        let pot = PotentialSpec::Ho {
            omega1: nx as f64,
            omega2: 1.0,
        };
        out.push(evolution_check(settings, format!("evolution/A_x/HO(nx={nx})"), Evolving::Ax, pot, 1e-6));
    }
    let sw = PotentialSpec::GenSw {
        omega0: 1.0,
        nx: 1,
        ny: 3,
        k1: 0.3,
        k2: 0.5,
    };
    out.push(evolution_check(settings, "evolution/B_x/GenSW(1,3)".into(), Evolving::Bx, sw, 1e-6));
    out.push(evolution_check(settings, "evolution/B_y/GenSW(1,3)".into(), Evolving::By, sw, 1e-6));
    for family in ["V1", "V2"] {
        for k in rationals() {
            let pot = polar(family, k);
            let n = if family == "V1" { Evolving::N } else { Evolving::N2 };
            for which in [Evolving::M, n, Evolving::K] {
                let name = format!("evolution/{}/{family}(k={k})", which.name());
                out.push(evolution_check(settings, name, which, pot, 1e-6));
            }
            for which in [Evolving::J1, Evolving::J2] {
                let name = format!("conserved/{}/{family}(k={k})", which.name());
                out.push(evolution_check(settings, name, which, pot, 1e-8));
            }
        }
    }
    out
}

/// Sixth-order central difference; its truncation and roundoff both sit
/// well below the `1e-10` ODE tolerance at this step.
pub fn derivative7(f: impl Fn(f64) -> Result<f64, superint_core::Error>, x: f64) -> Result<f64, superint_core::Error> {
    const H: f64 = 3e-4;
    let d = |m: f64| -> Result<f64, superint_core::Error> { Ok(f(x + m * H)? - f(x - m * H)?) };
    Ok((45.0 * d(1.0)? - 9.0 * d(2.0)? + d(3.0)?) / (60.0 * H))
}

/// Angular identities: the defining ODEs, the Cartesian lists, the TTW
/// parameter map, its sine-substituted companion, and the rotation that
/// carries `F2` onto `F1`.
pub fn identity_checks(settings: &Settings) -> Vec<CheckResult> {
    let n = settings.samples;
    let mut out = Vec::new();
    let coefficients = |r: &mut rand_chacha::ChaCha8Rng| (r.random_range(0.5..2.0), r.random_range(-0.45..0.45));

    for (family, f1) in [("F1", true), ("F2", false)] {
        for k in rationals().map(Rational::to_f64).chain([2.5]) {
            let name = format!("ode/{family}(k={k})");
            let outcomes = sweep(
                settings,
                &name,
                n,
                |r| {
                    let (ka, kb) = coefficients(r);
                    (ka, kb, r.random_range(0.1..0.9))
                },
                |&(ka, kb, u)| {
                    let f = if f1 {
                        AngularFunction::f1(k, ka, kb)
                    } else {
                        AngularFunction::f2(k, ka, kb)
                    };
                    let (lo, hi) = if f1 { (0.0, PI / k) } else { (-PI / (2.0 * k), PI / (2.0 * k)) };
                    let phi = angle_in(lo, hi, u);
                    let v = f.value(phi)?;
                    let dv = derivative7(|p| f.value(p), phi)?;
                    Ok(scaled(f.ode_lhs(phi, v, dv)?, v))
                },
            );
            out.push(CheckResult::reduce(
                name,
                "|ODE lhs with 7-point FD derivative| / max(|F|, 1)",
                Rule::MaxBelow,
                1e-10,
                outcomes,
            ));
        }
    }

    for k in 1..=4u32 {
        for (family, f1) in [("F1", true), ("F2", false)] {
            let name = format!("cartesian/{family}(k={k})");
            let outcomes = sweep(
                settings,
                &name,
                n,
                |r| {
                    let (ka, kb) = (r.random_range(0.5..2.0), r.random_range(-1.0..1.0));
                    (ka, kb, r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))
                },
                |&(ka, kb, x, y)| {
                    let p = to_polar(CartesianState::new(x, y, 0.0, 0.0))?;
                    let (polar, cart) = if f1 {
                        (eval_f1(p.phi, k as f64, ka, kb)?, f1_cartesian(k, x, y, ka, kb)?)
                    } else {
                        (eval_f2(p.phi, k as f64, ka, kb)?, f2_cartesian(k, x, y, ka, kb)?)
                    };
                    let want = polar / (p.r * p.r);
                    Ok(scaled(cart - want, want))
                },
            );
            out.push(CheckResult::reduce(
                name,
                "|f_cartesian - F(phi)/r^2| / max(|F/r^2|, 1)",
                Rule::MaxBelow,
                1e-12,
                outcomes,
            ));
        }
    }

    let ttw_params = |r: &mut rand_chacha::ChaCha8Rng| {
        (
            r.random_range(0.5..4.0),
            r.random_range(0.1..3.0),
            r.random_range(0.1..3.0),
            r.random_range(0.05..0.95),
        )
    };
    let name = "identity/ttw-map".to_string();
    let outcomes = sweep(settings, &name, n, ttw_params, |&(k, alpha, beta, u)| {
        let phi = angle_in(0.0, PI / (2.0 * k), u);
        let want = ttw_angular(phi, k, alpha, beta)?;
        let got = eval_f1(phi, 2.0 * k, 2.0 * (alpha + beta), 2.0 * (beta - alpha))?;
        Ok(scaled(got - want, want))
    });
    out.push(CheckResult::reduce(
        name,
        "|F1(phi; 2k, 2(a+b), 2(b-a)) - TTW| / max(|TTW|, 1)",
        Rule::MaxBelow,
        1e-12,
        outcomes,
    ));

    let name = "identity/ttw-sine-form".to_string();
    let outcomes = sweep(settings, &name, n, ttw_params, |&(k, alpha, beta, u)| {
        let phi = angle_in(-PI / (2.0 * k), PI / (2.0 * k), u);
        let want = ttw_tilde_angular(phi, k, alpha, beta)?;
        let got = eval_f2(phi, k, 2.0 * (alpha + beta), 2.0 * (beta - alpha))?;
        Ok(scaled(got - want, want))
    });
    out.push(CheckResult::reduce(
        name,
        "|F2(phi; k, 2(a+b), 2(b-a)) - sine-form TTW| / max(|.|, 1)",
        Rule::MaxBelow,
        1e-12,
        outcomes,
    ));

    let name = "identity/rotation".to_string();
    let outcomes = sweep(
        settings,
        &name,
        n,
        |r| {
            let (ka, kb) = (r.random_range(0.1..3.0), r.random_range(-3.0..3.0));
            (r.random_range(0.5..5.0), ka, kb, r.random_range(0.02..0.98))
        },
        |&(k, ka, kb, u)| {
            let phi = angle_in(0.0, PI / k, u);
            let want = eval_f1(phi, k, ka, kb)?;
            let got = eval_f2(phi + PI / (2.0 * k), k, ka, kb)?;
            Ok(scaled(got - want, want))
        },
    );
    out.push(CheckResult::reduce(
        name,
        "|F2(phi + pi/(2k)) - F1(phi)| / max(|F1|, 1)",
        Rule::MaxBelow,
        1e-12,
        outcomes,
    ));
    out
}

/// Which central potentials `U = c r^m` let the factor `M` rotate at
/// `2λ0`: only the oscillator `m = 2` (and `U = 0`).
pub fn step1_checks(settings: &Settings) -> Vec<CheckResult> {
    let cfg = settings.bracket;
    let n = settings.samples;
    let mut out = Vec::new();
    let m_scale = |s: &superint_core::PolarState, c: f64, m: f64| {
        let mr = 2.0 * s.pr * s.pphi / s.r;
        let mi = s.pr * s.pr - s.pphi * s.pphi / (s.r * s.r) + c * s.r.powf(m);
        mr.hypot(mi).max(1.0)
    };
    for (c, m) in [(1.0, 1.0), (1.0, 2.0), (1.0, 3.0), (1.0, 4.0), (0.0, 2.0)] {
        let label = if c == 0.0 { "U=0".to_string() } else { format!("m={m}") };
        let name = format!("step1/residual_i/{label}");
        let outcomes = sweep(settings, &name, n, step1_state, |s| {
            step1_check(c, m, s, &cfg).map(|(ri, _)| ri / m_scale(s, c, m))
        });
        out.push(CheckResult::reduce(name, "residual_i / max(|M|, 1)", Rule::MaxBelow, 1e-8, outcomes));

        let name = format!("step1/residual_r/{label}");
        let outcomes = sweep(settings, &name, n, step1_state, |s| {
            step1_check(c, m, s, &cfg).map(|(_, rr)| if m == 2.0 { rr / m_scale(s, c, m) } else { rr })
        });
        out.push(if m == 2.0 {
            CheckResult::reduce(name, "residual_r / max(|M|, 1)", Rule::MaxBelow, 1e-8, outcomes)
        } else {
            CheckResult::reduce(name, "residual_r", Rule::MinAbove, 1e-2, outcomes)
        });
    }
    out
}

/// Functional independence: `(J1, J2, Im K)` has rank 3 and adding `Re K`
/// keeps it at 3.
pub fn rank_checks(settings: &Settings, k: Rational) -> Vec<CheckResult> {
    let cfg = settings.bracket;
    let pot = polar("V1", k);
    let part = |q, p| Component::new(PhaseObservable::new(q, pot), p);
    let j1 = part(Quantity::J1, Part::Re);
    let j2 = part(Quantity::J2, Part::Re);
    let im = part(Quantity::K, Part::Im);
    let re = part(Quantity::K, Part::Re);
    let sets: [(&str, Vec<&dyn Observable>, f64); 2] = [
        ("rank/(J1,J2,ImK)", vec![&j1, &j2, &im], 0.95),
        ("rank/(J1,J2,ImK,ReK)", vec![&j1, &j2, &im, &re], 1.0),
    ];
    let name = format!("rank/V1(k={k})");
    let mut rng = stream(settings.seed, &name);
    let states: Vec<PhaseState> = (0..settings.samples).map(|_| wedge_state(&mut rng, &pot).into()).collect();
    sets.iter()
        .map(|(label, obs, threshold)| {
            let outcomes: Vec<Result<f64, String>> = states
                .par_iter()
                .map(|s| {
                    independence_rank(obs, s, &cfg)
                        .map(|r| if r == 3 { 1.0 } else { 0.0 })
                        .map_err(|e| e.to_string())
                })
                .collect();
            CheckResult::reduce(
                format!("{label}/V1(k={k})"),
                "fraction of states with rank 3",
                Rule::FractionAtLeast,
                *threshold,
                outcomes,
            )
        })
        .collect()
}

/// Moduli of the complex factors as functions of the separated energies.
pub fn moduli_checks(settings: &Settings) -> Vec<CheckResult> {
    let n = settings.samples;
    let mut out = Vec::new();
    let (omega0, k1, k2) = (0.9, 0.3, 0.7);
    for (nx, ny) in [(1u32, 1u32), (1, 3), (2, 3)] {
        let pot = PotentialSpec::GenSw { omega0, nx, ny, k1, k2 };
        for axis in ["x", "y"] {
            let name = format!("moduli/B_{axis}/GenSW({nx},{ny})");
            let outcomes = sweep(settings, &name, n, quadrant_state, |s| {
                let (bx, by) = eval_b(s, &pot)?;
                let (ex, ey) = axis_energies(s, &pot)?;
                let w2 = omega0 * omega0;
                let (b, want) = if axis == "x" {
                    (bx, 4.0 * (ex * ex - k1 * (nx * nx) as f64 * w2))
                } else {
                    (by, 4.0 * (ey * ey - k2 * (ny * ny) as f64 * w2))
                };
                Ok(scaled(b.norm_sqr() - want, want))
            });
            out.push(CheckResult::reduce(name, "||B|^2 - 4(E^2 - k n^2 w^2)| / max(.,1)", Rule::MaxBelow, 1e-10, outcomes));
        }
    }
    for k in rationals() {
        let pot = polar("V1", k);
        let name = format!("moduli/M,N/V1(k={k})");
        let outcomes = sweep(settings, &name, n, |r| wedge_state(r, &pot), |s| {
            let j = eval_j(s, &pot)?;
            let f = eval_mn(s, &pot)?;
            let m2 = j.j1 * j.j1 - 4.0 * j.j2;
            let n2 = 0.4 * 0.4 / 4.0 + j.j2 * j.j2 - j.j2;
            Ok(scaled(f.m.norm_sqr() - m2, m2).max(scaled(f.n.norm_sqr() - n2, n2)))
        });
        out.push(CheckResult::reduce(name, "max scaled error of |M|^2 and |N|^2", Rule::MaxBelow, 1e-12, outcomes));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub fd_step: f64,
    pub max_scaled_residual: f64,
    pub errors: usize,
}

/// Worst scaled `M`, `N`, `K` residual for V1 `k = 3` at each FD step.
pub fn fd_sweep(settings: &Settings, steps: &[f64]) -> Vec<SweepPoint> {
    let pot = polar("V1", Rational::integer(3));
    let n = settings.samples.min(50);
    steps
        .iter()
        .map(|&h| {
            let local = Settings {
                bracket: BracketConfig { fd_step: h, ..settings.bracket },
                ..*settings
            };
            let outcomes = sweep(&local, "fd-sweep", n, |r| PhaseState::from(wedge_state(r, &pot)), |s| {
                let mut worst: f64 = 0.0;
                for w in [Evolving::M, Evolving::N, Evolving::K] {
                    let r = evolution_residual(w, s, &pot, &local.bracket)?;
                    worst = worst.max(scaled(r.residual, r.magnitude));
                }
                Ok(worst)
            });
            let errors = outcomes.iter().filter(|o| o.is_err()).count();
            SweepPoint {
                fd_step: h,
                max_scaled_residual: outcomes.iter().filter_map(|o| o.as_ref().ok()).fold(0.0, |a, b| a.max(*b)),
                errors,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub fd_step: f64,
    pub derivative: &'static str,
    pub samples: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
    pub checks: Vec<CheckResult>,
    /// Informational: evolution residual against FD step.
    pub fd_sweep: Vec<SweepPoint>,
}

pub fn run_suite(cfg: &VerificationConfig) -> VerificationReport {
    let settings = Settings::from_config(cfg);
    let mut checks = evolution_checks(&settings);
    checks.extend(identity_checks(&settings));
    checks.extend(step1_checks(&settings));
    checks.extend(rank_checks(&settings, Rational::integer(2)));
    checks.extend(moduli_checks(&settings));
    let fd_sweep = match cfg.scheme {
        crate::config::DerivativeScheme::CentralFd => fd_sweep(&settings, &cfg.fd_sweep),
        crate::config::DerivativeScheme::Dual => Vec::new(),
    };
    let passed = checks.iter().filter(|c| c.pass).count();
    VerificationReport {
        seed: cfg.seed,
        fd_step: cfg.fd_step,
        derivative: match cfg.scheme {
            crate::config::DerivativeScheme::CentralFd => "central-fd",
            crate::config::DerivativeScheme::Dual => "dual",
        },
        samples: cfg.samples,
        passed,
        failed: checks.len() - passed,
        all_pass: passed == checks.len(),
        checks,
        fd_sweep,
    }
}
