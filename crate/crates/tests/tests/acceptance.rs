//! Acceptance run: eight criteria, one PASS/FAIL line each.
//!
//! Residuals of quantities that can be large (K reaches 1e8 near the wedge
//! edges) are measured as `|error| / max(|F|, 1)`. Lines starting with
//! `info` are supplementary measurements, not criteria. Exits non-zero if
//! any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use superint::sampling::{angle_in, box_state, quadrant_state, step1_state, stream, wedge_state};
use superint::suite::derivative7;
use superint_core::bracket::{evolution_residual, independence_rank, step1_check, BracketConfig, Evolving};
use superint_core::dynamics::{
    closure_detect, closure_horizon, drift_report, integrate, radial_period, ClosureVerdict, DriftReport,
    IntegrateOptions, IntegratorScheme,
};
use superint_core::observables::{axis_energies, eval_b, Component, Part, PhaseObservable, Quantity};
use superint_core::potentials::{eval_f1, eval_f2, f1_cartesian, f2_cartesian, ttw_angular, AngularFunction};
use superint_core::{to_polar, CartesianState, PhaseState, PolarState, PotentialSpec, Rational};

const SEED: u64 = 42;
const SAMPLES: usize = 200;

type Checked = Result<String, String>;

fn scaled(residual: f64, magnitude: f64) -> f64 {
    residual / magnitude.abs().max(1.0)
}

fn rational(s: &str) -> Rational {
    s.parse().unwrap()
}

fn v1(k: Rational) -> PotentialSpec {
    PotentialSpec::V1 {
        omega0: 1.0,
        k,
        ka: 1.0,
        kb: 0.4,
    }
}

fn v2(k: Rational) -> PotentialSpec {
    PotentialSpec::V2 {
        omega0: 1.0,
        k,
        ka: 1.0,
        kb: 0.4,
    }
}

/// Largest per-sample value of `f` over `SAMPLES` seeded draws; the first
/// evaluation error fails the criterion.
fn worst<T>(
    label: &str,
    draw: impl Fn(&mut ChaCha8Rng) -> T,
    f: impl Fn(&T) -> superint_core::Result<f64>,
) -> Result<f64, String> {
    let mut rng = stream(SEED, label);
    let mut out: f64 = 0.0;
    for i in 0..SAMPLES {
        let x = draw(&mut rng);
        let v = f(&x).map_err(|e| format!("{label} sample {i}: {e}"))?;
        out = out.max(v);
    }
    Ok(out)
}

fn evolution(label: &str, which: Evolving, pot: PotentialSpec) -> Result<f64, String> {
    let cfg = BracketConfig::default();
    let draw = |r: &mut ChaCha8Rng| -> PhaseState {
        match pot {
            PotentialSpec::Ho { .. } => box_state(r).into(),
            PotentialSpec::GenSw { .. } => quadrant_state(r).into(),
            _ => wedge_state(r, &pot).into(),
        }
    };
    worst(label, draw, |s| {
        evolution_residual(which, s, &pot, &cfg).map(|r| scaled(r.residual, r.magnitude))
    })
}

/// Each entry: (label, value); passes when every value is below `limit`.
fn below(limit: f64, entries: Vec<(String, Result<f64, String>)>) -> Checked {
    let mut worst = (String::new(), 0.0f64);
    for (label, v) in entries {
        let v = v?;
        if !(v < limit) {
            return Err(format!("{label}: {v:.3e} >= {limit:.0e}"));
        }
        if v >= worst.1 {
            worst = (label, v);
        }
    }
    Ok(format!("worst {:.3e} < {limit:.0e} ({})", worst.1, worst.0))
}

fn criterion_1() -> Checked {
    let mut entries = Vec::new();
    for nx in 1..=3u32 {
        let pot = PotentialSpec::Ho {
            omega1: nx as f64,
            omega2: 1.0,
        };
        let label = format!("A_x HO(nx={nx})");
        entries.push((label.clone(), evolution(&label, Evolving::Ax, pot)));
    }
    let sw = PotentialSpec::GenSw {
        omega0: 1.0,
        nx: 1,
        ny: 2,
        k1: 0.3,
        k2: 0.5,
    };
    entries.push(("B_x GenSW".into(), evolution("B_x GenSW", Evolving::Bx, sw)));
    for k in ["1", "2", "3", "4", "3/2"] {
        for (name, which) in [("M", Evolving::M), ("N", Evolving::N)] {
            let label = format!("{name} V1(k={k})");
            entries.push((label.clone(), evolution(&label, which, v1(rational(k)))));
        }
    }
    for k in ["1", "2", "3"] {
        let label = format!("N2 V2(k={k})");
        entries.push((label.clone(), evolution(&label, Evolving::N2, v2(rational(k)))));
    }
    below(1e-6, entries)
}

fn drift_line(d: &DriftReport) -> String {
    ["J1", "J2", "ReK", "ImK"]
        .iter()
        .map(|n| format!("{n} {:.1e}", d.get(n).map_or(f64::NAN, |x| x.max_relative)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn long_run(pot: &PotentialSpec, scheme: IntegratorScheme) -> Result<DriftReport, String> {
    let tr = radial_period(pot).unwrap();
    let (lo, hi) = pot.wedge().unwrap();
    let s0: PhaseState = PolarState::new(1.0, angle_in(lo, hi, 0.4), 0.3, 0.5).into();
    let opts = IntegrateOptions::new(tr / 2000.0, 100.0 * tr, scheme).with_decimation(1000);
    let traj = integrate(&s0, pot, &opts).map_err(|e| e.to_string())?;
    if let Some(t) = traj.truncated {
        return Err(format!("{pot:?} truncated at t = {}", t.t));
    }
    Ok(drift_report(&traj))
}

fn criterion_2() -> Checked {
    let pots: Vec<(String, PotentialSpec)> = ["1", "2", "3"]
        .iter()
        .flat_map(|k| [(format!("V1(k={k})"), v1(rational(k))), (format!("V2(k={k})"), v2(rational(k)))])
        .collect();
    let bracket: Vec<_> = pots
        .iter()
        .map(|(name, pot)| {
            let label = format!("K {name}");
            (label.clone(), evolution(&label, Evolving::K, *pot))
        })
        .collect();
    let bracket_line = below(1e-6, bracket);

    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (name, pot) in &pots {
        let d = long_run(pot, IntegratorScheme::Leapfrog)?;
        let worst = ["J1", "J2", "ReK", "ImK"]
            .iter()
            .map(|n| d.get(n).map_or(f64::INFINITY, |x| x.max_relative))
            .fold(0.0, f64::max);
        if !(worst < 1e-7) {
            failures.push(format!("{name}: {}", drift_line(&d)));
        }
        lines.push(format!("{name} worst {worst:.1e}"));
    }
    let mut info = Vec::new();
    for (name, pot) in &pots {
        let d = long_run(pot, IntegratorScheme::Yoshida4)?;
        info.push(format!("{name} {:.1e}", d.max_drift()));
    }
    println!("info criterion 2: same runs with yoshida4 at the same step, max drift: {}", info.join("; "));
    match (bracket_line, failures.is_empty()) {
        (Err(e), _) => Err(format!("{{K,H}}: {e}")),
        (Ok(b), true) => Ok(format!("{{K,H}} {b}; leapfrog drift < 1e-7: {}", lines.join("; "))),
        (Ok(b), false) => Err(format!(
            "{{K,H}} {b}; leapfrog drift over 100 T_r at T_r/2000 exceeds 1e-7: {}",
            failures.join("; ")
        )),
    }
}

fn criterion_3() -> Checked {
    let mut ode = Vec::new();
    for f1 in [true, false] {
        for k in [1.0, 2.0, 3.0, 4.0, 1.5] {
            let label = format!("{} ODE k={k}", if f1 { "F1" } else { "F2" });
            let v = worst(
                &label,
                |r| (r.random_range(0.5..2.0), r.random_range(-0.45..0.45), r.random_range(0.1..0.9)),
                |&(ka, kb, u): &(f64, f64, f64)| {
                    let (f, lo, hi) = if f1 {
                        (AngularFunction::f1(k, ka, kb), 0.0, PI / k)
                    } else {
                        (AngularFunction::f2(k, ka, kb), -PI / (2.0 * k), PI / (2.0 * k))
                    };
                    let phi = angle_in(lo, hi, u);
                    let v = f.value(phi)?;
                    Ok(scaled(f.ode_lhs(phi, v, derivative7(|p| f.value(p), phi)?)?, v))
                },
            );
            ode.push((label, v));
        }
    }
    let ode = below(1e-10, ode)?;

    let mut ident = Vec::new();
    for k in 1..=4u32 {
        for f1 in [true, false] {
            let label = format!("{} Cartesian k={k}", if f1 { "F1" } else { "F2" });
            let v = worst(
                &label,
                |r| {
                    (
                        r.random_range(0.5..2.0),
                        r.random_range(-1.0..1.0),
                        r.random_range(-2.0..2.0),
                        r.random_range(-2.0..2.0),
                    )
                },
                |&(ka, kb, x, y): &(f64, f64, f64, f64)| {
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
            ident.push((label, v));
        }
    }
    let ttw = worst(
        "TTW map",
        |r| {
            (
                r.random_range(0.5..4.0),
                r.random_range(0.1..3.0),
                r.random_range(0.1..3.0),
                r.random_range(0.05..0.95),
            )
        },
        |&(k, a, b, u): &(f64, f64, f64, f64)| {
            let phi = angle_in(0.0, PI / (2.0 * k), u);
            let want = a / (k * phi).cos().powi(2) + b / (k * phi).sin().powi(2);
            let got = eval_f1(phi, 2.0 * k, 2.0 * (a + b), 2.0 * (b - a))?;
            // The library's own TTW form must agree as well.
            let lib = ttw_angular(phi, k, a, b)?;
            Ok(scaled(got - want, want).max(scaled(lib - want, want)))
        },
    );
    ident.push(("TTW map".into(), ttw));
    let rotation = worst(
        "rotation",
        |r| {
            (
                r.random_range(0.5..5.0),
                r.random_range(0.1..3.0),
                r.random_range(-3.0..3.0),
                r.random_range(0.02..0.98),
            )
        },
        |&(k, ka, kb, u): &(f64, f64, f64, f64)| {
            let phi = angle_in(0.0, PI / k, u);
            let want = eval_f1(phi, k, ka, kb)?;
            Ok(scaled(eval_f2(phi + PI / (2.0 * k), k, ka, kb)? - want, want))
        },
    );
    ident.push(("rotation".into(), rotation));
    let ident = below(1e-12, ident)?;
    Ok(format!("ODE {ode}; identities {ident}"))
}

fn criterion_4() -> Checked {
    let cfg = BracketConfig::default();
    let oscillator = worst("step1 m=2", step1_state, |s: &PolarState| {
        step1_check(1.0, 2.0, s, &cfg).map(|(_, rr)| rr)
    })?;
    if !(oscillator < 1e-8) {
        return Err(format!("U = r^2: residual_r {oscillator:.3e} >= 1e-8"));
    }
    let mut smallest = Vec::new();
    for m in [1.0, 3.0, 4.0] {
        let label = format!("step1 m={m}");
        let mut rng = stream(SEED, &label);
        let mut min = f64::INFINITY;
        for _ in 0..SAMPLES {
            let s = step1_state(&mut rng);
            let (_, rr) = step1_check(1.0, m, &s, &cfg).map_err(|e| e.to_string())?;
            min = min.min(rr);
        }
        if !(min > 1e-2) {
            return Err(format!("U = r^{m}: residual_r {min:.3e} <= 1e-2"));
        }
        smallest.push(format!("m={m} min {min:.3e}"));
    }
    Ok(format!(
        "U = r^2 max residual_r {oscillator:.3e} < 1e-8; {} > 1e-2",
        smallest.join(", ")
    ))
}

fn criterion_5() -> Checked {
    let pot = v1(rational("2"));
    let part = |q, p| Component::new(PhaseObservable::new(q, pot), p);
    let j1 = part(Quantity::J1, Part::Re);
    let j2 = part(Quantity::J2, Part::Re);
    let im = part(Quantity::K, Part::Im);
    let re = part(Quantity::K, Part::Re);
    let cfg = BracketConfig::default();
    let mut rng = stream(SEED, "rank");
    let n = 500;
    let (mut three, mut four) = (0, 0);
    for _ in 0..n {
        let s: PhaseState = wedge_state(&mut rng, &pot).into();
        if independence_rank(&[&j1, &j2, &im], &s, &cfg).map_err(|e| e.to_string())? == 3 {
            three += 1;
        }
        if independence_rank(&[&j1, &j2, &im, &re], &s, &cfg).map_err(|e| e.to_string())? == 3 {
            four += 1;
        }
    }
    let detail = format!("rank(J1,J2,ImK) = 3 at {three}/{n}; rank(J1,J2,ImK,ReK) = 3 at {four}/{n}");
    if three as f64 >= 0.95 * n as f64 && four == n {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closure_run(pot: &PotentialSpec, span: f64) -> Result<superint_core::dynamics::ClosureResult, String> {
    let tr = radial_period(pot).unwrap();
    let (lo, hi) = pot.wedge().unwrap();
    let s0: PhaseState = PolarState::new(1.0, angle_in(lo, hi, 0.4), 0.3, 0.5).into();
    let traj = integrate(&s0, pot, &IntegrateOptions::new(tr / 2000.0, span, IntegratorScheme::Rk4))
        .map_err(|e| e.to_string())?;
    closure_detect(&traj, 1e-4).map_err(|e| e.to_string())
}

fn criterion_6() -> Checked {
    let mut found = Vec::new();
    for k in ["1", "2", "3", "3/2"] {
        let pot = v1(rational(k));
        let r = closure_run(&pot, 1.01 * closure_horizon(&pot).unwrap())?;
        if r.verdict != ClosureVerdict::Closed {
            return Err(format!("k={k}: {:?}, best distance {:.3e}", r.verdict, r.return_distance));
        }
        found.push(format!("k={k} T={:.6} d={:.1e}", r.period_estimate, r.return_distance));
    }
    let pot = v1(rational("1.4142135"));
    let span = 100.0 * radial_period(&pot).unwrap();
    let r = closure_run(&pot, span)?;
    if r.closed {
        return Err(format!("irrational surrogate registered closed at T = {}", r.period_estimate));
    }
    Ok(format!(
        "{}; k=1.4142135 {:?} over {span:.1} (horizon {:.2e}), best distance {:.3e}",
        found.join(", "),
        r.verdict,
        r.horizon,
        r.return_distance
    ))
}

fn criterion_7() -> Checked {
    let (omega0, k1, k2) = (0.9, 0.3, 0.7);
    let mut entries = Vec::new();
    for (nx, ny) in [(1u32, 1u32), (1, 3), (2, 3)] {
        let pot = PotentialSpec::GenSw { omega0, nx, ny, k1, k2 };
        let label = format!("B moduli GenSW({nx},{ny})");
        let v = worst(&label, quadrant_state, |s: &CartesianState| {
            let (bx, by) = eval_b(s, &pot)?;
            let (ex, ey) = axis_energies(s, &pot)?;
            let w2 = omega0 * omega0;
            let wx = 4.0 * (ex * ex - k1 * (nx * nx) as f64 * w2);
            let wy = 4.0 * (ey * ey - k2 * (ny * ny) as f64 * w2);
            Ok(scaled(bx.norm_sqr() - wx, wx).max(scaled(by.norm_sqr() - wy, wy)))
        });
        entries.push((label, v));
    }
    below(1e-10, entries)
}

fn circle_error(scheme: IntegratorScheme, steps_per_period: f64) -> Result<f64, String> {
    let ho = PotentialSpec::Ho {
        omega1: 1.0,
        omega2: 1.0,
    };
    let s0: PhaseState = CartesianState::new(1.0, 0.0, 0.0, 1.0).into();
    let opts = IntegrateOptions::new(2.0 * PI / steps_per_period, 20.0 * PI, scheme);
    let traj = integrate(&s0, &ho, &opts).map_err(|e| e.to_string())?;
    Ok(traj
        .states
        .iter()
        .map(|s| (s.x.hypot(s.y) - 1.0).abs())
        .fold(0.0, f64::max))
}

fn reversal_error(pot: &PotentialSpec, s0: CartesianState, h: f64, steps: usize) -> Result<f64, String> {
    let opts = IntegrateOptions::new(h, h * steps as f64, IntegratorScheme::Leapfrog);
    let fwd = integrate(&s0.into(), pot, &opts).map_err(|e| e.to_string())?;
    let end = *fwd.states.last().unwrap();
    let back = CartesianState::new(end.x, end.y, -end.px, -end.py);
    let bwd = integrate(&back.into(), pot, &opts).map_err(|e| e.to_string())?;
    let b = bwd.states.last().unwrap();
    let err = [b.x - s0.x, b.y - s0.y, -b.px - s0.px, -b.py - s0.py];
    Ok(err.iter().map(|v| v * v).sum::<f64>().sqrt())
}

fn criterion_8() -> Checked {
    let rk4 = circle_error(IntegratorScheme::Rk4, 1000.0)?;
    let lf = circle_error(IntegratorScheme::Leapfrog, 1000.0)?;
    let lf4 = circle_error(IntegratorScheme::Leapfrog, 4000.0)?;
    println!(
        "info criterion 8: leapfrog radius error {lf:.2e} at 2pi/1000 (about h^2/8), {lf4:.2e} at 2pi/4000"
    );
    let ho = PotentialSpec::Ho {
        omega1: 1.0,
        omega2: 1.0,
    };
    let pot = v1(rational("2"));
    let polar = PolarState::new(1.0, 0.6, 0.3, 0.5);
    let start = superint_core::to_cartesian(polar).map_err(|e| e.to_string())?;
    let rev_ho = reversal_error(&ho, CartesianState::new(1.0, 0.0, 0.0, 1.0), 2.0 * PI / 1000.0, 10_000)?;
    let rev_v1 = reversal_error(&pot, start, PI / 2000.0, 20_000)?;
    let rev = rev_ho.max(rev_v1);
    let detail = format!(
        "rk4 radius error over 10 periods {rk4:.2e} < 1e-6; leapfrog reversal error {rev:.2e} < 1e-8 (HO {rev_ho:.1e}, V1 k=2 {rev_v1:.1e})"
    );
    if rk4 < 1e-6 && rev < 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Option<f64>, fn() -> Checked); 8] = [
        (1, "evolution laws", Some(10.0), criterion_1),
        (2, "constants of motion", Some(60.0), criterion_2),
        (3, "angular identities", Some(5.0), criterion_3),
        (4, "central-potential characterisation", Some(5.0), criterion_4),
        (5, "independence rank", Some(10.0), criterion_5),
        (6, "orbit closure", Some(60.0), criterion_6),
        (7, "moduli relations", None, criterion_7),
        (8, "integrator sanity", None, criterion_8),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let clock = Instant::now();
        let outcome = run();
        let secs = clock.elapsed().as_secs_f64();
        let over = budget.filter(|b| secs > *b);
        let pass = outcome.is_ok() && over.is_none();
        let mut detail = match outcome {
            Ok(d) | Err(d) => d,
        };
        if let Some(b) = over {
            detail.push_str(&format!("; runtime {secs:.1} s exceeds {b} s"));
        }
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}) [{secs:.2} s]: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
