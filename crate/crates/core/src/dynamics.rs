//! Trajectory integration, invariant-drift reports, and closed-orbit
//! detection.
//!
//! Integration runs in Cartesian coordinates, where the kinetic term is
//! diagonal in the momenta and kick-drift-kick leapfrog is explicit. Polar
//! invariants are evaluated from each Cartesian step.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::observables::{PhaseFunction, PhaseObservable, Quantity};
use crate::phase::{Canonical, CartesianState, Chart, PhaseState, PotentialSpec};

/// Integration stops when the angular clearance (`|sin kφ|`, `|cos kφ|`),
/// the barrier-axis distance, or `r` falls below this.
pub const GUARD_ZONE: f64 = 1e-6;

/// Initial magnitudes below this switch drift to absolute.
pub const RELATIVE_DRIFT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorScheme {
    /// Kick-drift-kick Störmer–Verlet, second order and symplectic.
    Leapfrog,
    /// Classical fourth-order Runge–Kutta, used as a cross-check.
    Rk4,
    /// Fourth-order symmetric composition of three leapfrog substeps
    /// (Yoshida); symplectic and time-reversible.
    Yoshida4,
}

impl IntegratorScheme {
    pub fn name(self) -> &'static str {
        match self {
            IntegratorScheme::Leapfrog => "leapfrog",
            IntegratorScheme::Rk4 => "rk4",
            IntegratorScheme::Yoshida4 => "yoshida4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub step: f64,
    pub horizon: f64,
    pub scheme: IntegratorScheme,
    /// Keep every `decimation`-th state (the first and last are always kept).
    pub decimation: usize,
    pub guard: f64,
}

impl IntegrateOptions {
    pub fn new(step: f64, horizon: f64, scheme: IntegratorScheme) -> Self {
        Self {
            step,
            horizon,
            scheme,
            decimation: 1,
            guard: GUARD_ZONE,
        }
    }

    pub fn with_decimation(mut self, decimation: usize) -> Self {
        self.decimation = decimation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Domain("step must be positive and finite"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::Domain("horizon must be non-negative and finite"));
        }
        if self.decimation == 0 {
            return Err(Error::Domain("decimation must be >= 1"));
        }
        if !(self.guard > 0.0) {
            return Err(Error::Domain("guard must be positive"));
        }
        Ok(())
    }
}

/// Per-step values of the tracked invariants.
///
/// The slots hold `(H, J2, Re K, Im K)` for the polar families; the
/// Cartesian families put `E_x` in the `J2` slot and `A_xy` (HO with a
/// rational frequency ratio) or `B_xy` (GenSW) in the `K` slots; the
/// central power uses `p_φ²` for `J2`. Undefined slots are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSample {
    pub t: f64,
    pub energy: f64,
    pub j2: f64,
    pub re_k: f64,
    pub im_k: f64,
}

/// Why integration stopped early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub t: f64,
    /// Zero when a single step jumped across the singular set.
    pub clearance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Decimated states, strictly increasing in time.
    pub states: Vec<CartesianState>,
    pub step: f64,
    pub scheme: IntegratorScheme,
    pub potential: PotentialSpec,
    /// Invariants at every integration step.
    pub invariant_track: Vec<InvariantSample>,
    /// Set when the guard zone was entered.
    pub truncated: Option<Truncation>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        match (self.states.first(), self.states.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantDrift {
    pub name: &'static str,
    pub max_relative: f64,
    pub rms_relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub invariants: Vec<InvariantDrift>,
    pub steps: usize,
    /// Wall-clock seconds, filled in by callers that have a clock.
    pub wall_clock_s: Option<f64>,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<&InvariantDrift> {
        self.invariants.iter().find(|d| d.name == name)
    }

    pub fn max_drift(&self) -> f64 {
        self.invariants.iter().map(|d| d.max_relative).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureVerdict {
    Closed,
    NotClosed,
    /// The trajectory is shorter than the search horizon and no return
    /// was found within it.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureResult {
    pub verdict: ClosureVerdict,
    pub closed: bool,
    /// Time of the first return (0 when not closed).
    pub period_estimate: f64,
    /// Smallest phase-space distance to the initial state after departure.
    pub return_distance: f64,
    /// Time at which `return_distance` was attained.
    pub best_return_time: f64,
    /// Search horizon from the period heuristic.
    pub horizon: f64,
    /// Radial period used by the heuristic.
    pub radial_period: f64,
}

/// Analytic radial period `π/ω0` of the polar families (the radial motion
/// in `r²` is harmonic with frequency `2ω0` for any angular barrier).
pub fn radial_period(pot: &PotentialSpec) -> Option<f64> {
    match pot {
        PotentialSpec::V1 { .. } | PotentialSpec::V2 { .. } | PotentialSpec::Ttw { .. } => {
            let w = pot.omega0()?;
            (w > 0.0).then(|| PI / w)
        }
        _ => None,
    }
}

/// `(n_x, n_y, ω0)` with `ω1 = n_x ω0`, `ω2 = n_y ω0`, when the ratio is a
/// rational with denominator at most 64.
pub fn commensurate_frequencies(omega1: f64, omega2: f64) -> Option<(u32, u32, f64)> {
    if !(omega1 > 0.0 && omega2 > 0.0) {
        return None;
    }
    let ratio = omega1 / omega2;
    for ny in 1..=64u32 {
        let nx = libm::round(ratio * ny as f64);
        if nx >= 1.0 && (nx / ny as f64 - ratio).abs() <= 1e-12 * ratio {
            return Some((nx as u32, ny, omega1 / nx));
        }
    }
    None
}

fn canonical(s: &CartesianState) -> Canonical<f64> {
    Canonical::new(Chart::Cartesian, s.as_array())
}

/// Values for the `(H, J2, Re K, Im K)` slots.
pub fn track_invariants(s: &CartesianState, pot: &PotentialSpec) -> InvariantSample {
    let z = canonical(s);
    let eval = |q: Quantity| -> Option<Complex<f64>> { PhaseObservable::new(q, *pot).eval(&z).ok() };
    let energy = pot.energy_at(&z);
    let (j2, k) = match *pot {
        PotentialSpec::V1 { .. } | PotentialSpec::V2 { .. } | PotentialSpec::Ttw { .. } => {
            (eval(Quantity::J2).map(|c| c.re), eval(Quantity::K))
        }
        PotentialSpec::Ho { omega1, omega2 } => {
            let ex = eval(Quantity::AxisEnergy(crate::observables::Axis::X)).map(|c| c.re);
            let k = commensurate_frequencies(omega1, omega2)
                .and_then(|(nx, ny, omega0)| eval(Quantity::Axy { nx, ny, omega0 }));
            (ex, k)
        }
        PotentialSpec::GenSw { .. } => (
            eval(Quantity::AxisEnergy(crate::observables::Axis::X)).map(|c| c.re),
            eval(Quantity::Bxy),
        ),
        PotentialSpec::CentralPower { .. } => {
            let l = s.x * s.py - s.y * s.px;
            (Some(l * l), None)
        }
    };
    InvariantSample {
        t: s.t,
        energy,
        j2: j2.unwrap_or(f64::NAN),
        re_k: k.map_or(f64::NAN, |c| c.re),
        im_k: k.map_or(f64::NAN, |c| c.im),
    }
}

/// Index of the region between singular sets that contains `s`; a change
/// between steps means the step jumped across a barrier.
fn sector(pot: &PotentialSpec, s: &CartesianState) -> (i64, i64) {
    let side = |v: f64, active: bool| if active && v < 0.0 { 1 } else { 0 };
    match *pot {
        PotentialSpec::GenSw { k1, k2, .. } => (side(s.x, k1 != 0.0), side(s.y, k2 != 0.0)),
        PotentialSpec::V1 { .. } | PotentialSpec::V2 { .. } | PotentialSpec::Ttw { .. } => {
            let Some((lo, hi)) = pot.wedge() else {
                return (0, 0);
            };
            let phi = pot.wedge_angle(libm::atan2(s.y, s.x));
            (libm::floor((phi - lo) / (hi - lo)) as i64, 0)
        }
        _ => (0, 0),
    }
}

fn force(pot: &PotentialSpec, s: &CartesianState) -> (f64, f64) {
    let (gx, gy) = pot.gradient_unchecked(s.x, s.y);
    (-gx, -gy)
}

fn leapfrog_step(pot: &PotentialSpec, s: &mut CartesianState, f: &mut (f64, f64), h: f64) {
    let half = 0.5 * h;
    s.px += half * f.0;
    s.py += half * f.1;
    s.x += h * s.px;
    s.y += h * s.py;
    *f = force(pot, s);
    s.px += half * f.0;
    s.py += half * f.1;
    s.t += h;
}

const YOSHIDA4: [f64; 3] = {
    // w1 = 1 / (2 - 2^(1/3)), w0 = 1 - 2 w1
    let w1 = 1.351_207_191_959_657_8;
    [w1, 1.0 - 2.0 * w1, w1]
};

fn rk4_step(pot: &PotentialSpec, s: &mut CartesianState, h: f64) {
    let deriv = |z: [f64; 4]| -> [f64; 4] {
        let (gx, gy) = pot.gradient_unchecked(z[0], z[1]);
        [z[2], z[3], -gx, -gy]
    };
    let z0 = s.as_array();
    let add = |a: [f64; 4], b: [f64; 4], c: f64| -> [f64; 4] { core::array::from_fn(|i| a[i] + c * b[i]) };
    let k1 = deriv(z0);
    let k2 = deriv(add(z0, k1, 0.5 * h));
    let k3 = deriv(add(z0, k2, 0.5 * h));
    let k4 = deriv(add(z0, k3, h));
    let z: [f64; 4] = core::array::from_fn(|i| z0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    s.x = z[0];
    s.y = z[1];
    s.px = z[2];
    s.py = z[3];
    s.t += h;
}

/// Integrate Hamilton's equations from `s0` for `opts.horizon` time units.
///
/// Entering the guard zone ends integration early with
/// [`Trajectory::truncated`] set; a non-finite state is an error.
pub fn integrate(s0: &PhaseState, pot: &PotentialSpec, opts: &IntegrateOptions) -> Result<Trajectory> {
    opts.validate()?;
    pot.validate()?;
    let mut s = s0.to_cartesian()?;
    s.t = s0.t();
    let t0 = s.t;
    pot.check_state(&canonical(&s), opts.guard)?;

    let n = libm::ceil(opts.horizon / opts.step - 1e-9).max(0.0) as usize;
    let mut states = Vec::with_capacity(n / opts.decimation + 2);
    let mut track = Vec::with_capacity(n + 1);
    states.push(s);
    track.push(track_invariants(&s, pot));

    let mut f = force(pot, &s);
    let home = sector(pot, &s);
    let mut truncated = None;
    for i in 1..=n {
        let target = t0 + opts.horizon.min(i as f64 * opts.step);
        let h = target - s.t;
        match opts.scheme {
            IntegratorScheme::Leapfrog => leapfrog_step(pot, &mut s, &mut f, h),
            IntegratorScheme::Rk4 => rk4_step(pot, &mut s, h),
            IntegratorScheme::Yoshida4 => {
                for w in YOSHIDA4 {
                    leapfrog_step(pot, &mut s, &mut f, w * h);
                }
            }
        }
        s.t = target;
        if !s.is_finite() {
            return Err(Error::Integration(s.t));
        }
        let mut clearance = pot.clearance(&canonical(&s));
        if sector(pot, &s) != home {
            clearance = 0.0;
        }
        if clearance < opts.guard {
            truncated = Some(Truncation { t: s.t, clearance });
            if states.last().map(|l| l.t) != Some(s.t) {
                states.push(s);
            }
            break;
        }
        track.push(track_invariants(&s, pot));
        if i % opts.decimation == 0 || i == n {
            states.push(s);
        }
    }
    Ok(Trajectory {
        states,
        step: opts.step,
        scheme: opts.scheme,
        potential: *pot,
        invariant_track: track,
        truncated,
    })
}

fn drift_of(name: &'static str, values: impl Iterator<Item = f64> + Clone, reference: f64) -> Option<InvariantDrift> {
    let first = values.clone().next()?;
    if !first.is_finite() {
        return None;
    }
    let scale = if reference.abs() < RELATIVE_DRIFT_FLOOR {
        1.0
    } else {
        reference.abs()
    };
    let mut max = 0.0f64;
    let mut sum_sq = 0.0;
    let mut n = 0usize;
    for v in values {
        let d = (v - first).abs() / scale;
        let d = if d.is_nan() { f64::INFINITY } else { d };
        max = max.max(d);
        sum_sq += d * d;
        n += 1;
    }
    Some(InvariantDrift {
        name,
        max_relative: max,
        rms_relative: libm::sqrt(sum_sq / n as f64),
    })
}

/// Drift of each tracked invariant relative to its initial value.
///
/// `J1 = 2H` shares the relative drift of `H`. The two components of `K`
/// are measured against `|K(0)|`, since either component alone can pass
/// through zero.
pub fn drift_report(traj: &Trajectory) -> DriftReport {
    let track = &traj.invariant_track;
    let mut invariants = Vec::new();
    if let Some(first) = track.first() {
        let k0 = libm::hypot(first.re_k, first.im_k);
        let items: [(&'static str, fn(&InvariantSample) -> f64, f64); 5] = [
            ("H", |s| s.energy, first.energy),
            ("J1", |s| 2.0 * s.energy, 2.0 * first.energy),
            ("J2", |s| s.j2, first.j2),
            ("ReK", |s| s.re_k, k0),
            ("ImK", |s| s.im_k, k0),
        ];
        for (name, get, reference) in items {
            if let Some(d) = drift_of(name, track.iter().map(get), reference) {
                invariants.push(d);
            }
        }
    }
    DriftReport {
        invariants,
        steps: track.len().saturating_sub(1),
        wall_clock_s: None,
    }
}

/// Radial period from the zero crossings of `d(r²)/dt = 2(x p_x + y p_y)`.
pub fn estimate_radial_period(traj: &Trajectory) -> Option<f64> {
    let g: Vec<(f64, f64)> = traj.states.iter().map(|s| (s.t, s.x * s.px + s.y * s.py)).collect();
    let scale = traj
        .states
        .iter()
        .map(|s| libm::hypot(s.x, s.y) * libm::hypot(s.px, s.py))
        .fold(0.0, f64::max);
    let amplitude = g.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    if amplitude <= 1e-9 * scale.max(1e-300) {
        return None;
    }
    let mut crossings = Vec::new();
    for w in g.windows(2) {
        let ((t0, a), (t1, b)) = (w[0], w[1]);
        if a == 0.0 {
            crossings.push(t0);
        } else if a * b < 0.0 {
            crossings.push(t0 + (t1 - t0) * a / (a - b));
        }
    }
    crossings.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if crossings.len() < 3 {
        return None;
    }
    // Two crossings (turning points of r²) per radial period.
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

fn position_scale(pot: &PotentialSpec) -> f64 {
    match *pot {
        PotentialSpec::Ho { omega1, omega2 } => {
            commensurate_frequencies(omega1, omega2).map_or(omega1.max(omega2), |(_, _, w)| w)
        }
        PotentialSpec::CentralPower { .. } => 1.0,
        _ => pot.omega0().filter(|w| *w > 0.0).unwrap_or(1.0),
    }
}

/// Fundamental period used to size the closure search.
fn base_period(traj: &Trajectory) -> Option<(f64, f64)> {
    let pot = &traj.potential;
    match *pot {
        PotentialSpec::V1 { k, .. } | PotentialSpec::V2 { k, .. } | PotentialSpec::Ttw { k, .. } => {
            let tr = estimate_radial_period(traj).or_else(|| radial_period(pot))?;
            // TTW(k) is F1 with index 2k.
            let k = pot.factorization().map_or(k, |f| f.k);
            Some((tr, tr * k.den() as f64))
        }
        PotentialSpec::Ho { omega1, omega2 } => {
            let (_, _, w) = commensurate_frequencies(omega1, omega2)?;
            let t = 2.0 * PI / w;
            Some((estimate_radial_period(traj).unwrap_or(t), t))
        }
        PotentialSpec::GenSw { omega0, .. } => {
            let t = 2.0 * PI / omega0;
            Some((estimate_radial_period(traj).unwrap_or(t), t))
        }
        PotentialSpec::CentralPower { .. } => {
            let tr = estimate_radial_period(traj)?;
            Some((tr, tr))
        }
    }
}

/// Safety factor applied to the base period when sizing the horizon.
pub const CLOSURE_SAFETY: f64 = 4.0;

fn hermite(pot: &PotentialSpec, a: &CartesianState, b: &CartesianState, u: f64) -> [f64; 4] {
    let h = b.t - a.t;
    let da = {
        let (fx, fy) = force(pot, a);
        [a.px, a.py, fx, fy]
    };
    let db = {
        let (fx, fy) = force(pot, b);
        [b.px, b.py, fx, fy]
    };
    let (za, zb) = (a.as_array(), b.as_array());
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    core::array::from_fn(|i| h00 * za[i] + h10 * h * da[i] + h01 * zb[i] + h11 * h * db[i])
}

fn scaled_distance(z: &[f64; 4], origin: &[f64; 4], w: f64) -> f64 {
    let d = [
        w * (z[0] - origin[0]),
        w * (z[1] - origin[1]),
        z[2] - origin[2],
        z[3] - origin[3],
    ];
    libm::sqrt(d.iter().map(|v| v * v).sum())
}

/// Minimise the interpolated distance on the interval `[a, b]` by golden
/// section search; returns `(t, distance)`.
fn refine_minimum(pot: &PotentialSpec, a: &CartesianState, b: &CartesianState, origin: &[f64; 4], w: f64) -> (f64, f64) {
    let dist = |u: f64| scaled_distance(&hermite(pot, a, b, u), origin, w);
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (dist(x1), dist(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist(x2);
        }
    }
    let u = 0.5 * (lo + hi);
    let candidates = [(0.0, dist(0.0)), (1.0, dist(1.0)), (u, dist(u))];
    let (u, d) = candidates
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    (a.t + u * (b.t - a.t), d)
}

/// Find the earliest return of the trajectory to its initial phase-space
/// point within distance `eps`.
///
/// Positions are scaled by `ω0` before measuring distance. The search
/// horizon is `q · T_r · 4` for the polar families with `k = p/q`, where
/// `T_r` is the radial period estimated from the trajectory, and four
/// fundamental periods for the Cartesian oscillators.
pub fn closure_detect(traj: &Trajectory, eps: f64) -> Result<ClosureResult> {
    if !(eps > 0.0) {
        return Err(Error::Domain("closure eps must be positive"));
    }
    let states = &traj.states;
    if states.len() < 3 {
        return Err(Error::Domain("trajectory too short for closure detection"));
    }
    let pot = &traj.potential;
    let w = position_scale(pot);
    let origin = states[0].as_array();
    let t0 = states[0].t;
    let (radial, base) = base_period(traj).unwrap_or((traj.duration(), traj.duration()));
    let horizon = CLOSURE_SAFETY * base;
    let span = traj.duration();
    let limit = t0 + horizon.min(span);

    let dists: Vec<f64> = states.iter().map(|s| scaled_distance(&s.as_array(), &origin, w)).collect();
    let size = scaled_distance(&origin, &[0.0; 4], w).max(1e-12);
    let departure = (10.0 * eps).max(1e-2 * size);
    let Some(start) = dists.iter().position(|d| *d > departure) else {
        return Err(Error::Domain("trajectory never leaves the neighbourhood of its initial state"));
    };

    let mut best = (f64::INFINITY, 0.0);
    let mut found = None;
    for i in start.max(1)..states.len() - 1 {
        if states[i - 1].t > limit {
            break;
        }
        if !(dists[i] <= dists[i - 1] && dists[i] <= dists[i + 1]) {
            continue;
        }
        // Only refine dips that could plausibly reach eps between samples.
        let chord = scaled_distance(&states[i + 1].as_array(), &states[i - 1].as_array(), w);
        if dists[i] > chord + eps && dists[i] > best.0 {
            continue;
        }
        let (ta, da) = refine_minimum(pot, &states[i - 1], &states[i], &origin, w);
        let (tb, db) = refine_minimum(pot, &states[i], &states[i + 1], &origin, w);
        let (t, d) = if da <= db { (ta, da) } else { (tb, db) };
        if t > limit {
            continue;
        }
        if d < best.0 {
            best = (d, t);
        }
        if d < eps {
            found = Some((t, d));
            break;
        }
    }
    if best.0.is_infinite() {
        // No local minimum inside the window; report the smallest sample.
        for (i, d) in dists.iter().enumerate().skip(start) {
            if states[i].t <= limit && *d < best.0 {
                best = (*d, states[i].t);
            }
        }
    }
    let (verdict, period) = match found {
        Some((t, _)) => (ClosureVerdict::Closed, t - t0),
        None if span + 1e-9 * span.max(1.0) >= horizon => (ClosureVerdict::NotClosed, 0.0),
        None => (ClosureVerdict::Inconclusive, 0.0),
    };
    Ok(ClosureResult {
        verdict,
        closed: verdict == ClosureVerdict::Closed,
        period_estimate: period,
        return_distance: found.map_or(best.0, |f| f.1),
        best_return_time: found.map_or(best.1, |f| f.0) - t0,
        horizon,
        radial_period: radial,
    })
}

/// Search horizon the closure heuristic will use for a potential, based on
/// the analytic periods (useful for sizing the trajectory up front).
pub fn closure_horizon(pot: &PotentialSpec) -> Option<f64> {
    let base = match *pot {
        PotentialSpec::V1 { .. } | PotentialSpec::V2 { .. } | PotentialSpec::Ttw { .. } => {
            radial_period(pot)? * pot.factorization()?.k.den() as f64
        }
        PotentialSpec::Ho { omega1, omega2 } => 2.0 * PI / commensurate_frequencies(omega1, omega2)?.2,
        PotentialSpec::GenSw { omega0, .. } => 2.0 * PI / omega0,
        PotentialSpec::CentralPower { .. } => return None,
    };
    Some(CLOSURE_SAFETY * base)
}
