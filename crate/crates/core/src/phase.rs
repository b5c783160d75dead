//! Phase-space states, the polar/Cartesian point transform, and the
//! Hamiltonian `H = ½|p|² + V(q)` (unit mass, so velocities equal momenta).

use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::potentials::{AngularFamily, AngularFunction};
use crate::rational::Rational;
use crate::scalar::Real;

/// Evaluations closer than this (radians of `kφ`, or length) to a singular
/// ray or axis are refused.
pub const SINGULARITY_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarState {
    pub r: f64,
    pub phi: f64,
    pub pr: f64,
    pub pphi: f64,
    pub t: f64,
}

/// A phase-space point in either chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseState {
    Polar(PolarState),
    Cartesian(CartesianState),
}

impl From<PolarState> for PhaseState {
    fn from(s: PolarState) -> Self {
        PhaseState::Polar(s)
    }
}

impl From<CartesianState> for PhaseState {
    fn from(s: CartesianState) -> Self {
        PhaseState::Cartesian(s)
    }
}

impl CartesianState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py, t: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite()) && self.t.is_finite()
    }
}

impl PolarState {
    pub fn new(r: f64, phi: f64, pr: f64, pphi: f64) -> Self {
        Self { r, phi, pr, pphi, t: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r, self.phi, self.pr, self.pphi]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite()) && self.t.is_finite()
    }
}

impl PhaseState {
    pub fn t(&self) -> f64 {
        match self {
            PhaseState::Polar(s) => s.t,
            PhaseState::Cartesian(s) => s.t,
        }
    }

    pub fn canonical(&self) -> Canonical<f64> {
        match *self {
            PhaseState::Polar(s) => Canonical::new(Chart::Polar, s.as_array()),
            PhaseState::Cartesian(s) => Canonical::new(Chart::Cartesian, s.as_array()),
        }
    }

    pub fn to_cartesian(&self) -> Result<CartesianState> {
        match *self {
            PhaseState::Polar(s) => to_cartesian(s),
            PhaseState::Cartesian(s) => Ok(s),
        }
    }

    pub fn to_polar(&self) -> Result<PolarState> {
        match *self {
            PhaseState::Polar(s) => Ok(s),
            PhaseState::Cartesian(s) => to_polar(s),
        }
    }
}

/// Which canonical chart the four coordinates belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `(r, φ, p_r, p_φ)`
    Polar,
    /// `(x, y, p_x, p_y)`
    Cartesian,
}

/// Canonical coordinates `(q1, q2, p1, p2)` in a chart, generic over the
/// scalar so the same observable code runs on `f64` and dual numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canonical<R> {
    pub chart: Chart,
    pub z: [R; 4],
}

#[derive(Debug, Clone, Copy)]
pub struct PolarCoords<R> {
    pub r: R,
    pub phi: R,
    pub pr: R,
    pub pphi: R,
}

#[derive(Debug, Clone, Copy)]
pub struct CartesianCoords<R> {
    pub x: R,
    pub y: R,
    pub px: R,
    pub py: R,
}

impl<R: Real> Canonical<R> {
    pub fn new(chart: Chart, z: [R; 4]) -> Self {
        Self { chart, z }
    }

    pub fn polar(&self) -> PolarCoords<R> {
        let [a, b, c, d] = self.z;
        match self.chart {
            Chart::Polar => PolarCoords {
                r: a,
                phi: b,
                pr: c,
                pphi: d,
            },
            Chart::Cartesian => cartesian_to_polar(CartesianCoords {
                x: a,
                y: b,
                px: c,
                py: d,
            }),
        }
    }

    pub fn cartesian(&self) -> CartesianCoords<R> {
        let [a, b, c, d] = self.z;
        match self.chart {
            Chart::Cartesian => CartesianCoords {
                x: a,
                y: b,
                px: c,
                py: d,
            },
            Chart::Polar => polar_to_cartesian(PolarCoords {
                r: a,
                phi: b,
                pr: c,
                pphi: d,
            }),
        }
    }

    pub fn values(&self) -> Canonical<f64> {
        Canonical {
            chart: self.chart,
            z: self.z.map(Real::value),
        }
    }
}

pub fn polar_to_cartesian<R: Real>(s: PolarCoords<R>) -> CartesianCoords<R> {
    let (sn, cs) = s.phi.sin_cos();
    let w = s.pphi / s.r;
    CartesianCoords {
        x: s.r * cs,
        y: s.r * sn,
        px: s.pr * cs - w * sn,
        py: s.pr * sn + w * cs,
    }
}

pub fn cartesian_to_polar<R: Real>(s: CartesianCoords<R>) -> PolarCoords<R> {
    let r = (s.x * s.x + s.y * s.y).sqrt();
    PolarCoords {
        r,
        phi: s.y.atan2(s.x),
        pr: (s.x * s.px + s.y * s.py) / r,
        pphi: s.x * s.py - s.y * s.px,
    }
}

/// Canonical point transform `(r, φ, p_r, p_φ) → (x, y, p_x, p_y)`.
pub fn to_cartesian(s: PolarState) -> Result<CartesianState> {
    if !s.is_finite() {
        return Err(Error::Domain("non-finite polar state"));
    }
    if s.r <= 0.0 {
        return Err(Error::Domain("polar state requires r > 0"));
    }
    let c = polar_to_cartesian(PolarCoords {
        r: s.r,
        phi: s.phi,
        pr: s.pr,
        pphi: s.pphi,
    });
    Ok(CartesianState {
        x: c.x,
        y: c.y,
        px: c.px,
        py: c.py,
        t: s.t,
    })
}

/// Inverse transform; the angle is returned in `(-π, π]`.
pub fn to_polar(s: CartesianState) -> Result<PolarState> {
    if !s.is_finite() {
        return Err(Error::Domain("non-finite Cartesian state"));
    }
    if s.x == 0.0 && s.y == 0.0 {
        return Err(Error::Domain("the origin has no polar representation"));
    }
    let p = cartesian_to_polar(CartesianCoords {
        x: s.x,
        y: s.y,
        px: s.px,
        py: s.py,
    });
    Ok(PolarState {
        r: p.r,
        phi: p.phi,
        pr: p.pr,
        pphi: p.pphi,
        t: s.t,
    })
}

/// The potential families.
///
/// All polar families share `V = ½ ω0² r² + F(φ) / (2 r²)`; they differ in
/// the angular function `F`. `CentralPower` is `½ c r^m`, the central
/// potential `U/2` used when characterising which central potentials admit
/// the rotating factor `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// `½ (ω1² x² + ω2² y²)`
    Ho { omega1: f64, omega2: f64 },
    /// `½ ω0² (n_x² x² + n_y² y²) + k1 / (2x²) + k2 / (2y²)`
    GenSw {
        omega0: f64,
        nx: u32,
        ny: u32,
        k1: f64,
        k2: f64,
    },
    /// `½ ω0² r² + (α / cos² kφ + β / sin² kφ) / (2 r²)`
    Ttw {
        omega0: f64,
        k: Rational,
        alpha: f64,
        beta: f64,
    },
    /// `½ ω0² r² + F1(φ) / (2 r²)`
    V1 {
        omega0: f64,
        k: Rational,
        ka: f64,
        kb: f64,
    },
    /// `½ ω0² r² + F2(φ) / (2 r²)`
    V2 {
        omega0: f64,
        k: Rational,
        ka: f64,
        kb: f64,
    },
    /// `½ c r^m`
    CentralPower { c: f64, m: f64 },
}

/// Parameters of the factorised constant for a polar family: which `N`
/// factor to use, the index `k = p/q`, and the `F1`/`F2` coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factorization {
    pub family: AngularFamily,
    pub omega0: f64,
    pub k: Rational,
    pub ka: f64,
    pub kb: f64,
}

impl PotentialSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            PotentialSpec::Ho { .. } => "HO",
            PotentialSpec::GenSw { .. } => "GenSW",
            PotentialSpec::Ttw { .. } => "TTW",
            PotentialSpec::V1 { .. } => "V1",
            PotentialSpec::V2 { .. } => "V2",
            PotentialSpec::CentralPower { .. } => "CentralPower",
        }
    }

    /// Parameter invariants that hold for every use of the potential.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            PotentialSpec::Ho { omega1, omega2 } => {
                if !finite(&[omega1, omega2]) || omega1 < 0.0 || omega2 < 0.0 {
                    return Err(Error::Domain("frequencies must be finite and >= 0"));
                }
            }
            PotentialSpec::GenSw {
                omega0,
                nx,
                ny,
                k1,
                k2,
            } => {
                if !finite(&[omega0, k1, k2]) || omega0 < 0.0 {
                    return Err(Error::Domain("GenSW needs finite parameters and omega0 >= 0"));
                }
                if nx == 0 || ny == 0 {
                    return Err(Error::Domain("n_x and n_y must be >= 1"));
                }
            }
            PotentialSpec::Ttw {
                omega0,
                alpha,
                beta,
                ..
            } => {
                if !finite(&[omega0, alpha, beta]) || omega0 < 0.0 {
                    return Err(Error::Domain("TTW needs finite parameters and omega0 >= 0"));
                }
            }
            PotentialSpec::V1 { omega0, ka, kb, .. } | PotentialSpec::V2 { omega0, ka, kb, .. } => {
                if !finite(&[omega0, ka, kb]) || omega0 < 0.0 {
                    return Err(Error::Domain("V1/V2 need finite parameters and omega0 >= 0"));
                }
            }
            PotentialSpec::CentralPower { c, m } => {
                if !finite(&[c, m]) {
                    return Err(Error::Domain("central power needs finite c and m"));
                }
            }
        }
        Ok(())
    }

    /// Extra requirement for integrating trajectories: barriers repulsive on
    /// both wedge edges.
    pub fn validate_for_trajectory(&self) -> Result<()> {
        self.validate()?;
        match *self {
            PotentialSpec::V1 { ka, kb, .. } | PotentialSpec::V2 { ka, kb, .. } if ka <= kb.abs() => Err(
                Error::Domain("V1/V2 trajectories require k_a > |k_b| (repulsive barrier on both wedge edges)"),
            ),
            PotentialSpec::Ttw { alpha, beta, .. } if alpha <= 0.0 || beta <= 0.0 => Err(Error::Domain(
                "TTW trajectories require alpha > 0 and beta > 0 (equivalently k_a > |k_b|)",
            )),
            _ => Ok(()),
        }
    }

    pub fn omega0(&self) -> Option<f64> {
        match *self {
            PotentialSpec::GenSw { omega0, .. }
            | PotentialSpec::Ttw { omega0, .. }
            | PotentialSpec::V1 { omega0, .. }
            | PotentialSpec::V2 { omega0, .. } => Some(omega0),
            _ => None,
        }
    }

    pub fn k(&self) -> Option<Rational> {
        match *self {
            PotentialSpec::Ttw { k, .. } | PotentialSpec::V1 { k, .. } | PotentialSpec::V2 { k, .. } => Some(k),
            _ => None,
        }
    }

    /// Angular function of the polar families.
    pub fn angular(&self) -> Option<AngularFunction> {
        match *self {
            PotentialSpec::Ttw { k, alpha, beta, .. } => Some(AngularFunction::ttw(k.to_f64(), alpha, beta)),
            PotentialSpec::V1 { k, ka, kb, .. } => Some(AngularFunction::f1(k.to_f64(), ka, kb)),
            PotentialSpec::V2 { k, ka, kb, .. } => Some(AngularFunction::f2(k.to_f64(), ka, kb)),
            _ => None,
        }
    }

    /// `(k, k_a, k_b)` of the factorised constant. TTW with index `k` is the
    /// F1 family with index `2k` and `k_a = 2(α+β)`, `k_b = 2(β−α)`.
    pub fn factorization(&self) -> Option<Factorization> {
        match *self {
            PotentialSpec::V1 { omega0, k, ka, kb } => Some(Factorization {
                family: AngularFamily::F1,
                omega0,
                k,
                ka,
                kb,
            }),
            PotentialSpec::V2 { omega0, k, ka, kb } => Some(Factorization {
                family: AngularFamily::F2,
                omega0,
                k,
                ka,
                kb,
            }),
            PotentialSpec::Ttw {
                omega0,
                k,
                alpha,
                beta,
            } => {
                let (ka, kb) = crate::potentials::ttw_to_f1_coefficients(alpha, beta);
                Some(Factorization {
                    family: AngularFamily::F1,
                    omega0,
                    k: k.scale(2).ok()?,
                    ka,
                    kb,
                })
            }
            _ => None,
        }
    }

    /// Open angular sector `(lo, hi)` between adjacent singular rays that
    /// serves as the configuration space of a polar family.
    pub fn wedge(&self) -> Option<(f64, f64)> {
        let k = self.k()?.to_f64();
        match self {
            PotentialSpec::V1 { .. } => Some((0.0, PI / k)),
            PotentialSpec::V2 { .. } => Some((-PI / (2.0 * k), PI / (2.0 * k))),
            PotentialSpec::Ttw { .. } => Some((0.0, PI / (2.0 * k))),
            _ => None,
        }
    }

    /// Shift an angle by whole turns into `[lo, lo + 2π)` of the wedge.
    /// Families without a wedge use `(-π, π]` unchanged.
    pub(crate) fn wedge_angle(&self, phi: f64) -> f64 {
        match self.wedge() {
            Some((lo, _)) => {
                let turns = libm::floor((phi - lo) / TAU);
                phi - turns * TAU
            }
            None => phi,
        }
    }

    /// Distance to the singular set: `|sin kφ|`-type clearance for the polar
    /// families, distance to the barrier axes for GenSW, and `r` for every
    /// family with a `1/r²` term or a central power.
    pub fn clearance(&self, state: &Canonical<f64>) -> f64 {
        match *self {
            PotentialSpec::Ho { .. } => f64::INFINITY,
            PotentialSpec::GenSw { k1, k2, .. } => {
                let c = state.cartesian();
                let mut d = f64::INFINITY;
                if k1 != 0.0 {
                    d = d.min(c.x.abs());
                }
                if k2 != 0.0 {
                    d = d.min(c.y.abs());
                }
                d
            }
            PotentialSpec::CentralPower { .. } => state.polar().r,
            _ => {
                let p = state.polar();
                let ang = self.angular().expect("polar family");
                ang.clearance(p.phi).min(p.r)
            }
        }
    }

    fn check(&self, state: &Canonical<f64>, guard: f64) -> Result<()> {
        if !state.z.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("non-finite state"));
        }
        let clearance = self.clearance(state);
        if clearance < guard {
            return Err(Error::Singularity {
                what: match self {
                    PotentialSpec::GenSw { .. } => "coordinate axis of a GenSW barrier",
                    PotentialSpec::CentralPower { .. } => "origin of the central potential",
                    PotentialSpec::V1 { .. } => "sin(k phi) = 0 ray of V1",
                    PotentialSpec::V2 { .. } => "cos(k phi) = 0 ray of V2",
                    PotentialSpec::Ttw { .. } => "singular ray of the TTW barrier",
                    PotentialSpec::Ho { .. } => "none",
                },
                clearance,
            });
        }
        Ok(())
    }

    /// Refuse states within `guard` of the singular set.
    pub fn check_state(&self, state: &Canonical<f64>, guard: f64) -> Result<()> {
        self.check(state, guard)
    }

    /// Potential in polar coordinates, no guard.
    pub fn potential_polar<R: Real>(&self, r: R, phi: R) -> R {
        let half = R::cst(0.5);
        match *self {
            PotentialSpec::CentralPower { c, m } => half * R::cst(c) * r.powf(m),
            PotentialSpec::Ho { .. } | PotentialSpec::GenSw { .. } => {
                let (s, cs) = phi.sin_cos();
                self.potential_cartesian(r * cs, r * s)
            }
            _ => {
                let omega0 = R::cst(self.omega0().expect("polar family"));
                let f = self.angular().expect("polar family").value_unchecked(phi);
                let r2 = r * r;
                half * omega0 * omega0 * r2 + half * f / r2
            }
        }
    }

    /// Potential in Cartesian coordinates, no guard.
    pub fn potential_cartesian<R: Real>(&self, x: R, y: R) -> R {
        let half = R::cst(0.5);
        match *self {
            PotentialSpec::Ho { omega1, omega2 } => {
                let (w1, w2) = (R::cst(omega1), R::cst(omega2));
                half * (w1 * w1 * x * x + w2 * w2 * y * y)
            }
            PotentialSpec::GenSw {
                omega0,
                nx,
                ny,
                k1,
                k2,
            } => {
                let wx = R::cst(omega0 * nx as f64);
                let wy = R::cst(omega0 * ny as f64);
                let mut v = half * (wx * wx * x * x + wy * wy * y * y);
                if k1 != 0.0 {
                    v = v + R::cst(k1) / (R::cst(2.0) * x * x);
                }
                if k2 != 0.0 {
                    v = v + R::cst(k2) / (R::cst(2.0) * y * y);
                }
                v
            }
            PotentialSpec::CentralPower { c, m } => half * R::cst(c) * (x * x + y * y).powf(0.5 * m),
            _ => {
                let r2 = x * x + y * y;
                let mut phi = y.atan2(x);
                let shift = self.wedge_angle(phi.value()) - phi.value();
                if shift != 0.0 {
                    phi = phi + R::cst(shift);
                }
                let omega0 = R::cst(self.omega0().expect("polar family"));
                let f = self.angular().expect("polar family").value_unchecked(phi);
                half * omega0 * omega0 * r2 + half * f / r2
            }
        }
    }

    /// Potential on a canonical point of either chart, no guard.
    pub fn potential_at<R: Real>(&self, state: &Canonical<R>) -> R {
        match state.chart {
            Chart::Polar => {
                let p = state.polar();
                self.potential_polar(p.r, p.phi)
            }
            Chart::Cartesian => {
                let c = state.cartesian();
                self.potential_cartesian(c.x, c.y)
            }
        }
    }

    /// `H = ½|p|² + V` on a canonical point of either chart, no guard.
    pub fn energy_at<R: Real>(&self, state: &Canonical<R>) -> R {
        let half = R::cst(0.5);
        let kinetic = match state.chart {
            Chart::Polar => {
                let p = state.polar();
                half * (p.pr * p.pr + p.pphi * p.pphi / (p.r * p.r))
            }
            Chart::Cartesian => {
                let c = state.cartesian();
                half * (c.px * c.px + c.py * c.py)
            }
        };
        kinetic + self.potential_at(state)
    }

    /// Analytic `(∂V/∂x, ∂V/∂y)`.
    pub fn gradient(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let state = Canonical::new(Chart::Cartesian, [x, y, 0.0, 0.0]);
        self.check(&state, SINGULARITY_GUARD)?;
        Ok(self.gradient_unchecked(x, y))
    }

    pub(crate) fn gradient_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            PotentialSpec::Ho { omega1, omega2 } => (omega1 * omega1 * x, omega2 * omega2 * y),
            PotentialSpec::GenSw {
                omega0,
                nx,
                ny,
                k1,
                k2,
            } => {
                let wx = omega0 * nx as f64;
                let wy = omega0 * ny as f64;
                let mut gx = wx * wx * x;
                let mut gy = wy * wy * y;
                if k1 != 0.0 {
                    gx -= k1 / (x * x * x);
                }
                if k2 != 0.0 {
                    gy -= k2 / (y * y * y);
                }
                (gx, gy)
            }
            PotentialSpec::CentralPower { c, m } => {
                let r2 = x * x + y * y;
                let f = 0.5 * c * m * libm::pow(r2, 0.5 * m - 1.0);
                (f * x, f * y)
            }
            _ => {
                let omega0 = self.omega0().expect("polar family");
                let ang = self.angular().expect("polar family");
                let r2 = x * x + y * y;
                let r = libm::sqrt(r2);
                let phi = self.wedge_angle(libm::atan2(y, x));
                let f = ang.value_unchecked(phi);
                let df = ang.derivative_unchecked(phi);
                let dv_dr = omega0 * omega0 * r - f / (r2 * r);
                let dv_dphi = 0.5 * df / r2;
                (dv_dr * x / r - dv_dphi * y / r2, dv_dr * y / r + dv_dphi * x / r2)
            }
        }
    }

    /// Central-difference gradient. Test oracle only.
    pub fn gradient_central_difference(&self, x: f64, y: f64, step: f64) -> (f64, f64) {
        let hx = step * x.abs().max(1.0);
        let hy = step * y.abs().max(1.0);
        let v = |a: f64, b: f64| self.potential_cartesian(a, b);
        (
            (v(x + hx, y) - v(x - hx, y)) / (2.0 * hx),
            (v(x, y + hy) - v(x, y - hy)) / (2.0 * hy),
        )
    }
}

/// `H(s)` with the singularity guard; polar and Cartesian states agree.
pub fn hamiltonian(state: impl Into<PhaseState>, pot: &PotentialSpec) -> Result<f64> {
    let state = state.into();
    if let PhaseState::Polar(p) = state {
        if p.r <= 0.0 {
            return Err(Error::Domain("polar state requires r > 0"));
        }
    }
    let c = state.canonical();
    pot.check(&c, SINGULARITY_GUARD)?;
    Ok(pot.energy_at(&c))
}

/// Hamilton's equations in Cartesian form: `(p_x, p_y, -∂V/∂x, -∂V/∂y)`.
pub fn eom(s: &CartesianState, pot: &PotentialSpec) -> Result<[f64; 4]> {
    if !s.is_finite() {
        return Err(Error::Domain("non-finite state"));
    }
    let (gx, gy) = pot.gradient(s.x, s.y)?;
    Ok([s.px, s.py, -gx, -gy])
}
