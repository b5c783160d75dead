//! Numerical Poisson brackets and the residual checks built on them.
//!
//! `{f, g} = Σ_i ∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i` in whichever canonical
//! chart the state is given. Derivatives come either from a central
//! finite-difference stencil or from one forward-mode dual-number pass.
//! Complex observables are differentiated componentwise.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::observables::{Observable, PhaseObservable, Quantity};
use crate::phase::{Canonical, Chart, PhaseState, PolarState, PotentialSpec};
use crate::scalar::{Dual, PHASE_DIM};

/// Default relative finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Absolute lower bound on any stencil half-width.
pub const FD_STEP_FLOOR: f64 = 1e-8;
/// Singular values of the row-normalised Jacobian above this count towards
/// the rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    CentralFd,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketConfig {
    pub fd_step: f64,
    pub scheme: Scheme,
    pub rank_tol: f64,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self {
            fd_step: DEFAULT_FD_STEP,
            scheme: Scheme::CentralFd,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl BracketConfig {
    pub fn new(fd_step: f64, scheme: Scheme) -> Result<Self> {
        let cfg = Self {
            fd_step,
            scheme,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dual() -> Self {
        Self {
            scheme: Scheme::Dual,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 1e-12 && self.fd_step <= 1e-2) {
            return Err(Error::Domain("fd_step must lie in (1e-12, 1e-2]"));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::Domain("rank_tol must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Stencil half-widths for each coordinate of `z`.
    pub fn steps(&self, z: &[f64; PHASE_DIM]) -> [f64; PHASE_DIM] {
        z.map(|v| (self.fd_step * v.abs().max(1.0)).max(FD_STEP_FLOOR))
    }
}

fn stencil_error(e: Error, required: f64) -> Error {
    match e {
        Error::Singularity { clearance, .. } => Error::Stencil { clearance, required },
        other => other,
    }
}

/// Gradient of a (possibly complex) observable with respect to the four
/// canonical coordinates.
pub fn gradient(obs: &dyn Observable, z: &Canonical<f64>, cfg: &BracketConfig) -> Result<[Complex<f64>; PHASE_DIM]> {
    match cfg.scheme {
        Scheme::Dual => {
            let mut dz = [Dual::constant(0.0); PHASE_DIM];
            for (i, d) in dz.iter_mut().enumerate() {
                *d = Dual::variable(z.z[i], i);
            }
            let v = obs.eval_dual(&Canonical::new(z.chart, dz))?;
            let mut g = [Complex::new(0.0, 0.0); PHASE_DIM];
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = Complex::new(v.re.eps[i], v.im.eps[i]);
            }
            Ok(g)
        }
        Scheme::CentralFd => {
            let h = cfg.steps(&z.z);
            let required = 10.0 * h.iter().cloned().fold(0.0, f64::max);
            let clearance = obs.clearance(z);
            if clearance < required {
                return Err(Error::Stencil { clearance, required });
            }
            let mut g = [Complex::new(0.0, 0.0); PHASE_DIM];
            for i in 0..PHASE_DIM {
                let mut plus = *z;
                let mut minus = *z;
                plus.z[i] += h[i];
                minus.z[i] -= h[i];
                let fp = obs.eval_f64(&plus).map_err(|e| stencil_error(e, required))?;
                let fm = obs.eval_f64(&minus).map_err(|e| stencil_error(e, required))?;
                // Actual spacing, which differs from 2h by roundoff.
                let span = plus.z[i] - minus.z[i];
                g[i] = (fp - fm) / span;
            }
            Ok(g)
        }
    }
}

fn bracket_from_gradients(df: &[Complex<f64>; PHASE_DIM], dg: &[Complex<f64>; PHASE_DIM]) -> Complex<f64> {
    df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1]
}

/// `{f, g}` at a canonical point.
pub fn poisson_canonical(
    f: &dyn Observable,
    g: &dyn Observable,
    z: &Canonical<f64>,
    cfg: &BracketConfig,
) -> Result<Complex<f64>> {
    let df = gradient(f, z, cfg)?;
    let dg = gradient(g, z, cfg)?;
    Ok(bracket_from_gradients(&df, &dg))
}

/// `{f, g}` at a phase-space state of either chart.
pub fn poisson(f: &dyn Observable, g: &dyn Observable, s: &PhaseState, cfg: &BracketConfig) -> Result<Complex<f64>> {
    poisson_canonical(f, g, &s.canonical(), cfg)
}

/// Time-evolution laws `dF/dt = ρ F` that the residual check verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evolving {
    /// `ρ = 2iλ`
    M,
    /// `ρ = ikλ` (F1 family)
    N,
    /// `ρ = ikλ` (F2 family)
    N2,
    /// `ρ = 0`
    K,
    /// `ρ = i ω1` for `HO(ω1, ω2)`
    Ax,
    /// `ρ = 2i n_x ω0` for GenSW
    Bx,
    /// `ρ = 2i n_y ω0` for GenSW
    By,
    /// `ρ = 0`
    J1,
    /// `ρ = 0`
    J2,
}

impl Evolving {
    pub fn name(self) -> &'static str {
        match self {
            Evolving::M => "M",
            Evolving::N => "N",
            Evolving::N2 => "N2",
            Evolving::K => "K",
            Evolving::Ax => "A_x",
            Evolving::Bx => "B_x",
            Evolving::By => "B_y",
            Evolving::J1 => "J1",
            Evolving::J2 => "J2",
        }
    }
}

/// Outcome of one evolution-law check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionResidual {
    /// `{F, H}` as measured.
    pub bracket: Complex<f64>,
    /// `ρ F` as claimed.
    pub expected: Complex<f64>,
    /// `|F|` at the state.
    pub magnitude: f64,
    /// `‖{F, H} − ρ F‖`.
    pub residual: f64,
}

impl EvolutionResidual {
    /// Residual per unit `|F|`, i.e. the error in `d ln F / dt`.
    pub fn relative(&self) -> f64 {
        if self.magnitude > 0.0 {
            self.residual / self.magnitude
        } else {
            self.residual
        }
    }
}

fn rate(which: Evolving, z: &Canonical<f64>, pot: &PotentialSpec) -> Result<Complex<f64>> {
    let unsupported = || Error::Unsupported {
        observable: which.name(),
        family: pot.family_name(),
    };
    match which {
        Evolving::K | Evolving::J1 | Evolving::J2 => Ok(Complex::new(0.0, 0.0)),
        Evolving::M | Evolving::N | Evolving::N2 => {
            let lambda = PhaseObservable::new(Quantity::Lambda, *pot).eval_f64(z)?.re;
            if which == Evolving::M {
                Ok(Complex::new(0.0, 2.0 * lambda))
            } else {
                let k = pot.factorization().ok_or_else(unsupported)?.k.to_f64();
                Ok(Complex::new(0.0, k * lambda))
            }
        }
        Evolving::Ax => match *pot {
            PotentialSpec::Ho { omega1, .. } => Ok(Complex::new(0.0, omega1)),
            _ => Err(unsupported()),
        },
        Evolving::Bx | Evolving::By => match *pot {
            PotentialSpec::GenSw { omega0, nx, ny, .. } => {
                let n = if which == Evolving::Bx { nx } else { ny };
                Ok(Complex::new(0.0, 2.0 * n as f64 * omega0))
            }
            _ => Err(unsupported()),
        },
    }
}

fn evolving_observable(which: Evolving, pot: &PotentialSpec) -> Result<PhaseObservable> {
    use crate::observables::Axis;
    let q = match which {
        Evolving::M => Quantity::M,
        Evolving::N => Quantity::N,
        Evolving::N2 => Quantity::N2,
        Evolving::K => Quantity::K,
        Evolving::J1 => Quantity::J1,
        Evolving::J2 => Quantity::J2,
        Evolving::Bx => Quantity::B(Axis::X),
        Evolving::By => Quantity::B(Axis::Y),
        Evolving::Ax => match *pot {
            PotentialSpec::Ho { omega1, .. } => Quantity::A {
                axis: Axis::X,
                nx: 1,
                ny: 1,
                omega0: omega1,
            },
            _ => {
                return Err(Error::Unsupported {
                    observable: "A_x",
                    family: pot.family_name(),
                })
            }
        },
    };
    Ok(PhaseObservable::new(q, *pot))
}

/// `‖{F, H} − ρ F‖` for the evolution law selected by `which`.
pub fn evolution_residual(
    which: Evolving,
    s: &PhaseState,
    pot: &PotentialSpec,
    cfg: &BracketConfig,
) -> Result<EvolutionResidual> {
    let z = s.canonical();
    let obs = evolving_observable(which, pot)?;
    let h = PhaseObservable::new(Quantity::Energy, *pot);
    let bracket = poisson_canonical(&obs, &h, &z, cfg)?;
    let value = obs.eval_f64(&z)?;
    let expected = rate(which, &z, pot)? * value;
    Ok(EvolutionResidual {
        bracket,
        expected,
        magnitude: value.norm(),
        residual: (bracket - expected).norm(),
    })
}

/// Residuals of the two rotation laws of the central-potential factor
/// `M = (2/r) p_r p_φ + i (p_r² − p_φ²/r² + U)` with `U = c r^m` and
/// `H = ½|p|² + ½U`:
///
/// * `residual_i = |dM_i/dt − 2λ0 M_r|`, zero for every `U`;
/// * `residual_r = |dM_r/dt + 2λ0 M_i|`, zero iff `r U' − 2U = 0`.
pub fn step1_check(c: f64, m: f64, s: &PolarState, cfg: &BracketConfig) -> Result<(f64, f64)> {
    if !(s.r > 0.0) {
        return Err(Error::Domain("step-1 check requires r > 0"));
    }
    let pot = PotentialSpec::CentralPower { c, m };
    pot.validate()?;
    let z = Canonical::new(Chart::Polar, s.as_array());
    let mobs = PhaseObservable::new(Quantity::CentralM, pot);
    let h = PhaseObservable::new(Quantity::Energy, pot);
    let dm = poisson_canonical(&mobs, &h, &z, cfg)?;
    let mv = mobs.eval_f64(&z)?;
    let lambda0 = s.pphi / (s.r * s.r);
    let residual_i = (dm.im - 2.0 * lambda0 * mv.re).abs();
    let residual_r = (dm.re + 2.0 * lambda0 * mv.im).abs();
    Ok((residual_i, residual_r))
}

/// Singular values (descending) of the row-normalised Jacobian of the real
/// parts of `observables`.
pub fn jacobian_singular_values(
    observables: &[&dyn Observable],
    s: &PhaseState,
    cfg: &BracketConfig,
) -> Result<Vec<f64>> {
    let z = s.canonical();
    let rows = observables.len();
    let mut jac = DMatrix::<f64>::zeros(rows, PHASE_DIM);
    for (i, obs) in observables.iter().enumerate() {
        let g = gradient(*obs, &z, cfg)?;
        let norm = libm::sqrt(g.iter().map(|c| c.re * c.re).sum::<f64>());
        for j in 0..PHASE_DIM {
            jac[(i, j)] = if norm > 0.0 { g[j].re / norm } else { 0.0 };
        }
    }
    let mut sv: Vec<f64> = jac.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    Ok(sv)
}

/// Numerical rank of the Jacobian of `observables` (real parts).
pub fn independence_rank(observables: &[&dyn Observable], s: &PhaseState, cfg: &BracketConfig) -> Result<usize> {
    let sv = jacobian_singular_values(observables, s, cfg)?;
    Ok(sv.iter().filter(|v| **v > cfg.rank_tol).count())
}
