//! Constants of motion and the complex factors they are built from.
//!
//! * Cartesian oscillator factors `A_x = p_x + i n_x ω0 x` and the products
//!   `A_xy = A_x^{n_y} (A_y*)^{n_x}`.
//! * Generalised Smorodinsky–Winternitz factors
//!   `B_x = (p_x² − n_x² ω0² x² + k1/x²) + 2i n_x ω0 x p_x` and
//!   `B_xy = B_x^{n_y} (B_y*)^{n_x}`.
//! * Polar separation constants `J1 = 2H`, `J2 = p_φ² + F(φ)`.
//! * Polar factors `M`, `N` (F1 family), `N2` (F2 family), the rate
//!   `λ = √J2 / r²`, and the higher-order constant `K = M^p (N*)^{2q}` for
//!   `k = p/q`.
//!
//! Every quantity is implemented once, generically over [`Real`], by
//! [`PhaseObservable`]; the `eval_*` functions are `f64` conveniences.

use alloc::format;
use alloc::string::String;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::phase::{
    CartesianState, Canonical, Chart, Factorization, PolarState, PotentialSpec, SINGULARITY_GUARD,
};
use crate::potentials::AngularFamily;
use crate::scalar::{Dual, Real};

pub type ComplexValue = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationConstants {
    pub j1: f64,
    pub j2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarFactors {
    pub m: ComplexValue,
    pub n: ComplexValue,
    pub lambda: f64,
}

/// A function on phase space, generic over the scalar type.
pub trait PhaseFunction {
    fn label(&self) -> String;

    fn eval<R: Real>(&self, z: &Canonical<R>) -> Result<Complex<R>>;

    /// Distance to the nearest singular set (infinite when there is none).
    fn clearance(&self, _z: &Canonical<f64>) -> f64 {
        f64::INFINITY
    }
}

/// Object-safe view of a [`PhaseFunction`], used wherever observables are
/// handled by reference (bracket engine, rank tests).
pub trait Observable: Send + Sync {
    fn label(&self) -> String;
    fn eval_f64(&self, z: &Canonical<f64>) -> Result<Complex<f64>>;
    fn eval_dual(&self, z: &Canonical<Dual>) -> Result<Complex<Dual>>;
    fn clearance(&self, z: &Canonical<f64>) -> f64;
}

impl<T: PhaseFunction + Send + Sync> Observable for T {
    fn label(&self) -> String {
        PhaseFunction::label(self)
    }
    fn eval_f64(&self, z: &Canonical<f64>) -> Result<Complex<f64>> {
        self.eval(z)
    }
    fn eval_dual(&self, z: &Canonical<Dual>) -> Result<Complex<Dual>> {
        self.eval(z)
    }
    fn clearance(&self, z: &Canonical<f64>) -> f64 {
        PhaseFunction::clearance(self, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// The quantities [`PhaseObservable`] can evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// Hamiltonian.
    Energy,
    J1,
    J2,
    /// `λ = √J2 / r²`.
    Lambda,
    M,
    /// `N` for the F1 family (and TTW), `N2` for the F2 family.
    N,
    /// `N2`, only for the F2 family.
    N2,
    /// `M^p (N*)^{2q}` with the family-appropriate `N`.
    K,
    /// `A_x` or `A_y` with integer frequency multipliers.
    A { axis: Axis, nx: u32, ny: u32, omega0: f64 },
    /// `A_x^{n_y} (A_y*)^{n_x}`.
    Axy { nx: u32, ny: u32, omega0: f64 },
    /// `B_x` or `B_y` of the GenSW potential.
    B(Axis),
    /// `B_x^{n_y} (B_y*)^{n_x}`.
    Bxy,
    /// One-degree-of-freedom energy `E_x` / `E_y` (GenSW or HO).
    AxisEnergy(Axis),
    /// The factor `M` built for a bare central potential `U = c r^m`:
    /// `M_r = (2/r) p_r p_φ`, `M_i = p_r² − p_φ²/r² + U`.
    CentralM,
    /// `λ0 = p_φ / r²`.
    CentralLambda,
    /// Polar coordinate `r`, `φ`, `p_r` or `p_φ` (index 0..4).
    PolarCoordinate(usize),
    /// Cartesian coordinate `x`, `y`, `p_x` or `p_y` (index 0..4).
    CartesianCoordinate(usize),
}

/// A [`Quantity`] bound to the potential it refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseObservable {
    pub quantity: Quantity,
    pub pot: PotentialSpec,
}

impl PhaseObservable {
    pub fn new(quantity: Quantity, pot: PotentialSpec) -> Self {
        Self { quantity, pot }
    }
}

fn unsupported(observable: &'static str, pot: &PotentialSpec) -> Error {
    Error::Unsupported {
        observable,
        family: pot.family_name(),
    }
}

fn real<R: Real>(v: R) -> Complex<R> {
    Complex::new(v, R::zero())
}

/// Angle on the wedge branch when the point arrives in the Cartesian chart.
fn chart_phi<R: Real>(pot: &PotentialSpec, z: &Canonical<R>, phi: R) -> R {
    if z.chart == Chart::Polar {
        return phi;
    }
    let shifted = pot.wedge_angle(phi.value());
    let shift = shifted - phi.value();
    if shift == 0.0 {
        phi
    } else {
        phi + R::cst(shift)
    }
}

struct PolarQuantities<R> {
    r: R,
    phi: R,
    pr: R,
    pphi: R,
    j1: R,
    j2: R,
    sqrt_j2: R,
}

fn polar_quantities<R: Real>(pot: &PotentialSpec, z: &Canonical<R>) -> Result<PolarQuantities<R>> {
    let ang = pot.angular().ok_or_else(|| unsupported("J1/J2", pot))?;
    let omega0 = pot.omega0().ok_or_else(|| unsupported("J1/J2", pot))?;
    pot.check_state(&z.values(), SINGULARITY_GUARD)?;
    let p = z.polar();
    let phi = chart_phi(pot, z, p.phi);
    let f = ang.value_unchecked(phi);
    let r2 = p.r * p.r;
    let w2 = R::cst(omega0 * omega0);
    let j2 = p.pphi * p.pphi + f;
    let j1 = p.pr * p.pr + p.pphi * p.pphi / r2 + w2 * r2 + f / r2;
    let j2v = j2.value();
    Ok(PolarQuantities {
        r: p.r,
        phi,
        pr: p.pr,
        pphi: p.pphi,
        j1,
        j2,
        sqrt_j2: if j2v > 0.0 { j2.sqrt() } else { R::zero() },
    })
}

fn require_positive_j2<R: Real>(q: &PolarQuantities<R>) -> Result<()> {
    let v = q.j2.value();
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveJ2(v))
    }
}

fn factor_m<R: Real>(q: &PolarQuantities<R>) -> Complex<R> {
    let two = R::cst(2.0);
    Complex::new(two * q.pr * q.sqrt_j2 / q.r, q.j1 - two * q.j2 / (q.r * q.r))
}

fn factor_n<R: Real>(f: &Factorization, q: &PolarQuantities<R>) -> Complex<R> {
    let (s, c) = (R::cst(f.k.to_f64()) * q.phi).sin_cos();
    let half_kb = R::cst(0.5 * f.kb);
    match f.family {
        AngularFamily::F2 => Complex::new(half_kb + q.j2 * s, -(q.sqrt_j2 * q.pphi * c)),
        _ => Complex::new(half_kb + q.j2 * c, q.sqrt_j2 * q.pphi * s),
    }
}

fn factor_k<R: Real>(f: &Factorization, q: &PolarQuantities<R>) -> Result<Complex<R>> {
    let m = factor_m(q);
    let n = factor_n(f, q);
    let p = u32::try_from(f.k.num()).map_err(|_| Error::Domain("k numerator too large"))?;
    let two_q = u32::try_from(2 * f.k.den()).map_err(|_| Error::Domain("k denominator too large"))?;
    Ok(m.powu(p) * n.conj().powu(two_q))
}

fn gen_sw_params(pot: &PotentialSpec) -> Option<(f64, u32, u32, f64, f64)> {
    match *pot {
        PotentialSpec::GenSw {
            omega0,
            nx,
            ny,
            k1,
            k2,
        } => Some((omega0, nx, ny, k1, k2)),
        _ => None,
    }
}

fn factor_b<R: Real>(pot: &PotentialSpec, z: &Canonical<R>, axis: Axis) -> Result<Complex<R>> {
    let (omega0, nx, ny, k1, k2) = gen_sw_params(pot).ok_or_else(|| unsupported("B factor", pot))?;
    let c = z.cartesian();
    let (q, p, n, kk) = match axis {
        Axis::X => (c.x, c.px, nx, k1),
        Axis::Y => (c.y, c.py, ny, k2),
    };
    if q.value().abs() < SINGULARITY_GUARD {
        return Err(Error::Singularity {
            what: "coordinate axis of a GenSW barrier",
            clearance: q.value().abs(),
        });
    }
    let w = R::cst(omega0 * n as f64);
    Ok(Complex::new(
        p * p - w * w * q * q + R::cst(kk) / (q * q),
        R::cst(2.0) * w * q * p,
    ))
}

impl PhaseFunction for PhaseObservable {
    fn label(&self) -> String {
        let fam = self.pot.family_name();
        match self.quantity {
            Quantity::Energy => format!("H[{fam}]"),
            Quantity::J1 => format!("J1[{fam}]"),
            Quantity::J2 => format!("J2[{fam}]"),
            Quantity::Lambda => format!("lambda[{fam}]"),
            Quantity::M => format!("M[{fam}]"),
            Quantity::N => format!("N[{fam}]"),
            Quantity::N2 => format!("N2[{fam}]"),
            Quantity::K => format!("K[{fam}]"),
            Quantity::A { axis, .. } => format!("A_{}", axis_name(axis)),
            Quantity::Axy { .. } => String::from("A_xy"),
            Quantity::B(axis) => format!("B_{}[{fam}]", axis_name(axis)),
            Quantity::Bxy => format!("B_xy[{fam}]"),
            Quantity::AxisEnergy(axis) => format!("E_{}[{fam}]", axis_name(axis)),
            Quantity::CentralM => format!("M0[{fam}]"),
            Quantity::CentralLambda => format!("lambda0[{fam}]"),
            Quantity::PolarCoordinate(i) => String::from(["r", "phi", "p_r", "p_phi"][i.min(3)]),
            Quantity::CartesianCoordinate(i) => String::from(["x", "y", "p_x", "p_y"][i.min(3)]),
        }
    }

    fn clearance(&self, z: &Canonical<f64>) -> f64 {
        match self.quantity {
            Quantity::A { .. } | Quantity::Axy { .. } | Quantity::CartesianCoordinate(_) => f64::INFINITY,
            Quantity::PolarCoordinate(_) | Quantity::CentralLambda => z.polar().r,
            _ => self.pot.clearance(z),
        }
    }

    fn eval<R: Real>(&self, z: &Canonical<R>) -> Result<Complex<R>> {
        let pot = &self.pot;
        match self.quantity {
            Quantity::Energy => {
                pot.check_state(&z.values(), SINGULARITY_GUARD)?;
                Ok(real(pot.energy_at(z)))
            }
            Quantity::J1 => Ok(real(polar_quantities(pot, z)?.j1)),
            Quantity::J2 => Ok(real(polar_quantities(pot, z)?.j2)),
            Quantity::Lambda => {
                let q = polar_quantities(pot, z)?;
                require_positive_j2(&q)?;
                Ok(real(q.sqrt_j2 / (q.r * q.r)))
            }
            Quantity::M => {
                let q = polar_quantities(pot, z)?;
                require_positive_j2(&q)?;
                Ok(factor_m(&q))
            }
            Quantity::N | Quantity::N2 | Quantity::K => {
                let f = pot.factorization().ok_or_else(|| unsupported("N/K", pot))?;
                if self.quantity == Quantity::N2 && f.family != AngularFamily::F2 {
                    return Err(unsupported("N2", pot));
                }
                let q = polar_quantities(pot, z)?;
                require_positive_j2(&q)?;
                if self.quantity == Quantity::K {
                    factor_k(&f, &q)
                } else {
                    Ok(factor_n(&f, &q))
                }
            }
            Quantity::A { axis, nx, ny, omega0 } => {
                let c = z.cartesian();
                Ok(match axis {
                    Axis::X => Complex::new(c.px, R::cst(nx as f64 * omega0) * c.x),
                    Axis::Y => Complex::new(c.py, R::cst(ny as f64 * omega0) * c.y),
                })
            }
            Quantity::Axy { nx, ny, omega0 } => {
                let c = z.cartesian();
                let ax = Complex::new(c.px, R::cst(nx as f64 * omega0) * c.x);
                let ay = Complex::new(c.py, R::cst(ny as f64 * omega0) * c.y);
                Ok(ax.powu(ny) * ay.conj().powu(nx))
            }
            Quantity::B(axis) => factor_b(pot, z, axis),
            Quantity::Bxy => {
                let (_, nx, ny, _, _) = gen_sw_params(pot).ok_or_else(|| unsupported("B_xy", pot))?;
                let bx = factor_b(pot, z, Axis::X)?;
                let by = factor_b(pot, z, Axis::Y)?;
                Ok(bx.powu(ny) * by.conj().powu(nx))
            }
            Quantity::AxisEnergy(axis) => {
                let c = z.cartesian();
                let (q, p) = match axis {
                    Axis::X => (c.x, c.px),
                    Axis::Y => (c.y, c.py),
                };
                let half = R::cst(0.5);
                match *pot {
                    PotentialSpec::Ho { omega1, omega2 } => {
                        let w = R::cst(if axis == Axis::X { omega1 } else { omega2 });
                        Ok(real(half * p * p + half * w * w * q * q))
                    }
                    PotentialSpec::GenSw {
                        omega0,
                        nx,
                        ny,
                        k1,
                        k2,
                    } => {
                        let (n, kk) = if axis == Axis::X { (nx, k1) } else { (ny, k2) };
                        if kk != 0.0 && q.value().abs() < SINGULARITY_GUARD {
                            return Err(Error::Singularity {
                                what: "coordinate axis of a GenSW barrier",
                                clearance: q.value().abs(),
                            });
                        }
                        let w = R::cst(omega0 * n as f64);
                        let mut e = half * p * p + half * w * w * q * q;
                        if kk != 0.0 {
                            e = e + R::cst(0.5 * kk) / (q * q);
                        }
                        Ok(real(e))
                    }
                    _ => Err(unsupported("axis energy", pot)),
                }
            }
            Quantity::CentralM => {
                let PotentialSpec::CentralPower { c, m } = *pot else {
                    return Err(unsupported("central M", pot));
                };
                let p = z.polar();
                if p.r.value() <= 0.0 {
                    return Err(Error::Domain("central factor requires r > 0"));
                }
                let u = R::cst(c) * p.r.powf(m);
                Ok(Complex::new(
                    R::cst(2.0) * p.pr * p.pphi / p.r,
                    p.pr * p.pr - p.pphi * p.pphi / (p.r * p.r) + u,
                ))
            }
            Quantity::CentralLambda => {
                let p = z.polar();
                if p.r.value() <= 0.0 {
                    return Err(Error::Domain("central factor requires r > 0"));
                }
                Ok(real(p.pphi / (p.r * p.r)))
            }
            Quantity::PolarCoordinate(i) => {
                let p = z.polar();
                Ok(real(match i {
                    0 => p.r,
                    1 => p.phi,
                    2 => p.pr,
                    _ => p.pphi,
                }))
            }
            Quantity::CartesianCoordinate(i) => {
                let c = z.cartesian();
                Ok(real(match i {
                    0 => c.x,
                    1 => c.y,
                    2 => c.px,
                    _ => c.py,
                }))
            }
        }
    }
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "x",
        Axis::Y => "y",
    }
}

/// Which real component of a complex observable to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
    /// Squared modulus.
    Norm2,
}

/// Real-valued projection of another observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component<O> {
    pub inner: O,
    pub part: Part,
}

impl<O> Component<O> {
    pub fn new(inner: O, part: Part) -> Self {
        Self { inner, part }
    }
}

impl<O: PhaseFunction> PhaseFunction for Component<O> {
    fn label(&self) -> String {
        let inner = self.inner.label();
        match self.part {
            Part::Re => format!("Re {inner}"),
            Part::Im => format!("Im {inner}"),
            Part::Norm2 => format!("|{inner}|^2"),
        }
    }

    fn eval<R: Real>(&self, z: &Canonical<R>) -> Result<Complex<R>> {
        let v = self.inner.eval(z)?;
        Ok(real(match self.part {
            Part::Re => v.re,
            Part::Im => v.im,
            Part::Norm2 => v.re * v.re + v.im * v.im,
        }))
    }

    fn clearance(&self, z: &Canonical<f64>) -> f64 {
        self.inner.clearance(z)
    }
}

/// `factor · inner`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<O> {
    pub inner: O,
    pub factor: f64,
}

impl<O> Scaled<O> {
    pub fn new(inner: O, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl<O: PhaseFunction> PhaseFunction for Scaled<O> {
    fn label(&self) -> String {
        format!("{} * {}", self.factor, self.inner.label())
    }

    fn eval<R: Real>(&self, z: &Canonical<R>) -> Result<Complex<R>> {
        let v = self.inner.eval(z)?;
        let f = R::cst(self.factor);
        Ok(Complex::new(f * v.re, f * v.im))
    }

    fn clearance(&self, z: &Canonical<f64>) -> f64 {
        self.inner.clearance(z)
    }
}

fn polar_canonical(s: &PolarState) -> Result<Canonical<f64>> {
    if !s.is_finite() {
        return Err(Error::Domain("non-finite polar state"));
    }
    if s.r <= 0.0 {
        return Err(Error::Domain("polar state requires r > 0"));
    }
    Ok(Canonical::new(Chart::Polar, s.as_array()))
}

fn cartesian_canonical(s: &CartesianState) -> Result<Canonical<f64>> {
    if !s.is_finite() {
        return Err(Error::Domain("non-finite Cartesian state"));
    }
    Ok(Canonical::new(Chart::Cartesian, s.as_array()))
}

/// `(A_x, A_y) = (p_x + i n_x ω0 x, p_y + i n_y ω0 y)`.
pub fn eval_a(s: &CartesianState, nx: u32, ny: u32, omega0: f64) -> Result<(ComplexValue, ComplexValue)> {
    let z = cartesian_canonical(s)?;
    let pot = PotentialSpec::Ho {
        omega1: nx as f64 * omega0,
        omega2: ny as f64 * omega0,
    };
    let ax = PhaseObservable::new(
        Quantity::A {
            axis: Axis::X,
            nx,
            ny,
            omega0,
        },
        pot,
    );
    let ay = PhaseObservable::new(
        Quantity::A {
            axis: Axis::Y,
            nx,
            ny,
            omega0,
        },
        pot,
    );
    Ok((ax.eval(&z)?, ay.eval(&z)?))
}

/// `A_i^{n_y} (A_j*)^{n_x}`; pass `(A_x, A_y)` for `A_xy`, `(A_x, A_x)` for
/// `A_xx`.
pub fn eval_a_ij(ai: ComplexValue, aj: ComplexValue, nx: u32, ny: u32) -> ComplexValue {
    ai.powu(ny) * aj.conj().powu(nx)
}

/// `(B_x, B_y)` of a GenSW potential.
pub fn eval_b(s: &CartesianState, pot: &PotentialSpec) -> Result<(ComplexValue, ComplexValue)> {
    let z = cartesian_canonical(s)?;
    Ok((factor_b(pot, &z, Axis::X)?, factor_b(pot, &z, Axis::Y)?))
}

/// `B_i^{n_j} (B_j*)^{n_i}`; for `B_xy` this is `B_x^{n_y} (B_y*)^{n_x}`.
pub fn eval_b_ij(bi: ComplexValue, bj: ComplexValue, ni: u32, nj: u32) -> ComplexValue {
    bi.powu(nj) * bj.conj().powu(ni)
}

/// One-degree-of-freedom energies `(E_x, E_y)` of HO or GenSW.
pub fn axis_energies(s: &CartesianState, pot: &PotentialSpec) -> Result<(f64, f64)> {
    let z = cartesian_canonical(s)?;
    let ex = PhaseObservable::new(Quantity::AxisEnergy(Axis::X), *pot).eval(&z)?.re;
    let ey = PhaseObservable::new(Quantity::AxisEnergy(Axis::Y), *pot).eval(&z)?.re;
    Ok((ex, ey))
}

/// `J1 = p_r² + p_φ²/r² + ω0² r² + F/r²`, `J2 = p_φ² + F`.
pub fn eval_j(s: &PolarState, pot: &PotentialSpec) -> Result<SeparationConstants> {
    let z = polar_canonical(s)?;
    let q = polar_quantities(pot, &z)?;
    Ok(SeparationConstants { j1: q.j1, j2: q.j2 })
}

/// `M`, `N` and `λ`. For the F2 family `N` is the swapped factor `N2`.
pub fn eval_mn(s: &PolarState, pot: &PotentialSpec) -> Result<PolarFactors> {
    let z = polar_canonical(s)?;
    let f = pot.factorization().ok_or_else(|| unsupported("M/N", pot))?;
    let q = polar_quantities(pot, &z)?;
    require_positive_j2(&q)?;
    Ok(PolarFactors {
        m: factor_m(&q),
        n: factor_n(&f, &q),
        lambda: q.sqrt_j2 / (q.r * q.r),
    })
}

/// `N2 = (k_b/2 + J2 sin kφ) − i √J2 p_φ cos kφ` of the F2 family.
pub fn eval_n2(s: &PolarState, pot: &PotentialSpec) -> Result<ComplexValue> {
    let z = polar_canonical(s)?;
    PhaseObservable::new(Quantity::N2, *pot).eval(&z)
}

/// `K = M^p (N*)^{2q}` for `k = p/q`; equals `M^k (N*)²` for integer `k`.
pub fn eval_k(s: &PolarState, pot: &PotentialSpec) -> Result<ComplexValue> {
    let z = polar_canonical(s)?;
    PhaseObservable::new(Quantity::K, *pot).eval(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use core::f64::consts::{FRAC_PI_4, SQRT_2};

    fn v1_k2() -> PotentialSpec {
        PotentialSpec::V1 {
            omega0: 1.0,
            k: Rational::integer(2),
            ka: 1.0,
            kb: 0.0,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn a_factor_on_axis() {
        let (ax, _) = eval_a(&CartesianState::new(1.0, 0.0, 0.0, 0.0), 1, 1, 1.0).unwrap();
        assert_eq!(ax, Complex::new(0.0, 1.0));
    }

    #[test]
    fn isotropic_a_xy_is_angular_momentum() {
        let s = CartesianState::new(0.4, -1.3, 0.7, 0.2);
        let omega0 = 1.7;
        let (ax, ay) = eval_a(&s, 1, 1, omega0).unwrap();
        let axy = eval_a_ij(ax, ay, 1, 1);
        assert!((axy.im - omega0 * (s.x * s.py - s.y * s.px)).abs() < 1e-14);
    }

    #[test]
    fn b_factor_square_identity_without_barrier() {
        let pot = PotentialSpec::GenSw {
            omega0: 1.0,
            nx: 1,
            ny: 1,
            k1: 0.0,
            k2: 0.0,
        };
        let s = CartesianState::new(0.8, 0.5, -0.3, 0.9);
        let (bx, _) = eval_b(&s, &pot).unwrap();
        let (ex, _) = axis_energies(&s, &pot).unwrap();
        assert!((bx.norm_sqr() - 4.0 * ex * ex).abs() < 1e-14);
    }

    #[test]
    fn b_factor_rejects_axis() {
        let pot = PotentialSpec::GenSw {
            omega0: 1.0,
            nx: 1,
            ny: 1,
            k1: 0.3,
            k2: 0.0,
        };
        assert!(matches!(
            eval_b(&CartesianState::new(0.0, 0.5, 0.1, 0.1), &pot),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn separation_constants_example() {
        let j = eval_j(&PolarState::new(1.0, FRAC_PI_4, 0.0, 1.0), &v1_k2()).unwrap();
        assert!(close(j.j1, 3.0) && close(j.j2, 2.0));
    }

    #[test]
    fn polar_factors_example() {
        let f = eval_mn(&PolarState::new(1.0, FRAC_PI_4, 0.0, 1.0), &v1_k2()).unwrap();
        assert!(close(f.m.re, 0.0) && close(f.m.im, -1.0));
        assert!(close(f.n.re, 0.0) && close(f.n.im, SQRT_2));
        assert!(close(f.lambda, SQRT_2));
    }

    #[test]
    fn k_example() {
        let k = eval_k(&PolarState::new(1.0, FRAC_PI_4, 0.0, 1.0), &v1_k2()).unwrap();
        assert!((k.re - 2.0).abs() < 1e-13 && k.im.abs() < 1e-13, "{k}");
    }

    #[test]
    fn central_limit_lambda() {
        let pot = PotentialSpec::V1 {
            omega0: 1.0,
            k: Rational::integer(3),
            ka: 0.0,
            kb: 0.0,
        };
        let s = PolarState::new(1.3, 0.5, 0.2, -0.8);
        let f = eval_mn(&s, &pot).unwrap();
        assert!(close(f.lambda, 0.8 / (1.3 * 1.3)));
        let j = eval_j(&s, &pot).unwrap();
        assert!(close(j.j2, 0.64));
    }

    #[test]
    fn non_positive_j2_is_a_domain_error() {
        let pot = PotentialSpec::V1 {
            omega0: 1.0,
            k: Rational::integer(2),
            ka: -1.0,
            kb: 0.0,
        };
        let s = PolarState::new(1.0, FRAC_PI_4, 0.0, 0.5);
        assert!(matches!(eval_mn(&s, &pot), Err(Error::NonPositiveJ2(_))));
        assert!(matches!(eval_k(&s, &pot), Err(Error::NonPositiveJ2(_))));
    }

    #[test]
    fn n2_only_for_f2_family() {
        let s = PolarState::new(1.0, 0.3, 0.1, 0.5);
        assert!(matches!(eval_n2(&s, &v1_k2()), Err(Error::Unsupported { .. })));
        let v2 = PotentialSpec::V2 {
            omega0: 1.0,
            k: Rational::integer(2),
            ka: 1.0,
            kb: 0.4,
        };
        let n2 = eval_n2(&s, &v2).unwrap();
        let j = eval_j(&s, &v2).unwrap();
        assert!(close(n2.re, 0.2 + j.j2 * libm::sin(0.6)));
        assert!(close(n2.im, -libm::sqrt(j.j2) * 0.5 * libm::cos(0.6)));
    }

    #[test]
    fn j_is_unsupported_off_the_polar_families() {
        let ho = PotentialSpec::Ho {
            omega1: 1.0,
            omega2: 1.0,
        };
        assert!(matches!(
            eval_j(&PolarState::new(1.0, 0.2, 0.0, 1.0), &ho),
            Err(Error::Unsupported { .. })
        ));
    }
}
