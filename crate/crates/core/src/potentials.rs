//! Angular barrier functions of the polar-separable families.
//!
//! Every potential handled here has the form
//! `V = ½ ω0² r² + F(φ) / (2 r²)` and differs only in the angular function:
//!
//! * `F1 = (k_a + k_b cos kφ) / sin² kφ`, singular where `sin kφ = 0`;
//! * `F2 = (k_a + k_b sin kφ) / cos² kφ`, singular where `cos kφ = 0`;
//! * the TTW barrier `α / cos² kφ + β / sin² kφ`, singular on both sets.
//!
//! `F1` and `F2` are the general solutions of first-order linear ODEs in
//! `φ` with inhomogeneity `z = k_b / 2`. The routines below evaluate the
//! closed forms, their analytic derivatives, the ODE left-hand sides, the
//! Cartesian rational forms of `F/r²` for `k = 1..4`, and a numerical ODE
//! solver used to cross-check the closed forms.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `|sin kφ|` (or `|cos kφ|`) below this marks the angle as singular.
pub const ANGULAR_SINGULAR_EPS: f64 = 1e-12;

/// Which angular barrier is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngularFamily {
    F1,
    F2,
    Ttw,
}

impl AngularFamily {
    pub fn name(self) -> &'static str {
        match self {
            AngularFamily::F1 => "F1",
            AngularFamily::F2 => "F2",
            AngularFamily::Ttw => "TTW",
        }
    }
}

/// An angular function with its index `k` and two coefficients.
///
/// For `F1`/`F2` the coefficients are `(k_a, k_b)`; for the TTW barrier
/// they are `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularFunction {
    pub family: AngularFamily,
    pub k: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AngularFunction {
    pub fn f1(k: f64, k_a: f64, k_b: f64) -> Self {
        Self {
            family: AngularFamily::F1,
            k,
            c1: k_a,
            c2: k_b,
        }
    }

    pub fn f2(k: f64, k_a: f64, k_b: f64) -> Self {
        Self {
            family: AngularFamily::F2,
            k,
            c1: k_a,
            c2: k_b,
        }
    }

    pub fn ttw(k: f64, alpha: f64, beta: f64) -> Self {
        Self {
            family: AngularFamily::Ttw,
            k,
            c1: alpha,
            c2: beta,
        }
    }

    /// The inhomogeneity `z = k_b / 2` of the defining ODE (zero for TTW,
    /// which has no ODE of its own here).
    pub fn z(&self) -> f64 {
        match self.family {
            AngularFamily::F1 | AngularFamily::F2 => 0.5 * self.c2,
            AngularFamily::Ttw => 0.0,
        }
    }

    /// Smallest of the trigonometric factors that vanish on the singular
    /// rays; zero means singular.
    pub fn clearance(&self, phi: f64) -> f64 {
        let (s, c) = libm::sincos(self.k * phi);
        match self.family {
            AngularFamily::F1 => s.abs(),
            AngularFamily::F2 => c.abs(),
            AngularFamily::Ttw => s.abs().min(c.abs()),
        }
    }

    pub fn check(&self, phi: f64, guard: f64) -> Result<()> {
        if !phi.is_finite() {
            return Err(Error::Domain("non-finite angle"));
        }
        let clearance = self.clearance(phi);
        if clearance < guard {
            return Err(Error::Singularity {
                what: match self.family {
                    AngularFamily::F1 => "sin(k phi) = 0 ray of F1",
                    AngularFamily::F2 => "cos(k phi) = 0 ray of F2",
                    AngularFamily::Ttw => "singular ray of the TTW barrier",
                },
                clearance,
            });
        }
        Ok(())
    }

    /// Evaluate without the singularity check.
    #[inline]
    pub fn value_unchecked<R: Real>(&self, phi: R) -> R {
        let (s, c) = (R::cst(self.k) * phi).sin_cos();
        let (c1, c2) = (R::cst(self.c1), R::cst(self.c2));
        match self.family {
            AngularFamily::F1 => (c1 + c2 * c) / (s * s),
            AngularFamily::F2 => (c1 + c2 * s) / (c * c),
            AngularFamily::Ttw => c1 / (c * c) + c2 / (s * s),
        }
    }

    pub fn value(&self, phi: f64) -> Result<f64> {
        self.check(phi, ANGULAR_SINGULAR_EPS)?;
        Ok(self.value_unchecked(phi))
    }

    /// Analytic `dF/dφ`.
    pub fn derivative_unchecked(&self, phi: f64) -> f64 {
        let k = self.k;
        let (s, c) = libm::sincos(k * phi);
        match self.family {
            // d/dφ (k_a + k_b c)/s² = -k [k_b s² + 2c (k_a + k_b c)] / s³
            AngularFamily::F1 => -k * (self.c2 * s * s + 2.0 * c * (self.c1 + self.c2 * c)) / (s * s * s),
            // d/dφ (k_a + k_b s)/c² = k [k_b c² + 2s (k_a + k_b s)] / c³
            AngularFamily::F2 => k * (self.c2 * c * c + 2.0 * s * (self.c1 + self.c2 * s)) / (c * c * c),
            AngularFamily::Ttw => 2.0 * k * (self.c1 * s / (c * c * c) - self.c2 * c / (s * s * s)),
        }
    }

    pub fn derivative(&self, phi: f64) -> Result<f64> {
        self.check(phi, ANGULAR_SINGULAR_EPS)?;
        Ok(self.derivative_unchecked(phi))
    }

    /// Left-hand side of the defining first-order ODE evaluated with a
    /// caller-supplied value `f` and derivative `df`:
    ///
    /// * F1: `sin(kφ) F' + 2k cos(kφ) F + 2k z`
    /// * F2: `cos(kφ) F' - 2k sin(kφ) F - 2k z`
    ///
    /// Both vanish identically on the respective closed forms.
    pub fn ode_lhs(&self, phi: f64, f: f64, df: f64) -> Result<f64> {
        let k = self.k;
        let z = self.z();
        let (s, c) = libm::sincos(k * phi);
        match self.family {
            AngularFamily::F1 => Ok(s * df + 2.0 * k * c * f + 2.0 * k * z),
            AngularFamily::F2 => Ok(c * df - 2.0 * k * s * f - 2.0 * k * z),
            AngularFamily::Ttw => Err(Error::Unsupported {
                observable: "defining ODE",
                family: "TTW",
            }),
        }
    }

    /// `dF/dφ` as dictated by the ODE at `(φ, F)`.
    fn ode_rhs(&self, phi: f64, f: f64) -> f64 {
        let k = self.k;
        let z = self.z();
        let (s, c) = libm::sincos(k * phi);
        match self.family {
            AngularFamily::F1 => -(2.0 * k * c * f + 2.0 * k * z) / s,
            AngularFamily::F2 => (2.0 * k * s * f + 2.0 * k * z) / c,
            AngularFamily::Ttw => f64::NAN,
        }
    }

    /// True when `[min(a,b), max(a,b)]` contains a singular ray.
    pub fn interval_crosses_singularity(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let period = core::f64::consts::PI / self.k;
        // Singular rays sit at φ = offset + n·π/k.
        let offsets: &[f64] = match self.family {
            AngularFamily::F1 => &[0.0],
            AngularFamily::F2 => &[0.5],
            AngularFamily::Ttw => &[0.0, 0.5],
        };
        offsets.iter().any(|&off| {
            let n = libm::ceil(lo / period - off);
            (n + off) * period <= hi
        })
    }

    /// Integrate the defining ODE from `(phi0, f0)` to `phi1` with an
    /// adaptive Dormand–Prince 5(4) method.
    pub fn solve_ode(&self, phi0: f64, f0: f64, phi1: f64) -> Result<f64> {
        if matches!(self.family, AngularFamily::Ttw) {
            return Err(Error::Unsupported {
                observable: "defining ODE",
                family: "TTW",
            });
        }
        if !(phi0.is_finite() && phi1.is_finite() && f0.is_finite()) {
            return Err(Error::Domain("non-finite ODE input"));
        }
        if self.interval_crosses_singularity(phi0, phi1) {
            return Err(Error::Domain("integration interval crosses a singular ray"));
        }
        dopri5(|x, y| self.ode_rhs(x, y), phi0, f0, phi1, 1e-13, 1e-13)
    }
}

/// Adaptive Dormand–Prince 5(4) integrator for a scalar ODE.
fn dopri5(f: impl Fn(f64, f64) -> f64, x0: f64, y0: f64, x1: f64, rtol: f64, atol: f64) -> Result<f64> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span.abs() * 1e-3;
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::Domain("ODE solver exceeded the step budget"));
        }
        h = h.min((x1 - x).abs());
        let hs = h * dir;
        let mut k = [0.0; 7];
        for i in 0..7 {
            let yi = y + hs * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
            k[i] = f(x + C[i] * hs, yi);
        }
        let y5 = y + hs * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
        let y4 = y + hs * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
        if !y5.is_finite() {
            return Err(Error::Domain("ODE solution diverged"));
        }
        let scale = atol + rtol * y.abs().max(y5.abs());
        let err = (y5 - y4).abs() / scale;
        if err <= 1.0 {
            x += hs;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}

/// `F1(φ) = (k_a + k_b cos kφ) / sin² kφ`.
pub fn eval_f1(phi: f64, k: f64, k_a: f64, k_b: f64) -> Result<f64> {
    AngularFunction::f1(k, k_a, k_b).value(phi)
}

/// `F2(φ) = (k_a + k_b sin kφ) / cos² kφ`.
pub fn eval_f2(phi: f64, k: f64, k_a: f64, k_b: f64) -> Result<f64> {
    AngularFunction::f2(k, k_a, k_b).value(phi)
}

/// TTW barrier `α / cos² kφ + β / sin² kφ`.
pub fn ttw_angular(phi: f64, k: f64, alpha: f64, beta: f64) -> Result<f64> {
    AngularFunction::ttw(k, alpha, beta).value(phi)
}

/// The sine-substituted TTW form `2α / (1 + sin kφ) + 2β / (1 − sin kφ)`.
///
/// With `k_a = 2(α+β)` and `k_b = 2(β−α)` it equals `F2(φ; k)` at the same
/// `k`, mirroring `F1(φ; k) = 2α / (1 + cos kφ) + 2β / (1 − cos kφ)`.
pub fn ttw_tilde_angular(phi: f64, k: f64, alpha: f64, beta: f64) -> Result<f64> {
    let s = libm::sin(k * phi);
    let c = libm::cos(k * phi);
    if c.abs() < ANGULAR_SINGULAR_EPS {
        return Err(Error::Singularity {
            what: "sin(k phi) = ±1 ray of the sine-substituted TTW barrier",
            clearance: c.abs(),
        });
    }
    Ok(2.0 * alpha / (1.0 + s) + 2.0 * beta / (1.0 - s))
}

/// `(k_a, k_b)` of the F1 barrier with doubled index that reproduces the
/// TTW barrier with coefficients `(α, β)`.
pub fn ttw_to_f1_coefficients(alpha: f64, beta: f64) -> (f64, f64) {
    (2.0 * (alpha + beta), 2.0 * (beta - alpha))
}

/// Integrate `sin(kφ) F' + 2k cos(kφ) F + 2k z = 0` from `(phi0, f0)` to
/// `phi1`.
pub fn f_ode_solve(z: f64, k: f64, phi0: f64, f0: f64, phi1: f64) -> Result<f64> {
    AngularFunction::f1(k, 0.0, 2.0 * z).solve_ode(phi0, f0, phi1)
}

fn singular(what: &'static str, clearance: f64) -> Error {
    Error::Singularity { what, clearance }
}

fn check_den(v: f64, what: &'static str) -> Result<()> {
    if v.abs() < ANGULAR_SINGULAR_EPS {
        Err(singular(what, v.abs()))
    } else {
        Ok(())
    }
}

/// Cartesian rational form of `F1(φ)/r²` for `k = 1..4`.
pub fn f1_cartesian(k: u32, x: f64, y: f64, k_a: f64, k_b: f64) -> Result<f64> {
    let r2 = x * x + y * y;
    if !(x.is_finite() && y.is_finite()) || r2 == 0.0 {
        return Err(Error::Domain("f1_cartesian needs a finite point off the origin"));
    }
    let r = libm::sqrt(r2);
    match k {
        1 => {
            check_den(y, "y = 0 (F1, k = 1)")?;
            Ok(k_a / (y * y) + k_b * x / (y * y * r))
        }
        2 => {
            check_den(x, "x = 0 (F1, k = 2)")?;
            check_den(y, "y = 0 (F1, k = 2)")?;
            Ok((k_a - k_b) / (4.0 * x * x) + (k_a + k_b) / (4.0 * y * y))
        }
        3 => {
            let a = 3.0 * x * x - y * y;
            check_den(y, "y = 0 (F1, k = 3)")?;
            check_den(a / r2, "3x² = y² (F1, k = 3)")?;
            Ok((k_a * r2 * r2 + k_b * (x * x - 3.0 * y * y) * x * r) / (a * a * y * y))
        }
        4 => {
            let d = x * x - y * y;
            check_den(x, "x = 0 (F1, k = 4)")?;
            check_den(y, "y = 0 (F1, k = 4)")?;
            check_den(d / r2, "x² = y² (F1, k = 4)")?;
            let quartic = (x * x * x * x) - 6.0 * x * x * y * y + (y * y * y * y);
            Ok((k_a * r2 * r2 * r2 + k_b * r2 * quartic) / (16.0 * d * d * x * x * y * y))
        }
        _ => Err(Error::Domain("Cartesian forms exist for k = 1..4 only")),
    }
}

/// Cartesian rational form of `F2(φ)/r²` for `k = 1..4`.
pub fn f2_cartesian(k: u32, x: f64, y: f64, k_a: f64, k_b: f64) -> Result<f64> {
    let r2 = x * x + y * y;
    if !(x.is_finite() && y.is_finite()) || r2 == 0.0 {
        return Err(Error::Domain("f2_cartesian needs a finite point off the origin"));
    }
    let r = libm::sqrt(r2);
    match k {
        1 => {
            check_den(x, "x = 0 (F2, k = 1)")?;
            Ok(k_a / (x * x) + k_b * y / (x * x * r))
        }
        2 => {
            let d = x * x - y * y;
            check_den(d / r2, "x² = y² (F2, k = 2)")?;
            Ok(k_a * r2 / (d * d) + k_b * 2.0 * x * y / (d * d))
        }
        3 => {
            let a = x * x - 3.0 * y * y;
            check_den(x, "x = 0 (F2, k = 3)")?;
            check_den(a / r2, "x² = 3y² (F2, k = 3)")?;
            Ok((k_a * r2 * r2 + k_b * (3.0 * x * x - y * y) * y * r) / (a * a * x * x))
        }
        4 => {
            let quartic = (x * x * x * x) - 6.0 * x * x * y * y + (y * y * y * y);
            check_den(quartic / (r2 * r2), "cos 4φ = 0 (F2, k = 4)")?;
            Ok((k_a * r2 * r2 * r2 + 4.0 * k_b * ((x * x * x * x) - (y * y * y * y)) * x * y) / (quartic * quartic))
        }
        _ => Err(Error::Domain("Cartesian forms exist for k = 1..4 only")),
    }
}
