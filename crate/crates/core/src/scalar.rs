//! Scalar abstraction shared by every phase-space formula.
//!
//! All potentials and observables are written once, generically over
//! [`Real`]. Instantiating them with `f64` gives the ordinary evaluation;
//! instantiating them with [`Dual`] propagates the full gradient with
//! respect to the four canonical coordinates in a single pass, which the
//! bracket engine uses as its exact-derivative scheme.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_traits::{Num, One, Zero};

/// Number of canonical coordinates `(q1, q2, p1, p2)`.
pub const PHASE_DIM: usize = 4;

/// Real-valued scalar used by generic phase-space formulas.
pub trait Real: Copy + Debug + Num + Neg<Output = Self> {
    /// Lift a constant.
    fn cst(v: f64) -> Self;
    /// Primal value (drops derivative information).
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn powf(self, e: f64) -> Self;

    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn sq(self) -> Self {
        self * self
    }

    fn powu(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        libm::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        libm::atan2(self, x)
    }
    #[inline]
    fn powf(self, e: f64) -> Self {
        libm::pow(self, e)
    }
}

/// Forward-mode dual number carrying the gradient with respect to the four
/// canonical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: [f64; PHASE_DIM],
}

impl Dual {
    pub const fn constant(re: f64) -> Self {
        Self {
            re,
            eps: [0.0; PHASE_DIM],
        }
    }

    /// The `i`-th independent variable with value `re`.
    pub fn variable(re: f64, i: usize) -> Self {
        let mut eps = [0.0; PHASE_DIM];
        eps[i] = 1.0;
        Self { re, eps }
    }

    /// Chain rule for a unary function with value `f` and derivative `df`.
    #[inline]
    fn chain(self, f: f64, df: f64) -> Self {
        let mut eps = self.eps;
        for e in &mut eps {
            *e *= df;
        }
        Self { re: f, eps }
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a += b;
        }
        self
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a -= b;
        }
        self
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; PHASE_DIM];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Self {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let mut eps = [0.0; PHASE_DIM];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Self { re, eps }
    }
}

impl Rem for Dual {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let n = libm::trunc(self.re / rhs.re);
        self - rhs * Dual::constant(n)
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.re, -1.0)
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Self::constant(0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.eps.iter().all(|e| *e == 0.0)
    }
}

impl One for Dual {
    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl Num for Dual {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Self::constant)
    }
}

impl Real for Dual {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.re
    }
    fn sin(self) -> Self {
        let (s, c) = libm::sincos(self.re);
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = libm::sincos(self.re);
        self.chain(c, -s)
    }
    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.re);
        self.chain(r, 0.5 / r)
    }
    fn atan2(self, x: Self) -> Self {
        // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
        let den = self.re * self.re + x.re * x.re;
        let mut eps = [0.0; PHASE_DIM];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (x.re * self.eps[i] - self.re * x.eps[i]) / den;
        }
        Self {
            re: libm::atan2(self.re, x.re),
            eps,
        }
    }
    fn powf(self, e: f64) -> Self {
        let v = libm::pow(self.re, e);
        self.chain(v, e * libm::pow(self.re, e - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_rule() {
        let x = Dual::variable(3.0, 0);
        let y = Dual::variable(2.0, 1);
        let f = x * x * y + x / y;
        assert_eq!(f.re, 19.5);
        assert!((f.eps[0] - (2.0 * 3.0 * 2.0 + 0.5)).abs() < 1e-15);
        assert!((f.eps[1] - (9.0 - 3.0 / 4.0)).abs() < 1e-15);
    }

    #[test]
    fn dual_transcendentals_match_closed_forms() {
        let x = Dual::variable(0.7, 2);
        assert!((x.sin().eps[2] - libm::cos(0.7)).abs() < 1e-15);
        assert!((x.cos().eps[2] + libm::sin(0.7)).abs() < 1e-15);
        assert!((x.sqrt().eps[2] - 0.5 / libm::sqrt(0.7)).abs() < 1e-15);
        assert!((x.powf(3.5).eps[2] - 3.5 * libm::pow(0.7, 2.5)).abs() < 1e-14);
        let y = Dual::variable(-0.4, 3);
        let a = y.atan2(x);
        let den = 0.49 + 0.16;
        assert!((a.eps[2] - 0.4 / den).abs() < 1e-15);
        assert!((a.eps[3] - 0.7 / den).abs() < 1e-15);
    }

    #[test]
    fn integer_power_by_repeated_product() {
        assert_eq!(Real::powu(1.5_f64, 3), 3.375);
        assert_eq!(Real::powu(2.0_f64, 0), 1.0);
    }
}
