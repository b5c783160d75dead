use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Positive rational `p/q` kept in lowest terms.
///
/// The angular index `k` of the polar families is stored this way so that
/// the higher-order constant can use the integer exponents `p` and `2q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

const fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Domain("rational k requires p, q >= 1"));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub const fn integer(n: u64) -> Self {
        assert!(n >= 1);
        Self { num: n, den: 1 }
    }

    pub const fn num(self) -> u64 {
        self.num
    }

    pub const fn den(self) -> u64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    /// Floating-point value, converted once per evaluation.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self * n`, reduced.
    pub fn scale(self, n: u64) -> Result<Self> {
        let num = self
            .num
            .checked_mul(n)
            .ok_or(Error::Domain("rational overflow"))?;
        Self::new(num, self.den)
    }

    /// `self / n`, reduced.
    pub fn divide(self, n: u64) -> Result<Self> {
        let den = self
            .den
            .checked_mul(n)
            .ok_or(Error::Domain("rational overflow"))?;
        Self::new(self.num, den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"1.4142135"`.
/// Decimals are read exactly, so `"1.5"` becomes `3/2`.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        const BAD: Error = Error::Domain("k must be `p/q`, an integer, or a positive decimal");
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>().map_err(|_| BAD)?;
            let q = q.trim().parse::<u64>().map_err(|_| BAD)?;
            return Self::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(BAD);
        }
        if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(BAD);
        }
        let frac = frac.trim_end_matches('0');
        if frac.len() > 18 {
            return Err(Error::Domain("decimal k has too many digits"));
        }
        let den = 10u64.pow(frac.len() as u32);
        let int_val: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| BAD)?
        };
        let frac_val: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| BAD)?
        };
        let num = int_val
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or(Error::Domain("rational overflow"))?;
        Self::new(num, den)
    }
}
