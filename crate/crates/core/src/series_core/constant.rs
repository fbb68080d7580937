use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{KernelError, Result};

/// Magnitude below which a float coefficient counts as zero.
pub const FLOAT_ZERO: f64 = 1e-12;

/// A coefficient in the ordered field of constants.
///
/// Exact values are rationals, for which `exp` is only defined at 0 and `log`
/// only at 1. Float values are contagious: mixing the two yields a float.
#[derive(Clone, Debug)]
pub enum Constant {
    Exact(BigRational),
    Float(f64),
}

impl Constant {
    pub fn zero() -> Self {
        Constant::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Constant::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Constant::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Constant::Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn float(v: f64) -> Self {
        Constant::Float(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Constant::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Constant::Exact(r) => Some(r),
            Constant::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Constant::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Constant::Float(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Constant::Exact(r) => r.is_zero(),
            Constant::Float(v) => v.abs() < FLOAT_ZERO,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Constant::Exact(r) => r.is_one(),
            Constant::Float(v) => (v - 1.0).abs() < FLOAT_ZERO,
        }
    }

    /// Sign as -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        match self {
            Constant::Exact(r) => {
                if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Constant::Float(v) => {
                if *v > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    fn lift(a: &Constant, b: &Constant) -> Option<(BigRational, BigRational)> {
        match (a, b) {
            (Constant::Exact(x), Constant::Exact(y)) => Some((x.clone(), y.clone())),
            _ => None,
        }
    }

    pub fn recip(&self) -> Result<Constant> {
        if self.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        Ok(match self {
            Constant::Exact(r) => Constant::Exact(r.recip()),
            Constant::Float(v) => Constant::Float(1.0 / v),
        })
    }

    pub fn div(&self, other: &Constant) -> Result<Constant> {
        Ok(self * &other.recip()?)
    }

    pub fn powi(&self, n: i64) -> Result<Constant> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        Ok(match self {
            Constant::Exact(r) => Constant::Exact(num::pow::pow(r.clone(), n as usize)),
            Constant::Float(v) => Constant::Float(v.powi(n as i32)),
        })
    }

    /// `self^r`; exact values only allow `self = 1` or integral `r`.
    pub fn pow_rational(&self, r: &BigRational) -> Result<Constant> {
        if r.is_integer() {
            let n = r
                .to_integer()
                .to_i64()
                .ok_or_else(|| KernelError::Resource("exponent too large".into()))?;
            return self.powi(n);
        }
        if self.is_one() {
            return Ok(self.clone());
        }
        match self {
            Constant::Exact(c) => Err(KernelError::PartialConstant(format!("({c})^({r})"))),
            Constant::Float(v) => {
                if *v <= 0.0 {
                    Err(KernelError::Domain(format!("fractional power of {v}")))
                } else {
                    Ok(Constant::Float(v.powf(r.to_f64().unwrap_or(f64::NAN))))
                }
            }
        }
    }

    pub fn exp(&self) -> Result<Constant> {
        match self {
            Constant::Exact(r) if r.is_zero() => Ok(Constant::one()),
            Constant::Exact(r) => Err(KernelError::PartialConstant(format!("exp({r})"))),
            Constant::Float(v) => Ok(Constant::Float(v.exp())),
        }
    }

    pub fn ln(&self) -> Result<Constant> {
        if self.signum() <= 0 {
            return Err(KernelError::Domain(format!("log of non-positive constant {self}")));
        }
        match self {
            Constant::Exact(r) if r.is_one() => Ok(Constant::zero()),
            Constant::Exact(r) => Err(KernelError::PartialConstant(format!("log({r})"))),
            Constant::Float(v) => Ok(Constant::Float(v.ln())),
        }
    }

    /// Converts to the float backend.
    pub fn to_float(&self) -> Constant {
        Constant::Float(self.to_f64())
    }

    /// Generalized binomial coefficient `binom(r, k)`.
    pub fn binomial(r: &Constant, k: usize) -> Constant {
        let mut acc = Constant::one();
        for i in 0..k {
            let num = r - &Constant::from_int(i as i64);
            acc = &acc * &num;
            acc = acc
                .div(&Constant::from_int(i as i64 + 1))
                .expect("nonzero denominator");
        }
        acc
    }

    pub fn factorial(k: usize) -> Constant {
        let mut acc = BigInt::one();
        for i in 2..=k {
            acc *= BigInt::from(i);
        }
        Constant::Exact(BigRational::from_integer(acc))
    }
}

impl From<i64> for Constant {
    fn from(n: i64) -> Self {
        Constant::from_int(n)
    }
}

impl From<BigRational> for Constant {
    fn from(r: BigRational) -> Self {
        Constant::Exact(r)
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        match Constant::lift(self, other) {
            Some((a, b)) => a == b,
            None => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= FLOAT_ZERO * a.abs().max(b.abs()).max(1.0)
            }
        }
    }
}

impl PartialOrd for Constant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match Constant::lift(self, other) {
            Some((a, b)) => Some(a.cmp(&b)),
            None => {
                if self == other {
                    Some(Ordering::Equal)
                } else {
                    self.to_f64().partial_cmp(&other.to_f64())
                }
            }
        }
    }
}

impl Add for &Constant {
    type Output = Constant;
    fn add(self, rhs: &Constant) -> Constant {
        match Constant::lift(self, rhs) {
            Some((a, b)) => Constant::Exact(a + b),
            None => Constant::Float(self.to_f64() + rhs.to_f64()),
        }
    }
}

impl Sub for &Constant {
    type Output = Constant;
    fn sub(self, rhs: &Constant) -> Constant {
        match Constant::lift(self, rhs) {
            Some((a, b)) => Constant::Exact(a - b),
            None => Constant::Float(self.to_f64() - rhs.to_f64()),
        }
    }
}

impl Mul for &Constant {
    type Output = Constant;
    fn mul(self, rhs: &Constant) -> Constant {
        match Constant::lift(self, rhs) {
            Some((a, b)) => Constant::Exact(a * b),
            None => Constant::Float(self.to_f64() * rhs.to_f64()),
        }
    }
}

impl Neg for &Constant {
    type Output = Constant;
    fn neg(self) -> Constant {
        match self {
            Constant::Exact(r) => Constant::Exact(-r),
            Constant::Float(v) => Constant::Float(-v),
        }
    }
}

/// Renders a float with 12 significant digits, trailing zeros removed.
pub fn format_float(v: f64) -> String {
    if v == 0.0 || v.abs() < FLOAT_ZERO {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{v:.11e}");
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{}", trim_zeros(mantissa), e),
            None => s,
        }
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Constant::Float(v) => f.write_str(&format_float(*v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_partial_functions() {
        assert_eq!(Constant::zero().exp().unwrap(), Constant::one());
        assert!(matches!(Constant::one().exp(), Err(KernelError::PartialConstant(_))));
        assert_eq!(Constant::one().ln().unwrap(), Constant::zero());
        assert!(matches!(Constant::from_int(2).ln(), Err(KernelError::PartialConstant(_))));
        assert!(matches!(Constant::from_int(-2).ln(), Err(KernelError::Domain(_))));
    }

    #[test]
    fn float_is_contagious() {
        let s = &Constant::ratio(1, 2) + &Constant::float(0.25);
        assert!(!s.is_exact());
        assert_eq!(s, Constant::float(0.75));
    }

    #[test]
    fn binomials() {
        let half = Constant::ratio(1, 2);
        assert_eq!(Constant::binomial(&half, 2), Constant::ratio(-1, 8));
        assert_eq!(Constant::binomial(&Constant::from_int(5), 2), Constant::from_int(10));
        assert_eq!(Constant::binomial(&Constant::from_int(2), 3), Constant::zero());
    }

    #[test]
    fn rendering() {
        assert_eq!(Constant::ratio(-3, 6).to_string(), "-1/2");
        assert_eq!(Constant::from_int(7).to_string(), "7");
        assert_eq!(Constant::float(std::f64::consts::E).to_string(), "2.71828182846");
        assert_eq!(Constant::float(1.5e20).to_string(), "1.5e20");
    }

    #[test]
    fn rational_powers() {
        let r = BigRational::new(1.into(), 2.into());
        assert_eq!(Constant::one().pow_rational(&r).unwrap(), Constant::one());
        assert!(Constant::from_int(4).pow_rational(&r).is_err());
        assert_eq!(Constant::float(4.0).pow_rational(&r).unwrap(), Constant::float(2.0));
        let m = BigRational::from_integer((-2).into());
        assert_eq!(Constant::from_int(2).pow_rational(&m).unwrap(), Constant::ratio(1, 4));
    }
}
