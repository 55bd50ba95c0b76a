//! Gaussian rationals: exact complex numbers with rational real and imaginary parts.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// An element of Q(i): `re + im*i` with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    /// `num/den * i`.
    pub fn i_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussRat::new(
            BigRational::zero(),
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        let norm = &self.re * &self.re + &self.im * &self.im;
        assert!(!norm.is_zero(), "inverse of zero Gaussian rational");
        GaussRat::new(&self.re / &norm, -&self.im / &norm)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Integer power, negative exponents via the inverse.
    pub fn powi(&self, k: i32) -> Self {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut acc = GaussRat::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rational(&self.re, f);
        }
        if self.re.is_zero() {
            if self.im.is_one() {
                return write!(f, "i");
            }
            if (-self.im.clone()).is_one() {
                return write!(f, "-i");
            }
            fmt_rational(&self.im, f)?;
            return write!(f, "*i");
        }
        write!(f, "(")?;
        fmt_rational(&self.re, f)?;
        if self.im.is_positive() {
            write!(f, "+")?;
        }
        if self.im.is_one() {
            write!(f, "i)")
        } else if (-self.im.clone()).is_one() {
            write!(f, "-i)")
        } else {
            fmt_rational(&self.im, f)?;
            write!(f, "*i)")
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussRat::i();
        assert_eq!(&i * &i, GaussRat::from_int(-1));
    }

    #[test]
    fn inverse_of_i() {
        let i = GaussRat::i();
        assert_eq!(i.inv(), &GaussRat::zero() - &i);
        assert!((&i.inv() * &i).is_one());
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussRat::from_ratio(1, 2).to_string(), "1/2");
        assert_eq!(GaussRat::i_ratio(-1, 2).to_string(), "-1/2*i");
        let z = &GaussRat::from_int(2) + &GaussRat::i();
        assert_eq!(z.to_string(), "(2+i)");
    }
}
