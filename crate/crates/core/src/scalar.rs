//! Coefficient rings for the symbolic engine.
//!
//! Polynomials and first-order operators are generic over [`Coefficient`].
//! The exact instantiation uses Gaussian rationals (`Complex<BigRational>`),
//! which is what every identity check runs on; `Complex<f64>` is provided for
//! cheap numerical experiments with the same algebra.

use std::fmt::{self, Debug};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact complex rational number `a + b i`.
pub type GaussianRational = Complex<BigRational>;

/// Ring of polynomial coefficients.
pub trait Coefficient:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// The rational `num / den` embedded in the ring. `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// The imaginary unit.
    fn imag_unit() -> Self;

    fn conj(&self) -> Self;

    /// True when the imaginary part is (exactly, for exact rings) zero.
    fn is_real(&self) -> bool;

    fn to_c64(&self) -> Complex64;

    /// Nearest ring element to a float; exact rings convert binary floats exactly.
    fn from_f64(x: f64) -> Option<Self>;

    /// Multiplicative inverse, `None` for zero.
    fn inverse(&self) -> Option<Self>;

    /// Canonical textual form used by serialization.
    fn write_canonical(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn write_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl Coefficient for GaussianRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(rational(num, den), BigRational::zero())
    }

    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(|r| Complex::new(r, BigRational::zero()))
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn write_canonical(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write_rational(&self.re, f),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    write_rational(&self.im, f)?;
                    write!(f, "*i")
                }
            }
            (false, false) => {
                write!(f, "(")?;
                write_rational(&self.re, f)?;
                if self.im.is_positive() {
                    write!(f, "+")?;
                }
                write_rational(&self.im, f)?;
                write!(f, "*i)")
            }
        }
    }
}

impl Coefficient for Complex64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::i()
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_real(&self) -> bool {
        self.im == 0.0
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then(|| Complex64::new(x, 0.0))
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn write_canonical(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{:.12e}", self.re)
        } else {
            write!(f, "({:.12e}{:+.12e}*i)", self.re, self.im)
        }
    }
}

/// Adapter that prints any coefficient canonically.
pub struct Canonical<'a, C>(pub &'a C);

impl<C: Coefficient> fmt::Display for Canonical<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_canonical(f)
    }
}

/// Exact Gaussian rational from two `num/den` pairs.
pub fn gaussian(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
    Complex::new(rational(re.0, re.1), rational(im.0, im.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let show = |c: GaussianRational| format!("{}", Canonical(&c));
        assert_eq!(show(gaussian((3, 4), (0, 1))), "3/4");
        assert_eq!(show(gaussian((0, 1), (1, 1))), "i");
        assert_eq!(show(gaussian((0, 1), (-1, 1))), "-i");
        assert_eq!(show(gaussian((0, 1), (-1, 2))), "-1/2*i");
        assert_eq!(show(gaussian((1, 2), (-2, 3))), "(1/2-2/3*i)");
        assert_eq!(show(gaussian((-2, 1), (1, 3))), "(-2+1/3*i)");
    }

    #[test]
    fn float_conversion_is_exact() {
        let c = GaussianRational::from_f64(0.75).unwrap();
        assert_eq!(c, gaussian((3, 4), (0, 1)));
        assert!(GaussianRational::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn inverse_of_imaginary_unit() {
        let i = GaussianRational::imag_unit();
        assert_eq!(i.inverse().unwrap(), -i.clone());
        assert!(GaussianRational::zero().inverse().is_none());
    }
}
