//! Complex scalars with exact Gaussian-rational parts, or a float fallback.
//!
//! Exact scalars stay exact under `+ - * /` and conjugation. As soon as a
//! float-tagged scalar enters an expression the result is float-tagged and
//! equality switches to a `1e-12` tolerance.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Tolerance used when comparing float-tagged scalars.
pub const FLOAT_EQ_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerators/denominators: divide in the float domain.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(GaussianRational),
    Float(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(GaussianRational::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn i() -> Self {
        Scalar::Exact(GaussianRational::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(GaussianRational::new(
            BigRational::from_integer(BigInt::from(n)),
            BigRational::zero(),
        ))
    }

    /// `num/den` as a real exact scalar. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(GaussianRational::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        ))
    }

    pub fn from_rational(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(GaussianRational::new(re, im))
    }

    pub fn real(re: BigRational) -> Self {
        Scalar::Exact(GaussianRational::new(re, BigRational::zero()))
    }

    pub fn float(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    pub fn from_f64(x: f64) -> Self {
        Scalar::Float(Complex64::new(x, 0.0))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussianRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(q) => q.to_c64(),
            Scalar::Float(z) => *z,
        }
    }

    /// Exact zero test for exact scalars, literal `0.0` for floats.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.re.is_zero() && q.im.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.re.is_one() && q.im.is_zero(),
            Scalar::Float(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Exact(q) => Scalar::Exact(GaussianRational::new(q.re.clone(), -q.im.clone())),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    /// `|z|^2`, exact when the scalar is.
    pub fn norm_sqr(&self) -> Self {
        match self {
            Scalar::Exact(q) => Scalar::real(&q.re * &q.re + &q.im * &q.im),
            Scalar::Float(z) => Scalar::Float(Complex64::new(z.norm_sqr(), 0.0)),
        }
    }

    /// Multiplicative inverse; `None` for an (exact or literal) zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        match self {
            Scalar::Exact(q) => {
                let d = &q.re * &q.re + &q.im * &q.im;
                Some(Scalar::Exact(GaussianRational::new(&q.re / &d, -(&q.im / &d))))
            }
            Scalar::Float(z) => Some(Scalar::Float(z.inv())),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Approximate comparison used once floats are involved.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        let a = self.to_c64();
        let b = other.to_c64();
        (a - b).norm() <= tol * 1f64.max(a.norm()).max(b.norm())
    }

    /// Real part as an exact rational, if exact.
    pub fn exact_re(&self) -> Option<&BigRational> {
        self.as_exact().map(|q| &q.re)
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.im.is_zero(),
            Scalar::Float(z) => z.im == 0.0,
        }
    }

    /// Drop to float representation.
    pub fn to_float(&self) -> Self {
        Scalar::Float(self.to_c64())
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.approx_eq(other, FLOAT_EQ_TOL),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => {
                if q.im.is_zero() {
                    write!(f, "{}", q.re)
                } else if q.re.is_zero() {
                    write!(f, "{}i", q.im)
                } else if q.im.is_negative() {
                    write!(f, "{}-{}i", q.re, -q.im.clone())
                } else {
                    write!(f, "{}+{}i", q.re, q.im)
                }
            }
            Scalar::Float(z) => write!(f, "{z}"),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Float(z)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                Scalar::Exact(GaussianRational::new(&a.re + &b.re, &a.im + &b.im))
            }
            _ => Scalar::Float(self.to_c64() + rhs.to_c64()),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                Scalar::Exact(GaussianRational::new(&a.re - &b.re, &a.im - &b.im))
            }
            _ => Scalar::Float(self.to_c64() - rhs.to_c64()),
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if a.im.is_zero() && b.im.is_zero() {
                    return Scalar::real(&a.re * &b.re);
                }
                Scalar::Exact(GaussianRational::new(
                    &a.re * &b.re - &a.im * &b.im,
                    &a.re * &b.im + &a.im * &b.re,
                ))
            }
            _ => Scalar::Float(self.to_c64() * rhs.to_c64()),
        }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    /// Panics on exact division by zero.
    fn div(self, rhs: &'a Scalar) -> Scalar {
        match rhs.inv() {
            Some(r) => self * &r,
            None => match (self, rhs) {
                (_, Scalar::Float(_)) => Scalar::Float(self.to_c64() / rhs.to_c64()),
                _ => panic!("exact division by zero"),
            },
        }
    }
}

impl<'a> Neg for &'a Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(GaussianRational::new(-q.re.clone(), -q.im.clone())),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Sum of `Scalar`s, exact when all terms are.
pub fn sum<'a>(it: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
    it.into_iter().fold(Scalar::zero(), |acc, x| &acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::ratio(1, 6);
        let c = &a + &b;
        assert!(c.is_exact());
        assert_eq!(c, Scalar::ratio(1, 2));
        let d = &(&Scalar::i() * &Scalar::i()) + &Scalar::one();
        assert!(d.is_zero());
    }

    #[test]
    fn division_in_gaussian_rationals() {
        // (1+i)/(1-i) = i
        let num = &Scalar::one() + &Scalar::i();
        let den = &Scalar::one() - &Scalar::i();
        assert_eq!(&num / &den, Scalar::i());
        assert!(Scalar::zero().inv().is_none());
    }

    #[test]
    fn float_taints_and_compares_with_tolerance() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::from_f64(1.0 / 3.0 + 1e-15);
        assert!(!(&a + &b).is_exact());
        assert_eq!(a, b);
        assert_ne!(a, Scalar::from_f64(0.3334));
    }

    #[test]
    fn conj_and_norm() {
        let z = Scalar::from_rational(
            BigRational::from_integer(3.into()),
            BigRational::from_integer(4.into()),
        );
        assert_eq!(z.norm_sqr(), Scalar::from_int(25));
        assert_eq!(&z * &z.conj(), Scalar::from_int(25));
        assert!((z.abs() - 5.0).abs() < 1e-15);
    }
}
