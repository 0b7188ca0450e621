//! Uniformly locally constant functions on `Z/SZ`.
//!
//! A ULC function of period `l` is stored as its `l` values on
//! `0, 1, …, l-1`. Every constructor reduces to the minimal period so that
//! structural equality coincides with equality of functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;

use crate::arith::Supernatural;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct UlcFunction {
    values: Vec<Scalar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointwiseOp {
    Add,
    Mul,
    Conj,
    Scale,
}

/// Second operand of [`ulc_pointwise`].
#[derive(Clone, Debug)]
pub enum Operand<'a> {
    Function(&'a UlcFunction),
    Scalar(Scalar),
    None,
}

fn minimal_period(values: &[Scalar]) -> usize {
    let n = values.len();
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        if (d..n).all(|i| values[i] == values[i % d]) {
            return d;
        }
    }
    n
}

impl UlcFunction {
    /// Builds from one period of values. Panics on an empty sequence.
    pub fn new(mut values: Vec<Scalar>) -> Self {
        assert!(!values.is_empty(), "a ULC function needs at least one value");
        let p = minimal_period(&values);
        values.truncate(p);
        Self { values }
    }

    pub fn constant(z: Scalar) -> Self {
        Self { values: vec![z] }
    }

    pub fn zero() -> Self {
        Self::constant(Scalar::zero())
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| Scalar::from_int(v)).collect())
    }

    pub fn period(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(Scalar::is_exact)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Scalar::is_zero)
    }

    /// `f(k)` with `k` read in `Z/SZ` through the integer embedding.
    pub fn eval(&self, k: i64) -> &Scalar {
        let l = self.values.len() as i64;
        &self.values[k.rem_euclid(l) as usize]
    }

    /// `f ∘ φ^m`, i.e. `x ↦ f(x + m)`.
    pub fn shift(&self, m: i64) -> Self {
        let l = self.values.len() as i64;
        let values = (0..l).map(|r| self.eval(r + m).clone()).collect();
        Self { values }
    }

    /// The same function written with period `l` (a multiple of the current one).
    pub fn refine(&self, l: usize) -> Vec<Scalar> {
        assert!(l % self.values.len() == 0, "refinement must be a multiple of the period");
        (0..l).map(|r| self.values[r % self.values.len()].clone()).collect()
    }

    fn zip_with(&self, other: &UlcFunction, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Self {
        let l = self.values.len().lcm(&other.values.len());
        let a = self.refine(l);
        let b = other.refine(l);
        Self::new(a.iter().zip(&b).map(|(x, y)| f(x, y)).collect())
    }

    pub fn add(&self, other: &UlcFunction) -> Self {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &UlcFunction) -> Self {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn mul(&self, other: &UlcFunction) -> Self {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn scale(&self, z: &Scalar) -> Self {
        Self::new(self.values.iter().map(|x| x * z).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.values.iter().map(|x| -x).collect())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.values.iter().map(Scalar::conj).collect())
    }

    /// Pointwise reciprocal; `None` if some value is zero.
    pub fn recip(&self) -> Option<Self> {
        let vals: Option<Vec<Scalar>> = self.values.iter().map(Scalar::inv).collect();
        vals.map(Self::new)
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        Self::new(self.values.iter().map(f).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(Scalar::abs).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(Scalar::abs).fold(f64::INFINITY, f64::min)
    }

    pub fn to_float(&self) -> Self {
        Self::new(self.values.iter().map(Scalar::to_float).collect())
    }

    pub fn check_period(&self, s: &Supernatural) -> Result<()> {
        if s.divides(self.period()) {
            Ok(())
        } else {
            Err(Error::PeriodMismatch {
                period: self.period(),
                s: s.to_string(),
            })
        }
    }
}

pub fn ulc_eval(f: &UlcFunction, k: i64) -> Scalar {
    f.eval(k).clone()
}

pub fn ulc_shift(f: &UlcFunction, m: i64) -> UlcFunction {
    f.shift(m)
}

/// Pointwise algebra on `C(Z/SZ)`; operands are refined to the lcm of their
/// periods, which must divide the ambient `S`.
pub fn ulc_pointwise(
    op: PointwiseOp,
    f: &UlcFunction,
    g: Operand<'_>,
    s: &Supernatural,
) -> Result<UlcFunction> {
    let lcm = match &g {
        Operand::Function(g) => f.period().lcm(&g.period()),
        _ => f.period(),
    };
    if !s.divides(lcm) {
        return Err(Error::PeriodMismatch {
            period: lcm,
            s: s.to_string(),
        });
    }
    match (op, g) {
        (PointwiseOp::Add, Operand::Function(g)) => Ok(f.add(g)),
        (PointwiseOp::Add, Operand::Scalar(z)) => Ok(f.add(&UlcFunction::constant(z))),
        (PointwiseOp::Mul, Operand::Function(g)) => Ok(f.mul(g)),
        (PointwiseOp::Mul | PointwiseOp::Scale, Operand::Scalar(z)) => Ok(f.scale(&z)),
        (PointwiseOp::Conj, _) => Ok(f.conj()),
        (op, _) => Err(Error::InvalidInput(format!("operand mismatch for {op:?}"))),
    }
}

pub fn ulc_sup_norm(f: &UlcFunction) -> f64 {
    f.sup_norm()
}

/// The character `r ↦ e^{2πi j r / l}` of `Z/lZ`, pulled back to `Z/SZ`.
///
/// Values are exact when they lie in `Q(i)` (orders 1, 2 and 4) and float
/// tagged otherwise.
pub fn ulc_character(l: u64, j: i64) -> UlcFunction {
    assert!(l >= 1);
    let values = (0..l as i64)
        .map(|r| {
            let t = (j * r).rem_euclid(l as i64) as u64;
            root_of_unity(t, l)
        })
        .collect();
    UlcFunction::new(values)
}

/// `e^{2πi t/q}`, exact when possible.
pub fn root_of_unity(t: u64, q: u64) -> Scalar {
    let g = t.gcd(&q);
    let (t, q) = if t == 0 { (0, 1) } else { (t / g, q / g) };
    match (t, q) {
        (0, 1) => Scalar::one(),
        (1, 2) => Scalar::from_int(-1),
        (1, 4) => Scalar::i(),
        (3, 4) => -Scalar::i(),
        _ => {
            let a = 2.0 * PI * t as f64 / q as f64;
            Scalar::Float(Complex64::new(a.cos(), a.sin()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> UlcFunction {
        UlcFunction::from_ints(&[10, 20, 30])
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ulc_eval(&abc(), 4), Scalar::from_int(20));
        assert_eq!(ulc_eval(&abc(), -1), Scalar::from_int(30));
        let c = UlcFunction::constant(Scalar::ratio(3, 7));
        assert_eq!(ulc_eval(&c, -12345), Scalar::ratio(3, 7));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(ulc_shift(&abc(), 1), UlcFunction::from_ints(&[20, 30, 10]));
        assert_eq!(ulc_shift(&abc(), 0), abc());
        assert_eq!(ulc_shift(&abc(), 3), abc());
    }

    #[test]
    fn canonical_period() {
        let f = UlcFunction::from_ints(&[1, 2, 1, 2, 1, 2]);
        assert_eq!(f.period(), 2);
        assert_eq!(UlcFunction::from_ints(&[5, 5, 5, 5]).period(), 1);
    }

    #[test]
    fn pointwise_examples() {
        let s: Supernatural = "2:inf,3:1".parse().unwrap();
        let a = UlcFunction::from_ints(&[1]);
        let bc = UlcFunction::from_ints(&[2, 3]);
        let sum = ulc_pointwise(PointwiseOp::Add, &a, Operand::Function(&bc), &s).unwrap();
        assert_eq!(sum, UlcFunction::from_ints(&[3, 4]));

        let f = UlcFunction::new(vec![Scalar::from_int(1), Scalar::i(), Scalar::ratio(-2, 3)]);
        let fc = ulc_pointwise(PointwiseOp::Conj, &f, Operand::None, &s).unwrap();
        let m = ulc_pointwise(PointwiseOp::Mul, &f, Operand::Function(&fc), &s).unwrap();
        for v in m.values() {
            assert!(v.is_real());
            assert!(v.to_c64().re >= 0.0);
        }
        let z = ulc_pointwise(PointwiseOp::Scale, &f, Operand::Scalar(Scalar::zero()), &s).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.period(), 1);
    }

    #[test]
    fn pointwise_rejects_foreign_period() {
        let s: Supernatural = "2:inf".parse().unwrap();
        let f = UlcFunction::from_ints(&[1, 2]);
        let g = UlcFunction::from_ints(&[1, 2, 3]);
        let r = ulc_pointwise(PointwiseOp::Add, &f, Operand::Function(&g), &s);
        assert!(matches!(r, Err(Error::PeriodMismatch { period: 6, .. })));
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(ulc_sup_norm(&UlcFunction::from_ints(&[-4])), 4.0);
        let f = UlcFunction::new(vec![Scalar::one(), Scalar::from_int(-2), Scalar::i()]);
        assert_eq!(ulc_sup_norm(&f), 2.0);
        assert_eq!(ulc_sup_norm(&UlcFunction::from_ints(&[0, 0, 0])), 0.0);
    }

    #[test]
    fn character_examples() {
        assert_eq!(ulc_character(5, 0), UlcFunction::one());
        assert_eq!(ulc_character(2, 1), UlcFunction::from_ints(&[1, -1]));
        let c4 = ulc_character(4, 1);
        assert!(c4.is_exact());
        assert_eq!(
            c4.values(),
            &[Scalar::one(), Scalar::i(), Scalar::from_int(-1), -Scalar::i()]
        );
        assert!(!ulc_character(3, 1).is_exact());
    }
}
