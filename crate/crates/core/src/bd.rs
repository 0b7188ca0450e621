//! Finite band sums `b = Σ_n V^n m_{f_n}` in the smooth Bunce-Deddens algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use num_integer::Integer;

use crate::arith::Supernatural;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::matrix::SparseMatrix;
use crate::scalar::Scalar;
use crate::symbol::{NormBound, SymbolMatrix};
use crate::ulc::{root_of_unity, UlcFunction};

/// Largest denominator for which `ρ_{p/q}` uses root-of-unity phases.
pub const RATIONAL_PHASE_MAX_DEN: u64 = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct BdElement {
    s: Supernatural,
    bands: BTreeMap<i64, UlcFunction>,
}

impl BdElement {
    /// Builds from `(n, f_n)` pairs; repeated indices are summed and zero
    /// bands dropped.
    pub fn new(s: Supernatural, bands: impl IntoIterator<Item = (i64, UlcFunction)>) -> Result<Self> {
        let mut out = Self::zero(s);
        for (n, f) in bands {
            f.check_period(&out.s)?;
            out.add_band(n, &f);
        }
        Ok(out)
    }

    pub fn zero(s: Supernatural) -> Self {
        Self {
            s,
            bands: BTreeMap::new(),
        }
    }

    pub fn one(s: Supernatural) -> Self {
        Self::scalar(s, Scalar::one())
    }

    pub fn scalar(s: Supernatural, z: Scalar) -> Self {
        Self::monomial(s, 0, UlcFunction::constant(z)).expect("constants have period 1")
    }

    /// `V^n`.
    pub fn shift(s: Supernatural, n: i64) -> Self {
        Self::monomial(s, n, UlcFunction::one()).expect("constants have period 1")
    }

    /// `m_f`.
    pub fn multiplier(s: Supernatural, f: UlcFunction) -> Result<Self> {
        Self::monomial(s, 0, f)
    }

    /// `V^n m_f`.
    pub fn monomial(s: Supernatural, n: i64, f: UlcFunction) -> Result<Self> {
        Self::new(s, [(n, f)])
    }

    fn add_band(&mut self, n: i64, f: &UlcFunction) {
        let v = match self.bands.remove(&n) {
            Some(g) => g.add(f),
            None => f.clone(),
        };
        if !v.is_zero() {
            self.bands.insert(n, v);
        }
    }

    pub fn s(&self) -> &Supernatural {
        &self.s
    }

    pub fn bands(&self) -> &BTreeMap<i64, UlcFunction> {
        &self.bands
    }

    pub fn band(&self, n: i64) -> Option<&UlcFunction> {
        self.bands.get(&n)
    }

    pub fn is_zero(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.bands.values().all(UlcFunction::is_exact)
    }

    /// The lcm `l` of all band periods.
    pub fn period(&self) -> u64 {
        self.bands.values().fold(1, |l, f| l.lcm(&f.period()))
    }

    /// `max |n|` over stored bands (0 for the zero element).
    pub fn bandwidth(&self) -> u64 {
        self.bands.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn min_band(&self) -> Option<i64> {
        self.bands.keys().next().copied()
    }

    pub fn max_band(&self) -> Option<i64> {
        self.bands.keys().next_back().copied()
    }

    /// The part made of bands with index in `range`.
    pub fn restrict(&self, range: impl std::ops::RangeBounds<i64>) -> Self {
        Self {
            s: self.s.clone(),
            bands: self.bands.range(range).map(|(&n, f)| (n, f.clone())).collect(),
        }
    }

    fn same_s(&self, other: &Self) {
        assert_eq!(self.s, other.s, "elements live over different supernatural numbers");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_s(other);
        let mut out = self.clone();
        for (&n, f) in &other.bands {
            out.add_band(n, f);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_bands(|_, f| f.neg())
    }

    pub fn scale(&self, z: &Scalar) -> Self {
        self.map_bands(|_, f| f.scale(z))
    }

    fn map_bands(&self, g: impl Fn(i64, &UlcFunction) -> UlcFunction) -> Self {
        let bands = self
            .bands
            .iter()
            .map(|(&n, f)| (n, g(n, f)))
            .filter(|(_, f)| !f.is_zero())
            .collect();
        Self {
            s: self.s.clone(),
            bands,
        }
    }

    /// `(V^n m_f)(V^m m_g) = V^{n+m} m_{(f∘φ^m) g}`.
    pub fn mul(&self, other: &Self) -> Self {
        self.same_s(other);
        let mut out = Self::zero(self.s.clone());
        for (&n, f) in &self.bands {
            for (&m, g) in &other.bands {
                out.add_band(n + m, &f.shift(m).mul(g));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.s.clone());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `(V^n m_f)^* = m_{f̄} V^{-n} = V^{-n} m_{f̄∘φ^{-n}}`.
    pub fn adjoint(&self) -> Self {
        let bands = self.bands.iter().map(|(&n, f)| (-n, f.conj().shift(-n))).collect();
        Self {
            s: self.s.clone(),
            bands,
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    /// `δ_L`: band `n` times `n`.
    pub fn delta_l(&self) -> Self {
        self.map_bands(|n, f| f.scale(&Scalar::from_int(n)))
    }

    pub fn delta_l_pow(&self, j: u32) -> Self {
        (0..j).fold(self.clone(), |b, _| b.delta_l())
    }

    /// `f_n`, the zero function when the band is absent.
    pub fn fourier(&self, n: i64) -> UlcFunction {
        self.bands.get(&n).cloned().unwrap_or_else(UlcFunction::zero)
    }

    /// `ρ_θ`: band `n` times `e^{2πinθ}`, always float-tagged.
    pub fn rho(&self, theta: f64) -> Self {
        self.map_bands(|n, f| {
            let a = 2.0 * std::f64::consts::PI * theta * n as f64;
            f.scale(&Scalar::float(Complex64::new(a.cos(), a.sin())))
        })
    }

    /// `ρ_{p/q}` with phases `e^{2πinp/q}` taken from [`root_of_unity`],
    /// exact whenever they lie in `Q(i)`.
    pub fn rho_rational(&self, p: i64, q: u64) -> Result<Self> {
        if q == 0 || q > RATIONAL_PHASE_MAX_DEN {
            return Err(Error::InvalidInput(format!(
                "rational phases need 1 <= q <= {RATIONAL_PHASE_MAX_DEN}"
            )));
        }
        Ok(self.map_bands(|n, f| {
            let t = (n * p).rem_euclid(q as i64) as u64;
            f.scale(&root_of_unity(t, q))
        }))
    }

    /// `ρ_{j/q}(b)` kept symbolic: band `n` is returned with phase index `n`,
    /// meaning a factor `ζ_q^{nj}`.
    pub fn rho_phased(&self) -> Vec<(i64, Self)> {
        self.bands
            .iter()
            .map(|(&n, f)| {
                let part = Self {
                    s: self.s.clone(),
                    bands: [(n, f.clone())].into_iter().collect(),
                };
                (n, part)
            })
            .collect()
    }

    /// The `l×l` Bloch symbol, `l` the period.
    pub fn symbol(&self) -> SymbolMatrix {
        self.symbol_at(self.period())
    }

    /// The Bloch symbol written at period `l`, a multiple of the period.
    pub fn symbol_at(&self, l: u64) -> SymbolMatrix {
        assert!(l % self.period() == 0, "symbol period must be a multiple of the element period");
        let li = l as i64;
        let mut coeffs: BTreeMap<i64, CMatrix> = BTreeMap::new();
        for (&n, f) in &self.bands {
            for r in 0..li {
                let v = f.eval(r).to_c64();
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let t = r + n;
                let k = t.div_euclid(li);
                let row = t.rem_euclid(li) as usize;
                let m = coeffs.entry(k).or_insert_with(|| CMatrix::zeros(l as usize, l as usize));
                m[(row, r as usize)] += v;
            }
        }
        SymbolMatrix::new(l as usize, coeffs)
    }

    /// Certified enclosure of `‖b‖` of width at most `tol`.
    pub fn norm_bounds(&self, tol: f64) -> Result<NormBound> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        if self.is_zero() {
            return Ok(NormBound::exact(0.0));
        }
        // A single band is a unitary times a multiplier.
        if self.bands.len() == 1 {
            let s = self.bands.values().next().unwrap().sup_norm();
            return Ok(NormBound::exact(s));
        }
        self.symbol().sup_sigma_max(tol)
    }

    /// `‖b‖` to within `tol`.
    pub fn norm(&self, tol: f64) -> Result<f64> {
        Ok(self.norm_bounds(tol)?.mid())
    }

    /// Enclosure of `‖b‖_P = Σ_j C(P,j) ‖δ_L^j b‖`; the `j`-th term is
    /// computed to `tol/2^{j+1}`.
    pub fn p_norm_bounds(&self, p: u32, tol: f64) -> Result<NormBound> {
        let mut lower = 0.0;
        let mut upper = 0.0;
        let mut d = self.clone();
        for j in 0..=p {
            let w = binomial(p, j) as f64;
            let nb = d.norm_bounds(tol / 2f64.powi(j as i32 + 1))?;
            lower += w * nb.lower;
            upper += w * nb.upper;
            d = d.delta_l();
        }
        Ok(NormBound { lower, upper })
    }

    pub fn p_norm(&self, p: u32, tol: f64) -> Result<f64> {
        Ok(self.p_norm_bounds(p, tol)?.mid())
    }

    /// Matrix of `b` on `span{E_k : k ∈ window}`: entry `(k, s)` is `f_{k-s}(s)`.
    pub fn apply(&self, window: Range<i64>) -> SparseMatrix {
        self.apply_rect(window.clone(), window)
    }

    /// Rectangular compression with rows from `rows` and columns from `cols`.
    pub fn apply_rect(&self, rows: Range<i64>, cols: Range<i64>) -> SparseMatrix {
        let nr = (rows.end - rows.start).max(0) as usize;
        let nc = (cols.end - cols.start).max(0) as usize;
        let mut m = SparseMatrix::zeros(nr, nc);
        for s in cols.clone() {
            for (&n, f) in &self.bands {
                let k = s + n;
                if rows.contains(&k) {
                    m.set((k - rows.start) as usize, (s - cols.start) as usize, f.eval(s).clone());
                }
            }
        }
        m
    }

    /// `Σ_n ‖f_n‖_∞`, an upper bound for `‖b‖`.
    pub fn l1_norm(&self) -> f64 {
        self.bands.values().map(UlcFunction::sup_norm).sum()
    }

    pub fn to_float(&self) -> Self {
        self.map_bands(|_, f| f.to_float())
    }
}

impl fmt::Display for BdElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bands.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .bands
            .iter()
            .map(|(n, g)| {
                let vals: Vec<String> = g.values().iter().map(ToString::to_string).collect();
                format!("V^{n} m[{}]", vals.join(", "))
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

pub fn bd_mul(b1: &BdElement, b2: &BdElement) -> BdElement {
    b1.mul(b2)
}

pub fn bd_adjoint(b: &BdElement) -> BdElement {
    b.adjoint()
}

pub fn bd_delta_l(b: &BdElement) -> BdElement {
    b.delta_l()
}

pub fn bd_fourier(b: &BdElement, n: i64) -> UlcFunction {
    b.fourier(n)
}

pub fn bd_rho(b: &BdElement, theta: f64) -> BdElement {
    b.rho(theta)
}

pub fn bd_symbol(b: &BdElement) -> SymbolMatrix {
    b.symbol()
}

pub fn bd_norm(b: &BdElement, tol: f64) -> Result<f64> {
    b.norm(tol)
}

pub fn bd_p_norm(b: &BdElement, p: u32, tol: f64) -> Result<f64> {
    b.p_norm(p, tol)
}

pub fn bd_apply(b: &BdElement, window: Range<i64>) -> SparseMatrix {
    b.apply(window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2() -> Supernatural {
        "2:inf,3:1".parse().unwrap()
    }

    fn v(n: i64) -> BdElement {
        BdElement::shift(s2(), n)
    }

    fn m(vals: &[i64]) -> BdElement {
        BdElement::multiplier(s2(), UlcFunction::from_ints(vals)).unwrap()
    }

    #[test]
    fn product_rule() {
        let f = UlcFunction::from_ints(&[1, 2, 3]);
        let g = UlcFunction::from_ints(&[5, 7]);
        let a = BdElement::monomial(s2(), 1, f.clone()).unwrap();
        let b = BdElement::monomial(s2(), 1, g.clone()).unwrap();
        let expect = BdElement::monomial(s2(), 2, f.shift(1).mul(&g)).unwrap();
        assert_eq!(a.mul(&b), expect);
        assert_eq!(a.mul(&BdElement::one(s2())), a);
    }

    #[test]
    fn square_of_cosine() {
        let c = v(1).add(&v(-1));
        let expect = v(2).add(&BdElement::scalar(s2(), Scalar::from_int(2))).add(&v(-2));
        assert_eq!(c.mul(&c), expect);
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(v(1).adjoint(), v(-1));
        let f = UlcFunction::new(vec![Scalar::i(), Scalar::from_int(2)]);
        let mf = BdElement::multiplier(s2(), f.clone()).unwrap();
        assert_eq!(mf.adjoint(), BdElement::multiplier(s2(), f.conj()).unwrap());
        let vf = BdElement::monomial(s2(), 1, f.clone()).unwrap();
        assert_eq!(vf.adjoint().mul(&vf), BdElement::multiplier(s2(), f.conj().mul(&f)).unwrap());
        assert_eq!(vf.adjoint().adjoint(), vf);
    }

    #[test]
    fn delta_examples() {
        assert!(m(&[1, 2]).delta_l().is_zero());
        let f = UlcFunction::from_ints(&[1, 4]);
        let x = BdElement::monomial(s2(), 3, f.clone()).unwrap();
        assert_eq!(x.delta_l(), BdElement::monomial(s2(), 3, f.scale(&Scalar::from_int(3))).unwrap());
    }

    #[test]
    fn fourier_and_rho() {
        let f = UlcFunction::from_ints(&[1, 4]);
        let x = BdElement::monomial(s2(), 1, f.clone()).unwrap();
        assert_eq!(x.fourier(1), f);
        assert!(x.fourier(0).is_zero());
        assert_eq!(m(&[3, 1]).rho(0.3), m(&[3, 1]));
        assert_eq!(v(1).rho_rational(1, 2).unwrap(), v(1).neg());
        assert!(v(1).rho_rational(1, 4).unwrap().is_exact());
    }

    #[test]
    fn symbol_examples() {
        let sym = v(1).symbol();
        assert_eq!(sym.period(), 1);
        assert_eq!(sym.coeffs().keys().copied().collect::<Vec<_>>(), vec![1]);
        let sym = m(&[1, 2, 3]).symbol();
        let b = sym.eval(0.2);
        assert_eq!(b[(2, 2)], Complex64::new(3.0, 0.0));
        assert_eq!(b[(0, 1)], Complex64::new(0.0, 0.0));
        // V at period 2: [[0, z], [1, 0]].
        let sym = v(1).symbol_at(2);
        let b = sym.eval(0.25);
        assert!((b[(0, 1)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(b[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(b[(0, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(v(5).norm(1e-9).unwrap(), 1.0);
        assert_eq!(m(&[1, -4, 2]).norm(1e-9).unwrap(), 4.0);
        let c = v(1).add(&v(-1));
        assert!((c.norm(1e-9).unwrap() - 2.0).abs() <= 1e-9);
        assert_eq!(m(&[1, -4]).p_norm(3, 1e-9).unwrap(), 4.0);
        assert!((v(1).p_norm(1, 1e-9).unwrap() - 2.0).abs() < 1e-12);
        assert!(c.norm(0.0).is_err());
    }

    #[test]
    fn apply_examples() {
        let a = v(1).apply(0..4);
        assert_eq!(a.get(1, 0), Scalar::one());
        assert_eq!(a.get(0, 1), Scalar::zero());
        assert_eq!(a.nnz(), 3);
        let d = m(&[1, 2]).apply(-1..2);
        assert_eq!(d.get(0, 0), Scalar::from_int(2));
        assert_eq!(d.get(1, 1), Scalar::from_int(1));
    }

    #[test]
    fn rejects_foreign_period() {
        let r = BdElement::multiplier("2:inf".parse().unwrap(), UlcFunction::from_ints(&[1, 2, 3]));
        assert!(matches!(r, Err(Error::PeriodMismatch { .. })));
    }
}
