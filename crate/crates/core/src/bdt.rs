//! Elements `a = T(b) + c` of the smooth Bunce-Deddens-Toeplitz algebra.
//!
//! `T(V^n m_f)` acts on `ℓ²(Z_{≥0})` by `E_s ↦ f(s) E_{s+n}` when `s + n ≥ 0`
//! and kills `E_s` otherwise; this is `U^n M_f` for `n ≥ 0` and
//! `(U^*)^{-n} M_f` for `n < 0`. Products are normalized exactly: the
//! failure of `T` to be multiplicative is a finite matrix computed from the
//! band data.

use std::fmt;
use std::ops::Range;

use crate::arith::Supernatural;
use crate::bd::BdElement;
use crate::compact::CompactMatrix;
use crate::fourier::Linear;
use crate::matrix::SparseMatrix;
use crate::scalar::Scalar;
use crate::ulc::UlcFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct BdtElement {
    symbol: BdElement,
    compact: CompactMatrix,
}

impl BdtElement {
    pub fn new(symbol: BdElement, compact: CompactMatrix) -> Self {
        Self { symbol, compact }
    }

    /// `T(b)`.
    pub fn toeplitz(b: BdElement) -> Self {
        Self::new(b, CompactMatrix::zero())
    }

    pub fn compact_only(s: Supernatural, c: CompactMatrix) -> Self {
        Self::new(BdElement::zero(s), c)
    }

    pub fn zero(s: Supernatural) -> Self {
        Self::toeplitz(BdElement::zero(s))
    }

    pub fn one(s: Supernatural) -> Self {
        Self::toeplitz(BdElement::one(s))
    }

    pub fn scalar(s: Supernatural, z: Scalar) -> Self {
        Self::toeplitz(BdElement::scalar(s, z))
    }

    /// The unilateral shift `U = T(V)`.
    pub fn unilateral_shift(s: Supernatural) -> Self {
        Self::toeplitz(BdElement::shift(s, 1))
    }

    pub fn s(&self) -> &Supernatural {
        self.symbol.s()
    }

    pub fn symbol(&self) -> &BdElement {
        &self.symbol
    }

    pub fn compact(&self) -> &CompactMatrix {
        &self.compact
    }

    pub fn into_parts(self) -> (BdElement, CompactMatrix) {
        (self.symbol, self.compact)
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero() && self.compact.is_zero()
    }

    pub fn is_exact(&self) -> bool {
        self.symbol.is_exact() && self.compact.is_exact()
    }

    /// The quotient map `τ(T(b) + c) = b`.
    pub fn tau(&self) -> &BdElement {
        &self.symbol
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.symbol.add(&other.symbol), self.compact.add(&other.compact))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.symbol.sub(&other.symbol), self.compact.sub(&other.compact))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.symbol.neg(), self.compact.neg())
    }

    pub fn scale(&self, z: &Scalar) -> Self {
        Self::new(self.symbol.scale(z), self.compact.scale(z))
    }

    pub fn add_compact(&self, c: &CompactMatrix) -> Self {
        Self::new(self.symbol.clone(), self.compact.add(c))
    }

    /// Exact product in canonical form.
    pub fn mul(&self, other: &Self) -> Self {
        let b = self.symbol.mul(&other.symbol);
        let c = correction(&self.symbol, &other.symbol)
            .add(&toeplitz_times_compact(&self.symbol, &other.compact))
            .add(&compact_times_toeplitz(&self.compact, &other.symbol))
            .add(&self.compact.mul(&other.compact));
        Self::new(b, c)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.s().clone()), |acc, _| acc.mul(self))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// `(T(b) + c)^* = T(b^*) + c^*`.
    pub fn adjoint(&self) -> Self {
        Self::new(self.symbol.adjoint(), self.compact.adjoint())
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    /// `d_K(T(b) + c) = T(δ_L b) + d_K(c)`.
    pub fn d_k(&self) -> Self {
        Self::new(self.symbol.delta_l(), self.compact.d_k())
    }

    /// `n`-th Fourier component: `T(V^n m_{f_n})` plus the `n`-th diagonal of `c`.
    pub fn fourier(&self, n: i64) -> Self {
        Self::new(self.symbol.restrict(n..=n), self.compact.fourier(n))
    }

    /// Fourier indices carrying a nonzero component.
    pub fn spectrum(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.symbol.bands().keys().copied().collect();
        v.extend(self.compact.diagonals());
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `max |n|` over the Fourier spectrum.
    pub fn spread(&self) -> u64 {
        self.spectrum().iter().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn rho(&self, theta: f64) -> Self {
        Self::new(self.symbol.rho(theta), self.compact.rho(theta))
    }

    pub fn rho_rational(&self, p: i64, q: u64) -> crate::error::Result<Self> {
        Ok(Self::new(self.symbol.rho_rational(p, q)?, self.compact.rho_rational(p, q)))
    }

    /// `ρ_{j/q}` kept symbolic: each Fourier component paired with its index.
    pub fn rho_phased(&self) -> Vec<(i64, Self)> {
        self.spectrum().into_iter().map(|n| (n, self.fourier(n))).collect()
    }

    /// `N×N` compression to `span{E_0, …, E_{N-1}}`.
    pub fn truncate(&self, n: usize) -> SparseMatrix {
        self.truncate_rect(0..n, 0..n)
    }

    /// Compression with the given row and column index ranges.
    pub fn truncate_rect(&self, rows: Range<usize>, cols: Range<usize>) -> SparseMatrix {
        let r = rows.start as i64..rows.end as i64;
        let c = cols.start as i64..cols.end as i64;
        let mut m = self.symbol.apply_rect(r, c);
        for (&(k, s), v) in self.compact.entries() {
            if rows.contains(&k) && cols.contains(&s) {
                m.add_at(k - rows.start, s - cols.start, v);
            }
        }
        m
    }

    pub fn to_float(&self) -> Self {
        Self::new(self.symbol.to_float(), self.compact.to_float())
    }
}

impl fmt::Display for BdtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({}) + {}", self.symbol, self.compact)
    }
}

/// `T(b1) T(b2) - T(b1 b2)`.
///
/// On `E_s` the product `T(V^n m_f) T(V^m m_g)` differs from
/// `T(V^{n+m} m_{(f∘φ^m) g})` only when `s + m < 0 ≤ s + m + n`, which needs
/// `n > 0 > m` and leaves finitely many `s`.
pub fn correction(b1: &BdElement, b2: &BdElement) -> CompactMatrix {
    let mut out = CompactMatrix::zero();
    for (&n, f) in b1.restrict(1..).bands() {
        for (&m, g) in b2.restrict(..0).bands() {
            for s in 0.max(-n - m)..-m {
                let v = f.eval(s + m) * g.eval(s);
                out.add_at((s + m + n) as usize, s as usize, &-v);
            }
        }
    }
    out
}

/// `T(b) c` for finitely supported `c`.
pub fn toeplitz_times_compact(b: &BdElement, c: &CompactMatrix) -> CompactMatrix {
    let mut out = CompactMatrix::zero();
    for (&(r, s), v) in c.entries() {
        for (&n, f) in b.bands() {
            let k = r as i64 + n;
            if k >= 0 {
                out.add_at(k as usize, s, &(f.eval(r as i64) * v));
            }
        }
    }
    out
}

/// `c T(b)` for finitely supported `c`.
pub fn compact_times_toeplitz(c: &CompactMatrix, b: &BdElement) -> CompactMatrix {
    let mut out = CompactMatrix::zero();
    for (&(k, r), v) in c.entries() {
        for (&n, f) in b.bands() {
            let s = r as i64 - n;
            if s >= 0 {
                out.add_at(k, s as usize, &(v * f.eval(s)));
            }
        }
    }
    out
}

pub fn toeplitz(b: &BdElement) -> BdtElement {
    BdtElement::toeplitz(b.clone())
}

pub fn tau(a: &BdtElement) -> BdElement {
    a.tau().clone()
}

pub fn bdt_mul(a1: &BdtElement, a2: &BdtElement) -> BdtElement {
    a1.mul(a2)
}

pub fn bdt_dk(a: &BdtElement) -> BdtElement {
    a.d_k()
}

pub fn bdt_fourier(a: &BdtElement, n: i64) -> BdtElement {
    a.fourier(n)
}

pub fn bdt_truncate(a: &BdtElement, n: usize) -> SparseMatrix {
    a.truncate(n)
}

pub fn bdt_rho(a: &BdtElement, theta: f64) -> BdtElement {
    a.rho(theta)
}

/// `T(V^n m_f)` as an element.
pub fn toeplitz_monomial(s: &Supernatural, n: i64, f: UlcFunction) -> crate::error::Result<BdtElement> {
    Ok(BdtElement::toeplitz(BdElement::monomial(s.clone(), n, f)?))
}

impl Linear for BdElement {
    fn zero_like(&self) -> Self {
        BdElement::zero(self.s().clone())
    }
    fn add_scaled(&self, other: &Self, z: &Scalar) -> Self {
        self.add(&other.scale(z))
    }
}

impl Linear for CompactMatrix {
    fn zero_like(&self) -> Self {
        CompactMatrix::zero()
    }
    fn add_scaled(&self, other: &Self, z: &Scalar) -> Self {
        self.add(&other.scale(z))
    }
}

impl Linear for BdtElement {
    fn zero_like(&self) -> Self {
        BdtElement::zero(self.s().clone())
    }
    fn add_scaled(&self, other: &Self, z: &Scalar) -> Self {
        self.add(&other.scale(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::k_units;

    fn s() -> Supernatural {
        "2:inf,3:1".parse().unwrap()
    }

    fn t_v(n: i64) -> BdtElement {
        BdtElement::toeplitz(BdElement::shift(s(), n))
    }

    #[test]
    fn shift_relations() {
        let one = BdtElement::one(s());
        // U U^* = I - P_00 and U^* U = I.
        assert_eq!(t_v(1).mul(&t_v(-1)), one.add_compact(&k_units(0, 0).neg()));
        assert_eq!(t_v(-1).mul(&t_v(1)), one);
        assert_eq!(correction(&BdElement::shift(s(), 1), &BdElement::shift(s(), -1)), k_units(0, 0).neg());
        assert!(correction(&BdElement::shift(s(), 3), &BdElement::shift(s(), 2)).is_zero());
        // U^2 (U^*)^3 = (U^*) - corrections on the first two rows.
        let c = correction(&BdElement::shift(s(), 2), &BdElement::shift(s(), -3));
        assert_eq!(c, k_units(0, 1).add(&k_units(1, 2)).neg());
    }

    #[test]
    fn multipliers_do_not_wrap() {
        let f = BdElement::multiplier(s(), UlcFunction::from_ints(&[1, 2])).unwrap();
        let g = BdElement::multiplier(s(), UlcFunction::from_ints(&[3, 4, 5])).unwrap();
        assert!(correction(&f, &g).is_zero());
    }

    #[test]
    fn toeplitz_examples() {
        assert_eq!(BdtElement::one(s()).truncate(3), SparseMatrix::identity(3));
        let u = t_v(1).truncate(3);
        assert_eq!(u.get(1, 0), Scalar::one());
        assert_eq!(u.get(2, 1), Scalar::one());
        assert_eq!(u.nnz(), 2);
        let f = UlcFunction::from_ints(&[2, 7]);
        let mf = BdtElement::toeplitz(BdElement::multiplier(s(), f).unwrap()).truncate(3);
        assert_eq!(mf.get(2, 2), Scalar::from_int(2));
        assert_eq!(mf.get(1, 1), Scalar::from_int(7));
    }

    #[test]
    fn tau_and_fourier() {
        let a = t_v(1).add_compact(&k_units(2, 0));
        assert_eq!(a.tau(), &BdElement::shift(s(), 1));
        assert!(BdtElement::compact_only(s(), k_units(1, 1)).tau().is_zero());
        assert_eq!(a.fourier(2), BdtElement::compact_only(s(), k_units(2, 0)));
        assert_eq!(a.fourier(1), t_v(1));
    }

    #[test]
    fn matrix_unit_products_with_shift() {
        // P_00 U = 0 and U P_00 = P_10.
        let p = BdtElement::compact_only(s(), k_units(0, 0));
        assert!(p.mul(&t_v(1)).is_zero());
        assert_eq!(t_v(1).mul(&p), BdtElement::compact_only(s(), k_units(1, 0)));
    }
}
