//! Derivations `d = γ d_K + [T(b) + c, ·]`, their Fourier components, and
//! recovery of the implementing compact from values on generators.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::arith::Supernatural;
use crate::bd::BdElement;
use crate::bdt::BdtElement;
use crate::compact::CompactMatrix;
use crate::error::{Error, Result};
use crate::fourier::{average_over_roots, order_for_spread};
use crate::scalar::Scalar;
use crate::ulc::UlcFunction;

/// `d = γ d_K + [T(b) + c, ·]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationSpec {
    pub gamma: Scalar,
    pub b: BdElement,
    pub c: CompactMatrix,
}

/// Anything that acts linearly on the algebra; reconstruction only ever
/// evaluates it on generators, verification on a fixed list of elements.
pub trait Derivation {
    fn apply(&self, a: &BdtElement) -> BdtElement;
}

impl<F: Fn(&BdtElement) -> BdtElement> Derivation for F {
    fn apply(&self, a: &BdtElement) -> BdtElement {
        self(a)
    }
}

impl DerivationSpec {
    pub fn new(gamma: Scalar, b: BdElement, c: CompactMatrix) -> Self {
        Self { gamma, b, c }
    }

    pub fn zero(s: Supernatural) -> Self {
        Self::new(Scalar::zero(), BdElement::zero(s), CompactMatrix::zero())
    }

    /// The inner derivation `[x, ·]`.
    pub fn inner(x: &BdtElement) -> Self {
        Self::new(Scalar::zero(), x.symbol().clone(), x.compact().clone())
    }

    pub fn s(&self) -> &Supernatural {
        self.b.s()
    }

    /// `T(b) + c`.
    pub fn implementing_element(&self) -> BdtElement {
        BdtElement::new(self.b.clone(), self.c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.gamma + &other.gamma, self.b.add(&other.b), self.c.add(&other.c))
    }

    /// Fourier indices where the derivation has a nonzero component.
    pub fn spectrum(&self) -> Vec<i64> {
        let mut v = self.implementing_element().spectrum();
        if !self.gamma.is_zero() {
            v.push(0);
        }
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl Derivation for DerivationSpec {
    fn apply(&self, a: &BdtElement) -> BdtElement {
        der_apply(self, a)
    }
}

/// `γ d_K(a) + x a - a x` with `x = T(b) + c`.
pub fn der_apply(d: &DerivationSpec, a: &BdtElement) -> BdtElement {
    let x = d.implementing_element();
    let inner = x.commutator(a);
    if d.gamma.is_zero() {
        inner
    } else {
        inner.add(&a.d_k().scale(&d.gamma))
    }
}

/// Operator norm of the `N×N` section of `d(a1 a2) - d(a1) a2 - a1 d(a2)`.
pub fn der_leibniz_residual(d: &dyn Derivation, a1: &BdtElement, a2: &BdtElement, n: usize) -> f64 {
    let lhs = d.apply(&a1.mul(a2));
    let rhs = d.apply(a1).mul(a2).add(&a1.mul(&d.apply(a2)));
    let diff = lhs.sub(&rhs);
    if diff.is_zero() {
        return 0.0;
    }
    crate::linalg::sigma_max(&diff.truncate(n).to_dmatrix())
}

/// The `n`-th Fourier component `γ d_K [n = 0] + [x_n, ·]`.
pub fn der_component(d: &DerivationSpec, n: i64) -> DerivationSpec {
    let gamma = if n == 0 { d.gamma.clone() } else { Scalar::zero() };
    let x = d.implementing_element().fourier(n);
    let (b, c) = x.into_parts();
    DerivationSpec::new(gamma, b, c)
}

/// `d_n(a)` for a black-box `d`, by averaging `ζ^{nj} ρ_{-j/q} d ρ_{j/q}(a)`
/// over `q`-th roots of unity. Since `d` is linear, `d(ρ_θ a)` is assembled
/// from `d` applied to the Fourier components of `a`; every phase is then an
/// integer power of `ζ_q` and the average is exact.
pub fn component_by_quadrature(d: &dyn Derivation, a: &BdtElement, n: i64, band_limit: u64) -> BdtElement {
    let mut terms = Vec::new();
    for (m, am) in a.rho_phased() {
        let dam = d.apply(&am);
        for (k, part) in dam.rho_phased() {
            // ζ^{nj} · ζ^{mj} (from ρ_θ on a_m) · ζ^{-kj} (from ρ_{-θ} on the output).
            terms.push((n + m - k, part));
        }
    }
    let spread = band_limit + a.spread() + terms.iter().map(|(p, _)| p.unsigned_abs()).max().unwrap_or(0);
    let q = order_for_spread(spread);
    average_over_roots(q, &terms).unwrap_or_else(|| BdtElement::zero(a.s().clone()))
}

/// Covariance defect `max_θ ‖ρ_{-θ} d_n ρ_θ(a) - e^{-2πinθ} d_n(a)‖`, each
/// norm bounded above by `Σ‖f_k‖_∞ + ‖·‖_F`.
pub fn der_check_covariance(dn: &DerivationSpec, n: i64, a: &BdtElement, thetas: &[f64]) -> f64 {
    let base = der_apply(dn, a);
    thetas
        .iter()
        .map(|&t| {
            let lhs = der_apply(dn, &a.rho(t)).rho(-t);
            let ang = -2.0 * std::f64::consts::PI * n as f64 * t;
            let rhs = base.scale(&Scalar::float(Complex64::new(ang.cos(), ang.sin())));
            let diff = lhs.sub(&rhs);
            diff.symbol().l1_norm() + diff.compact().frobenius()
        })
        .fold(0.0, f64::max)
}

/// Smallest divisor `l` of `S` with `l ∤ n`, searched up to `limit`.
fn separating_level(s: &Supernatural, n: u64, limit: u64) -> Option<u64> {
    s.divisors_up_to(limit).into_iter().find(|&l| l > 1 && n % l != 0)
}

/// Indicator of the residue class `r` modulo `l`.
fn indicator(l: u64, r: u64) -> UlcFunction {
    UlcFunction::new((0..l).map(|x| if x == r { Scalar::one() } else { Scalar::zero() }).collect())
}

fn check_compact_range(out: &BdtElement, what: &str) -> Result<()> {
    if out.symbol().is_zero() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("range on {what} is not compact")))
    }
}

/// Recovers `c` from a derivation `d = [c, ·]` with finite-support `c` whose
/// Fourier components vanish outside `[-B, B]`.
///
/// Off-diagonal components are read from `d_n(M_h)`, whose `(i, j)` entry is
/// `c_{ij}(h(j) - h(i))`, with `h` an indicator of a residue class modulo a
/// level `l | S` not dividing `n`. The diagonal `β_0` comes from
/// `d_0(U) = U α_0(K)`, `α_0(k) = β_0(k+1) - β_0(k)`, summed from infinity.
/// The result is verified on a fixed list of elements.
pub fn der_reconstruct(d: &dyn Derivation, s: &Supernatural, band_limit: u64) -> Result<CompactMatrix> {
    let bl = band_limit as i64;
    let u = BdtElement::unilateral_shift(s.clone());
    let du = d.apply(&u);
    check_compact_range(&du, "U")?;

    let mut c = CompactMatrix::zero();

    // n = 0 from U.
    let d0u = component_by_quadrature(d, &u, 0, band_limit);
    let mut alpha: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (&(k, j), v) in d0u.compact().entries() {
        if k != j + 1 {
            return Err(Error::Unsupported("zeroth component of d(U) is not U α(K)".into()));
        }
        alpha.insert(j, v.clone());
    }
    let mut tail = Scalar::zero();
    for (&k, a) in alpha.iter().rev() {
        tail = &tail + a;
        // β_0(k) = -Σ_{r ≥ k} α_0(r); constant between consecutive support points.
        let next = alpha.range(..k).next_back().map(|(&r, _)| r + 1).unwrap_or(0);
        for i in next..=k {
            c.add_at(i, i, &-tail.clone());
        }
    }

    if du.spread() > band_limit + 1 {
        return Err(Error::Unsupported(format!("range exceeds band limit {band_limit}")));
    }

    // n ≠ 0 from indicator multipliers.
    let mut checked = std::collections::BTreeSet::new();
    for n in (-bl..=bl).filter(|&n| n != 0) {
        let l = separating_level(s, n.unsigned_abs(), 1 << 20).ok_or_else(|| {
            Error::Unsupported(format!("no level dividing S separates shifts by {n}"))
        })?;
        let mut found: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
        for r in 0..l {
            let h = indicator(l, r);
            let mh = BdtElement::toeplitz(BdElement::multiplier(s.clone(), h.clone())?);
            if checked.insert((l, r)) {
                let v = d.apply(&mh);
                check_compact_range(&v, "a multiplier")?;
                if v.spread() > band_limit {
                    return Err(Error::Unsupported(format!("range exceeds band limit {band_limit}")));
                }
            }
            let dn = component_by_quadrature(d, &mh, n, band_limit);
            for (&(i, j), v) in dn.compact().entries() {
                let w = h.eval(j as i64) - h.eval(i as i64);
                if let Some(w) = w.inv() {
                    found.entry((i, j)).or_insert_with(|| v * &w);
                }
            }
        }
        for ((i, j), v) in found {
            c.add_at(i, j, &v);
        }
    }

    let ci = BdtElement::compact_only(s.clone(), c.clone());
    for (idx, a) in verification_elements(s).iter().enumerate() {
        if d.apply(a) != ci.commutator(a) {
            return Err(Error::ReconstructionMismatch(format!("d(a) ≠ [c, a] on verification element {idx}")));
        }
    }
    Ok(c)
}

/// A fixed list of twenty elements exercising shifts, multipliers and matrix
/// units, used to verify reconstructions.
pub fn verification_elements(s: &Supernatural) -> Vec<BdtElement> {
    let u = BdtElement::unilateral_shift(s.clone());
    let ustar = u.adjoint();
    let mut out = vec![u.clone(), ustar.clone(), u.mul(&u), ustar.mul(&ustar).mul(&ustar)];
    let levels: Vec<u64> = s.divisors_up_to(12).into_iter().filter(|&l| l > 1).take(2).collect();
    for &l in &levels {
        for r in 0..l.min(2) {
            let m = BdtElement::toeplitz(BdElement::multiplier(s.clone(), indicator(l, r)).expect("l divides S"));
            out.push(m.clone());
            out.push(u.mul(&m));
        }
    }
    for (k, j) in [(0, 0), (1, 0), (0, 2), (3, 1), (2, 5)] {
        out.push(BdtElement::compact_only(s.clone(), CompactMatrix::unit(k, j)));
    }
    let mut i = 0usize;
    while out.len() < 20 {
        let a = out[i % 4].clone();
        let b = out[(i * 7 + 5) % out.len()].clone();
        out.push(a.mul(&b).add(&b));
        i += 1;
    }
    out.truncate(20);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::k_units;

    fn s() -> Supernatural {
        "2:inf,3:1".parse().unwrap()
    }

    fn u() -> BdtElement {
        BdtElement::unilateral_shift(s())
    }

    #[test]
    fn apply_examples() {
        let dk = DerivationSpec::new(Scalar::one(), BdElement::zero(s()), CompactMatrix::zero());
        assert_eq!(der_apply(&dk, &u()), u());
        let dp = DerivationSpec::new(Scalar::zero(), BdElement::zero(s()), k_units(0, 0));
        assert_eq!(der_apply(&dp, &u()), BdtElement::compact_only(s(), k_units(1, 0).neg()));
        let one = BdtElement::one(s());
        let any = DerivationSpec::new(Scalar::ratio(2, 3), BdElement::shift(s(), 2), k_units(1, 3));
        assert!(der_apply(&any, &one).is_zero());
    }

    #[test]
    fn leibniz_holds_exactly() {
        let d = DerivationSpec::new(Scalar::from_int(3), BdElement::shift(s(), -1), k_units(2, 0));
        let a1 = u().add_compact(&k_units(1, 1));
        let a2 = u().adjoint().mul(&u().adjoint());
        assert_eq!(der_leibniz_residual(&d, &a1, &a2, 16), 0.0);
    }

    #[test]
    fn component_examples() {
        let dk = DerivationSpec::new(Scalar::one(), BdElement::zero(s()), CompactMatrix::zero());
        assert!(der_component(&dk, 2).is_zero());
        let f = UlcFunction::from_ints(&[1, 5]);
        let vb = BdElement::monomial(s(), 1, f).unwrap();
        let d = DerivationSpec::new(Scalar::zero(), vb.clone(), CompactMatrix::zero());
        assert_eq!(der_component(&d, 1), d);
    }

    #[test]
    fn covariance_of_matrix_unit() {
        let d = DerivationSpec::new(Scalar::zero(), BdElement::zero(s()), k_units(1, 0));
        let a = u().add_compact(&k_units(0, 2));
        assert!(der_check_covariance(&d, 1, &a, &[0.1, 0.25, 0.7]) <= 1e-12);
    }

    #[test]
    fn reconstruct_projection() {
        let d = DerivationSpec::new(Scalar::zero(), BdElement::zero(s()), k_units(0, 0));
        assert_eq!(der_reconstruct(&d, &s(), 2).unwrap(), k_units(0, 0));
        let z = DerivationSpec::zero(s());
        assert!(der_reconstruct(&z, &s(), 2).unwrap().is_zero());
    }

    #[test]
    fn reconstruct_shifted_diagonal() {
        // x = U² β(K) with β = (1, -2, 0, 1/2).
        let c = CompactMatrix::from_entries([
            ((2, 0), Scalar::one()),
            ((3, 1), Scalar::from_int(-2)),
            ((5, 3), Scalar::ratio(1, 2)),
        ]);
        let d = DerivationSpec::new(Scalar::zero(), BdElement::zero(s()), c.clone());
        assert_eq!(der_reconstruct(&d, &s(), 3).unwrap(), c);
    }

    #[test]
    fn reconstruct_rejects_non_compact_range() {
        let dk = DerivationSpec::new(Scalar::one(), BdElement::zero(s()), CompactMatrix::zero());
        assert!(matches!(der_reconstruct(&dk, &s(), 2), Err(Error::Unsupported(_))));
    }
}
