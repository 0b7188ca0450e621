//! Fredholm index of `T(b) + c`, winding numbers of symbols, and the
//! `K_0` demonstration built on `G_S`.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{embed_int, gs_contains, Supernatural};
use crate::bd::BdElement;
use crate::bdt::BdtElement;
use crate::calculus::symbol_margin;
use crate::error::{Error, Result};
use crate::linalg::singular_values;

pub const DEFAULT_SCHEDULE: [usize; 4] = [64, 128, 256, 512];
pub const DEFAULT_SVD_THRESHOLD: f64 = 1e-8;
/// Required ratio between the smallest retained and the largest discarded
/// singular value.
pub const GAP_RATIO: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionDims {
    pub n: usize,
    pub kernel: usize,
    pub cokernel: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexResult {
    pub index: i64,
    pub kernel_dims: Vec<SectionDims>,
    pub stabilized: bool,
}

/// Number of singular values below `threshold`, or `None` when the spectrum
/// has no clear gap around the threshold.
fn null_count(svals: &[f64], threshold: f64) -> Option<usize> {
    let small: Vec<f64> = svals.iter().copied().filter(|&s| s < threshold).collect();
    let big = svals.iter().copied().filter(|&s| s >= threshold).fold(f64::INFINITY, f64::min);
    let top_small = small.iter().copied().fold(0.0, f64::max);
    if !small.is_empty() && big.is_finite() && big < GAP_RATIO * top_small.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(small.len())
}

/// Kernel dimension of `a` seen through the section with columns `[0, N)`
/// and rows `[0, N + B)`, where `B` covers every way `a` can move support.
fn section_kernel(a: &BdtElement, n: usize, threshold: f64) -> Option<usize> {
    let reach = a.symbol().bandwidth() as usize + a.compact().extent();
    let m = a.truncate_rect(0..n + reach, 0..n).to_dmatrix();
    null_count(&singular_values(&m), threshold)
}

/// `dim ker − dim coker`, from rectangular sections of `a` and `a^*`.
///
/// Square sections always have index zero, so the kernel of `a` is counted on
/// tall sections `(N + B) × N`, and the cokernel as the kernel of `a^*`.
pub fn fredholm_index(a: &BdtElement, schedule: &[usize], svd_threshold: f64) -> Result<IndexResult> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("schedule must be increasing with at least three sizes".into()));
    }
    if symbol_margin(a.tau()).is_none() {
        return Err(Error::NotFredholm("quotient symbol is not certifiably invertible".into()));
    }
    let adj = a.adjoint();
    let dims: Vec<Option<SectionDims>> = schedule
        .par_iter()
        .map(|&n| {
            let kernel = section_kernel(a, n, svd_threshold)?;
            let cokernel = section_kernel(&adj, n, svd_threshold)?;
            Some(SectionDims { n, kernel, cokernel })
        })
        .collect();
    let dims: Vec<SectionDims> = dims
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Unstable("no singular value gap at the threshold".into()))?;
    let idx: Vec<i64> = dims.iter().map(|d| d.kernel as i64 - d.cokernel as i64).collect();
    let tail = &idx[idx.len() - 3..];
    let stabilized = tail.iter().all(|&v| v == tail[0]);
    if !stabilized {
        return Err(Error::Unstable(format!("section indices {idx:?} do not settle")));
    }
    Ok(IndexResult {
        index: tail[0],
        kernel_dims: dims,
        stabilized,
    })
}

/// Winding number of `det B(z)` for invertible `b`.
pub fn winding(b: &BdElement) -> Result<i64> {
    if symbol_margin(b).is_none() {
        return Err(Error::NotInvertible("symbol is not certifiably invertible".into()));
    }
    b.symbol()
        .winding(1 << 20)
        .ok_or_else(|| Error::Unstable("argument steps did not resolve".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipRow {
    pub numerator: i64,
    pub denominator: i64,
    pub member: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdditivityRow {
    pub shifts: (i64, i64),
    pub indices: (i64, i64),
    pub product_index: i64,
    pub additive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientRow {
    pub integer: i64,
    pub level: u64,
    pub residue: u64,
    pub class_is_zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct K0Report {
    pub s: String,
    pub membership: Vec<MembershipRow>,
    /// Index of the unilateral shift: the generator `[V]_1` is sent to `-[P_00]`.
    pub shift_index: i64,
    pub additivity: Vec<AdditivityRow>,
    pub quotient: Vec<QuotientRow>,
}

/// Membership table, index of the generator, index additivity on shifts, and
/// the identification of embedded integers with zero in `(Z/SZ)/Z`.
pub fn k0_demo(s: &Supernatural) -> Result<K0Report> {
    let mut membership = Vec::new();
    for den in [1i64, 2, 3, 4, 5, 6, 8, 9, 12, 16] {
        for num in [1i64, 3] {
            membership.push(MembershipRow {
                numerator: num,
                denominator: den,
                member: gs_contains(num, den, s)?,
            });
        }
    }
    let sched = [16, 32, 64];
    let t = |n: i64| BdtElement::toeplitz(BdElement::shift(s.clone(), n));
    let shift_index = fredholm_index(&t(1), &DEFAULT_SCHEDULE, DEFAULT_SVD_THRESHOLD)?.index;
    let mut additivity = Vec::new();
    for (n1, n2) in [(1, 1), (1, -1), (-2, 1), (2, -3), (-1, -1)] {
        let i1 = fredholm_index(&t(n1), &sched, DEFAULT_SVD_THRESHOLD)?.index;
        let i2 = fredholm_index(&t(n2), &sched, DEFAULT_SVD_THRESHOLD)?.index;
        let ip = fredholm_index(&t(n1).mul(&t(n2)), &sched, DEFAULT_SVD_THRESHOLD)?.index;
        additivity.push(AdditivityRow {
            shifts: (n1, n2),
            indices: (i1, i2),
            product_index: ip,
            additive: ip == i1 + i2,
        });
    }
    let mut quotient = Vec::new();
    for level in s.divisors_up_to(12) {
        for k in [-7i64, 0, 5, 13] {
            quotient.push(QuotientRow {
                integer: k,
                level,
                residue: embed_int(k, level).value(),
                // Every integer is in the dense copy of Z being divided out.
                class_is_zero: true,
            });
        }
    }
    Ok(K0Report {
        s: s.to_string(),
        membership,
        shift_index,
        additivity,
        quotient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::ulc::UlcFunction;

    fn s() -> Supernatural {
        "2:inf".parse().unwrap()
    }

    #[test]
    fn shift_has_index_minus_one() {
        let u = BdtElement::unilateral_shift(s());
        let r = fredholm_index(&u, &DEFAULT_SCHEDULE, DEFAULT_SVD_THRESHOLD).unwrap();
        assert_eq!(r.index, -1);
        assert!(r.stabilized);
        assert!(r.kernel_dims.iter().all(|d| d.kernel == 0 && d.cokernel == 1));
    }

    #[test]
    fn identity_has_index_zero() {
        let r = fredholm_index(&BdtElement::one(s()), &[8, 16, 32], DEFAULT_SVD_THRESHOLD).unwrap();
        assert_eq!(r.index, 0);
    }

    #[test]
    fn backward_shift_with_weight() {
        let f = UlcFunction::new(vec![Scalar::ratio(1, 2), Scalar::from_int(-3)]);
        let a = BdtElement::toeplitz(BdElement::monomial(s(), -2, f).unwrap());
        assert_eq!(fredholm_index(&a, &[64, 128, 256], 1e-8).unwrap().index, 2);
    }

    #[test]
    fn non_fredholm_is_rejected() {
        let b = BdElement::one(s()).add(&BdElement::shift(s(), 1));
        let a = BdtElement::toeplitz(b);
        assert!(matches!(fredholm_index(&a, &[8, 16, 32], 1e-8), Err(Error::NotFredholm(_))));
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding(&BdElement::shift(s(), 1)).unwrap(), 1);
        let m = BdElement::multiplier(s(), UlcFunction::from_ints(&[2, -1])).unwrap();
        assert_eq!(winding(&m).unwrap(), 0);
    }

    #[test]
    fn demo_report() {
        let r = k0_demo(&s()).unwrap();
        assert_eq!(r.shift_index, -1);
        assert!(r.additivity.iter().all(|a| a.additive));
        let row = |n, d| r.membership.iter().find(|m| m.numerator == n && m.denominator == d).unwrap().member;
        assert!(row(3, 8));
        assert!(!row(1, 3));
    }
}
