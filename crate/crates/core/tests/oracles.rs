//! Results checked against independent computations: explicit matrix
//! entries, closed-form series, and direct quadrature.

use std::f64::consts::PI;

use bdtk::arith::{gs_contains, Supernatural};
use bdtk::bd::BdElement;
use bdtk::bdt::BdtElement;
use bdtk::calculus::{bd_exp, bd_invert_auto, bdt_invert, DEFAULT_INVERT_SIZES};
use bdtk::corpus::{Corpus, CorpusConfig};
use bdtk::index::{fredholm_index, winding, DEFAULT_SCHEDULE, DEFAULT_SVD_THRESHOLD};
use bdtk::matrix::SparseMatrix;
use bdtk::scalar::Scalar;
use bdtk::ulc::UlcFunction;
use num_complex::Complex64;

fn s2() -> Supernatural {
    "2:inf".parse().unwrap()
}

/// Entry `(k, s)` of `b` is `f_{k-s}(s)`, read straight off the bands.
fn entry(b: &BdElement, k: i64, s: i64) -> Scalar {
    b.band(k - s).map(|f| f.eval(s).clone()).unwrap_or_default()
}

fn band_value(b: &BdElement, n: i64) -> Complex64 {
    b.band(n).map(|f| f.eval(0).to_c64()).unwrap_or_default()
}

#[test]
fn products_match_matrix_products() {
    for id in 0..40 {
        let mut g = Corpus::for_case(CorpusConfig::default(), 11, id);
        let (b1, b2) = (g.bd(), g.bd());
        let p = b1.mul(&b2);
        let reach = (b1.bandwidth() + b2.bandwidth()) as i64;
        for k in -6..6 {
            for s in -6..6 {
                let mut acc = Scalar::zero();
                for t in s - reach..=s + reach {
                    acc = acc + &entry(&b1, k, t) * &entry(&b2, t, s);
                }
                assert_eq!(entry(&p, k, s), acc, "case {id} entry ({k}, {s})");
            }
        }
    }
}

#[test]
fn adjoint_is_conjugate_transpose() {
    for id in 0..40 {
        let b = Corpus::for_case(CorpusConfig::default(), 12, id).bd();
        let a = b.adjoint();
        for k in -8..8 {
            for s in -8..8 {
                assert_eq!(entry(&a, k, s), entry(&b, s, k).conj());
            }
        }
    }
}

#[test]
fn apply_matches_entries() {
    let b = Corpus::for_case(CorpusConfig::default(), 13, 0).bd();
    let m = b.apply_rect(-3..9, 2..14);
    for (i, k) in (-3..9).enumerate() {
        for (j, s) in (2..14).enumerate() {
            assert_eq!(m.get(i, j), entry(&b, k, s));
        }
    }
}

#[test]
fn toeplitz_truncation_is_compression() {
    for id in 0..20 {
        let a = Corpus::for_case(CorpusConfig::default(), 14, id).bdt();
        let t = a.truncate(16);
        for k in 0..16 {
            for s in 0..16 {
                let want = &entry(a.symbol(), k as i64, s as i64) + &a.compact().get(k, s);
                assert_eq!(t.get(k, s), want);
            }
        }
    }
}

#[test]
fn inverse_of_two_plus_shift_is_geometric() {
    // (2 + V)^{-1} = Σ_k (-1)^k V^k / 2^{k+1}
    let b = BdElement::scalar(s2(), Scalar::from_int(2)).add(&BdElement::shift(s2(), 1));
    let inv = bd_invert_auto(&b, 1e-10).unwrap();
    assert!(inv.residual_bound <= 1e-10);
    for k in 0..30 {
        let want = (-1f64).powi(k as i32) / 2f64.powi(k as i32 + 1);
        assert!((band_value(&inv.value, k) - want).norm() < 1e-10, "band {k}");
    }
    assert!(inv.value.bands().keys().all(|&k| k >= 0));
}

#[test]
fn toeplitz_of_analytic_inverse() {
    // b has only nonnegative bands, so T(b)^{-1} = T(b^{-1}).
    let b = BdElement::scalar(s2(), Scalar::from_int(2)).add(&BdElement::shift(s2(), 1));
    let a = BdtElement::toeplitz(b);
    let inv = bdt_invert(&a, 1e-8, &DEFAULT_INVERT_SIZES).unwrap();
    assert!(inv.residual_bound <= 1e-8);
    let t = inv.value.truncate(24);
    for k in 0..24 {
        for s in 0..24 {
            let want = if k >= s {
                (-1f64).powi((k - s) as i32) / 2f64.powi((k - s) as i32 + 1)
            } else {
                0.0
            };
            assert!((t.get(k, s).to_c64() - want).norm() < 1e-8, "({k}, {s})");
        }
    }
}

fn bessel_j(n: u32, x: f64) -> f64 {
    let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..60 {
        term *= -(x / 2.0).powi(2) / (m as f64 * (m + n) as f64);
        sum += term;
    }
    sum
}

#[test]
fn exponential_of_cosine_is_bessel() {
    // e^{it(z + 1/z)} = Σ_n i^n J_n(2t) z^n
    let t = 0.7;
    let h = BdElement::shift(s2(), 1).add(&BdElement::shift(s2(), -1));
    let e = bd_exp(&h.scale(&Scalar::from_f64(t)), 1e-10, 64).unwrap();
    for n in -12i64..=12 {
        let want = Complex64::new(0.0, 1.0).powi(n.abs() as i32) * bessel_j(n.unsigned_abs() as u32, 2.0 * t);
        assert!((band_value(&e.value, n) - want).norm() < 1e-10, "band {n}");
    }
}

#[test]
fn exponential_of_multiplier() {
    let f = UlcFunction::new(vec![Scalar::ratio(1, 2), Scalar::from_int(-1), Scalar::from_int(3)]);
    let s: Supernatural = "3:inf".parse().unwrap();
    let b = BdElement::multiplier(s, f.clone()).unwrap();
    let e = bd_exp(&b, 1e-12, 8).unwrap();
    let g = e.value.band(0).unwrap();
    for k in 0..3 {
        let x = f.eval(k).to_c64().re;
        let want = Complex64::new(x.cos(), x.sin());
        assert!((g.eval(k).to_c64() - want).norm() < 1e-11);
    }
}

#[test]
fn norms_of_simple_elements() {
    let cosine = BdElement::shift(s2(), 1).add(&BdElement::shift(s2(), -1));
    assert!((cosine.norm(1e-10).unwrap() - 2.0).abs() < 1e-9);
    let f = UlcFunction::from_ints(&[1, -5, 2, 0]);
    let m = BdElement::multiplier(s2(), f).unwrap();
    assert_eq!(m.norm(1e-10).unwrap(), 5.0);
    // 1 + V/2 has symbol 1 + z/2, whose sup is 3/2.
    let b = BdElement::one(s2()).add(&BdElement::shift(s2(), 1).scale(&Scalar::ratio(1, 2)));
    assert!((b.norm(1e-10).unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn fourier_components_by_direct_quadrature() {
    for id in 0..10 {
        let a = Corpus::for_case(CorpusConfig::default(), 15, id).bdt();
        let samples = 2 * a.spread() as usize + 3;
        for n in -(a.spread() as i64)..=a.spread() as i64 {
            let mut avg = SparseMatrix::zeros(12, 12);
            for i in 0..samples {
                let theta = i as f64 / samples as f64;
                let w = Complex64::new(0.0, -2.0 * PI * n as f64 * theta).exp() / samples as f64;
                avg = avg.add(&a.rho(theta).truncate(12).scale(&Scalar::float(w)));
            }
            let diff = avg.sub(&a.fourier(n).to_float().truncate(12));
            assert!(diff.max_abs() < 1e-12, "case {id} n {n}");
        }
    }
}

#[test]
fn index_of_shift_powers() {
    for n in -3i64..=3 {
        let a = BdtElement::toeplitz(BdElement::shift(s2(), n));
        assert_eq!(fredholm_index(&a, &[16, 32, 64], DEFAULT_SVD_THRESHOLD).unwrap().index, -n);
        assert_eq!(winding(&BdElement::shift(s2(), n)).unwrap(), n);
    }
    let u = BdtElement::unilateral_shift(s2());
    let r = fredholm_index(&u, &DEFAULT_SCHEDULE, DEFAULT_SVD_THRESHOLD).unwrap();
    assert_eq!(r.index, -1);
}

#[test]
fn group_membership_examples() {
    let s: Supernatural = "2:inf,3:1".parse().unwrap();
    assert!(!gs_contains(1, 9, &s).unwrap());
    assert!(gs_contains(1, 3, &s).unwrap());
    assert!(gs_contains(7, 96, &s).unwrap());
    assert!(!gs_contains(1, 5, &s).unwrap());
    assert!(gs_contains(10, 5, &s).unwrap());
}
