//! Algebraic laws on random elements.

use bdtk::arith::{embed_int, odometer, Residue, Supernatural};
use bdtk::bd::BdElement;
use bdtk::bdt::{correction, BdtElement};
use bdtk::compact::CompactMatrix;
use bdtk::corpus::{Corpus, CorpusConfig};
use bdtk::json::{self, Json};
use proptest::prelude::*;

fn corpus(seed: u64) -> Corpus {
    Corpus::for_case(CorpusConfig::default(), seed, 0)
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn bd_product_is_associative(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b, c) = (g.bd(), g.bd(), g.bd());
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn bd_product_distributes(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b, c) = (g.bd(), g.bd(), g.bd());
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn bd_adjoint_reverses_products(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.bd(), g.bd());
        prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn delta_is_a_derivation(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.bd(), g.bd());
        let lhs = a.mul(&b).delta_l();
        let rhs = a.delta_l().mul(&b).add(&a.mul(&b.delta_l()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rational_phases_are_automorphisms(seed in any::<u64>(), p in -20i64..20, q in 1u64..13) {
        let mut g = corpus(seed);
        let (a, b) = (g.bd(), g.bd());
        let r = |x: &BdElement| x.rho_rational(p, q).unwrap();
        prop_assert_eq!(r(&a.mul(&b)), r(&a).mul(&r(&b)));
        prop_assert_eq!(r(&a.adjoint()), r(&a).adjoint());
    }

    #[test]
    fn bdt_product_is_associative(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b, c) = (g.bdt(), g.bdt(), g.bdt());
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn bdt_adjoint_reverses_products(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.bdt(), g.bdt());
        prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
    }

    #[test]
    fn quotient_is_a_homomorphism(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.bdt(), g.bdt());
        prop_assert_eq!(a.mul(&b).tau().clone(), a.tau().mul(b.tau()));
        prop_assert_eq!(a.adjoint().tau().clone(), a.tau().adjoint());
    }

    #[test]
    fn d_k_is_a_derivation(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.compact(), g.compact());
        prop_assert_eq!(a.mul(&b).d_k(), a.d_k().mul(&b).add(&a.mul(&b.d_k())));
    }

    #[test]
    fn correction_vanishes_for_one_sided_factors(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.bd(), g.bd());
        prop_assert!(correction(&a.restrict(..0), &b).is_zero());
        prop_assert!(correction(&a, &b.restrict(0..)).is_zero());
    }

    #[test]
    fn truncation_is_linear(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.bdt(), g.bdt());
        prop_assert_eq!(a.add(&b).truncate(10), a.truncate(10).add(&b.truncate(10)));
    }

    #[test]
    fn compact_products_match_dense(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let (a, b) = (g.compact(), g.compact());
        let n = 8;
        let dense = a.to_float().truncate(n).to_dmatrix() * b.to_float().truncate(n).to_dmatrix();
        let ours = a.mul(&b).to_float().truncate(n).to_dmatrix();
        prop_assert!((dense - ours).norm() < 1e-9);
    }

    #[test]
    fn bloch_norm_dominates_truncations(seed in any::<u64>()) {
        let b = corpus(seed).bd();
        let n = b.norm(1e-8).unwrap();
        let dense = b.to_float().apply(-20..20).to_dmatrix();
        let top = dense.singular_values().max();
        prop_assert!(top <= n + 1e-8, "{} > {}", top, n);
    }

    #[test]
    fn json_round_trips(seed in any::<u64>()) {
        let mut g = corpus(seed);
        let a = g.bdt();
        let back = BdtElement::from_json(&json::parse(&json::to_string(&a.to_json())).unwrap()).unwrap();
        prop_assert_eq!(back, a);
        let c = g.compact();
        let back = CompactMatrix::from_json(&json::parse(&json::to_string(&c.to_json())).unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn odometer_is_addition(k in -1000i64..1000, m in -1000i64..1000, e in 0u32..8) {
        let l = 2u64.pow(e) * 3;
        prop_assert_eq!(odometer(embed_int(k, l), m), embed_int(k + m, l));
    }

    #[test]
    fn residues_reduce_to_the_same_class(v in 0u64..10_000, e in 1u32..6) {
        let l = 2u64.pow(e);
        let x = Residue::new(v % l, l).unwrap();
        prop_assert_eq!(x.value(), v % l);
        prop_assert_eq!(embed_int(v as i64, l), x);
    }

    #[test]
    fn divisors_divide(e2 in 0u32..4, e3 in 0u32..3) {
        let s = Supernatural::from_natural(2u64.pow(e2) * 3u64.pow(e3));
        for d in s.divisors_up_to(200) {
            prop_assert_eq!((2u64.pow(e2) * 3u64.pow(e3)) % d, 0);
        }
    }
}
