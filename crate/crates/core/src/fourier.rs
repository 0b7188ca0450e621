//! Exact roots-of-unity quadrature for Fourier components.
//!
//! For a band-limited element `x = Σ_m x_m` whose components transform as
//! `ρ_θ(x_m) = e^{2πimθ} x_m`, averaging `e^{-2πinθ_j} ρ_{θ_j}(x)` over the
//! `q`-th roots of unity returns `Σ_{m ≡ n (q)} x_m`. The phase sums are
//! evaluated in the cyclotomic ring, so no rounding occurs.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::cyclo::root_sum;
use crate::scalar::Scalar;

/// Something that can be scaled and summed.
pub trait Linear: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&self, other: &Self, z: &Scalar) -> Self;
}

/// `(1/q) Σ_{j<q} Σ_t ζ_q^{k_t j} x_t` for phase-indexed terms `(k_t, x_t)`.
///
/// Returns `None` when `terms` is empty.
pub fn average_over_roots<T: Linear>(q: u64, terms: &[(i64, T)]) -> Option<T> {
    let first = terms.first()?;
    let mut acc = first.1.zero_like();
    for (k, x) in terms {
        let s = root_sum(q, *k);
        if s == 0 {
            continue;
        }
        let w = Scalar::real(BigRational::new(BigInt::from(s), BigInt::from(q)));
        acc = acc.add_scaled(x, &w);
    }
    Some(acc)
}

/// Quadrature order resolving phases in `[-spread, spread]` without aliasing.
pub fn order_for_spread(spread: u64) -> u64 {
    2 * spread + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    impl Linear for Scalar {
        fn zero_like(&self) -> Self {
            Scalar::zero()
        }
        fn add_scaled(&self, other: &Self, z: &Scalar) -> Self {
            self + &(other * z)
        }
    }

    #[test]
    fn picks_the_resonant_term() {
        let q = order_for_spread(3);
        let terms: Vec<(i64, Scalar)> = (-3..=3).map(|k| (k, Scalar::from_int(10 + k))).collect();
        // Only the k = 0 term survives; it carries the value 10.
        assert_eq!(average_over_roots(q, &terms), Some(Scalar::from_int(10)));
    }
}
