//! Exact averages over roots of unity.
//!
//! Fourier components are extracted by averaging automorphisms over the
//! `q`-th roots of unity. The averages are evaluated in `Z[x]/Φ_q(x)`, so
//! the quadrature stays exact without ever leaving the rationals.

use std::collections::HashMap;
use std::sync::Mutex;

/// Integer coefficients of the `q`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(q: u64) -> Vec<i64> {
    assert!(q >= 1);
    static CACHE: Mutex<Option<HashMap<u64, Vec<i64>>>> = Mutex::new(None);
    if let Some(p) = CACHE.lock().unwrap().get_or_insert_with(HashMap::new).get(&q) {
        return p.clone();
    }
    // x^q - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; q as usize + 1];
    num[0] = -1;
    num[q as usize] = 1;
    for d in 1..q {
        if q % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    CACHE
        .lock()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .insert(q, num.clone());
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let (quot, rem) = poly_divmod(num, den);
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

/// Division by a monic integer polynomial.
fn poly_divmod(num: &[i64], den: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        return (vec![0], rem);
    }
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c == 0 {
            continue;
        }
        quot[i - dd] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i - dd + j] -= c * dj;
        }
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

/// Reduces `Σ_t counts[t] x^t` modulo `Φ_q`.
pub fn reduce_mod_cyclotomic(counts: &[i64], q: u64) -> Vec<i64> {
    let phi = cyclotomic_poly(q);
    poly_divmod(counts, &phi).1
}

/// `Σ_{j=0}^{q-1} ζ_q^{k j}` evaluated exactly: the polynomial
/// `Σ_j x^{kj mod q}` is reduced modulo `Φ_q`, and the remainder must be a
/// constant integer (0 or q).
pub fn root_sum(q: u64, k: i64) -> i64 {
    let mut counts = vec![0i64; q as usize];
    for j in 0..q as i64 {
        counts[(k * j).rem_euclid(q as i64) as usize] += 1;
    }
    let rem = reduce_mod_cyclotomic(&counts, q);
    assert!(
        rem.iter().skip(1).all(|&c| c == 0),
        "root-of-unity sum did not reduce to an integer"
    );
    rem[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn root_sums_are_orthogonality() {
        for q in 1..40u64 {
            for k in -50..50i64 {
                let expect = if k.rem_euclid(q as i64) == 0 { q as i64 } else { 0 };
                assert_eq!(root_sum(q, k), expect, "q={q} k={k}");
            }
        }
    }
}
