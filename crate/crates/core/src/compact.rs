//! Finite-support matrices on the basis `E_0, E_1, …` of `ℓ²(Z_{≥0})`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::bd::binomial;
use crate::linalg::{sigma_max, CMatrix};
use crate::matrix::SparseMatrix;
use crate::scalar::Scalar;
use crate::ulc::root_of_unity;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CompactMatrix {
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl CompactMatrix {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The matrix unit `P_{ks}`.
    pub fn unit(k: usize, s: usize) -> Self {
        Self::from_entries([((k, s), Scalar::one())])
    }

    /// Builds from entries; repeated positions are summed.
    pub fn from_entries(entries: impl IntoIterator<Item = ((usize, usize), Scalar)>) -> Self {
        let mut out = Self::zero();
        for (pos, v) in entries {
            out.add_at(pos.0, pos.1, &v);
        }
        out
    }

    pub fn get(&self, k: usize, s: usize) -> Scalar {
        self.entries.get(&(k, s)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_at(&mut self, k: usize, s: usize, v: &Scalar) {
        if v.is_zero() {
            return;
        }
        let cur = self.entries.remove(&(k, s));
        let nv = match cur {
            Some(c) => &c + v,
            None => v.clone(),
        };
        if !nv.is_zero() {
            self.entries.insert((k, s), nv);
        }
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), Scalar> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.values().all(Scalar::is_exact)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `(1 + max row, 1 + max column)`, `(0, 0)` for the zero matrix.
    pub fn shape(&self) -> (usize, usize) {
        self.entries
            .keys()
            .fold((0, 0), |(r, c), &(k, s)| (r.max(k + 1), c.max(s + 1)))
    }

    /// Smallest `n` such that the support lies in `[0, n)²`.
    pub fn extent(&self) -> usize {
        let (r, c) = self.shape();
        r.max(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(k, s), v) in &other.entries {
            out.add_at(k, s, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|_, _, v| -v)
    }

    pub fn scale(&self, z: &Scalar) -> Self {
        self.map(|_, _, v| v * z)
    }

    fn map(&self, f: impl Fn(usize, usize, &Scalar) -> Scalar) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&(k, s), v)| ((k, s), f(k, s, v)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Self { entries }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut by_row: BTreeMap<usize, Vec<(usize, &Scalar)>> = BTreeMap::new();
        for (&(r, t), v) in &other.entries {
            by_row.entry(r).or_default().push((t, v));
        }
        let mut out = Self::zero();
        for (&(k, s), a) in &self.entries {
            if let Some(row) = by_row.get(&s) {
                for &(t, b) in row {
                    out.add_at(k, t, &(a * b));
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let entries = self.entries.iter().map(|(&(k, s), v)| ((s, k), v.conj())).collect();
        Self { entries }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    /// `d_K(c) = [K, c]`: entry `(k, s)` times `k - s`.
    pub fn d_k(&self) -> Self {
        self.map(|k, s, v| v * &Scalar::from_int(k as i64 - s as i64))
    }

    pub fn d_k_pow(&self, j: u32) -> Self {
        (0..j).fold(self.clone(), |c, _| c.d_k())
    }

    /// Entry `(k, s)` times `(k - s)^j (1 + s)^n`, weights formed exactly.
    pub fn weighted(&self, j: u32, n: u32) -> Self {
        self.map(|k, s, v| {
            let w = BigInt::from(k as i64 - s as i64).pow(j) * BigInt::from(1 + s as u64).pow(n);
            match v {
                Scalar::Exact(_) => v * &Scalar::real(BigRational::from_integer(w)),
                Scalar::Float(z) => {
                    let wf = crate::scalar::ratio_to_f64(&BigRational::from_integer(w));
                    Scalar::float(z * wf)
                }
            }
        })
    }

    /// Operator norm, from the dense bounding block.
    pub fn op_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        sigma_max(&self.to_dense())
    }

    /// `‖c‖_{M,N} = Σ_j C(M,j) ‖d_K^j(c)(I+K)^N‖`.
    pub fn mn_norm(&self, m: u32, n: u32) -> f64 {
        (0..=m)
            .map(|j| binomial(m, j) as f64 * self.weighted(j, n).op_norm())
            .sum()
    }

    /// `ρ_θ`: entry `(k, s)` times `e^{2πi(k-s)θ}`.
    pub fn rho(&self, theta: f64) -> Self {
        self.map(|k, s, v| {
            let a = 2.0 * std::f64::consts::PI * theta * (k as f64 - s as f64);
            v * &Scalar::float(Complex64::new(a.cos(), a.sin()))
        })
    }

    /// `ρ_{p/q}` with phases from [`root_of_unity`].
    pub fn rho_rational(&self, p: i64, q: u64) -> Self {
        self.map(|k, s, v| {
            let t = ((k as i64 - s as i64) * p).rem_euclid(q as i64) as u64;
            v * &root_of_unity(t, q)
        })
    }

    /// The `n`-th diagonal `{(k, s) : k - s = n}`.
    pub fn fourier(&self, n: i64) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(&(k, s), _)| k as i64 - s as i64 == n)
            .map(|(&p, v)| (p, v.clone()))
            .collect();
        Self { entries }
    }

    /// Diagonal numbers `k - s` present in the support.
    pub fn diagonals(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.entries.keys().map(|&(k, s)| k as i64 - s as i64).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Dense bounding block.
    pub fn to_dense(&self) -> CMatrix {
        let (r, c) = self.shape();
        let mut m = CMatrix::zeros(r, c);
        for (&(k, s), v) in &self.entries {
            m[(k, s)] = v.to_c64();
        }
        m
    }

    /// The compression to `[0, n)²`.
    pub fn truncate(&self, n: usize) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(n, n);
        for (&(k, s), v) in self.entries.range((0, 0)..(n, 0)) {
            if s < n {
                m.set(k, s, v.clone());
            }
        }
        m
    }

    /// Reads back a finite matrix as a compact operator.
    pub fn from_sparse(m: &SparseMatrix) -> Self {
        Self::from_entries(m.iter().map(|(i, j, v)| ((i, j), v.clone())))
    }

    pub fn to_float(&self) -> Self {
        self.map(|_, _, v| v.to_float())
    }

    /// Frobenius norm, an upper bound for the operator norm.
    pub fn frobenius(&self) -> f64 {
        self.entries.values().map(|v| v.abs().powi(2)).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(Scalar::abs).fold(0.0, f64::max)
    }
}

impl fmt::Display for CompactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .entries
            .iter()
            .map(|((k, s), v)| format!("({v}) P[{k},{s}]"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

pub fn k_units(k: usize, s: usize) -> CompactMatrix {
    CompactMatrix::unit(k, s)
}

#[derive(Clone, Debug)]
pub enum KOp<'a> {
    Add(&'a CompactMatrix),
    Mul(&'a CompactMatrix),
    Adjoint,
    Scale(Scalar),
}

pub fn k_algebra(c: &CompactMatrix, op: KOp<'_>) -> CompactMatrix {
    match op {
        KOp::Add(d) => c.add(d),
        KOp::Mul(d) => c.mul(d),
        KOp::Adjoint => c.adjoint(),
        KOp::Scale(z) => c.scale(&z),
    }
}

pub fn k_dk(c: &CompactMatrix) -> CompactMatrix {
    c.d_k()
}

pub fn k_mn_norm(c: &CompactMatrix, m: u32, n: u32) -> f64 {
    c.mn_norm(m, n)
}

pub fn k_rho(c: &CompactMatrix, theta: f64) -> CompactMatrix {
    c.rho(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_unit_relations() {
        assert_eq!(k_units(0, 1).mul(&k_units(1, 2)), k_units(0, 2));
        assert!(k_units(0, 1).mul(&k_units(0, 2)).is_zero());
        assert_eq!(k_units(3, 5).adjoint(), k_units(5, 3));
    }

    #[test]
    fn algebra_examples() {
        let c = CompactMatrix::from_entries([((0, 1), Scalar::ratio(1, 2)), ((2, 0), Scalar::i())]);
        assert!(k_algebra(&c, KOp::Add(&c.scale(&Scalar::from_int(-1)))).is_zero());
        assert_eq!(c.adjoint().adjoint(), c);
    }

    #[test]
    fn d_k_examples() {
        assert!(k_units(4, 4).d_k().is_zero());
        assert_eq!(k_units(1, 0).d_k(), k_units(1, 0));
        assert_eq!(k_units(0, 3).d_k(), k_units(0, 3).scale(&Scalar::from_int(-3)));
    }

    #[test]
    fn mn_norm_examples() {
        assert_eq!(k_units(0, 0).mn_norm(3, 2), 1.0);
        assert_eq!(k_units(0, 4).mn_norm(0, 3), 125.0);
        let c = CompactMatrix::from_entries([((2, 0), Scalar::one()), ((0, 1), Scalar::from_int(3))]);
        let lhs = c.mn_norm(2, 1);
        let rhs = c.mn_norm(1, 1) + c.d_k().mn_norm(1, 1);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn rho_examples() {
        let d = CompactMatrix::from_entries([((2, 2), Scalar::from_int(7))]);
        assert_eq!(d.rho(0.37), d);
        assert_eq!(k_units(1, 0).rho_rational(1, 2), k_units(1, 0).neg());
        assert_eq!(k_units(1, 0).rho(0.5), k_units(1, 0).neg());
    }

    #[test]
    fn fourier_reads_diagonals() {
        let c = CompactMatrix::from_entries([((2, 0), Scalar::one()), ((0, 1), Scalar::from_int(3))]);
        assert_eq!(c.fourier(2), k_units(2, 0));
        assert_eq!(c.diagonals(), vec![-1, 2]);
    }
}
