//! Finite sparse matrices over [`Scalar`], used for truncations on `ℓ²`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::scalar::Scalar;

/// Row-major sparse matrix; absent entries are zero.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<BTreeMap<usize, Scalar>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: vec![BTreeMap::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.rows[i].get(&j).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i < self.nrows && j < self.ncols, "index out of range");
        if v.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, v);
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &Scalar) {
        let cur = self.get(i, j);
        self.set(i, j, &cur + v);
    }

    /// Nonzero entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, v)| (i, j, v)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.iter().all(|(_, _, v)| v.is_exact())
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch");
        let mut out = SparseMatrix::zeros(self.nrows, other.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (&k, a) in row {
                for (&j, b) in &other.rows[k] {
                    let p = a * b;
                    match acc.get_mut(&j) {
                        Some(v) => *v = &*v + &p,
                        None => {
                            acc.insert(j, p);
                        }
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.rows[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &SparseMatrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        let zero = Scalar::zero();
        for (i, j, v) in other.iter() {
            let cur = out.rows[i].get(&j).cloned().unwrap_or_else(Scalar::zero);
            out.set(i, j, f(&cur, v));
        }
        // Entries present only in `self` still need f(a, 0) applied.
        for i in 0..self.nrows {
            let keys: Vec<usize> = self.rows[i].keys().copied().collect();
            for j in keys {
                if !other.rows[i].contains_key(&j) {
                    let v = f(&self.rows[i][&j], &zero);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn scale(&self, z: &Scalar) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            out.set(i, j, v * z);
        }
        out
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.ncols, self.nrows);
        for (i, j, v) in self.iter() {
            out.set(j, i, v.conj());
        }
        out
    }

    /// The block `rows × cols`, re-indexed from zero.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(rows.len(), cols.len());
        for i in rows.clone() {
            for (&j, v) in self.rows[i].range(cols.clone()) {
                out.set(i - rows.start, j - cols.start, v.clone());
            }
        }
        out
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v.to_c64();
        }
        m
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn to_csr(&self) -> Csr {
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.nnz());
        let mut data = Vec::with_capacity(self.nnz());
        indptr.push(0);
        for row in &self.rows {
            for (&j, v) in row {
                indices.push(j);
                data.push(v.to_c64());
            }
            indptr.push(indices.len());
        }
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            data,
        }
    }
}

impl PartialEq for SparseMatrix {
    fn eq(&self, other: &Self) -> bool {
        if (self.nrows, self.ncols) != (other.nrows, other.ncols) {
            return false;
        }
        let zero = Scalar::zero();
        for i in 0..self.nrows {
            for (j, v) in &self.rows[i] {
                if other.rows[i].get(j).unwrap_or(&zero) != v {
                    return false;
                }
            }
            for (j, v) in &other.rows[i] {
                if self.rows[i].get(j).unwrap_or(&zero) != v {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.nrows {
            let row: Vec<String> = (0..self.ncols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Compressed sparse rows over `Complex64`, for iterative float solvers.
#[derive(Clone, Debug)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl Csr {
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.nrows {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[i] = acc;
        }
    }

    /// `y = A^* x`.
    pub fn matvec_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.data[k].conj() * x[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_equality() {
        let mut a = SparseMatrix::zeros(2, 2);
        a.set(0, 1, Scalar::one());
        let mut b = SparseMatrix::zeros(2, 2);
        b.set(1, 0, Scalar::from_int(3));
        let ab = a.mul(&b);
        assert_eq!(ab.get(0, 0), Scalar::from_int(3));
        assert_eq!(ab.nnz(), 1);
        assert_eq!(a.sub(&a).nnz(), 0);
        assert_eq!(a.adjoint().get(1, 0), Scalar::one());
    }

    #[test]
    fn block_reindexes() {
        let mut a = SparseMatrix::zeros(4, 4);
        a.set(2, 3, Scalar::from_int(5));
        let b = a.block(1..4, 2..4);
        assert_eq!(b.get(1, 1), Scalar::from_int(5));
    }
}
