//! Dense and iterative float linear algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::matrix::Csr;

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    if m.iter().all(|z| z.im == 0.0) {
        let r = m.map(|z| z.re);
        let mut s: Vec<f64> = r.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return s;
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn sigma_max(m: &CMatrix) -> f64 {
    match (m.nrows(), m.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, _) | (_, 1) => m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        _ => singular_values(m).first().copied().unwrap_or(0.0),
    }
}

pub fn sigma_min(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Eigen-decomposition of a Hermitian matrix (the strict upper triangle is
/// ignored and replaced by the adjoint of the lower one).
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let mut sym = h.clone();
    for i in 0..n {
        sym[(i, i)] = c(h[(i, i)].re);
        for j in 0..i {
            let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            sym[(i, j)] = v;
            sym[(j, i)] = v.conj();
        }
    }
    let eig = SymmetricEigen::new(sym);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `exp(i t H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let n = h.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (vals, vecs) = hermitian_eigen(h);
    let phases = DVector::from_iterator(n, vals.iter().map(|&l| Complex64::new(0.0, t * l).exp()));
    let scaled = CMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * phases[j]);
    scaled * vecs.adjoint()
}

/// Solves `A X = B`; `None` if `A` is numerically singular.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    a.clone().lu().solve(b)
}

pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().try_inverse()
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A x‖ / ‖x‖`.
pub fn rayleigh_sigma(a: &Csr, x: &[Complex64]) -> f64 {
    let nx = norm(x);
    if nx == 0.0 {
        return 0.0;
    }
    let mut y = vec![c(0.0); a.nrows];
    a.matvec(x, &mut y);
    norm(&y) / nx
}

/// Lower estimate of `σ_max(A)` by Lanczos on `A^*A`.
///
/// Returns the estimate together with the vector realizing it. The estimate
/// is an explicit ratio `‖Ax‖/‖x‖`, hence never above the true `σ_max`. When
/// `start` is supplied the result is at least the ratio of `start` itself.
pub fn lanczos_sigma_max(a: &Csr, start: Option<&[Complex64]>, steps: usize) -> (f64, Vec<Complex64>) {
    let n = a.ncols;
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut v: Vec<Complex64> = match start {
        Some(s) if norm(s) > 0.0 => s.to_vec(),
        _ => (0..n)
            .map(|i| {
                // Deterministic, non-degenerate starting vector.
                let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
                c(1.0 + (t - t.floor()))
            })
            .collect(),
    };
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let start_vec = v.clone();
    let start_val = rayleigh_sigma(a, &start_vec);

    let k_max = steps.min(n).max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k_max);
    let mut alphas = Vec::with_capacity(k_max);
    let mut betas: Vec<f64> = Vec::with_capacity(k_max);
    let mut tmp = vec![c(0.0); a.nrows];
    let mut w = vec![c(0.0); n];
    let mut prev: Option<Vec<Complex64>> = None;
    for _ in 0..k_max {
        a.matvec(&v, &mut tmp);
        a.matvec_adjoint(&tmp, &mut w);
        let alpha = dot(&v, &w).re;
        for i in 0..n {
            w[i] -= v[i] * alpha;
        }
        if let (Some(p), Some(&b)) = (&prev, betas.last()) {
            for i in 0..n {
                w[i] -= p[i] * b;
            }
        }
        // One pass of local reorthogonalization keeps the recurrence honest.
        let proj = dot(&v, &w);
        for i in 0..n {
            w[i] -= v[i] * proj;
        }
        alphas.push(alpha);
        basis.push(v.clone());
        let beta = norm(&w);
        if beta < 1e-14 * alpha.abs().max(1e-300) {
            break;
        }
        betas.push(beta);
        prev = Some(std::mem::replace(&mut v, w.iter().map(|z| z / beta).collect()));
    }
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j || j + 1 == i {
            betas[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (imax, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
    let s = eig.eigenvectors.column(imax);
    let mut y = vec![c(0.0); n];
    for (j, b) in basis.iter().enumerate() {
        let coef = s[j];
        for i in 0..n {
            y[i] += b[i] * coef;
        }
    }
    let val = rayleigh_sigma(a, &y);
    if val >= start_val {
        (val, y)
    } else {
        (start_val, start_vec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMatrix;
    use crate::scalar::Scalar;

    #[test]
    fn expm_of_hermitian_is_unitary() {
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), Complex64::new(0.5, 0.25), Complex64::new(0.5, -0.25), c(-2.0)],
        );
        let u = expm_i_hermitian(&h, 0.7);
        let id = &u * u.adjoint();
        assert!((id - CMatrix::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn lanczos_matches_dense_on_tridiagonal() {
        let n = 200;
        let mut m = SparseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::ratio(1, 3));
            if i + 1 < n {
                m.set(i + 1, i, Scalar::one());
                m.set(i, i + 1, Scalar::one());
            }
        }
        let dense = sigma_max(&m.to_dmatrix());
        let (est, _) = lanczos_sigma_max(&m.to_csr(), None, 200);
        assert!(est <= dense + 1e-12);
        assert!(dense - est < 1e-8, "{dense} vs {est}");
    }
}
