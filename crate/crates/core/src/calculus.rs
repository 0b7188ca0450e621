//! Certified inverses, exponentials and smooth functional calculus.
//!
//! Every approximate result carries `residual_bound`, an upper bound on the
//! operator-norm distance to the exact answer. Bounds are float-level: norms
//! come from [`crate::symbol`] enclosures plus explicit rounding slack.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::Supernatural;
use crate::bd::{binomial, BdElement};
use crate::bdt::BdtElement;
use crate::compact::CompactMatrix;
use crate::error::{Error, Result};
use crate::fourier::Linear;
use crate::linalg::{expm_i_hermitian, inverse, sigma_max, CMatrix};
use crate::scalar::Scalar;
use crate::ulc::UlcFunction;

/// An approximation together with a bound on its distance to the target.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedElement<T> {
    pub value: T,
    pub residual_bound: f64,
    pub method: String,
}

impl<T> CertifiedElement<T> {
    pub fn new(value: T, residual_bound: f64, method: &str) -> Self {
        Self {
            value,
            residual_bound,
            method: method.to_string(),
        }
    }
}

/// Rounding slack attached to one float product of elements of the given sizes.
fn product_slack(a: f64, b: f64, terms: usize) -> f64 {
    64.0 * f64::EPSILON * a * b * (terms.max(1) as f64)
}

const MAX_SYMBOL_SAMPLES: usize = 1 << 18;

/// Samples a matrix function of the symbol on `Q` equispaced points and reads
/// off bands `|n| ≤ max_band` by a discrete Fourier transform.
fn bands_from_samples(s: &Supernatural, l: usize, samples: &[CMatrix], max_band: i64, drop_below: f64) -> BdElement {
    let q = samples.len();
    let li = l as i64;
    let kmax = max_band.div_euclid(li) + 2;
    let coeff: BTreeMap<i64, CMatrix> = (-kmax..=kmax)
        .into_par_iter()
        .map(|k| {
            let mut acc = CMatrix::zeros(l, l);
            for (j, m) in samples.iter().enumerate() {
                let a = -2.0 * PI * ((k * j as i64).rem_euclid(q as i64)) as f64 / q as f64;
                acc += m * Complex64::new(a.cos(), a.sin());
            }
            (k, acc / Complex64::new(q as f64, 0.0))
        })
        .collect();
    let mut bands = Vec::new();
    for n in -max_band..=max_band {
        let vals: Vec<Scalar> = (0..li)
            .map(|r| {
                let t = r + n;
                let k = t.div_euclid(li);
                let row = t.rem_euclid(li) as usize;
                Scalar::float(coeff[&k][(row, r as usize)])
            })
            .collect();
        let f = UlcFunction::new(vals);
        if f.sup_norm() >= drop_below && !f.is_zero() {
            bands.push((n, f));
        }
    }
    BdElement::new(s.clone(), bands).expect("period divides S")
}

fn sample_count(l: usize, max_band: i64) -> usize {
    let k = max_band / l as i64 + 2;
    (8 * k as usize).max(64).next_power_of_two()
}

fn grid(q: usize) -> Vec<f64> {
    (0..q).map(|j| j as f64 / q as f64).collect()
}

/// Certified upper bound on `‖b‖`.
fn norm_upper(b: &BdElement, tol: f64) -> Result<f64> {
    Ok(b.norm_bounds(tol)?.upper)
}

/// Exact inverse of a single band `V^n m_f` with `f` nowhere zero.
fn monomial_inverse(b: &BdElement) -> Option<BdElement> {
    if b.bands().len() != 1 {
        return None;
    }
    let (&n, f) = b.bands().iter().next().unwrap();
    let g = f.recip()?;
    BdElement::monomial(b.s().clone(), -n, g.shift(-n)).ok()
}

/// `‖b b̃ - 1‖` with rounding slack.
fn inverse_defect(b: &BdElement, approx: &BdElement, tol: f64) -> Result<f64> {
    let one = BdElement::one(b.s().clone());
    let r = b.mul(approx).sub(&one);
    let slack = if r.is_exact() {
        0.0
    } else {
        product_slack(b.l1_norm(), approx.l1_norm(), b.bands().len() * approx.bands().len())
    };
    Ok(norm_upper(&r, tol)? + slack)
}

/// Approximate inverse of `b`, by inverting the Bloch symbol on a grid.
///
/// Fails with `NotInvertible` when `σ_min` of the symbol cannot be certified
/// away from zero, and with `ToleranceUnreachable` when the bands up to
/// `max_band` do not reach `tol`.
pub fn bd_invert(b: &BdElement, tol: f64, max_band: u64) -> Result<CertifiedElement<BdElement>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if b.is_zero() {
        return Err(Error::NotInvertible("zero element".into()));
    }
    if let Some(inv) = monomial_inverse(b) {
        let r = if inv.is_exact() { 0.0 } else { inverse_defect(b, &inv, tol * 1e-3)? };
        return finish_inverse(inv, r, tol, "monomial");
    }
    let sym = b.symbol();
    if sym.inf_sigma_min(MAX_SYMBOL_SAMPLES).is_none() {
        return Err(Error::NotInvertible("symbol singular values not bounded away from zero".into()));
    }
    let l = sym.period();
    let mb = max_band as i64;
    let q = sample_count(l, mb);
    let samples: Option<Vec<CMatrix>> = grid(q).into_par_iter().map(|t| inverse(&sym.eval(t))).collect();
    let samples = samples.ok_or_else(|| Error::NotInvertible("symbol singular on the grid".into()))?;
    let drop = tol / (4.0 * max_band.max(1) as f64);
    let approx = bands_from_samples(b.s(), l, &samples, mb, drop);
    let r = inverse_defect(b, &approx, (tol * 1e-3).max(1e-15))?;
    finish_inverse(approx, r, tol, "symbol-grid inversion")
}

fn finish_inverse(approx: BdElement, r: f64, tol: f64, method: &str) -> Result<CertifiedElement<BdElement>> {
    if r >= 1.0 {
        return Err(Error::ToleranceUnreachable(format!("inverse defect {r} is not below 1")));
    }
    let bound = if r == 0.0 {
        0.0
    } else {
        norm_upper(&approx, 1e-9)? * r / (1.0 - r)
    };
    if bound > tol {
        return Err(Error::ToleranceUnreachable(format!(
            "certified inverse error {bound} exceeds {tol}"
        )));
    }
    Ok(CertifiedElement::new(approx, bound, method))
}

/// [`bd_invert`] with the band limit doubled until the tolerance is met.
pub fn bd_invert_auto(b: &BdElement, tol: f64) -> Result<CertifiedElement<BdElement>> {
    let mut mb = 16u64.max(2 * b.bandwidth());
    loop {
        match bd_invert(b, tol, mb) {
            Err(Error::ToleranceUnreachable(msg)) => {
                if mb >= 4096 {
                    return Err(Error::ToleranceUnreachable(msg));
                }
                mb *= 2;
            }
            other => return other,
        }
    }
}

/// Operator-norm upper bound for `T(y) + d`.
pub fn bdt_norm_upper(a: &BdtElement, tol: f64) -> Result<f64> {
    Ok(norm_upper(a.symbol(), tol)? + a.compact().op_norm() * (1.0 + 1e-12))
}

/// Default truncation schedule for [`bdt_invert`].
pub const DEFAULT_INVERT_SIZES: [usize; 4] = [32, 64, 128, 256];

/// Approximate inverse of `a = T(b) + c` as `T(b̃) + c̃`.
///
/// `b̃` inverts `τ(a)`; `c̃` solves `a c̃ = 1 - a T(b̃)` in least squares on
/// rectangular sections, which see the exact action of `a` on vectors
/// supported in `[0, N)`. Both `a x - 1` and `x a - 1` are then evaluated
/// in the algebra; when both are below 1 the element is invertible and the
/// distance of `x` to `a^{-1}` is at most `‖x‖ ρ/(1 - ρ)`.
pub fn bdt_invert(a: &BdtElement, tol: f64, sizes: &[usize]) -> Result<CertifiedElement<BdtElement>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if sizes.is_empty() {
        return Err(Error::InvalidInput("empty size schedule".into()));
    }
    let binv = bd_invert_auto(a.tau(), (tol * 1e-2).min(1e-10)).map_err(|e| match e {
        Error::NotInvertible(m) => Error::NotInvertible(format!("quotient not invertible: {m}")),
        other => other,
    })?;
    let s = a.s().clone();
    let one = BdtElement::one(s.clone());
    let x0 = BdtElement::toeplitz(binv.value.clone());
    let rhs = one.sub(&a.mul(&x0)).compact().clone();
    let bw = a.symbol().bandwidth() as usize;
    let mut best: Option<f64> = None;
    for &n in sizes {
        let n = n.max(rhs.extent()).max(a.compact().extent());
        let rows = n + bw + a.compact().extent();
        let x = if rhs.is_zero() {
            x0.clone()
        } else {
            let am = a.truncate_rect(0..rows, 0..n).to_dmatrix();
            let (rr, rc) = rhs.shape();
            let mut r = CMatrix::zeros(rows, rc);
            for (&(k, j), v) in rhs.entries() {
                if k < rows {
                    r[(k, j)] = v.to_c64();
                }
            }
            debug_assert!(rr <= rows);
            let sol = am
                .svd(true, true)
                .solve(&r, 1e-14)
                .map_err(|e| Error::Unstable(e.to_string()))?;
            let mut c = CompactMatrix::zero();
            for i in 0..sol.nrows() {
                for j in 0..sol.ncols() {
                    let z = sol[(i, j)];
                    if z.norm() > 1e-300 {
                        c.add_at(i, j, &Scalar::float(z));
                    }
                }
            }
            x0.add_compact(&c)
        };
        let ntol = (tol * 1e-3).max(1e-15);
        let right = bdt_norm_upper(&a.mul(&x).sub(&one), ntol)?;
        let left = bdt_norm_upper(&x.mul(a).sub(&one), ntol)?;
        let slack = product_slack(
            a.symbol().l1_norm() + a.compact().frobenius(),
            x.symbol().l1_norm() + x.compact().frobenius(),
            (a.symbol().bands().len() + 1) * (x.symbol().bands().len() + x.compact().nnz() + 1),
        );
        let (rho_r, rho_l) = (right + slack, left + slack);
        if rho_r < 1.0 && rho_l < 1.0 {
            let dist = bdt_norm_upper(&x, 1e-9)? * rho_r / (1.0 - rho_r);
            if dist <= tol {
                return Ok(CertifiedElement::new(x, dist, "quotient inverse plus sectional least squares"));
            }
            best = Some(best.map_or(dist, |b| b.min(dist)));
        }
    }
    match best {
        Some(d) => Err(Error::ToleranceUnreachable(format!(
            "best certified inverse error {d} exceeds {tol}"
        ))),
        None => Err(Error::NotInvertible(
            "left or right defect does not drop below 1 on any section".into(),
        )),
    }
}

/// Elements that can be multiplied, bounded and pruned.
pub trait Banded: Linear {
    fn unit_like(&self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Cheap upper bound for the operator norm.
    fn cheap_norm(&self) -> f64;
    /// Number of stored terms, for rounding estimates.
    fn terms(&self) -> usize;
    /// Drops the smallest terms while their total norm stays within
    /// `budget`; returns the pruned element and the dropped norm.
    fn prune(&self, budget: f64) -> (Self, f64);
}

fn prune_bands(b: &BdElement, budget: f64) -> (BdElement, f64) {
    let mut by_size: Vec<(f64, i64)> = b.bands().iter().map(|(&n, f)| (f.sup_norm(), n)).collect();
    by_size.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut dropped = 0.0;
    let mut drop_set = Vec::new();
    for (sz, n) in by_size {
        if dropped + sz > budget {
            break;
        }
        dropped += sz;
        drop_set.push(n);
    }
    if drop_set.is_empty() {
        return (b.clone(), 0.0);
    }
    let kept = b
        .bands()
        .iter()
        .filter(|(n, _)| !drop_set.contains(n))
        .map(|(&n, f)| (n, f.clone()));
    (BdElement::new(b.s().clone(), kept).expect("same periods"), dropped)
}

impl Banded for BdElement {
    fn unit_like(&self) -> Self {
        BdElement::one(self.s().clone())
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn cheap_norm(&self) -> f64 {
        self.l1_norm()
    }
    fn terms(&self) -> usize {
        self.bands().len()
    }
    fn prune(&self, budget: f64) -> (Self, f64) {
        prune_bands(self, budget)
    }
}

impl Banded for BdtElement {
    fn unit_like(&self) -> Self {
        BdtElement::one(self.s().clone())
    }
    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn cheap_norm(&self) -> f64 {
        self.symbol().l1_norm() + self.compact().frobenius()
    }
    fn terms(&self) -> usize {
        self.symbol().bands().len() + self.compact().nnz()
    }
    fn prune(&self, budget: f64) -> (Self, f64) {
        let (b, db) = prune_bands(self.symbol(), budget / 2.0);
        let mut entries: Vec<((usize, usize), f64)> =
            self.compact().entries().iter().map(|(&p, v)| (p, v.abs())).collect();
        entries.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
        let mut sq = 0.0;
        let mut drop = std::collections::BTreeSet::new();
        for (p, a) in entries {
            if (sq + a * a).sqrt() > budget / 2.0 {
                break;
            }
            sq += a * a;
            drop.insert(p);
        }
        let c = CompactMatrix::from_entries(
            self.compact()
                .entries()
                .iter()
                .filter(|(p, _)| !drop.contains(p))
                .map(|(&p, v)| (p, v.clone())),
        );
        (BdtElement::new(b, c), db + sq.sqrt())
    }
}

const TAYLOR_TERMS: u32 = 16;

/// `e^{ia}` by a Taylor polynomial of `ia/2^s` followed by `s` squarings,
/// with pruning. Returns the result and a bound on its distance to `e^{ia}`,
/// valid whenever `e^{ia}` is unitary (self-adjoint `a`).
pub fn exp_i_scaling_squaring<A: Banded>(a: &A, tol: f64) -> (A, f64) {
    let nrm = a.cheap_norm();
    let mut s = 0u32;
    while nrm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let scale = 2f64.powi(s as i32);
    let z = a.scale_by(&Scalar::float(Complex64::new(0.0, 1.0 / scale)));
    let zn = nrm / scale;
    let amplification = 2f64.powi(s as i32);
    let taylor_budget = tol / (4.0 * amplification * TAYLOR_TERMS as f64);
    let mut eps = 0.0;
    let mut term = a.unit_like();
    let mut x = a.unit_like();
    for k in 1..=TAYLOR_TERMS {
        let t = term.times(&z);
        eps += product_slack(term.cheap_norm(), zn, t.terms());
        let t = t.scale_by(&Scalar::from_f64(1.0 / k as f64));
        let (t, d) = t.prune(taylor_budget);
        eps += d;
        x = x.add_scaled(&t, &Scalar::one());
        term = t;
    }
    // Remainder of the exponential series for ‖z‖ ≤ 1/2.
    let mut fact = 1.0;
    for k in 1..=TAYLOR_TERMS + 1 {
        fact *= k as f64;
    }
    eps += 2.0 * zn.powi(TAYLOR_TERMS as i32 + 1) / fact;
    for j in 0..s {
        let xn = x.cheap_norm().min(1.0 + eps);
        let sq = x.times(&x);
        eps = (xn + 1.0) * eps + product_slack(x.cheap_norm(), x.cheap_norm(), sq.terms());
        let budget = tol / (4.0 * (s as f64 + 1.0) * 2f64.powi((s - j) as i32 - 1));
        let (p, d) = sq.prune(budget);
        eps += d;
        x = p;
    }
    (x, eps)
}

/// Scaling by a scalar, for any [`Banded`] element.
pub trait ScaleBy {
    fn scale_by(&self, z: &Scalar) -> Self;
}

impl<T: Linear> ScaleBy for T {
    fn scale_by(&self, z: &Scalar) -> Self {
        self.zero_like().add_scaled(self, z)
    }
}

/// Approximate `e^{ib}` for self-adjoint `b`.
///
/// The value comes from exponentiating the Hermitian symbol on a grid and
/// transforming back to bands `|n| ≤ max_band`; it is certified against an
/// independent scaling-and-squaring evaluation in the algebra.
pub fn bd_exp(b: &BdElement, tol: f64, max_band: u64) -> Result<CertifiedElement<BdElement>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !b.is_self_adjoint() {
        return Err(Error::InvalidInput("exponential requires a self-adjoint element".into()));
    }
    let s = b.s().clone();
    if b.is_zero() {
        return Ok(CertifiedElement::new(BdElement::one(s), 0.0, "exact"));
    }
    if b.bands().keys().all(|&n| n == 0) {
        let f = b.fourier(0);
        let g = f.map(|v| {
            let x = v.to_c64().re;
            Scalar::float(Complex64::new(x.cos(), x.sin()))
        });
        let v = BdElement::multiplier(s, g)?;
        return Ok(CertifiedElement::new(v, 4.0 * f64::EPSILON * (1.0 + f.sup_norm()), "pointwise"));
    }
    let sym = b.symbol();
    let l = sym.period();
    let mb = max_band as i64;
    let q = sample_count(l, mb);
    let samples: Vec<CMatrix> = grid(q)
        .into_par_iter()
        .map(|t| expm_i_hermitian(&sym.eval(t), 1.0))
        .collect();
    let drop = tol / (4.0 * max_band.max(1) as f64);
    let approx = bands_from_samples(&s, l, &samples, mb, drop);
    let (reference, eps) = exp_i_scaling_squaring(b, tol / 4.0);
    let diff = approx.sub(&reference);
    let slack = 1e3 * f64::EPSILON * (diff.bands().len() as f64 + 1.0);
    let bound = norm_upper(&diff, tol / 4.0)? + eps + slack;
    if bound > tol {
        return Err(Error::ToleranceUnreachable(format!(
            "certified exponential error {bound} exceeds {tol}"
        )));
    }
    Ok(CertifiedElement::new(approx, bound, "symbol-grid exponential"))
}

/// `e^{ia}` for self-adjoint `a = T(b) + c`, computed in the algebra.
///
/// The symbol of the result approximates `e^{ib}` and the remainder is a
/// finite matrix, as the Duhamel expansion predicts.
pub fn bdt_exp(a: &BdtElement, tol: f64) -> Result<CertifiedElement<BdtElement>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !a.is_self_adjoint() {
        return Err(Error::InvalidInput("exponential requires a self-adjoint element".into()));
    }
    if a.is_zero() {
        return Ok(CertifiedElement::new(BdtElement::one(a.s().clone()), 0.0, "exact"));
    }
    let (x, eps) = exp_i_scaling_squaring(a, tol);
    if eps > tol {
        return Err(Error::ToleranceUnreachable(format!(
            "certified exponential error {eps} exceeds {tol}"
        )));
    }
    Ok(CertifiedElement::new(x, eps, "scaling and squaring"))
}

/// `e^{ic} = I + (e^{iC} - I)` on the support block of a self-adjoint `c`.
pub fn k_exp(s: &Supernatural, c: &CompactMatrix) -> Result<BdtElement> {
    if !c.is_self_adjoint() {
        return Err(Error::InvalidInput("exponential requires a self-adjoint matrix".into()));
    }
    let n = c.extent();
    let one = BdtElement::one(s.clone());
    if n == 0 {
        return Ok(one);
    }
    let mut h = CMatrix::zeros(n, n);
    for (&(k, j), v) in c.entries() {
        h[(k, j)] = v.to_c64();
    }
    let e = expm_i_hermitian(&h, 1.0) - CMatrix::identity(n, n);
    let mut d = CompactMatrix::zero();
    for i in 0..n {
        for j in 0..n {
            let z = e[(i, j)];
            if z.norm() > 0.0 {
                d.add_at(i, j, &Scalar::float(z));
            }
        }
    }
    Ok(one.add_compact(&d))
}

/// `f(a) = Σ_n f_n e^{2πina/L}` for self-adjoint `a` and finitely many
/// coefficients. `tail_bound` is the caller's bound for the omitted terms
/// and is added to the certificate.
pub fn smooth_calc(
    a: &BdtElement,
    coeffs: &BTreeMap<i64, Scalar>,
    period: f64,
    tol: f64,
    tail_bound: f64,
) -> Result<CertifiedElement<BdtElement>> {
    if !(tol > 0.0 && period > 0.0) {
        return Err(Error::InvalidInput("tolerance and period must be positive".into()));
    }
    if !a.is_self_adjoint() {
        return Err(Error::InvalidInput("functional calculus requires a self-adjoint element".into()));
    }
    let weight: f64 = coeffs.iter().filter(|(&n, _)| n != 0).map(|(_, f)| f.abs()).sum();
    let per_term = if weight > 0.0 { tol / weight } else { tol };
    let mut acc = BdtElement::zero(a.s().clone());
    let mut bound = tail_bound;
    for (&n, f) in coeffs {
        if f.is_zero() {
            continue;
        }
        let term = if n == 0 {
            BdtElement::one(a.s().clone())
        } else {
            let t = 2.0 * PI * n as f64 / period;
            let e = bdt_exp(&a.scale(&Scalar::from_f64(t)), per_term)?;
            bound += f.abs() * e.residual_bound;
            e.value
        };
        acc = acc.add(&term.scale(f));
    }
    Ok(CertifiedElement::new(acc, bound, "Fourier series of exponentials"))
}

/// Outcome of an inequality check, with the numbers that went into it.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub certificate: f64,
    pub pass: bool,
}

/// Checks `‖e^{ib}‖_M ≤ ∏_{j=1}^M (1 + ‖b‖_j)^{2^{M-j}}` for self-adjoint `b`.
///
/// The left side is the upper enclosure of the `M`-norm of the certified
/// approximation, the right side uses upper enclosures of `‖b‖_j`. The
/// certificate is the operator-norm distance from the approximation to
/// `e^{ib}`.
pub fn check_exp_bound_b(b: &BdElement, m: u32, tol: f64) -> Result<BoundCheck> {
    let mb = (8 * (b.l1_norm().ceil() as u64 + 2) * b.bandwidth().max(1)).max(32);
    let e = bd_exp(b, tol, mb)?;
    let lhs = e.value.p_norm_bounds(m, tol)?.upper;
    let mut rhs = 1.0;
    for j in 1..=m {
        let bj = b.p_norm_bounds(j, tol)?.upper;
        rhs *= (1.0 + bj).powi(1 << (m - j));
    }
    Ok(BoundCheck {
        lhs,
        rhs,
        certificate: e.residual_bound,
        pass: lhs <= rhs + tol,
    })
}

/// Checks `‖e^{ic}‖_{M,0} ≤ ∏_{j=1}^M (1 + ‖c‖_{j,0})^{2^{M-j}}`.
///
/// `e^{ic} = I + D` with `D` finite; `d_K` kills `I`, so the left side is
/// `‖I + D‖ + Σ_{j≥1} C(M,j) ‖d_K^j D‖`, all finite computations.
pub fn check_exp_bound_c(c: &CompactMatrix, m: u32) -> Result<BoundCheck> {
    let s = Supernatural::from_natural(1);
    let e = k_exp(&s, c)?;
    let d = e.compact();
    let n = d.extent();
    let unit_part = if n == 0 {
        1.0
    } else {
        sigma_max(&(CMatrix::identity(n, n) + dense_square(d, n)))
    };
    let mut lhs = unit_part;
    for j in 1..=m {
        lhs += binomial(m, j) as f64 * d.d_k_pow(j).op_norm();
    }
    let mut rhs = 1.0;
    for j in 1..=m {
        rhs *= (1.0 + c.mn_norm(j, 0)).powi(1 << (m - j));
    }
    let certificate = 1e-12 * (1.0 + rhs);
    Ok(BoundCheck {
        lhs,
        rhs,
        certificate,
        pass: lhs <= rhs + certificate,
    })
}

fn dense_square(c: &CompactMatrix, n: usize) -> CMatrix {
    let mut m = DMatrix::zeros(n, n);
    for (&(k, s), v) in c.entries() {
        m[(k, s)] = v.to_c64();
    }
    m
}

/// Lower bound on `min σ_min` of the symbol, if certifiable.
pub fn symbol_margin(b: &BdElement) -> Option<f64> {
    if b.is_zero() {
        return None;
    }
    b.symbol().inf_sigma_min(MAX_SYMBOL_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compact::k_units;

    fn s() -> Supernatural {
        "2:inf,3:1".parse().unwrap()
    }

    #[test]
    fn invert_shift_exactly() {
        let v = BdElement::shift(s(), 1);
        let inv = bd_invert(&v, 1e-9, 8).unwrap();
        assert_eq!(inv.value, BdElement::shift(s(), -1));
        assert_eq!(inv.residual_bound, 0.0);
    }

    #[test]
    fn invert_multiplier() {
        let f = UlcFunction::from_ints(&[2, -3, 5]);
        let m = BdElement::multiplier(s(), f.clone()).unwrap();
        let inv = bd_invert(&m, 1e-9, 8).unwrap();
        assert_eq!(inv.value, BdElement::multiplier(s(), f.recip().unwrap()).unwrap());
    }

    #[test]
    fn invert_two_plus_shift() {
        let b = BdElement::scalar(s(), Scalar::from_int(2)).add(&BdElement::shift(s(), 1));
        let inv = bd_invert(&b, 1e-10, 64).unwrap();
        assert!(inv.residual_bound <= 1e-10);
        // (2 + V)^{-1} = Σ_k (-1)^k V^k / 2^{k+1}.
        for k in 0..10 {
            let want = (-1f64).powi(k) / 2f64.powi(k + 1);
            let got = inv.value.fourier(k as i64).eval(0).to_c64();
            assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12);
        }
        assert!(inv.value.fourier(-1).sup_norm() < 1e-12);
    }

    #[test]
    fn shift_plus_small_is_not_invertible_when_symbol_vanishes() {
        let b = BdElement::one(s()).add(&BdElement::shift(s(), 1));
        assert!(matches!(bd_invert(&b, 1e-9, 32), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn bdt_invert_rank_one_update() {
        let a = BdtElement::scalar(s(), Scalar::from_int(2)).add_compact(&k_units(0, 0));
        let inv = bdt_invert(&a, 1e-12, &[8, 16, 32]).unwrap();
        let want = CompactMatrix::from_entries([((0, 0), Scalar::ratio(-1, 6))]);
        assert!(inv.value.compact().sub(&want).max_abs() < 1e-14);
        assert!(inv.residual_bound <= 1e-12);
    }

    #[test]
    fn bdt_invert_rejects_shifts() {
        let u = BdtElement::unilateral_shift(s());
        assert!(matches!(bdt_invert(&u, 1e-8, &[16, 32]), Err(Error::NotInvertible(_))));
        assert!(matches!(bdt_invert(&u.adjoint(), 1e-8, &[16, 32]), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn exp_examples() {
        assert_eq!(bd_exp(&BdElement::zero(s()), 1e-9, 8).unwrap().value, BdElement::one(s()));
        let f = UlcFunction::from_ints(&[1, 2]);
        let e = bd_exp(&BdElement::multiplier(s(), f).unwrap(), 1e-9, 8).unwrap();
        let v = e.value.fourier(0).eval(1).to_c64();
        assert!((v - Complex64::new(2f64.cos(), 2f64.sin())).norm() < 1e-15);
        let c = BdElement::shift(s(), 1).add(&BdElement::shift(s(), -1));
        let e = bd_exp(&c, 1e-10, 32).unwrap();
        assert!(e.residual_bound <= 1e-10);
    }

    #[test]
    fn k_exp_of_pi_projection() {
        let c = k_units(0, 0).scale(&Scalar::from_f64(PI));
        let e = k_exp(&s(), &c).unwrap();
        assert!(e.compact().sub(&k_units(0, 0).scale(&Scalar::from_int(-2))).max_abs() < 1e-15);
    }

    #[test]
    fn bound_checks_trivial_cases() {
        let r = check_exp_bound_b(&BdElement::zero(s()), 2, 1e-9).unwrap();
        assert!(r.pass && (r.lhs - 1.0).abs() < 1e-12 && r.rhs == 1.0);
        let r = check_exp_bound_c(&CompactMatrix::zero(), 3).unwrap();
        assert!(r.pass && r.lhs == 1.0);
        let r = check_exp_bound_c(&k_units(0, 0).scale(&Scalar::from_f64(PI)), 2).unwrap();
        assert!(r.pass);
    }
}
