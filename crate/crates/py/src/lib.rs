//! Python bindings. Elements cross the boundary as JSON strings in the same
//! format the CLI reads and writes.

use bdtk::arith::{gs_add, gs_contains as core_gs_contains, GsRational, Supernatural};
use bdtk::bd::BdElement;
use bdtk::bdt::{correction as core_correction, BdtElement};
use bdtk::calculus::{bd_exp, bd_invert_auto, bdt_exp, bdt_invert, DEFAULT_INVERT_SIZES};
use bdtk::compact::CompactMatrix;
use bdtk::error::Error;
use bdtk::index::{fredholm_index as core_index, DEFAULT_SCHEDULE, DEFAULT_SVD_THRESHOLD};
use bdtk::json::{self as bj, Json};
use bdtk::verify::run_suite;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn parse<T: Json>(text: &str) -> PyResult<T> {
    bj::parse(text).and_then(|v| T::from_json(&v)).map_err(to_py)
}

fn dump<T: Json>(x: &T) -> String {
    bj::to_string(&x.to_json())
}

fn supernatural(s: &str) -> PyResult<Supernatural> {
    s.parse().map_err(to_py)
}

/// Band-dominated element: finitely many bands, each a uniformly locally
/// constant function.
#[pyclass(name = "Bd", module = "pybdtk", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyBd(BdElement);

#[pymethods]
impl PyBd {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text).map(Self)
    }

    #[staticmethod]
    fn shift(s: &str, n: i64) -> PyResult<Self> {
        Ok(Self(BdElement::shift(supernatural(s)?, n)))
    }

    #[staticmethod]
    fn one(s: &str) -> PyResult<Self> {
        Ok(Self(BdElement::one(supernatural(s)?)))
    }

    fn to_json(&self) -> String {
        dump(&self.0)
    }

    fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    fn delta_l(&self) -> Self {
        Self(self.0.delta_l())
    }

    fn bandwidth(&self) -> u64 {
        self.0.bandwidth()
    }

    fn period(&self) -> u64 {
        self.0.period()
    }

    /// Certified operator norm as `(lower, upper)`.
    #[pyo3(signature = (tol = 1e-9))]
    fn norm(&self, tol: f64) -> PyResult<(f64, f64)> {
        let b = self.0.norm_bounds(tol).map_err(to_py)?;
        Ok((b.lower, b.upper))
    }

    #[pyo3(signature = (p, tol = 1e-9))]
    fn p_norm(&self, p: u32, tol: f64) -> PyResult<(f64, f64)> {
        let b = self.0.p_norm_bounds(p, tol).map_err(to_py)?;
        Ok((b.lower, b.upper))
    }

    fn toeplitz(&self) -> PyBdt {
        PyBdt(BdtElement::toeplitz(self.0.clone()))
    }

    /// Inverse with its residual bound.
    #[pyo3(signature = (tol = 1e-9))]
    fn invert(&self, tol: f64) -> PyResult<(Self, f64)> {
        let c = bd_invert_auto(&self.0, tol).map_err(to_py)?;
        Ok((Self(c.value), c.residual_bound))
    }

    /// `exp(i b)` for self-adjoint `b`, with its residual bound.
    #[pyo3(signature = (tol = 1e-9, max_band = 64))]
    fn exp_i(&self, tol: f64, max_band: u64) -> PyResult<(Self, f64)> {
        let c = bd_exp(&self.0, tol, max_band).map_err(to_py)?;
        Ok((Self(c.value), c.residual_bound))
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(self.0.mul(&other.0))
    }

    fn __neg__(&self) -> Self {
        Self(self.0.neg())
    }

    fn __repr__(&self) -> String {
        format!("Bd({})", self.to_json())
    }
}

/// Finitely supported matrix on the half line.
#[pyclass(name = "Compact", module = "pybdtk", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyCompact(CompactMatrix);

#[pymethods]
impl PyCompact {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text).map(Self)
    }

    #[staticmethod]
    fn unit(k: usize, s: usize) -> Self {
        Self(CompactMatrix::unit(k, s))
    }

    fn to_json(&self) -> String {
        dump(&self.0)
    }

    fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    fn d_k(&self) -> Self {
        Self(self.0.d_k())
    }

    fn op_norm(&self) -> f64 {
        self.0.op_norm()
    }

    fn mn_norm(&self, m: u32, n: u32) -> f64 {
        self.0.mn_norm(m, n)
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(self.0.mul(&other.0))
    }

    fn __repr__(&self) -> String {
        format!("Compact({})", self.to_json())
    }
}

/// Toeplitz part plus compact part.
#[pyclass(name = "Bdt", module = "pybdtk", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyBdt(BdtElement);

#[pymethods]
impl PyBdt {
    #[new]
    fn new(symbol: &PyBd, compact: &PyCompact) -> Self {
        Self(BdtElement::new(symbol.0.clone(), compact.0.clone()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text).map(Self)
    }

    fn to_json(&self) -> String {
        dump(&self.0)
    }

    fn tau(&self) -> PyBd {
        PyBd(self.0.tau().clone())
    }

    fn compact(&self) -> PyCompact {
        PyCompact(self.0.compact().clone())
    }

    fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    fn d_k(&self) -> Self {
        Self(self.0.d_k())
    }

    fn fourier(&self, n: i64) -> Self {
        Self(self.0.fourier(n))
    }

    /// Top-left `n × n` block as nested lists of `(re, im)` pairs.
    fn truncate(&self, n: usize) -> Vec<Vec<(f64, f64)>> {
        let m = self.0.truncate(n);
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|s| {
                        let z = m.get(k, s).to_c64();
                        (z.re, z.im)
                    })
                    .collect()
            })
            .collect()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn invert(&self, tol: f64) -> PyResult<(Self, f64)> {
        let c = bdt_invert(&self.0, tol, &DEFAULT_INVERT_SIZES).map_err(to_py)?;
        Ok((Self(c.value), c.residual_bound))
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn exp_i(&self, tol: f64) -> PyResult<(Self, f64)> {
        let c = bdt_exp(&self.0, tol).map_err(to_py)?;
        Ok((Self(c.value), c.residual_bound))
    }

    #[pyo3(signature = (schedule = None, threshold = DEFAULT_SVD_THRESHOLD))]
    fn index(&self, schedule: Option<Vec<usize>>, threshold: f64) -> PyResult<i64> {
        let sched = schedule.unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
        Ok(core_index(&self.0, &sched, threshold).map_err(to_py)?.index)
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(self.0.mul(&other.0))
    }

    fn __repr__(&self) -> String {
        format!("Bdt({})", self.to_json())
    }
}

/// `T(b1)T(b2) - T(b1 b2)`.
#[pyfunction]
fn correction(b1: &PyBd, b2: &PyBd) -> PyResult<PyCompact> {
    if b1.0.s() != b2.0.s() {
        return Err(PyValueError::new_err("operands live over different S"));
    }
    Ok(PyCompact(core_correction(&b1.0, &b2.0)))
}

#[pyfunction]
fn gs_contains(num: i64, den: i64, s: &str) -> PyResult<bool> {
    core_gs_contains(num, den, &supernatural(s)?).map_err(to_py)
}

/// Sum of two members of G_S as `(numerator, denominator)`.
#[pyfunction]
fn gs_sum(a: (i64, i64), b: (i64, i64), s: &str) -> PyResult<(i64, u64)> {
    let s = supernatural(s)?;
    let x = GsRational::new(a.0, a.1, &s).map_err(to_py)?;
    let y = GsRational::new(b.0, b.1, &s).map_err(to_py)?;
    let r = gs_add(x, y, &s).map_err(to_py)?;
    Ok((r.numerator(), r.denominator()))
}

/// Runs a verification suite and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (suite, seed = 0, cases = None))]
fn verify(py: Python<'_>, suite: &str, seed: u64, cases: Option<usize>) -> PyResult<String> {
    let report = py.detach(|| run_suite(suite, seed, cases)).map_err(to_py)?;
    Ok(bj::to_string(&report.to_json()))
}

#[pymodule]
fn pybdtk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBd>()?;
    m.add_class::<PyBdt>()?;
    m.add_class::<PyCompact>()?;
    m.add_function(wrap_pyfunction!(correction, m)?)?;
    m.add_function(wrap_pyfunction!(gs_contains, m)?)?;
    m.add_function(wrap_pyfunction!(gs_sum, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
