//! Exact and certified computation in smooth Bunce-Deddens-Toeplitz algebras.
//!
//! Elements are kept in the canonical form `a = T(b) + c`, where `b` is a
//! finite band sum `Σ_n V^n m_{f_n}` with periodic coefficients and `c` is a
//! finite-support matrix on `ℓ²(Z_{≥0})`. Algebraic operations are exact over
//! Gaussian rationals; norms, inverses and exponentials come with certified
//! error bounds.

pub mod arith;
pub mod bd;
pub mod bdt;
pub mod calculus;
pub mod compact;
pub mod corpus;
pub mod derivations;
pub mod cyclo;
pub mod error;
pub mod fourier;
pub mod index;
pub mod json;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod symbol;
pub mod ulc;
pub mod verify;

pub use arith::{Exponent, GsRational, Residue, Supernatural};
pub use bd::BdElement;
pub use bdt::BdtElement;
pub use compact::CompactMatrix;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use symbol::{NormBound, SymbolMatrix};
pub use ulc::UlcFunction;
