//! Numerical toolkit for reproducing kernel Hilbert spaces.
//!
//! The crate builds Gram matrices of scalar- and operator-valued kernels on
//! sampled domains, decides positivity / factorization / dilation questions
//! at desk scale, and checks submodule classifications on truncated
//! shift-operator models.
//!
//! Everything is organized around a few finite objects:
//!
//! * [`kernel::KernelSpec`] — an evaluable kernel (catalog entry, algebraic
//!   combination, or raw Gram table),
//! * [`kernel::GramMatrix`] — the block Hermitian matrix of a kernel over a
//!   point list,
//! * [`multiplier::MultiplierSpec`] — an evaluable matrix-valued function,
//! * [`trunc::TruncatedModule`] — an orthonormal monomial basis with shift
//!   matrices, truncated to a total degree,
//! * [`numerics::Verdict`] — a PSD/feasibility outcome with margin, witness
//!   and tolerances.
//!
//! All operations are pure functions on immutable inputs and are safe to
//! invoke concurrently.

pub mod algebra;
pub mod dilation;
pub mod error;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod multiplier;
pub mod numerics;
pub mod point;
pub mod poly;
pub mod trunc;

pub use error::{Error, Result};
pub use linalg::C64;
