//! Error type shared by all modules.

use crate::linalg::C64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, bad parameters,
    /// schema violations).
    #[error("input error: {0}")]
    Input(String),

    /// A caller-side contract was violated (e.g. a matrix claimed Hermitian
    /// is not, beyond tolerance).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A point lies outside the domain a kernel is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Gram-table kernel was evaluated at a point not in its table.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// The requested operation is not defined for this spec.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The computation is numerically unreliable for these inputs
    /// (truncation too short, point too close to the boundary, near-zero
    /// divisor).
    #[error("numerical reliability: {0}")]
    Reliability(String),

    /// A matrix required to be PSD is indefinite; carries the negative
    /// eigenvalue and its eigenvector.
    #[error("not positive semidefinite: lambda_min = {lambda_min}")]
    NotPsd { lambda_min: f64, witness: Vec<C64> },

    /// A pencil extremization has no finite answer (the left-hand form is
    /// not dominated on the kernel of the right-hand one).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A candidate operator fails to commute with the shift tuple.
    #[error("not an intertwiner: commutator with shift {coord} has norm {commutator_norm}")]
    NotIntertwiner { coord: usize, commutator_norm: f64 },
}
