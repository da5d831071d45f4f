//! Dense Hermitian linear algebra underlying every verdict: eigenvalues,
//! PSD tests, pencil extremization, PSD factorization, partial-isometry
//! defect.
//!
//! Tolerance convention: all PSD margins are measured relative to
//! `max(1, ||A||)` so that zero matrices and tiny Grams are not spuriously
//! rejected.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Absolute tolerance for accepting input as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative cutoff for pseudoinverses; sampled Grams of analytic
/// kernels are severely ill-conditioned near coincident points.
pub const PINV_CUTOFF_REL: f64 = 1e-10;

/// Relative tolerance for the kernel-domination check in
/// [`generalized_max_eig`].
const KERNEL_LEAK_REL: f64 = 1e-8;

/// A validated conjugate-symmetric matrix.
///
/// Construction checks finiteness and conjugate symmetry within
/// [`HERMITIAN_TOL`] (absolute), then stores the exactly Hermitized part.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: DMatrix<C64>,
}

impl HermitianMatrix {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Input(format!(
                "Hermitian matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        linalg::check_finite(&mat, "Hermitian matrix")?;
        let n = mat.nrows();
        for i in 0..n {
            for j in 0..=i {
                let dev = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                if dev > HERMITIAN_TOL {
                    return Err(Error::Contract(format!(
                        "matrix is not Hermitian: |A[{i},{j}] - conj(A[{j},{i}])| = {dev:.3e}"
                    )));
                }
            }
        }
        let herm = (&mat + mat.adjoint()) * linalg::re(0.5);
        Ok(Self { mat: herm })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Eigendecomposition, eigenvalues ascending.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        linalg::hermitian_eigen(&self.mat)
    }

    /// Spectral norm (largest |eigenvalue|).
    pub fn norm(&self) -> f64 {
        let (vals, _) = self.eigen();
        vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()))
    }
}

/// PSD/feasibility outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Positive,
    Indefinite,
    Inconclusive,
}

/// Result of a PSD test: outcome, the signed minimum eigenvalue both raw
/// and relative to `max(1, ||A||)`, a witness eigenvector when indefinite,
/// and the tolerance used.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Smallest eigenvalue of the tested matrix.
    pub lambda_min: f64,
    /// `lambda_min / max(1, ||A||)`; positive verdicts have `margin >= -tol`.
    pub margin: f64,
    /// Eigenvector of `lambda_min` when the outcome is indefinite.
    pub witness: Option<DVector<C64>>,
    pub tol: f64,
}

impl Verdict {
    pub fn is_positive(&self) -> bool {
        self.outcome == Outcome::Positive
    }
}

/// Decide whether `a` is PSD within a relative tolerance.
///
/// Positive iff `lambda_min(A) >= -tol * max(1, ||A||)`; the witness is an
/// eigenvector of the minimum eigenvalue when indefinite.
pub fn psd_verdict(a: &HermitianMatrix, tol: f64) -> Result<Verdict> {
    if tol <= 0.0 {
        return Err(Error::Input(format!("tol must be positive, got {tol}")));
    }
    if a.dim() == 0 {
        return Ok(Verdict {
            outcome: Outcome::Positive,
            lambda_min: 0.0,
            margin: 0.0,
            witness: None,
            tol,
        });
    }
    let (vals, vecs) = a.eigen();
    if vals.iter().any(|l| !l.is_finite()) {
        return Ok(Verdict {
            outcome: Outcome::Inconclusive,
            lambda_min: f64::NAN,
            margin: f64::NAN,
            witness: None,
            tol,
        });
    }
    let lambda_min = vals[0];
    let norm = vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let scale = norm.max(1.0);
    let margin = lambda_min / scale;
    if margin >= -tol {
        Ok(Verdict {
            outcome: Outcome::Positive,
            lambda_min,
            margin,
            witness: None,
            tol,
        })
    } else {
        Ok(Verdict {
            outcome: Outcome::Indefinite,
            lambda_min,
            margin,
            witness: Some(vecs.column(0).into_owned()),
            tol,
        })
    }
}

/// Smallest `c^2` with `A <= c^2 B` on the range of `B`.
///
/// Implemented as the maximum eigenvalue of
/// `pinv(B + reg I)^{1/2} A pinv(B + reg I)^{1/2}`; monotone nonincreasing
/// in `reg`. Errors if `A` has a component on the numerical kernel of `B`
/// beyond tolerance.
pub fn generalized_max_eig(a: &HermitianMatrix, b: &HermitianMatrix, reg: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Input(format!(
            "pencil dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if reg < 0.0 {
        return Err(Error::Input(format!("reg must be nonnegative, got {reg}")));
    }
    let n = a.dim();
    if n == 0 {
        return Ok(0.0);
    }
    let (bvals, bvecs) = b.eigen();
    let b_norm = bvals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    if bvals[0] < -HERMITIAN_TOL.max(1e-10 * b_norm.max(1.0)) {
        return Err(Error::Contract(format!(
            "B must be PSD; lambda_min(B) = {:.3e}",
            bvals[0]
        )));
    }
    let cutoff = PINV_CUTOFF_REL * b_norm;

    // Check that A is supported on range(B): on every numerically null
    // direction of B + reg I the column A u must vanish.
    let a_norm_scale = {
        let (avals, _) = a.eigen();
        avals.iter().fold(0.0f64, |m, &l| m.max(l.abs())).max(1.0)
    };
    let mut sqrt_pinv = DMatrix::<C64>::zeros(n, n);
    for (i, &l) in bvals.iter().enumerate() {
        let shifted = l + reg;
        let v = bvecs.column(i);
        if shifted > cutoff {
            sqrt_pinv += v * v.adjoint() * linalg::re(1.0 / shifted.sqrt());
        } else {
            let leak = (a.as_matrix() * v).norm();
            if leak > KERNEL_LEAK_REL * a_norm_scale {
                return Err(Error::Infeasible(format!(
                    "left form is not dominated on ker(B): leak {leak:.3e} on a null direction"
                )));
            }
        }
    }
    let m = &sqrt_pinv * a.as_matrix() * &sqrt_pinv;
    let m = HermitianMatrix::new((&m + m.adjoint()) * linalg::re(0.5))
        .expect("symmetrized pencil is Hermitian");
    let (vals, _) = m.eigen();
    Ok(*vals.last().expect("nonempty"))
}

/// Factor a PSD matrix as `F F*` with `F` from the eigendecomposition,
/// truncating eigenvalues below `rank_tol * max(1, ||A||)`.
///
/// The column count of `F` is the numerical rank. Indefinite input yields
/// [`Error::NotPsd`] carrying the negative witness.
pub fn psd_factor(a: &HermitianMatrix, rank_tol: f64) -> Result<DMatrix<C64>> {
    if rank_tol <= 0.0 {
        return Err(Error::Input(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    let n = a.dim();
    let (vals, vecs) = a.eigen();
    let norm = vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let thresh = rank_tol * norm.max(1.0);
    if n > 0 && vals[0] < -thresh {
        return Err(Error::NotPsd {
            lambda_min: vals[0],
            witness: vecs.column(0).iter().copied().collect(),
        });
    }
    // Columns ordered by descending eigenvalue (dominant directions first).
    let kept: Vec<usize> = (0..n).rev().filter(|&i| vals[i] > thresh).collect();
    let mut f = DMatrix::<C64>::zeros(n, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        let col = vecs.column(i) * linalg::re(vals[i].sqrt());
        f.set_column(c, &col);
    }
    Ok(f)
}

/// `||T T* T - T||` in spectral norm; zero iff `T` is a partial isometry.
pub fn partial_isometry_defect(t: &DMatrix<C64>) -> Result<f64> {
    linalg::check_finite(t, "matrix")?;
    let d = t * t.adjoint() * t - t;
    Ok(linalg::spectral_norm(&d))
}
