//! Small dense complex linear-algebra helpers on top of nalgebra.
//!
//! Everything here is desk scale (dimensions in the hundreds); no sparse or
//! iterative machinery.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Shorthand for a real complex number.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn is_finite_c(z: &C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn check_finite(m: &DMatrix<C64>, what: &str) -> Result<()> {
    if m.iter().all(is_finite_c) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} contains non-finite entries")))
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is assumed (not checked) Hermitian; callers go through
/// [`crate::numerics::HermitianMatrix`] for the validated path.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let se = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Spectral norm of a rectangular complex matrix, via the Gram matrix.
pub fn spectral_norm(a: &DMatrix<C64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    // sqrt of the top eigenvalue of A*A (use the smaller Gram side).
    let g = if a.nrows() >= a.ncols() {
        a.adjoint() * a
    } else {
        a * a.adjoint()
    };
    let (vals, _) = hermitian_eigen(&g);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Singular values, descending. Goes through a true SVD so that tiny
/// singular values resolve to full precision (the squared-Gram route loses
/// half the digits near zero).
pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Kronecker product with the left factor on the slow index.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Moore-Penrose pseudoinverse of a Hermitian matrix from its
/// eigendecomposition, dropping eigenvalues with |lambda| <= cutoff.
pub fn pinv_hermitian(vals: &[f64], vecs: &DMatrix<C64>, cutoff: f64) -> DMatrix<C64> {
    let n = vecs.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        if l.abs() > cutoff {
            let v = vecs.column(i);
            out += v * v.adjoint() * re(1.0 / l);
        }
    }
    out
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Returns the orthonormal columns that survive the relative rank threshold
/// together with the indices of the input columns they came from.
pub fn orthonormalize_columns(
    cols: &[DVector<C64>],
    rel_tol: f64,
) -> (Vec<DVector<C64>>, Vec<usize>) {
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for (idx, c) in cols.iter().enumerate() {
        let scale = c.norm();
        if scale == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&v);
                v -= b * coeff;
            }
        }
        let n = v.norm();
        if n > rel_tol * scale {
            basis.push(v / re(n));
            kept.push(idx);
        } else {
            log::debug!("orthonormalize: dropped column {idx} (residual {n:.3e} vs scale {scale:.3e})");
        }
    }
    (basis, kept)
}
