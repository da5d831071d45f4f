//! Products and tensor products of kernels, the diagonal-restriction
//! identities, and product multipliers.
//!
//! Product sections are the test currency here: the span-of-sections
//! identities translate directly to Gram computations, so nothing needs a
//! basis of the underlying function spaces. The Cartesian-grid convention
//! is row-major with the left factor on the slow index, which fixes the
//! Kronecker orientation.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::C64;
use crate::multiplier::MultiplierSpec;
use crate::point::{DomainTag, Point};

/// A spanning vector of the product construction: the section of
/// `K1 * K2` at `mu` with direction `x1 (x) x2`, or equivalently its lift
/// `K1(., mu) x1 (x) K2(., mu) x2`.
#[derive(Debug, Clone)]
pub struct ProductSection {
    pub mu: Point,
    pub x1: DVector<C64>,
    pub x2: DVector<C64>,
}

impl ProductSection {
    pub fn new(mu: Point, x1: DVector<C64>, x2: DVector<C64>) -> Result<Self> {
        if x1.iter().all(|z| z.norm() == 0.0) || x2.iter().all(|z| z.norm() == 0.0) {
            return Err(Error::Input("section directions must be nonzero".into()));
        }
        Ok(Self { mu, x1, x2 })
    }
}

/// The pointwise (Schur) product `K1 * K2`, fiber `d1 d2`.
pub fn product_kernel(k1: &KernelSpec, k2: &KernelSpec) -> Result<KernelSpec> {
    let spec = KernelSpec::Product {
        factors: vec![k1.clone(), k2.clone()],
    };
    spec.validate()?;
    Ok(spec)
}

/// The tensor product on the product domain (coordinates concatenated).
pub fn tensor_kernel(k1: &KernelSpec, k2: &KernelSpec) -> Result<KernelSpec> {
    let spec = KernelSpec::Tensor {
        factors: vec![k1.clone(), k2.clone()],
    };
    spec.validate()?;
    Ok(spec)
}

/// Full Cartesian grid of two point lists, row-major with the left factor
/// slow: `(p_i, q_j)` sits at index `i * len(right) + j`.
pub fn cartesian_grid(left: &[Point], right: &[Point]) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for p in left {
        for q in right {
            let mut coords = p.coords().to_vec();
            coords.extend_from_slice(q.coords());
            out.push(Point::new(coords, DomainTag::Generic)?);
        }
    }
    Ok(out)
}

/// The diagonal pairing `lambda <-> (lambda, lambda)`: each point of the
/// base domain paired with its duplicate on the product domain.
///
/// Feeding this to [`crate::kernel::transport`] with a tensor-product spec
/// materializes the restricted space: the transported Gram over the base
/// points equals the Gram of the pointwise product kernel.
pub fn diagonal_pairs(points: &[Point]) -> Result<Vec<(Point, Point)>> {
    points
        .iter()
        .map(|p| {
            let doubled = Point::new([p.coords(), p.coords()].concat(), DomainTag::Generic)?;
            Ok((p.clone(), doubled))
        })
        .collect()
}

/// Scalar product of two sections of one kernel:
/// `<K(., mu) x, K(., nu) y> = y* K(nu, mu) x`.
fn section_inner(
    k: &KernelSpec,
    mu: &Point,
    x: &DVector<C64>,
    nu: &Point,
    y: &DVector<C64>,
) -> Result<C64> {
    let block = k.eval(nu, mu)?;
    Ok((y.adjoint() * block * x)[(0, 0)])
}

/// Max entry difference between the Gram of lifted product sections in the
/// tensor space and the Gram of the corresponding sections of `K1 * K2`.
///
/// The restriction map is a coisometry whose adjoint is isometric on these
/// sections, so the exact answer is zero; the two Grams are computed along
/// independent code paths (factored scalar products vs Kronecker blocks).
pub fn coisometry_defect(
    k1: &KernelSpec,
    k2: &KernelSpec,
    sections: &[ProductSection],
) -> Result<f64> {
    if sections.is_empty() {
        return Err(Error::Input("need at least one product section".into()));
    }
    let d1 = k1.fiber_dim();
    let d2 = k2.fiber_dim();
    for s in sections {
        if s.x1.len() != d1 || s.x2.len() != d2 {
            return Err(Error::Input(format!(
                "section directions must have dims {d1} and {d2}"
            )));
        }
    }
    let prod = product_kernel(k1, k2)?;
    let m = sections.len();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let (si, sj) = (&sections[i], &sections[j]);
            // Lifted: product of the factor scalar products.
            let a1 = section_inner(k1, &sj.mu, &sj.x1, &si.mu, &si.x1)?;
            let a2 = section_inner(k2, &sj.mu, &sj.x2, &si.mu, &si.x2)?;
            let lifted = a1 * a2;
            // Restricted: Kronecker block applied to stacked directions.
            let xi = kron_vec(&si.x1, &si.x2);
            let xj = kron_vec(&sj.x1, &sj.x2);
            let restricted = (xi.adjoint() * prod.eval(&si.mu, &sj.mu)? * &xj)[(0, 0)];
            worst = worst.max((lifted - restricted).norm());
        }
    }
    Ok(worst)
}

fn kron_vec(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// The product multiplier `(F1 * F2)(l) = F1(l) (x) F2(l)`.
pub fn product_multiplier(f1: &MultiplierSpec, f2: &MultiplierSpec) -> Result<MultiplierSpec> {
    let spec = MultiplierSpec::Product {
        factors: vec![f1.clone(), f2.clone()],
    };
    spec.validate()?;
    Ok(spec)
}

/// Numerical check of the conjugation identity for product multipliers.
///
/// For each product section, the adjoint of the product multiplication
/// operator is applied two ways: directly on the `K1 * K2` section (the
/// adjoint sends the section at `mu` to the section with direction
/// `(F1 * F2)(mu)*` applied), and by lifting to the tensor space, applying
/// the factor adjoints, and restricting. The Grams of the two transformed
/// families are compared entrywise.
pub fn product_multiplier_adjoint_defect(
    f1: &MultiplierSpec,
    f2: &MultiplierSpec,
    k1: &KernelSpec,
    k2: &KernelSpec,
    sections: &[ProductSection],
) -> Result<f64> {
    if sections.is_empty() {
        return Err(Error::Input("need at least one product section".into()));
    }
    if f1.in_dim() != k1.fiber_dim()
        || f1.out_dim() != k1.fiber_dim()
        || f2.in_dim() != k2.fiber_dim()
        || f2.out_dim() != k2.fiber_dim()
    {
        return Err(Error::Input(
            "product-multiplier factors must be square on the factor fibers".into(),
        ));
    }
    let prod_kernel = product_kernel(k1, k2)?;
    let prod_mult = product_multiplier(f1, f2)?;
    let m = sections.len();

    // Route 1: direct adjoint action on K1 * K2 sections; directions
    // y = (F1 * F2)(mu)* (x1 (x) x2), inner products via Kronecker blocks.
    let mut direct: Vec<(Point, DVector<C64>)> = Vec::with_capacity(m);
    for s in sections {
        let big = prod_mult.eval(&s.mu)?;
        let y = big.adjoint() * kron_vec(&s.x1, &s.x2);
        direct.push((s.mu.clone(), y));
    }
    // Route 2: lift, apply the factor adjoints, restrict; directions kept
    // factored, inner products via factored scalar products.
    let mut lifted: Vec<(Point, DVector<C64>, DVector<C64>)> = Vec::with_capacity(m);
    for s in sections {
        let y1 = f1.eval(&s.mu)?.adjoint() * &s.x1;
        let y2 = f2.eval(&s.mu)?.adjoint() * &s.x2;
        lifted.push((s.mu.clone(), y1, y2));
    }

    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let g1 = {
                let (mu_i, yi) = &direct[i];
                let (mu_j, yj) = &direct[j];
                (yi.adjoint() * prod_kernel.eval(mu_i, mu_j)? * yj)[(0, 0)]
            };
            let g2 = {
                let (mu_i, y1i, y2i) = &lifted[i];
                let (mu_j, y1j, y2j) = &lifted[j];
                let a1 = section_inner(k1, mu_j, y1j, mu_i, y1i)?;
                let a2 = section_inner(k2, mu_j, y2j, mu_i, y2i)?;
                a1 * a2
            };
            worst = worst.max((g1 - g2).norm());
        }
    }
    Ok(worst)
}
