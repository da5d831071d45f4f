//! Kernel catalog, evaluation, sampling and Gram assembly.
//!
//! A [`KernelSpec`] is an evaluable scalar- or operator-valued kernel on a
//! sampled domain: a catalog entry (Szego on the polydisc, weighted Bergman
//! on the ball), an algebraic combination (quasiscalar lift, pointwise
//! product, tensor product on the product domain), or a raw Gram table.
//!
//! A negative PSD verdict on a sampled Gram certifies that a spec is *not*
//! a kernel; a positive verdict is necessary-but-not-sufficient evidence
//! (finite sample).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::numerics::{psd_verdict, HermitianMatrix, Verdict, HERMITIAN_TOL};
use crate::point::{DomainTag, Point};

/// An evaluable kernel specification.
///
/// Sections are required never to vanish: catalog kernels satisfy this
/// automatically and Gram tables are validated to have nonzero diagonal
/// blocks.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    /// `prod_j 1/(1 - z_j conj(w_j))` on the polydisc (Hardy space kernel).
    SzegoPolydisc { n: usize },
    /// `(1 - <z, w>)^(-alpha)` on the unit ball, `alpha > n`.
    BergmanBall { n: usize, alpha: f64 },
    /// Scalar base times the identity on a fiber space.
    Quasiscalar { base: Box<KernelSpec>, fiber_dim: usize },
    /// Pointwise (Schur) product: entrywise tensor of the factor values on
    /// a shared domain; fiber dimension is the product of the factors'.
    Product { factors: Vec<KernelSpec> },
    /// Tensor product on the product domain (coordinates concatenated).
    Tensor { factors: Vec<KernelSpec> },
    /// `1 - <z, w>`; not PSD, kept in the catalog as the standard
    /// counterexample.
    OneMinusPairing { n: usize },
    /// Raw table of blocks over a fixed point list; evaluation is exact
    /// lookup only.
    GramTable {
        points: Vec<Point>,
        fiber_dim: usize,
        blocks: Vec<Vec<DMatrix<C64>>>,
    },
}

impl KernelSpec {
    /// Validate structural invariants (catalog constraints, block symmetry
    /// of tables, factor compatibility).
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::SzegoPolydisc { n } | KernelSpec::OneMinusPairing { n } => {
                if *n == 0 {
                    return Err(Error::Input("kernel arity n must be at least 1".into()));
                }
            }
            KernelSpec::BergmanBall { n, alpha } => {
                if *n == 0 {
                    return Err(Error::Input("kernel arity n must be at least 1".into()));
                }
                if !alpha.is_finite() || *alpha <= *n as f64 {
                    return Err(Error::Input(format!(
                        "bergman_ball requires alpha > n, got alpha = {alpha}, n = {n}"
                    )));
                }
            }
            KernelSpec::Quasiscalar { base, fiber_dim } => {
                if *fiber_dim == 0 {
                    return Err(Error::Input("quasiscalar fiber_dim must be >= 1".into()));
                }
                base.validate()?;
                if base.fiber_dim() != 1 {
                    return Err(Error::Input(
                        "quasiscalar base must be a scalar kernel".into(),
                    ));
                }
            }
            KernelSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Input("product needs at least one factor".into()));
                }
                for f in factors {
                    f.validate()?;
                }
                let arity = factors[0].arity();
                if factors.iter().any(|f| f.arity() != arity) {
                    return Err(Error::Input(
                        "product factors must share the same point domain".into(),
                    ));
                }
            }
            KernelSpec::Tensor { factors } => {
                if factors.is_empty() {
                    return Err(Error::Input("tensor needs at least one factor".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
            KernelSpec::GramTable {
                points,
                fiber_dim,
                blocks,
            } => {
                let m = points.len();
                let d = *fiber_dim;
                if m == 0 {
                    return Err(Error::Input("gram_table needs at least one point".into()));
                }
                if d == 0 {
                    return Err(Error::Input("gram_table fiber_dim must be >= 1".into()));
                }
                let arity = points[0].arity();
                if points.iter().any(|p| p.arity() != arity) {
                    return Err(Error::Input("gram_table points have mixed arity".into()));
                }
                if blocks.len() != m || blocks.iter().any(|row| row.len() != m) {
                    return Err(Error::Input(format!(
                        "gram_table blocks must form an {m}x{m} array"
                    )));
                }
                for (p, row) in blocks.iter().enumerate() {
                    for (q, b) in row.iter().enumerate() {
                        if b.nrows() != d || b.ncols() != d {
                            return Err(Error::Input(format!(
                                "gram_table block ({p},{q}) is not {d}x{d}"
                            )));
                        }
                        linalg::check_finite(b, "gram_table block")?;
                        let dev = linalg::max_abs(&(b - blocks[q][p].adjoint()));
                        if dev > HERMITIAN_TOL {
                            return Err(Error::Input(format!(
                                "gram_table blocks are not conjugate-symmetric at ({p},{q}): {dev:.3e}"
                            )));
                        }
                    }
                }
                for (p, row) in blocks.iter().enumerate() {
                    if linalg::max_abs(&row[p]) == 0.0 {
                        return Err(Error::Input(format!(
                            "gram_table diagonal block {p} is zero; sections must not vanish"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Output dimension of the kernel values (1 for scalar kernels).
    pub fn fiber_dim(&self) -> usize {
        match self {
            KernelSpec::SzegoPolydisc { .. }
            | KernelSpec::BergmanBall { .. }
            | KernelSpec::OneMinusPairing { .. } => 1,
            KernelSpec::Quasiscalar { fiber_dim, .. } => *fiber_dim,
            KernelSpec::Product { factors } | KernelSpec::Tensor { factors } => {
                factors.iter().map(|f| f.fiber_dim()).product()
            }
            KernelSpec::GramTable { fiber_dim, .. } => *fiber_dim,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.fiber_dim() == 1
    }

    /// Number of complex coordinates a point of the index set carries.
    pub fn arity(&self) -> usize {
        match self {
            KernelSpec::SzegoPolydisc { n }
            | KernelSpec::BergmanBall { n, .. }
            | KernelSpec::OneMinusPairing { n } => *n,
            KernelSpec::Quasiscalar { base, .. } => base.arity(),
            KernelSpec::Product { factors } => factors[0].arity(),
            KernelSpec::Tensor { factors } => factors.iter().map(|f| f.arity()).sum(),
            KernelSpec::GramTable { points, .. } => points[0].arity(),
        }
    }

    /// Whether the spec is holomorphic in the first slot (anti-holomorphic
    /// in the second). Gram tables carry no analytic structure.
    pub fn holomorphic(&self) -> bool {
        match self {
            KernelSpec::SzegoPolydisc { .. }
            | KernelSpec::BergmanBall { .. }
            | KernelSpec::OneMinusPairing { .. } => true,
            KernelSpec::Quasiscalar { base, .. } => base.holomorphic(),
            KernelSpec::Product { factors } | KernelSpec::Tensor { factors } => {
                factors.iter().all(|f| f.holomorphic())
            }
            KernelSpec::GramTable { .. } => false,
        }
    }

    /// Natural domain tag for sampling points for this spec.
    pub fn domain_hint(&self) -> DomainTag {
        match self {
            KernelSpec::SzegoPolydisc { .. } => DomainTag::Polydisc,
            KernelSpec::BergmanBall { .. } | KernelSpec::OneMinusPairing { .. } => DomainTag::Ball,
            KernelSpec::Quasiscalar { base, .. } => base.domain_hint(),
            KernelSpec::Product { factors } => factors[0].domain_hint(),
            KernelSpec::Tensor { .. } => DomainTag::Generic,
            KernelSpec::GramTable { .. } => DomainTag::Generic,
        }
    }

    /// Check that a point lies strictly inside the spec's domain.
    pub fn contains(&self, p: &Point) -> Result<()> {
        if p.arity() != self.arity() {
            return Err(Error::Input(format!(
                "point arity {} does not match kernel arity {}",
                p.arity(),
                self.arity()
            )));
        }
        match self {
            KernelSpec::SzegoPolydisc { .. } => {
                if let Some(z) = p.coords().iter().find(|z| z.norm() >= 1.0) {
                    return Err(Error::Domain(format!(
                        "point outside the polydisc: |z| = {}",
                        z.norm()
                    )));
                }
                Ok(())
            }
            KernelSpec::BergmanBall { .. } => {
                let s: f64 = p.coords().iter().map(|z| z.norm_sqr()).sum();
                if s >= 1.0 {
                    return Err(Error::Domain(format!(
                        "point outside the ball: sum |z|^2 = {s}"
                    )));
                }
                Ok(())
            }
            KernelSpec::OneMinusPairing { .. } => Ok(()),
            KernelSpec::Quasiscalar { base, .. } => base.contains(p),
            KernelSpec::Product { factors } => {
                for f in factors {
                    f.contains(p)?;
                }
                Ok(())
            }
            KernelSpec::Tensor { factors } => {
                let mut offset = 0;
                for f in factors {
                    let part = Point::new(
                        p.coords()[offset..offset + f.arity()].to_vec(),
                        DomainTag::Generic,
                    )?;
                    f.contains(&part)?;
                    offset += f.arity();
                }
                Ok(())
            }
            KernelSpec::GramTable { points, .. } => {
                if points.iter().any(|q| q.coords() == p.coords()) {
                    Ok(())
                } else {
                    Err(Error::Lookup(
                        "point is not in the gram_table point list".into(),
                    ))
                }
            }
        }
    }

    /// Evaluate `K(lambda, mu)` as a `d x d` matrix.
    pub fn eval(&self, lambda: &Point, mu: &Point) -> Result<DMatrix<C64>> {
        self.contains(lambda)?;
        self.contains(mu)?;
        self.eval_unchecked(lambda, mu)
    }

    fn eval_unchecked(&self, lambda: &Point, mu: &Point) -> Result<DMatrix<C64>> {
        match self {
            KernelSpec::SzegoPolydisc { .. } => {
                let mut v = C64::new(1.0, 0.0);
                for (z, w) in lambda.coords().iter().zip(mu.coords()) {
                    v *= (C64::new(1.0, 0.0) - z * w.conj()).inv();
                }
                Ok(DMatrix::from_element(1, 1, v))
            }
            KernelSpec::BergmanBall { alpha, .. } => {
                let s = C64::new(1.0, 0.0) - lambda.pairing(mu);
                Ok(DMatrix::from_element(1, 1, s.powf(-*alpha)))
            }
            KernelSpec::OneMinusPairing { .. } => {
                let s = C64::new(1.0, 0.0) - lambda.pairing(mu);
                Ok(DMatrix::from_element(1, 1, s))
            }
            KernelSpec::Quasiscalar { base, fiber_dim } => {
                let k = base.eval_unchecked(lambda, mu)?[(0, 0)];
                Ok(DMatrix::identity(*fiber_dim, *fiber_dim) * k)
            }
            KernelSpec::Product { factors } => {
                let mut acc = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
                for f in factors {
                    acc = linalg::kron(&acc, &f.eval_unchecked(lambda, mu)?);
                }
                Ok(acc)
            }
            KernelSpec::Tensor { factors } => {
                let mut acc = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
                let mut offset = 0;
                for f in factors {
                    let la = Point::new(
                        lambda.coords()[offset..offset + f.arity()].to_vec(),
                        DomainTag::Generic,
                    )?;
                    let mu_part = Point::new(
                        mu.coords()[offset..offset + f.arity()].to_vec(),
                        DomainTag::Generic,
                    )?;
                    acc = linalg::kron(&acc, &f.eval_unchecked(&la, &mu_part)?);
                    offset += f.arity();
                }
                Ok(acc)
            }
            KernelSpec::GramTable { points, blocks, .. } => {
                let p = points
                    .iter()
                    .position(|q| q.coords() == lambda.coords())
                    .ok_or_else(|| {
                        Error::Lookup("first point is not in the gram_table".into())
                    })?;
                let q = points
                    .iter()
                    .position(|r| r.coords() == mu.coords())
                    .ok_or_else(|| {
                        Error::Lookup("second point is not in the gram_table".into())
                    })?;
                Ok(blocks[p][q].clone())
            }
        }
    }
}

/// Block Hermitian Gram matrix of a kernel over an ordered point list.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    points: Vec<Point>,
    fiber_dim: usize,
    mat: DMatrix<C64>,
}

impl GramMatrix {
    /// Wrap an explicitly assembled block matrix; checks the shape and
    /// conjugate symmetry.
    pub fn new(points: Vec<Point>, fiber_dim: usize, mat: DMatrix<C64>) -> Result<Self> {
        if points.is_empty() || fiber_dim == 0 {
            return Err(Error::Input("empty Gram matrix".into()));
        }
        if mat.nrows() != points.len() * fiber_dim || mat.ncols() != mat.nrows() {
            return Err(Error::Input(format!(
                "Gram matrix must be square of dimension {} x fiber {}",
                points.len(),
                fiber_dim
            )));
        }
        HermitianMatrix::new(mat.clone())?;
        Ok(Self {
            points,
            fiber_dim,
            mat,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// The `(p, q)` fiber block as an owned matrix.
    pub fn block(&self, p: usize, q: usize) -> DMatrix<C64> {
        let d = self.fiber_dim;
        self.mat.view((p * d, q * d), (d, d)).into_owned()
    }

    pub fn hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.mat.clone())
    }
}

/// Assemble the Gram matrix of `spec` over `points`.
///
/// Blocks `(p, q)` with `p < q` are evaluated once and mirrored, so the
/// result is Hermitian by construction; diagonal blocks are Hermitized
/// exactly.
pub fn gram(spec: &KernelSpec, points: &[Point]) -> Result<GramMatrix> {
    spec.validate()?;
    if points.is_empty() {
        return Err(Error::Input("gram needs at least one point".into()));
    }
    for p in points {
        spec.contains(p)?;
    }
    let m = points.len();
    let d = spec.fiber_dim();
    let mut mat = DMatrix::<C64>::zeros(m * d, m * d);
    for p in 0..m {
        for q in p..m {
            let b = spec.eval_unchecked(&points[p], &points[q])?;
            if p == q {
                let h = (&b + b.adjoint()) * linalg::re(0.5);
                mat.view_mut((p * d, p * d), (d, d)).copy_from(&h);
            } else {
                mat.view_mut((p * d, q * d), (d, d)).copy_from(&b);
                mat.view_mut((q * d, p * d), (d, d)).copy_from(&b.adjoint());
            }
        }
    }
    linalg::check_finite(&mat, "Gram matrix")?;
    Ok(GramMatrix {
        points: points.to_vec(),
        fiber_dim: d,
        mat,
    })
}

/// PSD verdict of the sampled Gram of `spec`.
pub fn kernel_psd_check(spec: &KernelSpec, points: &[Point], tol: f64) -> Result<Verdict> {
    let g = gram(spec, points)?;
    psd_verdict(&g.hermitian()?, tol)
}

/// PSD verdict of `Gram(K2) - Gram(K1)`, the sampled form of the kernel
/// order `K1 < K2`.
pub fn kernel_order_check(
    k1: &KernelSpec,
    k2: &KernelSpec,
    points: &[Point],
    tol: f64,
) -> Result<Verdict> {
    if k1.fiber_dim() != k2.fiber_dim() {
        return Err(Error::Input(format!(
            "kernel order requires equal fiber dims, got {} and {}",
            k1.fiber_dim(),
            k2.fiber_dim()
        )));
    }
    if k1.arity() != k2.arity() {
        return Err(Error::Input(format!(
            "kernel order requires equal domains, got arity {} and {}",
            k1.arity(),
            k2.arity()
        )));
    }
    let g1 = gram(k1, points)?;
    let g2 = gram(k2, points)?;
    let diff = g2.as_matrix() - g1.as_matrix();
    psd_verdict(&HermitianMatrix::new(diff)?, tol)
}

/// Transport a kernel along a bijection given as a paired point list
/// `(new_label, original_point)`.
///
/// The result is a Gram-table spec over the new labels whose Gram equals
/// the Gram of the original spec under the pairing.
pub fn transport(spec: &KernelSpec, pairing: &[(Point, Point)]) -> Result<KernelSpec> {
    if pairing.is_empty() {
        return Err(Error::Input("transport needs a nonempty pairing".into()));
    }
    for i in 0..pairing.len() {
        for j in (i + 1)..pairing.len() {
            if pairing[i].0.coords() == pairing[j].0.coords() {
                return Err(Error::Input(
                    "transport pairing is not injective on new labels".into(),
                ));
            }
            if pairing[i].1.coords() == pairing[j].1.coords() {
                return Err(Error::Input(
                    "transport pairing is not injective on original points".into(),
                ));
            }
        }
    }
    let originals: Vec<Point> = pairing.iter().map(|(_, old)| old.clone()).collect();
    let g = gram(spec, &originals)?;
    let m = originals.len();
    let blocks: Vec<Vec<DMatrix<C64>>> = (0..m)
        .map(|p| (0..m).map(|q| g.block(p, q)).collect())
        .collect();
    let table = KernelSpec::GramTable {
        points: pairing.iter().map(|(new, _)| new.clone()).collect(),
        fiber_dim: spec.fiber_dim(),
        blocks,
    };
    table.validate()?;
    Ok(table)
}

/// Materialize any spec to the universal Gram-table interchange form over
/// the given points (used for file export).
pub fn materialize_gram_table(spec: &KernelSpec, points: &[Point]) -> Result<KernelSpec> {
    let g = gram(spec, points)?;
    let m = points.len();
    let blocks: Vec<Vec<DMatrix<C64>>> = (0..m)
        .map(|p| (0..m).map(|q| g.block(p, q)).collect())
        .collect();
    let table = KernelSpec::GramTable {
        points: points.to_vec(),
        fiber_dim: spec.fiber_dim(),
        blocks,
    };
    table.validate()?;
    Ok(table)
}
