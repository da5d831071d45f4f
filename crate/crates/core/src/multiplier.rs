//! Multiplier evaluation, certified norm lower bounds, isometry defects,
//! the kernel-induced equivalence partition, and the constancy classifier.
//!
//! A multiplier norm is bounded below through the pencil criterion: the
//! least `c` with `phi(l) K1(l, m) phi(m)* < c^2 K2(l, m)` on the sample.
//! Growing the sample never lowers the bound.
//!
//! The classifier is a detector, not a theorem prover: universal statements
//! about all isometric multipliers are exercised on concrete candidate
//! batteries.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{gram, KernelSpec};
use crate::linalg::{self, C64};
use crate::numerics::{generalized_max_eig, HermitianMatrix, PINV_CUTOFF_REL};
use crate::point::Point;
use crate::poly::Polynomial;

/// An evaluable matrix-valued function on the domain.
#[derive(Debug, Clone)]
pub enum MultiplierSpec {
    /// A constant matrix.
    Constant { matrix: DMatrix<C64> },
    /// The scalar coordinate function `z_j` (1-based).
    Coordinate { j: usize },
    /// A matrix of finitely supported polynomials.
    PolynomialMatrix {
        out_dim: usize,
        in_dim: usize,
        arity: usize,
        entries: BTreeMap<(usize, usize), Polynomial>,
    },
    /// Pointwise tensor `F1(l) (x) F2(l) (x) ...` of the factors.
    Product { factors: Vec<MultiplierSpec> },
    /// A scalar polynomial.
    ScalarPolynomial { poly: Polynomial },
}

impl MultiplierSpec {
    pub fn constant(matrix: DMatrix<C64>) -> Self {
        MultiplierSpec::Constant { matrix }
    }

    pub fn scalar_poly(poly: Polynomial) -> Self {
        MultiplierSpec::ScalarPolynomial { poly }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MultiplierSpec::Constant { matrix } => {
                linalg::check_finite(matrix, "constant multiplier")?;
                if matrix.nrows() == 0 || matrix.ncols() == 0 {
                    return Err(Error::Input("constant multiplier must be nonempty".into()));
                }
            }
            MultiplierSpec::Coordinate { j } => {
                if *j == 0 {
                    return Err(Error::Input("coordinate index is 1-based; got 0".into()));
                }
            }
            MultiplierSpec::PolynomialMatrix {
                out_dim,
                in_dim,
                arity,
                entries,
            } => {
                if *out_dim == 0 || *in_dim == 0 {
                    return Err(Error::Input("multiplier dims must be >= 1".into()));
                }
                for ((r, c), p) in entries {
                    if r >= out_dim || c >= in_dim {
                        return Err(Error::Input(format!(
                            "polynomial_matrix entry ({r},{c}) outside {out_dim}x{in_dim}"
                        )));
                    }
                    if p.arity() != *arity {
                        return Err(Error::Input(
                            "polynomial_matrix entries have mixed arity".into(),
                        ));
                    }
                }
            }
            MultiplierSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Input("product multiplier needs factors".into()));
                }
                for f in factors {
                    f.validate()?;
                }
            }
            MultiplierSpec::ScalarPolynomial { .. } => {}
        }
        Ok(())
    }

    pub fn out_dim(&self) -> usize {
        match self {
            MultiplierSpec::Constant { matrix } => matrix.nrows(),
            MultiplierSpec::Coordinate { .. } | MultiplierSpec::ScalarPolynomial { .. } => 1,
            MultiplierSpec::PolynomialMatrix { out_dim, .. } => *out_dim,
            MultiplierSpec::Product { factors } => factors.iter().map(|f| f.out_dim()).product(),
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            MultiplierSpec::Constant { matrix } => matrix.ncols(),
            MultiplierSpec::Coordinate { .. } | MultiplierSpec::ScalarPolynomial { .. } => 1,
            MultiplierSpec::PolynomialMatrix { in_dim, .. } => *in_dim,
            MultiplierSpec::Product { factors } => factors.iter().map(|f| f.in_dim()).product(),
        }
    }

    /// Evaluate at a point as an `out_dim x in_dim` matrix.
    pub fn eval(&self, p: &Point) -> Result<DMatrix<C64>> {
        match self {
            MultiplierSpec::Constant { matrix } => Ok(matrix.clone()),
            MultiplierSpec::Coordinate { j } => {
                if *j > p.arity() {
                    return Err(Error::Input(format!(
                        "coordinate {} evaluated at a point of arity {}",
                        j,
                        p.arity()
                    )));
                }
                Ok(DMatrix::from_element(1, 1, p.coords()[j - 1]))
            }
            MultiplierSpec::PolynomialMatrix {
                out_dim,
                in_dim,
                entries,
                ..
            } => {
                let mut m = DMatrix::<C64>::zeros(*out_dim, *in_dim);
                for ((r, c), poly) in entries {
                    m[(*r, *c)] = poly.eval(p.coords())?;
                }
                Ok(m)
            }
            MultiplierSpec::Product { factors } => {
                let mut acc = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
                for f in factors {
                    acc = linalg::kron(&acc, &f.eval(p)?);
                }
                Ok(acc)
            }
            MultiplierSpec::ScalarPolynomial { poly } => {
                Ok(DMatrix::from_element(1, 1, poly.eval(p.coords())?))
            }
        }
    }
}

/// Certified lower bound on the multiplier norm of `phi` between the
/// spaces of `k1` and `k2`, from the pencil over the sampled points.
///
/// Returns `+inf` when the pencil is infeasible on the sample, i.e. the
/// candidate is certified *not* to be a multiplier there. The bound is
/// monotone nondecreasing as points are added.
pub fn multiplier_norm_lower(
    phi: &MultiplierSpec,
    k1: &KernelSpec,
    k2: &KernelSpec,
    points: &[Point],
    reg: f64,
) -> Result<f64> {
    phi.validate()?;
    if phi.in_dim() != k1.fiber_dim() || phi.out_dim() != k2.fiber_dim() {
        return Err(Error::Input(format!(
            "multiplier is {}x{} but kernels have fibers {} -> {}",
            phi.out_dim(),
            phi.in_dim(),
            k1.fiber_dim(),
            k2.fiber_dim()
        )));
    }
    let a = conjugated_gram(phi, k1, points)?;
    let b = gram(k2, points)?.hermitian()?;
    match generalized_max_eig(&a, &b, reg) {
        Ok(c2) => Ok(c2.max(0.0).sqrt()),
        Err(Error::Infeasible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Gram of the adjoint-acted section family:
/// blocks `phi(l_p) K(l_p, l_q) phi(l_q)*`.
fn conjugated_gram(
    phi: &MultiplierSpec,
    k: &KernelSpec,
    points: &[Point],
) -> Result<HermitianMatrix> {
    let g = gram(k, points)?;
    let big = block_diag_values(phi, points)?;
    let conj = &big * g.as_matrix() * big.adjoint();
    HermitianMatrix::new(conj)
}

/// Block diagonal of the multiplier values over the point list.
fn block_diag_values(phi: &MultiplierSpec, points: &[Point]) -> Result<DMatrix<C64>> {
    let d_out = phi.out_dim();
    let d_in = phi.in_dim();
    let m = points.len();
    let mut big = DMatrix::<C64>::zeros(m * d_out, m * d_in);
    for (p, pt) in points.iter().enumerate() {
        let v = phi.eval(pt)?;
        big.view_mut((p * d_out, p * d_in), (d_out, d_in)).copy_from(&v);
    }
    Ok(big)
}

/// The two finite-sample defects attached to a square multiplier
/// candidate, both computed over the standard-basis direction battery at
/// every sampled point.
///
/// * `adjoint`: max entry difference between the Gram of the adjoint-acted
///   sections `K(., l_p) phi(l_p)* e_i` and the Gram of the plain sections;
///   zero iff the adjoint acts isometrically on the sampled span (so the
///   multiplication operator is coisometric there).
/// * `forward`: max entry difference between the Gram of the compressions
///   `P_V (phi . section)` and the plain Gram; zero is the sampled
///   certificate of the multiplication operator itself being isometric.
#[derive(Debug, Clone, Copy)]
pub struct IsometryDefects {
    pub adjoint: f64,
    pub forward: f64,
}

impl IsometryDefects {
    pub fn max(&self) -> f64 {
        self.adjoint.max(self.forward)
    }
}

/// The adjoint-direction defect alone: max entry difference of the
/// adjoint-acted Gram against the plain Gram (see
/// [`IsometryDefects::adjoint`]).
pub fn isometry_defect(phi: &MultiplierSpec, k: &KernelSpec, points: &[Point]) -> Result<f64> {
    Ok(isometry_defects(phi, k, points)?.adjoint)
}

/// Both directions of the isometry test over the default battery (the
/// standard basis at every sampled point); see [`IsometryDefects`].
pub fn isometry_defects(
    phi: &MultiplierSpec,
    k: &KernelSpec,
    points: &[Point],
) -> Result<IsometryDefects> {
    let d = k.fiber_dim();
    let battery: Vec<DVector<C64>> = (0..d)
        .map(|i| {
            let mut e = DVector::zeros(d);
            e[i] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    isometry_defects_with_battery(phi, k, points, &battery)
}

/// Isometry defects over a caller-chosen direction battery, applied at
/// every sampled point. Partial isometries need richer batteries than the
/// standard basis; pass the initial-space directions here.
pub fn isometry_defects_with_battery(
    phi: &MultiplierSpec,
    k: &KernelSpec,
    points: &[Point],
    battery: &[DVector<C64>],
) -> Result<IsometryDefects> {
    phi.validate()?;
    let d = k.fiber_dim();
    if phi.in_dim() != d || phi.out_dim() != d {
        return Err(Error::Input(format!(
            "isometry defect needs a square multiplier on the fiber: {}x{} vs fiber {}",
            phi.out_dim(),
            phi.in_dim(),
            d
        )));
    }
    if battery.is_empty() || battery.iter().any(|e| e.len() != d) {
        return Err(Error::Input(format!(
            "direction battery must be nonempty with directions of dim {d}"
        )));
    }
    let g = gram(k, points)?;
    let gm = g.as_matrix();
    let big = block_diag_values(phi, points)?;

    // Battery expansion: one block of directions per point.
    let bsize = battery.len();
    let m = points.len();
    let mut e = DMatrix::<C64>::zeros(m * d, m * bsize);
    for p in 0..m {
        for (i, dir) in battery.iter().enumerate() {
            for r in 0..d {
                e[(p * d + r, p * bsize + i)] = dir[r];
            }
        }
    }
    let g_batt = e.adjoint() * gm * &e;

    let adj = e.adjoint() * &big * gm * big.adjoint() * &e;
    let adjoint = linalg::max_abs(&(&adj - &g_batt));

    // Pairings of the pushed-forward sections against the battery span:
    // W[(p,i),(q,j)] = <phi . s_{q,j}, s_{p,i}>.
    let w = e.adjoint() * &big * gm * &e;
    let h = HermitianMatrix::new((&g_batt + g_batt.adjoint()) * linalg::re(0.5))?;
    let (vals, vecs) = h.eigen();
    let norm = vals.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let pinv = linalg::pinv_hermitian(&vals, &vecs, PINV_CUTOFF_REL * norm);
    let fwd = w.adjoint() * pinv * &w;
    let forward = linalg::max_abs(&(&fwd - &g_batt));

    Ok(IsometryDefects { adjoint, forward })
}

/// Partition of the sampled points into classes connected by
/// `|k(l, m)| > edge_tol`.
#[derive(Debug, Clone)]
pub struct EquivalencePartition {
    pub points: Vec<Point>,
    pub class_ids: Vec<usize>,
    pub edge_tol: f64,
}

impl EquivalencePartition {
    pub fn n_classes(&self) -> usize {
        self.class_ids.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Indices of the points in each class, classes in id order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes()];
        for (i, &c) in self.class_ids.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Connected components of the graph with edges `|k(l, m)| > edge_tol`.
///
/// `edge_tol = None` uses the default `1e-9 * max |k|` over the sample; the
/// relation is threshold-sensitive, so the threshold used is always carried
/// in the output.
pub fn kernel_equiv_classes(
    k: &KernelSpec,
    points: &[Point],
    edge_tol: Option<f64>,
) -> Result<EquivalencePartition> {
    if !k.is_scalar() {
        return Err(Error::Input(
            "equivalence classes are defined for scalar kernels".into(),
        ));
    }
    let g = gram(k, points)?;
    let gm = g.as_matrix();
    let m = points.len();
    let max_abs = linalg::max_abs(gm);
    let edge_tol = edge_tol.unwrap_or(1e-9 * max_abs);

    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for p in 0..m {
        for q in (p + 1)..m {
            if gm[(p, q)].norm() > edge_tol {
                let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut ids = BTreeMap::new();
    let mut class_ids = Vec::with_capacity(m);
    for i in 0..m {
        let root = find(&mut parent, i);
        let next = ids.len();
        let id = *ids.entry(root).or_insert(next);
        class_ids.push(id);
    }
    Ok(EquivalencePartition {
        points: points.to_vec(),
        class_ids,
        edge_tol,
    })
}

/// Outcome of the constancy classifier for a candidate multiplier on a
/// quasiscalar product space.
#[derive(Debug, Clone)]
pub enum Classification {
    /// The candidate is isometric on the sample and constant on every
    /// equivalence class; one common value per class, in class-id order.
    ConstantIsometry { values: Vec<DMatrix<C64>> },
    /// Isometric on the sample but not constant on some class: either a
    /// counterexample candidate or an insufficient sample.
    NonconstantIsometricOnSample { max_variation: f64 },
    /// Fails the sampled isometry test.
    NotIsometric { defect: f64 },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::ConstantIsometry { .. } => "constant_isometry",
            Classification::NonconstantIsometricOnSample { .. } => {
                "nonconstant_isometric_on_sample"
            }
            Classification::NotIsometric { .. } => "not_isometric",
        }
    }
}

/// Classify a candidate multiplier on the quasiscalar space of
/// `k1 k2 . I_fiber`, with the equivalence partition taken from the
/// designated first factor `k1`.
pub fn isometric_multiplier_classify(
    phi: &MultiplierSpec,
    k1: &KernelSpec,
    k2: &KernelSpec,
    fiber_dim: usize,
    points: &[Point],
    tol: f64,
) -> Result<Classification> {
    if !k1.is_scalar() || !k2.is_scalar() {
        return Err(Error::Input(
            "classifier factors k1, k2 must be scalar kernels".into(),
        ));
    }
    if tol <= 0.0 {
        return Err(Error::Input("tol must be positive".into()));
    }
    let space = KernelSpec::Quasiscalar {
        base: Box::new(KernelSpec::Product {
            factors: vec![k1.clone(), k2.clone()],
        }),
        fiber_dim,
    };
    space.validate()?;
    let defects = isometry_defects(phi, &space, points)?;
    if defects.forward > tol {
        return Ok(Classification::NotIsometric {
            defect: defects.forward,
        });
    }
    let partition = kernel_equiv_classes(k1, points, None)?;
    let values: Vec<DMatrix<C64>> = points
        .iter()
        .map(|p| phi.eval(p))
        .collect::<Result<_>>()?;
    let mut max_variation = 0.0f64;
    for class in partition.classes() {
        for (a, &i) in class.iter().enumerate() {
            for &j in &class[a + 1..] {
                let dev = linalg::spectral_norm(&(&values[i] - &values[j]));
                max_variation = max_variation.max(dev);
            }
        }
    }
    if max_variation > tol {
        return Ok(Classification::NonconstantIsometricOnSample { max_variation });
    }
    let mut reps = Vec::new();
    let mut worst_iso = 0.0f64;
    for class in partition.classes() {
        let v = values[class[0]].clone();
        let d = v.ncols();
        let dev = linalg::spectral_norm(&(v.adjoint() * &v - DMatrix::identity(d, d)));
        worst_iso = worst_iso.max(dev);
        reps.push(v);
    }
    if worst_iso > tol {
        return Ok(Classification::NotIsometric { defect: worst_iso });
    }
    Ok(Classification::ConstantIsometry { values: reps })
}
