//! Finite truncations of the catalog reproducing kernel Hilbert modules:
//! monomial bases, shift matrices, joint-eigenspace checks, inverse-kernel
//! coefficient forms, submodule compressions, doubly-commuting defects and
//! intertwiner-to-multiplier extraction.
//!
//! The central discipline is shielding: every truncated-operator assertion
//! is restricted to total degrees `<= N - D`, where `D` bounds the degree
//! shift of the expression under test. On that block, truncation cannot
//! corrupt entries, so identities hold exactly rather than approximately.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{self, C64};
use crate::multiplier::MultiplierSpec;
use crate::numerics::HermitianMatrix;
use crate::point::Point;
use crate::poly::{graded_lex_cmp, multi_indices_up_to, total_degree, MultiIndex, Polynomial};

/// Orthonormal monomial model of a catalog space, truncated to total
/// degree `N`, with the compressed shift tuple.
///
/// Supported spaces: the Hardy space of the polydisc, the weighted Bergman
/// space of the disc with integer weight, and quasiscalar lifts of either.
#[derive(Debug, Clone)]
pub struct TruncatedModule {
    space: KernelSpec,
    scalar_space: KernelSpec,
    fiber_dim: usize,
    degree: usize,
    arity: usize,
    basis: Vec<MultiIndex>,
    norms: Vec<f64>,
    scalar_shifts: Vec<DMatrix<C64>>,
    /// Intrinsic reliability shield: adjoint shifts are exact on the whole
    /// truncation, single shifts on degrees `<= N - 1`.
    shield: usize,
}

type NormRule = Box<dyn Fn(&[u32]) -> f64>;

/// Monomial data of the catalog space: the ordered multi-indices with
/// `|k| <= N` in graded-lex order, and `||z^k||` for each.
pub fn monomial_basis(space: &KernelSpec, degree: usize) -> Result<(Vec<MultiIndex>, Vec<f64>)> {
    if degree == 0 {
        return Err(Error::Input("truncation degree must be at least 1".into()));
    }
    let (n, norms_of): (usize, NormRule) = match space {
        KernelSpec::SzegoPolydisc { n } => (*n, Box::new(|_: &[u32]| 1.0)),
        KernelSpec::BergmanBall { n: 1, alpha } => {
            if alpha.fract() != 0.0 {
                return Err(Error::Unsupported(format!(
                    "truncated model needs an integer Bergman weight, got alpha = {alpha}"
                )));
            }
            let a = *alpha;
            (
                1,
                Box::new(move |k: &[u32]| {
                    // ||z^k||^2 = 1 / binom(k + alpha - 1, k).
                    let k = k[0] as f64;
                    let mut c = 1.0;
                    let mut j = 1.0;
                    while j <= k {
                        c *= (a - 1.0 + j) / j;
                        j += 1.0;
                    }
                    1.0 / c.sqrt()
                }),
            )
        }
        KernelSpec::Quasiscalar { base, .. } => return monomial_basis(base, degree),
        other => {
            return Err(Error::Unsupported(format!(
                "no truncated monomial model for this spec (fiber {}, arity {})",
                other.fiber_dim(),
                other.arity()
            )))
        }
    };
    let basis = multi_indices_up_to(n, degree as u32);
    let norms = basis.iter().map(|k| norms_of(k)).collect();
    Ok((basis, norms))
}

impl TruncatedModule {
    pub fn new(space: &KernelSpec, degree: usize) -> Result<Self> {
        space.validate()?;
        let (scalar_space, fiber_dim) = match space {
            KernelSpec::Quasiscalar { base, fiber_dim } => ((**base).clone(), *fiber_dim),
            other => (other.clone(), 1),
        };
        let (basis, norms) = monomial_basis(&scalar_space, degree)?;
        let arity = scalar_space.arity();
        let mut index_of: BTreeMap<&[u32], usize> = BTreeMap::new();
        for (i, k) in basis.iter().enumerate() {
            index_of.insert(k.as_slice(), i);
        }
        let dim = basis.len();
        let mut scalar_shifts = Vec::with_capacity(arity);
        for j in 0..arity {
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for (col, k) in basis.iter().enumerate() {
                if total_degree(k) as usize >= degree {
                    continue; // graded: zero on the top layer
                }
                let mut up = k.clone();
                up[j] += 1;
                let row = index_of[up.as_slice()];
                m[(row, col)] = linalg::re(norms[row] / norms[col]);
            }
            scalar_shifts.push(m);
        }
        Ok(Self {
            space: space.clone(),
            scalar_space,
            fiber_dim,
            degree,
            arity,
            basis,
            norms,
            scalar_shifts,
            shield: 1,
        })
    }

    pub fn space(&self) -> &KernelSpec {
        &self.space
    }

    pub fn scalar_space(&self) -> &KernelSpec {
        &self.scalar_space
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn shield(&self) -> usize {
        self.shield
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Dimension of the scalar monomial model.
    pub fn scalar_dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension including the fiber.
    pub fn dim(&self) -> usize {
        self.basis.len() * self.fiber_dim
    }

    pub fn index_of(&self, k: &[u32]) -> Option<usize> {
        self.basis.iter().position(|b| b.as_slice() == k)
    }

    /// Shift matrices on the scalar monomial model.
    pub fn scalar_shifts(&self) -> &[DMatrix<C64>] {
        &self.scalar_shifts
    }

    /// Shift matrices on the full (fiber-expanded) model.
    pub fn shift_matrices(&self) -> Vec<DMatrix<C64>> {
        if self.fiber_dim == 1 {
            self.scalar_shifts.clone()
        } else {
            let id = DMatrix::identity(self.fiber_dim, self.fiber_dim);
            self.scalar_shifts
                .iter()
                .map(|m| linalg::kron(m, &id))
                .collect()
        }
    }

    /// Indices (fiber-expanded) of basis vectors with total degree at most
    /// `cutoff`.
    pub fn shielded_indices(&self, cutoff: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, k) in self.basis.iter().enumerate() {
            if total_degree(k) as usize <= cutoff {
                for a in 0..self.fiber_dim {
                    out.push(i * self.fiber_dim + a);
                }
            }
        }
        out
    }

    /// Embed a fiber-valued polynomial into norm-weighted coordinates (the
    /// orthonormal monomial basis), one component per fiber slot.
    pub fn embed(&self, components: &[Polynomial]) -> Result<DVector<C64>> {
        if components.len() != self.fiber_dim {
            return Err(Error::Input(format!(
                "vector polynomial has {} components, fiber is {}",
                components.len(),
                self.fiber_dim
            )));
        }
        let d = self.fiber_dim;
        let mut v = DVector::<C64>::zeros(self.dim());
        for (a, poly) in components.iter().enumerate() {
            if poly.arity() != self.arity {
                return Err(Error::Input("polynomial arity mismatch".into()));
            }
            for (k, c) in poly.coeffs() {
                let idx = self.index_of(k).ok_or_else(|| {
                    Error::Input(format!(
                        "polynomial degree {} exceeds truncation {}",
                        total_degree(k),
                        self.degree
                    ))
                })?;
                v[idx * d + a] += c * linalg::re(self.norms[idx]);
            }
        }
        Ok(v)
    }
}

/// Numerical dimension of the joint kernel of the stacked adjoint-shift
/// pencil `(M_j* - conj(w_j) I)` with output rows restricted to the
/// shielded degrees `<= N - 1`.
///
/// For a good kernel this is 1 at every admissible `w`; the admissible
/// region is capped at coordinate modulus 0.7 because the singular gap
/// collapses toward the boundary at fixed truncation.
pub fn good_kernel_check(tm: &TruncatedModule, w: &Point, tol: f64) -> Result<usize> {
    if tm.fiber_dim != 1 {
        return Err(Error::Input(
            "joint-eigenspace check applies to the scalar model".into(),
        ));
    }
    if w.arity() != tm.arity {
        return Err(Error::Input("point arity mismatch".into()));
    }
    tm.scalar_space.contains(w)?;
    if let Some(bad) = w.coords().iter().find(|z| z.norm() > 0.7) {
        return Err(Error::Reliability(format!(
            "|w_j| = {:.3} is too close to the boundary for truncation {}; \
             the shielded check requires coordinate modulus <= 0.7",
            bad.norm(),
            tm.degree
        )));
    }
    if tol <= 0.0 {
        return Err(Error::Input("tol must be positive".into()));
    }
    let dim = tm.scalar_dim();
    let rows: Vec<usize> = tm
        .basis
        .iter()
        .enumerate()
        .filter(|(_, k)| (total_degree(k) as usize) < tm.degree)
        .map(|(i, _)| i)
        .collect();
    let mut stacked = DMatrix::<C64>::zeros(rows.len() * tm.arity, dim);
    for (j, m) in tm.scalar_shifts.iter().enumerate() {
        let op = m.adjoint() - DMatrix::identity(dim, dim) * w.coords()[j].conj();
        for (r, &row) in rows.iter().enumerate() {
            stacked.row_mut(j * rows.len() + r).copy_from(&op.row(row));
        }
    }
    let sv = linalg::singular_values(&stacked);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(dim);
    }
    let rank = sv.iter().filter(|&&s| s > tol * smax).count();
    Ok(dim - rank)
}

/// Finitely supported coefficients `a_{k,l}` of an inverse kernel
/// `1/g(z, w) = sum a_{k,l} z^k conj(w)^l`.
#[derive(Debug, Clone)]
pub struct InverseKernelPoly {
    arity: usize,
    coeffs: BTreeMap<(MultiIndex, MultiIndex), C64>,
}

impl InverseKernelPoly {
    pub fn new(
        arity: usize,
        coeffs: impl IntoIterator<Item = ((MultiIndex, MultiIndex), C64)>,
    ) -> Result<Self> {
        let coeffs: BTreeMap<(MultiIndex, MultiIndex), C64> = coeffs.into_iter().collect();
        for ((k, l), a) in &coeffs {
            if k.len() != arity || l.len() != arity {
                return Err(Error::Input("coefficient arity mismatch".into()));
            }
            let sym = coeffs
                .get(&(l.clone(), k.clone()))
                .copied()
                .unwrap_or(C64::new(0.0, 0.0));
            if (a - sym.conj()).norm() > 1e-12 {
                return Err(Error::Input(
                    "inverse-kernel coefficients must satisfy a_kl = conj(a_lk)".into(),
                ));
            }
        }
        Ok(Self { arity, coeffs })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &C64)> {
        self.coeffs.iter()
    }

    /// Max total degree over the coefficient support; this is the degree
    /// shift bound `D` used for shielding.
    pub fn shield(&self) -> usize {
        self.coeffs
            .keys()
            .map(|(k, l)| (total_degree(k) as usize).max(total_degree(l) as usize))
            .max()
            .unwrap_or(0)
    }

    /// Evaluate `sum a_{k,l} z^k conj(w)^l`.
    pub fn eval_pair(&self, z: &Point, w: &Point) -> Result<C64> {
        if z.arity() != self.arity || w.arity() != self.arity {
            return Err(Error::Input("point arity mismatch".into()));
        }
        let mut acc = C64::new(0.0, 0.0);
        for ((k, l), a) in &self.coeffs {
            let mut term = *a;
            for (j, &e) in k.iter().enumerate() {
                term *= z.coords()[j].powu(e);
            }
            for (j, &e) in l.iter().enumerate() {
                term *= w.coords()[j].conj().powu(e);
            }
            acc += term;
        }
        Ok(acc)
    }
}

/// Inverse-kernel coefficients for the catalog: the polydisc Hardy kernel
/// (inclusion-exclusion over coordinate subsets) and the integer-weight
/// Bergman kernel of the disc (binomial expansion).
pub fn inverse_kernel_poly(space: &KernelSpec) -> Result<InverseKernelPoly> {
    match space {
        KernelSpec::SzegoPolydisc { n } => {
            let mut coeffs = BTreeMap::new();
            for mask in 0..(1u32 << n) {
                let k: MultiIndex = (0..*n).map(|j| (mask >> j) & 1).collect();
                let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                coeffs.insert((k.clone(), k), linalg::re(sign));
            }
            InverseKernelPoly::new(*n, coeffs)
        }
        KernelSpec::BergmanBall { n: 1, alpha } if alpha.fract() == 0.0 && *alpha > 1.0 => {
            let a = *alpha as i64;
            let mut coeffs = BTreeMap::new();
            let mut binom = 1.0f64;
            for j in 0..=a {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                coeffs.insert((vec![j as u32], vec![j as u32]), linalg::re(sign * binom));
                binom *= (a - j) as f64 / (j + 1) as f64;
            }
            InverseKernelPoly::new(1, coeffs)
        }
        KernelSpec::Quasiscalar { base, .. } => inverse_kernel_poly(base),
        other => Err(Error::Unsupported(format!(
            "inverse kernel is not a polynomial for this spec (arity {})",
            other.arity()
        ))),
    }
}

/// How a truncated submodule was generated.
#[derive(Debug, Clone)]
pub enum SubmoduleOrigin {
    /// Span of shifted vector polynomials `z^k p_i`, total degree <= N.
    /// Each generator carries one polynomial per fiber component.
    Generators(Vec<Vec<Polynomial>>),
    /// Column space of the multiplication operator of a polynomial
    /// multiplier, up to degree N.
    Multiplier(MultiplierSpec),
}

/// A truncation of a shift-invariant subspace: orthonormal columns spanning
/// `S_N` inside the parent's coefficient space.
#[derive(Debug, Clone)]
pub struct SubmoduleTrunc {
    parent: TruncatedModule,
    origin: SubmoduleOrigin,
    basis_matrix: DMatrix<C64>,
    col_degrees: Vec<usize>,
    dropped_columns: usize,
}

impl SubmoduleTrunc {
    pub fn parent(&self) -> &TruncatedModule {
        &self.parent
    }

    pub fn origin(&self) -> &SubmoduleOrigin {
        &self.origin
    }

    pub fn dim(&self) -> usize {
        self.basis_matrix.ncols()
    }

    pub fn basis_matrix(&self) -> &DMatrix<C64> {
        &self.basis_matrix
    }

    /// Nominal total degree of each basis column (the degree of the
    /// generating product it came from; an upper bound on the true one).
    pub fn col_degrees(&self) -> &[usize] {
        &self.col_degrees
    }

    /// Columns dropped by the rank threshold during orthonormalization.
    pub fn dropped_columns(&self) -> usize {
        self.dropped_columns
    }

    /// The compressed shift tuple `R_j = B* (M_j (x) I) B`.
    pub fn compressed_shifts(&self) -> Vec<DMatrix<C64>> {
        self.parent
            .shift_matrices()
            .iter()
            .map(|m| self.basis_matrix.adjoint() * m * &self.basis_matrix)
            .collect()
    }

    /// Indices of basis columns with nominal degree at most `cutoff`.
    pub fn shielded_columns(&self, cutoff: usize) -> Vec<usize> {
        self.col_degrees
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= cutoff)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Express a multiplier structurally as an `out_dim x in_dim` matrix of
/// polynomials in `arity` variables.
pub fn multiplier_as_poly_matrix(
    phi: &MultiplierSpec,
    arity: usize,
) -> Result<Vec<Vec<Polynomial>>> {
    match phi {
        MultiplierSpec::Constant { matrix } => Ok((0..matrix.nrows())
            .map(|r| {
                (0..matrix.ncols())
                    .map(|c| Polynomial::constant(arity, matrix[(r, c)]))
                    .collect()
            })
            .collect()),
        MultiplierSpec::Coordinate { j } => Ok(vec![vec![Polynomial::coordinate(arity, *j)?]]),
        MultiplierSpec::ScalarPolynomial { poly } => {
            if poly.arity() != arity {
                return Err(Error::Input("polynomial arity mismatch".into()));
            }
            Ok(vec![vec![poly.clone()]])
        }
        MultiplierSpec::PolynomialMatrix {
            out_dim,
            in_dim,
            arity: a,
            entries,
        } => {
            if *a != arity {
                return Err(Error::Input("polynomial arity mismatch".into()));
            }
            let mut rows = vec![vec![Polynomial::zero(arity); *in_dim]; *out_dim];
            for ((r, c), p) in entries {
                rows[*r][*c] = p.clone();
            }
            Ok(rows)
        }
        MultiplierSpec::Product { factors } => {
            let mut acc = vec![vec![Polynomial::constant(arity, linalg::re(1.0))]];
            for f in factors {
                let fm = multiplier_as_poly_matrix(f, arity)?;
                let (ar, ac) = (acc.len(), acc[0].len());
                let (br, bc) = (fm.len(), fm[0].len());
                let mut next = vec![vec![Polynomial::zero(arity); ac * bc]; ar * br];
                for i in 0..ar {
                    for j in 0..ac {
                        for k in 0..br {
                            for l in 0..bc {
                                next[i * br + k][j * bc + l] = acc[i][j].mul(&fm[k][l])?;
                            }
                        }
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Matrix of the multiplication operator of a polynomial multiplier on the
/// truncated module (fiber-expanded).
pub fn multiplier_matrix(tm: &TruncatedModule, phi: &MultiplierSpec) -> Result<DMatrix<C64>> {
    let entries = multiplier_as_poly_matrix(phi, tm.arity())?;
    let d = tm.fiber_dim();
    if entries.len() != d || entries[0].len() != d {
        return Err(Error::Input(format!(
            "multiplier is {}x{} but the module fiber is {d}",
            entries.len(),
            entries[0].len()
        )));
    }
    let sdim = tm.scalar_dim();
    let mut monomials: BTreeMap<MultiIndex, DMatrix<C64>> = BTreeMap::new();
    for row in &entries {
        for p in row {
            for (k, _) in p.coeffs() {
                monomials.entry(k.clone()).or_default();
            }
        }
    }
    for (k, slot) in monomials.iter_mut() {
        let mut acc = DMatrix::<C64>::identity(sdim, sdim);
        for (j, &e) in k.iter().enumerate() {
            for _ in 0..e {
                acc = &tm.scalar_shifts[j] * acc;
            }
        }
        *slot = acc;
    }
    let mut out = DMatrix::<C64>::zeros(sdim * d, sdim * d);
    for (k, mono_op) in &monomials {
        let mut coeff = DMatrix::<C64>::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                coeff[(r, c)] = entries[r][c].coeff(k);
            }
        }
        if linalg::max_abs(&coeff) == 0.0 {
            continue;
        }
        out += linalg::kron(mono_op, &coeff);
    }
    Ok(out)
}

/// Truncate a submodule: `S_N = span { z^k p_i : total degree <= N }`,
/// orthonormalized by modified Gram-Schmidt in norm-weighted coefficient
/// space (threshold 1e-12, rank decisions logged).
pub fn submodule_truncate(
    tm: &TruncatedModule,
    origin: &SubmoduleOrigin,
) -> Result<SubmoduleTrunc> {
    let generators: Vec<Vec<Polynomial>> = match origin {
        SubmoduleOrigin::Generators(gens) => gens.clone(),
        SubmoduleOrigin::Multiplier(theta) => {
            let cols = multiplier_as_poly_matrix(theta, tm.arity())?;
            if cols.len() != tm.fiber_dim() {
                return Err(Error::Input(format!(
                    "multiplier output dim {} does not match module fiber {}",
                    cols.len(),
                    tm.fiber_dim()
                )));
            }
            let in_dim = cols[0].len();
            (0..in_dim)
                .map(|c| cols.iter().map(|row| row[c].clone()).collect())
                .collect()
        }
    };
    if generators.is_empty() {
        return Err(Error::Input("submodule needs at least one generator".into()));
    }
    for g in &generators {
        if g.len() != tm.fiber_dim() {
            return Err(Error::Input(format!(
                "generator has {} components, fiber is {}",
                g.len(),
                tm.fiber_dim()
            )));
        }
        if g.iter().all(|p| p.is_zero()) {
            return Err(Error::Input("zero generator".into()));
        }
    }
    let n = tm.arity();
    let big_n = tm.degree();
    // Enumerate z^k g_i ordered by total degree, then generator, then k.
    let mut jobs: Vec<(usize, usize, MultiIndex)> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        let gen_deg = g.iter().map(|p| p.degree() as usize).max().unwrap_or(0);
        if gen_deg > big_n {
            return Err(Error::Input(format!(
                "generator degree {gen_deg} exceeds truncation {big_n}"
            )));
        }
        for k in multi_indices_up_to(n, (big_n - gen_deg) as u32) {
            jobs.push((gen_deg + total_degree(&k) as usize, i, k));
        }
    }
    jobs.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| graded_lex_cmp(&a.2, &b.2))
    });
    let mut cols = Vec::with_capacity(jobs.len());
    let mut degs = Vec::with_capacity(jobs.len());
    for (deg, i, k) in &jobs {
        let shifted: Vec<Polynomial> = generators[*i]
            .iter()
            .map(|p| p.shift(k))
            .collect::<Result<_>>()?;
        cols.push(tm.embed(&shifted)?);
        degs.push(*deg);
    }
    let (basis, kept) = linalg::orthonormalize_columns(&cols, 1e-12);
    let dropped = cols.len() - basis.len();
    if dropped > 0 {
        log::debug!("submodule_truncate: dropped {dropped} dependent generator columns");
    }
    if basis.is_empty() {
        return Err(Error::Input("submodule truncation is empty".into()));
    }
    let mut bm = DMatrix::<C64>::zeros(tm.dim(), basis.len());
    for (c, v) in basis.iter().enumerate() {
        bm.set_column(c, v);
    }
    let col_degrees = kept.iter().map(|&i| degs[i]).collect();
    Ok(SubmoduleTrunc {
        parent: tm.clone(),
        origin: origin.clone(),
        basis_matrix: bm,
        col_degrees,
        dropped_columns: dropped,
    })
}

/// Result of assembling an inverse-kernel operator form on the shielded
/// block.
#[derive(Debug, Clone)]
pub struct BrehmerForm {
    /// The form restricted to shielded vectors (exact at this truncation).
    pub matrix: HermitianMatrix,
    /// Degree-shift bound of the expression.
    pub shield: usize,
    pub shielded_dim: usize,
    pub total_dim: usize,
    /// Degree cutoff of the shielded block: `N - shield`.
    pub cutoff: usize,
}

/// Assemble `sum a_{k,l} T^k (T*)^l` for the full shift tuple or a
/// submodule compression, restricted to shielded vectors of degree
/// `<= N - D` where `D` is the coefficient degree bound.
///
/// On the shielded block each term raises intermediate degrees by at most
/// `D`, so truncation cannot corrupt these entries and the block is exact.
pub fn brehmer_form(
    tm: &TruncatedModule,
    coeffs: &InverseKernelPoly,
    compression: Option<&SubmoduleTrunc>,
) -> Result<BrehmerForm> {
    if coeffs.arity() != tm.arity() {
        return Err(Error::Input(format!(
            "coefficient arity {} does not match module arity {}",
            coeffs.arity(),
            tm.arity()
        )));
    }
    let shield = coeffs.shield();
    if tm.degree() < shield + 2 {
        return Err(Error::Input(format!(
            "truncation N = {} is insufficient: need N >= D + 2 with D = {shield}",
            tm.degree()
        )));
    }
    let ops: Vec<DMatrix<C64>> = match compression {
        None => tm.shift_matrices(),
        Some(sub) => sub.compressed_shifts(),
    };
    let dim = ops[0].nrows();
    let mut powers: BTreeMap<MultiIndex, DMatrix<C64>> = BTreeMap::new();
    let power = |k: &MultiIndex, powers: &mut BTreeMap<MultiIndex, DMatrix<C64>>| {
        if let Some(p) = powers.get(k) {
            return p.clone();
        }
        let mut acc = DMatrix::<C64>::identity(dim, dim);
        for (j, &e) in k.iter().enumerate() {
            for _ in 0..e {
                acc = &ops[j] * acc;
            }
        }
        powers.insert(k.clone(), acc.clone());
        acc
    };
    let mut form = DMatrix::<C64>::zeros(dim, dim);
    for ((k, l), a) in coeffs.coeffs() {
        let tk = power(k, &mut powers);
        let tl = power(l, &mut powers);
        form += tk * tl.adjoint() * *a;
    }
    let cutoff = tm.degree() - shield;
    let idx: Vec<usize> = match compression {
        None => tm.shielded_indices(cutoff),
        Some(sub) => sub.shielded_columns(cutoff),
    };
    let restricted = form.select_rows(idx.iter()).select_columns(idx.iter());
    Ok(BrehmerForm {
        matrix: HermitianMatrix::new(restricted)?,
        shield,
        shielded_dim: idx.len(),
        total_dim: dim,
        cutoff,
    })
}

/// Max shielded spectral norm of the mixed commutators
/// `[R_i*, R_j] = R_i* R_j - R_j R_i*` over `i != j`.
///
/// Applies to submodules of the polydisc Hardy module with `n >= 2`.
pub fn doubly_commuting_defect(sub: &SubmoduleTrunc) -> Result<f64> {
    let tm = sub.parent();
    match tm.scalar_space() {
        KernelSpec::SzegoPolydisc { n } if *n >= 2 => {}
        KernelSpec::SzegoPolydisc { .. } => {
            return Err(Error::Input(
                "doubly-commuting defect needs at least two variables".into(),
            ))
        }
        _ => {
            return Err(Error::Input(
                "doubly-commuting defect is defined on polydisc Hardy submodules".into(),
            ))
        }
    }
    if tm.degree() < 2 {
        return Err(Error::Input("truncation too short".into()));
    }
    let r = sub.compressed_shifts();
    let sh = sub.shielded_columns(tm.degree() - 2);
    let mut worst = 0.0f64;
    for i in 0..r.len() {
        for j in (i + 1)..r.len() {
            let c = r[i].adjoint() * &r[j] - &r[j] * r[i].adjoint();
            let block = c.select_rows(sh.iter()).select_columns(sh.iter());
            worst = worst.max(linalg::spectral_norm(&block));
        }
    }
    Ok(worst)
}

/// Recover the multiplier of an operator that commutes with the shift
/// tuple on the shielded block.
///
/// The symbol is read off the action on the constant-fiber vectors and
/// re-verified against the operator; a commutator above `tol` aborts with
/// the witness norm.
pub fn intertwiner_to_multiplier(
    t: &DMatrix<C64>,
    tm: &TruncatedModule,
    tol: f64,
) -> Result<MultiplierSpec> {
    if t.nrows() != tm.dim() || t.ncols() != tm.dim() {
        return Err(Error::Input(format!(
            "operator is {}x{}, module dimension is {}",
            t.nrows(),
            t.ncols(),
            tm.dim()
        )));
    }
    if tol <= 0.0 {
        return Err(Error::Input("tol must be positive".into()));
    }
    linalg::check_finite(t, "operator")?;
    let shifts = tm.shift_matrices();
    let sh = tm.shielded_indices(tm.degree() - 1);
    for (j, m) in shifts.iter().enumerate() {
        let c = t * m - m * t;
        let block = c.select_rows(sh.iter()).select_columns(sh.iter());
        let norm = linalg::spectral_norm(&block);
        if norm > tol {
            return Err(Error::NotIntertwiner {
                coord: j + 1,
                commutator_norm: norm,
            });
        }
    }
    // Read the symbol off the constant-fiber columns.
    let d = tm.fiber_dim();
    let scale = linalg::max_abs(t).max(1.0);
    let mut entries: BTreeMap<(usize, usize), Polynomial> = BTreeMap::new();
    let mut max_deg = 0usize;
    for a in 0..d {
        for b in 0..d {
            let mut coeffs = Vec::new();
            for (idx, k) in tm.basis().iter().enumerate() {
                let val = t[(idx * d + b, a)] * linalg::re(tm.norms()[0] / tm.norms()[idx]);
                if val.norm() > tol * scale {
                    coeffs.push((k.clone(), val));
                    max_deg = max_deg.max(total_degree(k) as usize);
                }
            }
            if !coeffs.is_empty() {
                entries.insert((b, a), Polynomial::from_coeffs(tm.arity(), coeffs)?);
            }
        }
    }
    let phi = MultiplierSpec::PolynomialMatrix {
        out_dim: d,
        in_dim: d,
        arity: tm.arity(),
        entries,
    };
    // Verify T = M_phi where the multiplication matrix is exact: on
    // columns of degree <= N - deg(phi).
    let m_phi = multiplier_matrix(tm, &phi)?;
    let cols = tm.shielded_indices(tm.degree().saturating_sub(max_deg));
    let diff = (t - &m_phi).select_columns(cols.iter());
    let dev = linalg::spectral_norm(&diff);
    if dev > tol * scale * 10.0 {
        return Err(Error::Reliability(format!(
            "extracted symbol does not reproduce the operator: deviation {dev:.3e} \
             at truncation {}",
            tm.degree()
        )));
    }
    Ok(phi)
}
