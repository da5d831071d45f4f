//! The factorization/dilation engine: test `K = g L` on samples, extract
//! the factor symbol, build and verify the dilation isometry, and
//! cross-check against the shielded inverse-kernel operator form.
//!
//! The dilation is constructed on the finite span of kernel sections (the
//! construction extends by totality, so no basis of the function spaces is
//! needed). The factor symbol is recovered only up to a constant unitary
//! on the right; every reported defect is gauge-invariant.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{gram, GramMatrix, KernelSpec};
use crate::linalg::{self, C64};
use crate::numerics::{psd_factor, psd_verdict, HermitianMatrix, Verdict, PINV_CUTOFF_REL};
use crate::point::{sample_points, Point, SampleStrategy};
use crate::trunc::{brehmer_form, inverse_kernel_poly, InverseKernelPoly, TruncatedModule};

/// Sampled factorization test: the PSD verdict of the quotient Gram
/// `L(p, q) = K(p, q) / g(p, q)` together with the Gram itself.
#[derive(Debug, Clone)]
pub struct FactorTest {
    pub verdict: Verdict,
    pub l_gram: GramMatrix,
}

/// Blockwise quotient Gram of `K` by the scalar kernel `g` over the
/// points. A positive verdict is sampled evidence for `K = g L` with `L` a
/// kernel; an indefinite verdict certifies non-factorization, with
/// witness.
pub fn factor_test(
    k: &KernelSpec,
    g: &KernelSpec,
    points: &[Point],
    tol: f64,
) -> Result<FactorTest> {
    if !g.is_scalar() {
        return Err(Error::Input("the factor g must be a scalar kernel".into()));
    }
    if g.arity() != k.arity() {
        return Err(Error::Input(format!(
            "K has arity {} but g has arity {}",
            k.arity(),
            g.arity()
        )));
    }
    let gk = gram(k, points)?;
    let gg = gram(g, points)?;
    let d = k.fiber_dim();
    let m = points.len();
    let mut mat = DMatrix::<C64>::zeros(m * d, m * d);
    for p in 0..m {
        for q in p..m {
            let gv = gg.as_matrix()[(p, q)];
            if gv.norm() < 1e-14 {
                return Err(Error::Reliability(format!(
                    "g vanishes on the sample at the pair ({p}, {q}); choose other points"
                )));
            }
            let block = gk.block(p, q) / gv;
            if p == q {
                let h = (&block + block.adjoint()) * linalg::re(0.5);
                mat.view_mut((p * d, p * d), (d, d)).copy_from(&h);
            } else {
                mat.view_mut((p * d, q * d), (d, d)).copy_from(&block);
                mat.view_mut((q * d, p * d), (d, d)).copy_from(&block.adjoint());
            }
        }
    }
    let l_gram = GramMatrix::new(points.to_vec(), d, mat)?;
    let verdict = psd_verdict(&l_gram.hermitian()?, tol)?;
    Ok(FactorTest { verdict, l_gram })
}

/// The assembled dilation data on a finite sample.
#[derive(Debug, Clone)]
pub struct DilationModel {
    pub points: Vec<Point>,
    /// `Phi(w_p)` as a `d x r` block per point, from the PSD factorization
    /// of the quotient Gram.
    pub phi: Vec<DMatrix<C64>>,
    /// The dilation fiber: the numerical rank of the quotient Gram.
    pub rank: usize,
    /// The section-span isometry in orthonormalized coordinates.
    pub pi_matrix: DMatrix<C64>,
    /// `||pi* pi - I||` on the numerical range.
    pub pi_defect: f64,
    pub gram_defect: f64,
    pub intertwine_defect: f64,
}

/// Defects of a dilation model recomputed from its stored factor values.
#[derive(Debug, Clone, Copy)]
pub struct DilationDefects {
    /// Max entry of `|lifted Gram - K Gram|`.
    pub gram_defect: f64,
    /// Max over coordinates and sections of the difference between the two
    /// routes of the adjoint-shift action through the isometry.
    pub intertwine_defect: f64,
    /// `||pi* pi - I||` on the numerical range.
    pub pi_defect: f64,
}

/// Build the sampled dilation of `K` into the `g`-space tensored with a
/// fiber of the quotient rank.
///
/// The factor blocks come from the PSD factorization of the quotient Gram
/// (so they are fixed only up to a right unitary); the isometry is
/// assembled as the change of Gram between the `K`-sections and their
/// lifts, in orthonormalized coordinates on both sides.
pub fn build_dilation(
    k: &KernelSpec,
    g: &KernelSpec,
    points: &[Point],
    rank_tol: f64,
) -> Result<DilationModel> {
    let ft = factor_test(k, g, points, rank_tol.max(1e-12))?;
    let f = psd_factor(&ft.l_gram.hermitian()?, rank_tol)?;
    let d = k.fiber_dim();
    let rank = f.ncols();
    let phi: Vec<DMatrix<C64>> = (0..points.len())
        .map(|p| f.view((p * d, 0), (d, rank)).into_owned())
        .collect();
    let defects = defects_from_phi(&phi, k, g, points)?;
    let (pi, pi_defect) = (defects.2, defects.3);
    Ok(DilationModel {
        points: points.to_vec(),
        phi,
        rank,
        pi_matrix: pi,
        pi_defect,
        gram_defect: defects.0,
        intertwine_defect: defects.1,
    })
}

/// Recompute the Gram and intertwining defects of a model against the
/// kernels it claims to dilate.
pub fn dilation_defects(
    model: &DilationModel,
    k: &KernelSpec,
    g: &KernelSpec,
) -> Result<DilationDefects> {
    let (gram_defect, intertwine_defect, _, pi_defect) =
        defects_from_phi(&model.phi, k, g, &model.points)?;
    Ok(DilationDefects {
        gram_defect,
        intertwine_defect,
        pi_defect,
    })
}

/// Shared defect computation: returns (gram defect, intertwine defect,
/// pi matrix, pi orthonormality defect).
fn defects_from_phi(
    phi: &[DMatrix<C64>],
    k: &KernelSpec,
    g: &KernelSpec,
    points: &[Point],
) -> Result<(f64, f64, DMatrix<C64>, f64)> {
    if phi.len() != points.len() {
        return Err(Error::Input("one factor block per point is required".into()));
    }
    let d = k.fiber_dim();
    let m = points.len();
    let gk = gram(k, points)?;
    let gg = gram(g, points)?;

    // Lifted Gram: H[(p,i),(q,j)] = g(w_p, w_q) (Phi_p Phi_q*)_{ij}.
    let mut h = DMatrix::<C64>::zeros(m * d, m * d);
    for p in 0..m {
        for q in 0..m {
            let block = &phi[p] * phi[q].adjoint() * gg.as_matrix()[(p, q)];
            h.view_mut((p * d, q * d), (d, d)).copy_from(&block);
        }
    }
    let gram_defect = linalg::max_abs(&(&h - gk.as_matrix()));

    // Orthonormalize both section spans and express the lift there.
    let (k_vals, k_vecs) = gk.hermitian()?.eigen();
    let h_herm = HermitianMatrix::new((&h + h.adjoint()) * linalg::re(0.5))?;
    let (h_vals, h_vecs) = h_herm.eigen();
    let k_norm = k_vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let h_norm = h_vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let keep = |vals: &[f64], norm: f64| -> Vec<usize> {
        vals.iter()
            .enumerate()
            .filter(|(_, &l)| l > PINV_CUTOFF_REL * norm.max(1e-300))
            .map(|(i, _)| i)
            .collect()
    };
    let k_keep = keep(&k_vals, k_norm);
    let h_keep = keep(&h_vals, h_norm);
    let half = |vals: &[f64], vecs: &DMatrix<C64>, kept: &[usize], inv: bool| {
        // Rows are orthonormal coordinates: L = diag(l^(+-1/2)) V*.
        let mut out = DMatrix::<C64>::zeros(kept.len(), vecs.nrows());
        for (r, &i) in kept.iter().enumerate() {
            let s = if inv {
                1.0 / vals[i].sqrt()
            } else {
                vals[i].sqrt()
            };
            out.row_mut(r).copy_from(&(vecs.column(i).adjoint() * linalg::re(s)));
        }
        out
    };
    let k_fwd = half(&k_vals, &k_vecs, &k_keep, false); // rK x md
    let k_inv = half(&k_vals, &k_vecs, &k_keep, true);
    let h_fwd = half(&h_vals, &h_vecs, &h_keep, false);
    let h_inv = half(&h_vals, &h_vecs, &h_keep, true);

    // pi in orthonormal coordinates: sections map to lifts index-by-index.
    let pi = &h_fwd * k_inv.adjoint();
    let eye = DMatrix::<C64>::identity(k_keep.len(), k_keep.len());
    let pi_defect = linalg::spectral_norm(&(pi.adjoint() * &pi - eye));

    // Adjoint shifts act diagonally on sections: D_j = diag(conj(w_{p,j})).
    let arity = k.arity();
    let mut intertwine = 0.0f64;
    for j in 0..arity {
        let mut diag = DMatrix::<C64>::zeros(m * d, m * d);
        for p in 0..m {
            for i in 0..d {
                diag[(p * d + i, p * d + i)] = points[p].coords()[j].conj();
            }
        }
        let a_k = &k_fwd * &diag * k_inv.adjoint(); // rK x rK
        let a_h = &h_fwd * &diag * h_inv.adjoint();
        for p in 0..m {
            for i in 0..d {
                let mut e = DVector::<C64>::zeros(m * d);
                e[p * d + i] = C64::new(1.0, 0.0);
                let x = &k_fwd * &e; // section coordinates
                let lhs = &a_h * (&pi * &x);
                let rhs = &pi * (&a_k * &x);
                intertwine = intertwine.max((lhs - rhs).norm());
            }
        }
    }
    Ok((gram_defect, intertwine, pi, pi_defect))
}

/// Quadratic-form identity defect between the two evaluation routes of the
/// inverse-kernel form: pointwise division against the polynomial pairing
/// pulled through the adjoint-shift action on sections.
pub fn inverse_form_identity_defect(
    k: &KernelSpec,
    g: &KernelSpec,
    g_inv: &InverseKernelPoly,
    points: &[Point],
    dirs: &[DVector<C64>],
) -> Result<f64> {
    if dirs.len() != points.len() {
        return Err(Error::Input("one direction per point is required".into()));
    }
    let gk = gram(k, points)?;
    let gg = gram(g, points)?;
    let d = k.fiber_dim();
    let mut lhs = C64::new(0.0, 0.0);
    let mut rhs = C64::new(0.0, 0.0);
    for (i, (pi_pt, eta_i)) in points.iter().zip(dirs).enumerate() {
        for (j, (pj_pt, eta_j)) in points.iter().zip(dirs).enumerate() {
            if eta_i.len() != d || eta_j.len() != d {
                return Err(Error::Input("direction dimension mismatch".into()));
            }
            let kij = gk.block(i, j);
            let pair = (eta_i.adjoint() * &kij * eta_j)[(0, 0)];
            lhs += pair / gg.as_matrix()[(i, j)];
            rhs += pair * g_inv.eval_pair(pi_pt, pj_pt)?;
        }
    }
    Ok((lhs - rhs).norm())
}

/// One catalog pair for the factorization/operator-form crosscheck.
#[derive(Debug, Clone)]
pub struct CrosscheckPair {
    pub k: KernelSpec,
    pub g: KernelSpec,
    pub k_name: String,
    pub g_name: String,
}

/// Verdicts of both routes on one pair.
#[derive(Debug, Clone)]
pub struct CrosscheckOutcome {
    pub k_name: String,
    pub g_name: String,
    pub factor: Verdict,
    pub brehmer: Verdict,
    pub brehmer_shield: usize,
    pub trunc: usize,
    pub agree: bool,
}

/// Run the sampled factorization test and the shielded operator form on
/// one pair and report whether the verdicts agree (they must).
pub fn crosscheck_pair(
    pair: &CrosscheckPair,
    trunc_n: usize,
    points: &[Point],
    tol: f64,
) -> Result<CrosscheckOutcome> {
    let ft = factor_test(&pair.k, &pair.g, points, tol)?;
    let tm = TruncatedModule::new(&pair.k, trunc_n)?;
    let coeffs = inverse_kernel_poly(&pair.g)?;
    let form = brehmer_form(&tm, &coeffs, None)?;
    let brehmer = psd_verdict(&form.matrix, tol)?;
    let agree = ft.verdict.is_positive() == brehmer.is_positive();
    Ok(CrosscheckOutcome {
        k_name: pair.k_name.clone(),
        g_name: pair.g_name.clone(),
        factor: ft.verdict,
        brehmer,
        brehmer_shield: form.shield,
        trunc: trunc_n,
        agree,
    })
}

/// The built-in matrix of crosscheck pairs, including the two negative
/// ones (a smaller space divided by a larger kernel).
pub fn catalog_crosscheck_pairs() -> Vec<CrosscheckPair> {
    let szego1 = KernelSpec::SzegoPolydisc { n: 1 };
    let szego2 = KernelSpec::SzegoPolydisc { n: 2 };
    let berg2 = KernelSpec::BergmanBall { n: 1, alpha: 2.0 };
    let berg3 = KernelSpec::BergmanBall { n: 1, alpha: 3.0 };
    let mk = |k: &KernelSpec, kn: &str, g: &KernelSpec, gn: &str| CrosscheckPair {
        k: k.clone(),
        g: g.clone(),
        k_name: kn.to_string(),
        g_name: gn.to_string(),
    };
    vec![
        mk(&szego1, "szego_polydisc(1)", &szego1, "szego_polydisc(1)"),
        mk(&berg2, "bergman_ball(1,2)", &szego1, "szego_polydisc(1)"),
        mk(&berg3, "bergman_ball(1,3)", &szego1, "szego_polydisc(1)"),
        mk(&berg3, "bergman_ball(1,3)", &berg2, "bergman_ball(1,2)"),
        mk(&szego1, "szego_polydisc(1)", &berg2, "bergman_ball(1,2)"),
        mk(&berg2, "bergman_ball(1,2)", &berg3, "bergman_ball(1,3)"),
        mk(&szego2, "szego_polydisc(2)", &szego2, "szego_polydisc(2)"),
        mk(&berg2, "bergman_ball(1,2)", &berg2, "bergman_ball(1,2)"),
    ]
}

/// Run the crosscheck over the built-in catalog, sampling a radial grid of
/// `m` points per pair. Pairs run in parallel; the output order is fixed.
pub fn catalog_crosscheck(
    trunc_n: usize,
    m: usize,
    max_radius: f64,
    tol: f64,
) -> Result<Vec<CrosscheckOutcome>> {
    let pairs = catalog_crosscheck_pairs();
    pairs
        .par_iter()
        .map(|pair| {
            let pts = sample_points(
                pair.k.domain_hint(),
                pair.k.arity(),
                m,
                SampleStrategy::RadialGrid,
                0,
                max_radius,
            )?;
            crosscheck_pair(pair, trunc_n, &pts, tol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::numerics::Outcome;
    use crate::point::DomainTag;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn szego1() -> KernelSpec {
        KernelSpec::SzegoPolydisc { n: 1 }
    }

    fn berg(alpha: f64) -> KernelSpec {
        KernelSpec::BergmanBall { n: 1, alpha }
    }

    fn disc_pt(x: f64) -> Point {
        Point::new(vec![re(x)], DomainTag::Polydisc).unwrap()
    }

    fn radial(m: usize) -> Vec<Point> {
        sample_points(DomainTag::Polydisc, 1, m, SampleStrategy::RadialGrid, 0, 0.9).unwrap()
    }

    #[test]
    fn bergman_over_szego_factors() {
        let ft = factor_test(&berg(2.0), &szego1(), &radial(5), 1e-10).unwrap();
        assert_eq!(ft.verdict.outcome, Outcome::Positive);
        // The quotient is the szego Gram itself.
        let want = gram(&szego1(), &radial(5)).unwrap();
        assert!(linalg::max_abs(&(ft.l_gram.as_matrix() - want.as_matrix())) < 1e-12);
    }

    #[test]
    fn szego_over_bergman_is_certified_non_factorable() {
        let pts = [disc_pt(0.0), disc_pt(0.5)];
        let ft = factor_test(&szego1(), &berg(2.0), &pts, 1e-10).unwrap();
        assert_eq!(ft.verdict.outcome, Outcome::Indefinite);
        let m = ft.l_gram.as_matrix();
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        assert!((det + 0.25).abs() <= 1e-12, "det {det}");
        assert!(ft.verdict.witness.is_some());
    }

    #[test]
    fn quasiscalar_bergman_over_szego_factors_with_fiber_two() {
        let k = KernelSpec::Quasiscalar {
            base: Box::new(berg(2.0)),
            fiber_dim: 2,
        };
        let ft = factor_test(&k, &szego1(), &radial(4), 1e-10).unwrap();
        assert_eq!(ft.verdict.outcome, Outcome::Positive);
        assert_eq!(ft.l_gram.fiber_dim(), 2);
    }

    #[test]
    fn dilation_of_bergman_over_szego() {
        let model = build_dilation(&berg(2.0), &szego1(), &radial(6), 1e-10).unwrap();
        assert!(model.gram_defect <= 1e-9, "gram defect {}", model.gram_defect);
        assert!(
            model.intertwine_defect <= 1e-9,
            "intertwine defect {}",
            model.intertwine_defect
        );
        assert!(model.pi_defect <= 1e-8, "pi defect {}", model.pi_defect);
    }

    #[test]
    fn identity_factorization_gives_constant_unit_factor() {
        let model = build_dilation(&szego1(), &szego1(), &radial(5), 1e-10).unwrap();
        assert_eq!(model.rank, 1);
        for p in &model.phi {
            assert!((p.norm() - 1.0).abs() < 1e-10);
        }
        for w in model.phi.windows(2) {
            assert!(linalg::max_abs(&(&w[0] - &w[1])) < 1e-10);
        }
        assert!(model.gram_defect <= 1e-12);
        assert!(model.intertwine_defect <= 1e-12);
    }

    #[test]
    fn quasiscalar_lift_dilates_with_fiber_rank() {
        let k = KernelSpec::Quasiscalar {
            base: Box::new(szego1()),
            fiber_dim: 2,
        };
        let model = build_dilation(&k, &szego1(), &radial(4), 1e-10).unwrap();
        assert_eq!(model.rank, 2);
        assert!(model.gram_defect <= 1e-11);
        // Factor ranks are consistent across points.
        let ranks: Vec<usize> = model
            .phi
            .iter()
            .map(|p| {
                linalg::singular_values(p)
                    .iter()
                    .filter(|&&s| s > 1e-10)
                    .count()
            })
            .collect();
        assert!(ranks.windows(2).all(|w| w[0] == w[1]), "ranks {ranks:?}");
        assert_eq!(ranks[0], 2);
    }

    #[test]
    fn corrupting_the_factor_shows_up_in_the_gram_defect() {
        let mut model = build_dilation(&berg(2.0), &szego1(), &radial(6), 1e-10).unwrap();
        model.phi[0][(0, 0)] += re(0.1);
        let d = dilation_defects(&model, &berg(2.0), &szego1()).unwrap();
        assert!(d.gram_defect >= 1e-2, "gram defect {}", d.gram_defect);
    }

    #[test]
    fn factorization_roundtrip_reproduces_the_kernel_gram() {
        let rank_tol = 1e-10;
        for (k, g) in [
            (berg(2.0), szego1()),
            (berg(3.0), berg(2.0)),
            (szego1(), szego1()),
        ] {
            let pts = radial(6);
            let model = build_dilation(&k, &g, &pts, rank_tol).unwrap();
            let gk = gram(&k, &pts).unwrap();
            let scale = gk.hermitian().unwrap().norm().max(1.0);
            assert!(
                model.gram_defect <= rank_tol * scale,
                "roundtrip defect {} vs scale {scale}",
                model.gram_defect
            );
        }
    }

    #[test]
    fn non_factorable_input_is_rejected_by_build() {
        let pts = [disc_pt(0.0), disc_pt(0.5)];
        match build_dilation(&szego1(), &berg(2.0), &pts, 1e-10) {
            Err(Error::NotPsd { .. }) => {}
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn inverse_form_identity_on_catalog_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for (k, g) in [
            (berg(2.0), szego1()),
            (szego1(), szego1()),
            (
                KernelSpec::Quasiscalar {
                    base: Box::new(berg(3.0)),
                    fiber_dim: 2,
                },
                berg(2.0),
            ),
        ] {
            let g_inv = inverse_kernel_poly(&g).unwrap();
            let pts = radial(5);
            let d = k.fiber_dim();
            let dirs: Vec<DVector<C64>> = (0..pts.len())
                .map(|_| {
                    DVector::from_fn(d, |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                })
                .collect();
            let defect = inverse_form_identity_defect(&k, &g, &g_inv, &pts, &dirs).unwrap();
            assert!(defect <= 1e-10, "identity defect {defect}");
        }
    }

    #[test]
    fn catalog_crosscheck_has_no_disagreements() {
        let outcomes = catalog_crosscheck(8, 6, 0.9, 1e-8).unwrap();
        assert_eq!(outcomes.len(), 8);
        for o in &outcomes {
            assert!(o.agree, "{} / {} disagree", o.k_name, o.g_name);
        }
        // The designated negative pair is negative on both routes.
        let neg = outcomes
            .iter()
            .find(|o| o.k_name.starts_with("szego") && o.g_name.starts_with("bergman"))
            .unwrap();
        assert_eq!(neg.factor.outcome, Outcome::Indefinite);
        assert_eq!(neg.brehmer.outcome, Outcome::Indefinite);
        // Shielded operator form of the Hardy space against the Bergman
        // weight has an exact eigenvalue -1.
        assert!((neg.brehmer.lambda_min + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn division_by_a_vanishing_kernel_is_a_sampling_error() {
        let one_minus = KernelSpec::OneMinusPairing { n: 1 };
        let pts = vec![disc_pt(0.3), disc_pt(0.4)];
        // Divide by a gram_table with an explicit zero off-diagonal entry.
        let zero_off = KernelSpec::GramTable {
            points: pts.clone(),
            fiber_dim: 1,
            blocks: vec![
                vec![
                    DMatrix::from_element(1, 1, re(1.0)),
                    DMatrix::from_element(1, 1, re(0.0)),
                ],
                vec![
                    DMatrix::from_element(1, 1, re(0.0)),
                    DMatrix::from_element(1, 1, re(1.0)),
                ],
            ],
        };
        match factor_test(&one_minus, &zero_off, &pts, 1e-10) {
            Err(Error::Reliability(_)) => {}
            other => panic!("expected reliability error, got {other:?}"),
        }
    }
}
