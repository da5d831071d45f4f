//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a single PASS line with the measured quantities.
//!
//! Run with `cargo test -p rkhs-cli --test acceptance -- --nocapture` to
//! see the lines.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rkhs_core::algebra::{cartesian_grid, coisometry_defect, product_kernel, tensor_kernel, ProductSection};
use rkhs_core::dilation::{build_dilation, catalog_crosscheck, dilation_defects, factor_test};
use rkhs_core::kernel::{gram, kernel_psd_check, KernelSpec};
use rkhs_core::linalg::{self, re, C64};
use rkhs_core::multiplier::{
    isometric_multiplier_classify, multiplier_norm_lower, Classification, MultiplierSpec,
};
use rkhs_core::numerics::{psd_verdict, HermitianMatrix, Outcome};
use rkhs_core::point::{sample_points, DomainTag, Point, SampleStrategy};
use rkhs_core::poly::Polynomial;
use rkhs_core::trunc::{
    brehmer_form, doubly_commuting_defect, inverse_kernel_poly, submodule_truncate,
    SubmoduleOrigin, TruncatedModule,
};

fn szego(n: usize) -> KernelSpec {
    KernelSpec::SzegoPolydisc { n }
}

fn bergman(n: usize, alpha: f64) -> KernelSpec {
    KernelSpec::BergmanBall { n, alpha }
}

fn quasi(base: KernelSpec, d: usize) -> KernelSpec {
    KernelSpec::Quasiscalar {
        base: Box::new(base),
        fiber_dim: d,
    }
}

fn disc_pt(x: f64) -> Point {
    Point::new(vec![re(x)], DomainTag::Polydisc).unwrap()
}

/// Criterion 1: catalog kernels, their quasiscalar lifts (fiber <= 3) and
/// all same-domain pairwise products stay PSD with relative margin
/// >= -1e-8 over 200 seeded point sets with m <= 25, within 60 s.
#[test]
fn criterion_01_kernel_positivity_suite() {
    let started = Instant::now();

    // Same-domain groups; products are taken pairwise within each group.
    let disc_scalars = vec![szego(1), bergman(1, 2.0), bergman(1, 3.0)];
    let mut disc: Vec<KernelSpec> = disc_scalars.clone();
    for d in [2usize, 3] {
        disc.push(quasi(szego(1), d));
        disc.push(quasi(bergman(1, 2.0), d));
    }
    for i in 0..disc_scalars.len() {
        for j in i..disc_scalars.len() {
            disc.push(product_kernel(&disc_scalars[i], &disc_scalars[j]).unwrap());
        }
    }
    // Lift-by-scalar products keep the fiber at <= 3.
    disc.push(product_kernel(&quasi(szego(1), 2), &bergman(1, 3.0)).unwrap());
    disc.push(product_kernel(&quasi(bergman(1, 2.0), 3), &szego(1)).unwrap());

    let bidisc = vec![
        szego(2),
        quasi(szego(2), 2),
        product_kernel(&szego(2), &szego(2)).unwrap(),
    ];
    let tridisc = vec![szego(3), quasi(szego(3), 3)];
    let ball2 = vec![
        bergman(2, 2.5),
        quasi(bergman(2, 2.5), 3),
        product_kernel(&bergman(2, 2.5), &bergman(2, 2.5)).unwrap(),
    ];

    let groups: Vec<Vec<KernelSpec>> = vec![disc, bidisc, tridisc, ball2];
    let n_kernels: usize = groups.iter().map(|g| g.len()).sum();
    let mut checks = 0usize;
    let mut worst_margin = f64::INFINITY;
    for seed in 0..200u64 {
        let m = 2 + (seed as usize % 24); // 2..=25
        for group in &groups {
            let arity = group[0].arity();
            let domain = group[0].domain_hint();
            let pts =
                sample_points(domain, arity, m, SampleStrategy::Pseudorandom, seed, 0.9).unwrap();
            for spec in group {
                let v = kernel_psd_check(spec, &pts, 1e-8).unwrap();
                assert_eq!(
                    v.outcome,
                    Outcome::Positive,
                    "seed {seed}, m {m}: margin {}",
                    v.margin
                );
                assert!(v.margin >= -1e-8);
                worst_margin = worst_margin.min(v.margin);
                checks += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed <= 60.0, "positivity suite took {elapsed:.1} s");
    println!(
        "PASS criterion 1: kernel positivity: {checks} checks over 200 point sets x {n_kernels} kernels, \
         worst margin {worst_margin:.3e}, {elapsed:.1} s"
    );
}

/// Criterion 2: 200 random ordered PSD pairs (dims <= 8) satisfy
/// A1 (x) B1 <= A2 (x) B2 with margin >= -1e-10.
#[test]
fn criterion_02_tensor_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::INFINITY;
    for case in 0..200 {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(1..=8);
        let mk = |rng: &mut ChaCha8Rng, n: usize| {
            let f = DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            &f * f.adjoint()
        };
        let a1 = mk(&mut rng, n);
        let a2 = &a1 + mk(&mut rng, n);
        let b1 = mk(&mut rng, p);
        let b2 = &b1 + mk(&mut rng, p);
        let diff = linalg::kron(&a2, &b2) - linalg::kron(&a1, &b1);
        let v = psd_verdict(&HermitianMatrix::new(diff).unwrap(), 1e-10).unwrap();
        assert_eq!(v.outcome, Outcome::Positive, "case {case}");
        assert!(v.margin >= -1e-10, "case {case}: margin {}", v.margin);
        worst = worst.min(v.margin);
    }
    println!("PASS criterion 2: tensor inequality on 200 ordered PSD pairs, worst margin {worst:.3e}");
}

/// Criterion 3: restriction-coisometry defect <= 1e-10 on 50 random
/// section batteries for 4 catalog pairs; Kronecker Gram identity to
/// 1e-12; the squared Hardy kernel equals the weight-2 Bergman kernel to
/// 1e-13 on 100 sampled pairs.
#[test]
fn criterion_03_product_space_identities() {
    let pairs: Vec<(KernelSpec, KernelSpec)> = vec![
        (szego(1), szego(1)),
        (szego(1), bergman(1, 2.0)),
        (bergman(1, 2.0), bergman(1, 3.0)),
        (quasi(szego(1), 2), quasi(bergman(1, 2.0), 2)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_coiso = 0.0f64;
    for (pair_idx, (k1, k2)) in pairs.iter().enumerate() {
        for battery in 0..50u64 {
            let pts = sample_points(
                DomainTag::Polydisc,
                1,
                5,
                SampleStrategy::Pseudorandom,
                battery * 7 + pair_idx as u64,
                0.85,
            )
            .unwrap();
            let sections: Vec<ProductSection> = pts
                .into_iter()
                .map(|p| {
                    let x1 = DVector::from_fn(k1.fiber_dim(), |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    });
                    let x2 = DVector::from_fn(k2.fiber_dim(), |_, _| {
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    });
                    ProductSection::new(p, x1, x2).unwrap()
                })
                .collect();
            let d = coisometry_defect(k1, k2, &sections).unwrap();
            assert!(d <= 1e-10, "pair {pair_idx}, battery {battery}: defect {d}");
            worst_coiso = worst_coiso.max(d);
        }
    }

    // Kronecker Gram identity, scalar factors.
    let pts1 = sample_points(DomainTag::Polydisc, 1, 3, SampleStrategy::Pseudorandom, 31, 0.85)
        .unwrap();
    let pts2 = sample_points(DomainTag::Polydisc, 1, 4, SampleStrategy::Pseudorandom, 32, 0.85)
        .unwrap();
    let t = tensor_kernel(&szego(1), &bergman(1, 2.0)).unwrap();
    let grid = cartesian_grid(&pts1, &pts2).unwrap();
    let gt = gram(&t, &grid).unwrap();
    let want = linalg::kron(
        gram(&szego(1), &pts1).unwrap().as_matrix(),
        gram(&bergman(1, 2.0), &pts2).unwrap().as_matrix(),
    );
    let kron_defect = linalg::max_abs(&(gt.as_matrix() - &want));
    assert!(kron_defect <= 1e-12, "Kronecker defect {kron_defect}");

    // Squared Hardy kernel against the weight-2 Bergman kernel.
    let prod = product_kernel(&szego(1), &szego(1)).unwrap();
    let berg = bergman(1, 2.0);
    let pts = sample_points(DomainTag::Polydisc, 1, 10, SampleStrategy::Pseudorandom, 33, 0.9)
        .unwrap();
    let mut worst_pointwise = 0.0f64;
    let mut pairs_checked = 0;
    for p in &pts {
        for q in &pts {
            let a = prod.eval(p, q).unwrap()[(0, 0)];
            let b = berg.eval(p, q).unwrap()[(0, 0)];
            let rel = (a - b).norm() / b.norm().max(1.0);
            assert!(rel <= 1e-13, "pointwise defect {rel}");
            worst_pointwise = worst_pointwise.max(rel);
            pairs_checked += 1;
        }
    }
    assert_eq!(pairs_checked, 100);
    println!(
        "PASS criterion 3: coisometry defect <= {worst_coiso:.3e} on 50 batteries x 4 pairs, \
         Kronecker defect {kron_defect:.3e}, product-kernel pointwise defect {worst_pointwise:.3e}"
    );
}

/// Criterion 4: the multiplier pencil is exactly 1 on the closed-form
/// two-point case, monotone over nested grids m = 2, 4, 8, 16, and returns
/// 2 for the constant-2 multiplier.
#[test]
fn criterion_04_multiplier_pencil() {
    let z = MultiplierSpec::Coordinate { j: 1 };
    let pts = [disc_pt(0.0), disc_pt(0.5)];
    let c = multiplier_norm_lower(&z, &szego(1), &szego(1), &pts, 0.0).unwrap();
    assert!((c - 1.0).abs() <= 1e-10, "closed-form case: {c}");

    let all = sample_points(
        DomainTag::Polydisc,
        1,
        16,
        SampleStrategy::Pseudorandom,
        4,
        0.9,
    )
    .unwrap();
    let mut prev = 0.0;
    let mut bounds = Vec::new();
    for m in [2usize, 4, 8, 16] {
        let cm = multiplier_norm_lower(&z, &szego(1), &szego(1), &all[..m], 0.0).unwrap();
        assert!(cm + 1e-10 >= prev, "bound dropped at m = {m}: {cm} < {prev}");
        prev = cm;
        bounds.push(cm);
    }

    let two = MultiplierSpec::constant(DMatrix::from_element(1, 1, re(2.0)));
    let c2 = multiplier_norm_lower(&two, &szego(1), &szego(1), &all[..8], 0.0).unwrap();
    assert!((c2 - 2.0).abs() <= 1e-10, "constant-2 case: {c2}");
    println!(
        "PASS criterion 4: pencil = 1 exactly on the 2x2 case, nested bounds {bounds:?}, \
         constant-2 bound {c2:.12}"
    );
}

/// Criterion 5: the rigidity detector on the quasiscalar weight-2 Bergman
/// space with fiber 2 classifies exactly the constant unitaries as
/// constant isometries; every coordinate-shift candidate fails with defect
/// >= 0.4 (analytic floor 0.5). Tolerance 1e-8, runtime <= 10 s.
#[test]
fn criterion_05_rigidity_detector() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = sample_points(
        DomainTag::Polydisc,
        1,
        6,
        SampleStrategy::RadialGrid,
        0,
        0.9,
    )
    .unwrap();

    // Random constant unitaries from orthonormalized random matrices.
    let mut candidates: Vec<(String, MultiplierSpec, bool)> = Vec::new();
    for i in 0..5 {
        let cols: Vec<DVector<C64>> = (0..2)
            .map(|_| {
                DVector::from_fn(2, |_, _| {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
            })
            .collect();
        let (basis, _) = linalg::orthonormalize_columns(&cols, 1e-12);
        assert_eq!(basis.len(), 2);
        let mut u = DMatrix::<C64>::zeros(2, 2);
        u.set_column(0, &basis[0]);
        u.set_column(1, &basis[1]);
        candidates.push((format!("unitary_{i}"), MultiplierSpec::constant(u), true));
    }
    // Coordinate z in each fiber slot, z . I, and diag(z, 1) again.
    let z_poly = Polynomial::coordinate(1, 1).unwrap();
    let one_poly = Polynomial::constant(1, re(1.0));
    let diag = |a: &Polynomial, b: &Polynomial| {
        let mut entries = BTreeMap::new();
        entries.insert((0usize, 0usize), a.clone());
        entries.insert((1, 1), b.clone());
        MultiplierSpec::PolynomialMatrix {
            out_dim: 2,
            in_dim: 2,
            arity: 1,
            entries,
        }
    };
    candidates.push(("diag(z,1)".into(), diag(&z_poly, &one_poly), false));
    candidates.push(("diag(1,z)".into(), diag(&one_poly, &z_poly), false));
    candidates.push((
        "z.I".into(),
        MultiplierSpec::Product {
            factors: vec![
                MultiplierSpec::Coordinate { j: 1 },
                MultiplierSpec::constant(DMatrix::identity(2, 2)),
            ],
        },
        false,
    ));
    candidates.push(("diag(z,1)#2".into(), diag(&z_poly, &one_poly), false));

    let mut results = Vec::new();
    for (name, phi, expect_constant) in &candidates {
        let c = isometric_multiplier_classify(phi, &szego(1), &szego(1), 2, &pts, 1e-8).unwrap();
        match (&c, expect_constant) {
            (Classification::ConstantIsometry { .. }, true) => {
                results.push(format!("{name}: constant_isometry"));
            }
            (Classification::NotIsometric { defect }, false) => {
                assert!(*defect >= 0.4, "{name}: defect {defect} below 0.4");
                results.push(format!("{name}: not_isometric({defect:.3})"));
            }
            other => panic!("{name}: unexpected classification {other:?}"),
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed <= 10.0, "detector took {elapsed:.1} s");
    println!(
        "PASS criterion 5: rigidity detector: {} candidates [{}], {elapsed:.2} s",
        candidates.len(),
        results.join(", ")
    );
}

/// Criterion 6: the inverse-kernel operator form on the full catalog
/// modules equals the rank-1 projection onto constants on the shielded
/// block, max entry error <= 1e-12.
#[test]
fn criterion_06_constants_projection() {
    let cases: Vec<(KernelSpec, usize, &str)> = vec![
        (szego(1), 6, "hardy1"),
        (szego(2), 7, "hardy2"),
        (szego(3), 8, "hardy3"),
        (bergman(1, 2.0), 8, "bergman2"),
        (bergman(1, 3.0), 8, "bergman3"),
    ];
    let mut worst = 0.0f64;
    for (spec, n, name) in &cases {
        let tm = TruncatedModule::new(spec, *n).unwrap();
        let coeffs = inverse_kernel_poly(spec).unwrap();
        let form = brehmer_form(&tm, &coeffs, None).unwrap();
        let m = form.matrix.as_matrix();
        let mut dev = 0.0f64;
        for i in 0..form.shielded_dim {
            for j in 0..form.shielded_dim {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                dev = dev.max((m[(i, j)] - re(want)).norm());
            }
        }
        assert!(dev <= 1e-12, "{name}: projection deviation {dev}");
        worst = worst.max(dev);
    }
    println!(
        "PASS criterion 6: constants projection on {} full modules, max entry error {worst:.3e}",
        cases.len()
    );
}

/// Criterion 7: factorization and shielded operator-form verdicts agree on
/// all 8 catalog pairs; the negative pair pins its witnesses:
/// quotient-Gram determinant -1/4 and shielded eigenvalue -1.
#[test]
fn criterion_07_factorization_crosscheck() {
    let outcomes = catalog_crosscheck(8, 6, 0.9, 1e-8).unwrap();
    assert_eq!(outcomes.len(), 8);
    for o in &outcomes {
        assert!(o.agree, "{} / {} disagree", o.k_name, o.g_name);
    }
    let negatives: Vec<_> = outcomes.iter().filter(|o| !o.factor.is_positive()).collect();
    assert_eq!(negatives.len(), 2, "expected both inverted pairs to fail");

    // Pinned witnesses for the designated negative pair on {0, 0.5}.
    let pts = [disc_pt(0.0), disc_pt(0.5)];
    let ft = factor_test(&szego(1), &bergman(1, 2.0), &pts, 1e-8).unwrap();
    let m = ft.l_gram.as_matrix();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    assert!((det + 0.25).abs() <= 1e-12, "witness determinant {det}");

    let tm = TruncatedModule::new(&szego(1), 8).unwrap();
    let coeffs = inverse_kernel_poly(&bergman(1, 2.0)).unwrap();
    let form = brehmer_form(&tm, &coeffs, None).unwrap();
    let v = psd_verdict(&form.matrix, 1e-8).unwrap();
    assert!((v.lambda_min + 1.0).abs() <= 1e-12, "shielded eigenvalue {}", v.lambda_min);
    println!(
        "PASS criterion 7: 8/8 crosscheck agreements; negative witnesses det = {det:.15}, \
         shielded eigenvalue = {:.15}",
        v.lambda_min
    );
}

/// Criterion 8: the sampled dilation of the weight-2 Bergman space over
/// the Hardy kernel on a 6-point radial grid has Gram and intertwining
/// defects <= 1e-9; corrupting one factor entry by 0.1 raises the Gram
/// defect above 1e-2.
#[test]
fn criterion_08_dilation_build() {
    let pts = sample_points(
        DomainTag::Polydisc,
        1,
        6,
        SampleStrategy::RadialGrid,
        0,
        0.9,
    )
    .unwrap();
    let mut model = build_dilation(&bergman(1, 2.0), &szego(1), &pts, 1e-10).unwrap();
    assert!(model.gram_defect <= 1e-9, "gram defect {}", model.gram_defect);
    assert!(
        model.intertwine_defect <= 1e-9,
        "intertwine defect {}",
        model.intertwine_defect
    );
    let clean = (model.gram_defect, model.intertwine_defect);
    model.phi[0][(0, 0)] += re(0.1);
    let corrupted = dilation_defects(&model, &bergman(1, 2.0), &szego(1)).unwrap();
    assert!(
        corrupted.gram_defect > 1e-2,
        "corrupted gram defect {}",
        corrupted.gram_defect
    );
    println!(
        "PASS criterion 8: dilation defects gram {:.3e} / intertwine {:.3e}; \
         corrupted factor raises gram defect to {:.3e}",
        clean.0, clean.1, corrupted.gram_defect
    );
}

/// Criterion 9: the submodule catalog of the bidisc Hardy module at N = 8
/// yields identical operator-form and commutator verdicts per submodule;
/// the difference-generated cases are negative on both, with values pinned
/// from the pre-registered oracle run (0.5 commutator, -0.5 eigenvalue).
#[test]
fn criterion_09_submodule_catalog() {
    let tm = TruncatedModule::new(&szego(2), 8).unwrap();
    let coeffs = inverse_kernel_poly(&szego(2)).unwrap();
    let gen = |terms: &[(Vec<u32>, f64)]| {
        SubmoduleOrigin::Generators(vec![vec![Polynomial::from_coeffs(
            2,
            terms.iter().map(|(k, a)| (k.clone(), re(*a))),
        )
        .unwrap()]])
    };
    let catalog: Vec<(&str, SubmoduleOrigin, bool)> = vec![
        ("full", gen(&[(vec![0, 0], 1.0)]), true),
        ("z1.H2", gen(&[(vec![1, 0], 1.0)]), true),
        ("z1z2.H2", gen(&[(vec![1, 1], 1.0)]), true),
        ("(z1-z2)", gen(&[(vec![1, 0], 1.0), (vec![0, 1], -1.0)]), false),
        ("(z1+z2)", gen(&[(vec![1, 0], 1.0), (vec![0, 1], 1.0)]), false),
    ];
    let tol = 1e-8;
    let mut rows = Vec::new();
    for (name, origin, expect_positive) in &catalog {
        let sub = submodule_truncate(&tm, origin).unwrap();
        let dc = doubly_commuting_defect(&sub).unwrap();
        let form = brehmer_form(&tm, &coeffs, Some(&sub)).unwrap();
        let v = psd_verdict(&form.matrix, tol).unwrap();
        let dc_ok = dc <= tol;
        assert_eq!(
            dc_ok,
            v.is_positive(),
            "{name}: commutator and operator-form verdicts disagree (dc {dc}, lambda_min {})",
            v.lambda_min
        );
        assert_eq!(dc_ok, *expect_positive, "{name}: unexpected verdict");
        if !expect_positive {
            assert!(dc > 1e-3, "{name}: commutator defect only {dc}");
            assert!(v.lambda_min < -1e-3, "{name}: eigenvalue only {}", v.lambda_min);
            // Regression values pinned from the pre-registered oracle run.
            assert!((dc - 0.5).abs() <= 1e-9, "{name}: commutator moved to {dc}");
            assert!(
                (v.lambda_min + 0.5).abs() <= 1e-9,
                "{name}: eigenvalue moved to {}",
                v.lambda_min
            );
        }
        rows.push(format!(
            "{name}: dc {dc:.3e}, lambda_min {:.3e}, agree",
            v.lambda_min
        ));
    }
    println!("PASS criterion 9: submodule catalog at N=8 [{}]", rows.join("; "));
}

/// Criterion 10: every CLI command run twice with identical inputs and
/// --no-timestamp produces byte-identical reports.
#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let file = |name: &str, content: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, content).unwrap();
        p.display().to_string()
    };
    let szego1 = file("szego1.json", r#"{"type":"szego_polydisc","n":1}"#);
    let berg2 = file("berg2.json", r#"{"type":"bergman_ball","n":1,"alpha":2.0}"#);
    let grid2 = file(
        "grid2.json",
        r#"{"domain":"polydisc","n":1,"points":[[[0.0,0.0]],[[0.5,0.0]]]}"#,
    );
    let coordz = file("coordz.json", r#"{"type":"coordinate","j":1}"#);
    let unitary = file(
        "unitary.json",
        r#"{"type":"constant","matrix":[[[0.7071067811865476,0.0],[0.7071067811865476,0.0]],[[-0.7071067811865476,0.0],[0.7071067811865476,0.0]]]}"#,
    );
    let z1h = file(
        "z1H.json",
        r#"{"parent":{"type":"szego_polydisc","n":2},"N":8,"origin":{"type":"generators","polys":[{"coeffs":[{"k":[1,0],"a":[1.0,0.0]}]}]}}"#,
    );
    let sections = file(
        "sections.json",
        r#"{"sections":[{"mu":[[0.0,0.0]],"x1":[[1.0,0.0]],"x2":[[1.0,0.0]]},{"mu":[[0.4,0.1]],"x1":[[0.5,0.5]],"x2":[[1.0,-1.0]]}]}"#,
    );

    let commands: Vec<Vec<String>> = vec![
        vec!["psd-check".into(), "--kernel".into(), szego1.clone(), "--points".into(), grid2.clone()],
        vec!["psd-check".into(), "--kernel".into(), berg2.clone(), "--m".into(), "5".into()],
        vec!["order-check".into(), "--kernel".into(), szego1.clone(), "--kernel2".into(), berg2.clone(), "--points".into(), grid2.clone()],
        vec!["mult-norm".into(), "--multiplier".into(), coordz.clone(), "--kernel".into(), szego1.clone(), "--points".into(), grid2.clone()],
        vec!["isometry-classify".into(), "--multiplier".into(), unitary.clone(), "--kernel".into(), szego1.clone(), "--kernel2".into(), szego1.clone(), "--fiber".into(), "2".into(), "--m".into(), "5".into()],
        vec!["equiv-classes".into(), "--kernel".into(), szego1.clone(), "--points".into(), grid2.clone()],
        vec!["product-space-check".into(), "--kernel".into(), szego1.clone(), "--kernel2".into(), berg2.clone(), "--sections".into(), sections.clone()],
        vec!["factor-test".into(), "--kernel".into(), szego1.clone(), "--g".into(), berg2.clone(), "--points".into(), grid2.clone()],
        vec!["dilate".into(), "--kernel".into(), berg2.clone(), "--g".into(), szego1.clone(), "--m".into(), "5".into()],
        vec!["brehmer-check".into(), "--submodule".into(), z1h.clone()],
        vec!["doubly-commuting".into(), "--submodule".into(), z1h.clone()],
        vec!["crosscheck".into(), "--m".into(), "5".into()],
        vec!["catalog".into()],
    ];
    let bin = env!("CARGO_BIN_EXE_rkhs");
    let mut checked = 0;
    for args in &commands {
        let run = || {
            let out = std::process::Command::new(bin)
                .args(args)
                .arg("--no-timestamp")
                .env("RKHS_NUM_THREADS", "2")
                .output()
                .expect("binary runs");
            (out.stdout, out.status.code())
        };
        let (a_out, a_code) = run();
        let (b_out, b_code) = run();
        assert_eq!(a_code, b_code, "exit codes differ for {args:?}");
        assert_eq!(a_out, b_out, "reports differ for {args:?}");
        // Exit-code fidelity: the embedded exit_code matches the process's.
        let report: serde_json::Value = serde_json::from_slice(&a_out).unwrap();
        assert_eq!(
            report["exit_code"].as_i64().unwrap() as i32,
            a_code.unwrap(),
            "embedded exit code mismatch for {args:?}"
        );
        checked += 1;
    }
    println!("PASS criterion 10: {checked} CLI commands byte-identical across reruns");
}
