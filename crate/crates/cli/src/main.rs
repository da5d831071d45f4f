//! Command-line front door: parse specs, dispatch verdict commands, emit
//! machine-readable reports.
//!
//! Exit codes: 0 = affirmative verdict, 1 = negative verdict,
//! 2 = input/usage error, 3 = numerical reliability error. A JSON report
//! is always written (stdout or `--out`), including on errors.

mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::{json, Value};

use report::{finite_or_null, ReportBuilder};
use rkhs_core::algebra::{
    cartesian_grid, coisometry_defect, product_kernel, tensor_kernel, ProductSection,
};
use rkhs_core::dilation::{
    build_dilation, catalog_crosscheck, catalog_crosscheck_pairs, crosscheck_pair, factor_test,
    CrosscheckOutcome, CrosscheckPair,
};
use rkhs_core::io::{self};
use rkhs_core::kernel::{gram, kernel_order_check, kernel_psd_check, KernelSpec};
use rkhs_core::multiplier::{
    isometric_multiplier_classify, isometry_defects, kernel_equiv_classes, multiplier_norm_lower,
    Classification, MultiplierSpec,
};
use rkhs_core::numerics::psd_verdict;
use rkhs_core::point::{sample_points, Point, SampleStrategy};
use rkhs_core::trunc::{
    brehmer_form, doubly_commuting_defect, inverse_kernel_poly, submodule_truncate, TruncatedModule,
};
use rkhs_core::{linalg, Error};

#[derive(Parser)]
#[command(
    name = "rkhs",
    about = "Gram-matrix verdicts for scalar- and operator-valued reproducing kernels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Verdict tolerance (relative for PSD margins).
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Truncation degree for shift-operator models.
    #[arg(long, global = true, default_value_t = 8)]
    trunc: usize,

    /// Seed for generated point sets and direction batteries.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Maximum per-coordinate modulus of generated points.
    #[arg(long, global = true, default_value_t = 0.9)]
    max_radius: f64,

    /// Number of generated points when no points file is given.
    #[arg(long, global = true, default_value_t = 8)]
    m: usize,

    /// Sampling strategy for generated points.
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::RadialGrid)]
    strategy: StrategyArg,

    /// Pencil regularization (pseudoinverse shift).
    #[arg(long, global = true, default_value_t = 0.0)]
    reg: f64,

    /// Rank threshold for PSD factorizations.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rank_tol: f64,

    /// Edge threshold for the equivalence partition (default 1e-9 max|k|).
    #[arg(long, global = true)]
    edge_tol: Option<f64>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Omit timestamp and runtime from the report (byte-identical reruns).
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    RadialGrid,
    Pseudorandom,
}

impl From<StrategyArg> for SampleStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::RadialGrid => SampleStrategy::RadialGrid,
            StrategyArg::Pseudorandom => SampleStrategy::Pseudorandom,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// PSD verdict of a kernel's Gram over sampled points.
    PsdCheck {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// PSD verdict of Gram(K2) - Gram(K1).
    OrderCheck {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        kernel2: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Certified lower bound on a multiplier norm via the sampled pencil.
    MultNorm {
        #[arg(long)]
        multiplier: PathBuf,
        #[arg(long)]
        kernel: PathBuf,
        /// Target kernel; defaults to the source kernel.
        #[arg(long)]
        kernel2: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Classify a candidate on the quasiscalar space of k1 k2 . I_fiber.
    IsometryClassify {
        #[arg(long)]
        multiplier: PathBuf,
        /// First scalar factor (also drives the equivalence partition).
        #[arg(long)]
        kernel: PathBuf,
        /// Second scalar factor.
        #[arg(long)]
        kernel2: PathBuf,
        #[arg(long, default_value_t = 1)]
        fiber: usize,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Partition sampled points by the vanishing pattern of a scalar kernel.
    EquivClasses {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Product-space identities: restriction coisometry and the Kronecker
    /// Gram factorization.
    ProductSpaceCheck {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        kernel2: PathBuf,
        #[arg(long)]
        sections: Option<PathBuf>,
    },
    /// Sampled factorization test K = g L.
    FactorTest {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Build the sampled dilation and report its defects.
    Dilate {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Shielded inverse-kernel form of a truncated submodule.
    BrehmerCheck {
        #[arg(long)]
        submodule: PathBuf,
    },
    /// Shielded mixed-commutator defect of a truncated submodule.
    DoublyCommuting {
        #[arg(long)]
        submodule: PathBuf,
    },
    /// Factorization vs operator-form agreement, one pair or the catalog.
    Crosscheck {
        #[arg(long, requires = "g")]
        kernel: Option<PathBuf>,
        #[arg(long, requires = "kernel")]
        g: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// List the built-in kernel specs and crosscheck pairs.
    Catalog,
}

fn main() {
    if let Ok(threads) = std::env::var("RKHS_NUM_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Report even usage errors; stdout only since --out is unknown.
            if e.use_stderr() {
                let mut b = ReportBuilder::new("usage", true);
                b.field("error", json!(e.to_string()));
                let (report, code) = b.finish(2);
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
                std::process::exit(code);
            }
            // --help / --version go to stdout with clap's own formatting.
            e.exit();
        }
    };
    let out = cli.out.clone();
    let (report, code) = run(&cli);
    let text = serde_json::to_string_pretty(&report).expect("report serialization");
    match &out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text.as_bytes()) {
                eprintln!("failed to write report to {}: {e}", path.display());
                std::process::exit(2);
            }
        }
        None => println!("{text}"),
    }
    std::process::exit(code);
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Reliability(_) => 3,
        Error::NotPsd { .. } | Error::Infeasible(_) | Error::NotIntertwiner { .. } => 1,
        _ => 2,
    }
}

fn run(cli: &Cli) -> (Value, i32) {
    let command_name = command_name(&cli.command);
    let mut b = ReportBuilder::new(command_name, cli.no_timestamp);
    if let Err(e) = validate_config(cli) {
        b.field("error", json!(e.to_string()));
        return b.finish(2);
    }
    match dispatch(cli, &mut b) {
        Ok(code) => b.finish(code),
        Err(e) => {
            let code = exit_code_for(&e);
            b.field("error", json!(e.to_string()));
            if let Error::NotPsd {
                lambda_min,
                witness,
            } = &e
            {
                b.field("lambda_min", json!(lambda_min));
                b.field(
                    "witness",
                    report::vector_json(&DVector::from_vec(witness.clone())),
                );
            }
            b.finish(code)
        }
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::PsdCheck { .. } => "psd-check",
        Cmd::OrderCheck { .. } => "order-check",
        Cmd::MultNorm { .. } => "mult-norm",
        Cmd::IsometryClassify { .. } => "isometry-classify",
        Cmd::EquivClasses { .. } => "equiv-classes",
        Cmd::ProductSpaceCheck { .. } => "product-space-check",
        Cmd::FactorTest { .. } => "factor-test",
        Cmd::Dilate { .. } => "dilate",
        Cmd::BrehmerCheck { .. } => "brehmer-check",
        Cmd::DoublyCommuting { .. } => "doubly-commuting",
        Cmd::Crosscheck { .. } => "crosscheck",
        Cmd::Catalog => "catalog",
    }
}

fn validate_config(cli: &Cli) -> Result<(), Error> {
    if cli.tol <= 0.0 {
        return Err(Error::Input(format!("tol must be positive, got {}", cli.tol)));
    }
    if cli.trunc < 3 {
        return Err(Error::Input(format!(
            "trunc must be at least 3, got {}",
            cli.trunc
        )));
    }
    if !(0.0 < cli.max_radius && cli.max_radius < 1.0) {
        return Err(Error::Input(format!(
            "max_radius must lie in (0, 1), got {}",
            cli.max_radius
        )));
    }
    Ok(())
}

struct LoadedFile {
    text: String,
    bytes: Vec<u8>,
    path: String,
}

fn load(path: &Path) -> Result<LoadedFile, Error> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Input(format!("{} is not UTF-8", path.display())))?;
    Ok(LoadedFile {
        text,
        bytes,
        path: path.display().to_string(),
    })
}

fn load_kernel(path: &Path, key: &str, b: &mut ReportBuilder) -> Result<KernelSpec, Error> {
    let f = load(path)?;
    b.input(key, &f.path, &f.bytes);
    let spec = io::kernel_from_json(&f.text)?;
    // Replace the verbatim echo with the normalized form (defaults filled).
    let normalized = serde_json::to_value(io::KernelSpecFile::from_spec(&spec))
        .unwrap_or(serde_json::Value::Null);
    b.field(
        key,
        json!({
            "path": f.path,
            "sha256": io::content_hash(&f.bytes),
            "spec": normalized,
        }),
    );
    Ok(spec)
}

fn load_multiplier(path: &Path, b: &mut ReportBuilder) -> Result<MultiplierSpec, Error> {
    let f = load(path)?;
    b.input("multiplier", &f.path, &f.bytes);
    io::multiplier_from_json(&f.text)
}

/// Points from a file, or a generated sample matching the kernel's domain;
/// the generation parameters are echoed in the report either way.
fn resolve_points(
    points: &Option<PathBuf>,
    spec: &KernelSpec,
    cli: &Cli,
    b: &mut ReportBuilder,
) -> Result<Vec<Point>, Error> {
    match points {
        Some(path) => {
            let f = load(path)?;
            b.input("points", &f.path, &f.bytes);
            io::points_from_json(&f.text)
        }
        None => {
            b.field(
                "points",
                json!({
                    "generated": true,
                    "strategy": match cli.strategy {
                        StrategyArg::RadialGrid => "radial_grid",
                        StrategyArg::Pseudorandom => "pseudorandom",
                    },
                    "m": cli.m,
                    "seed": cli.seed,
                    "max_radius": cli.max_radius,
                }),
            );
            sample_points(
                spec.domain_hint(),
                spec.arity(),
                cli.m,
                cli.strategy.into(),
                cli.seed,
                cli.max_radius,
            )
        }
    }
}

fn tolerances(cli: &Cli) -> Value {
    let mut map = BTreeMap::new();
    map.insert("tol", json!(cli.tol));
    map.insert("reg", json!(cli.reg));
    map.insert("rank_tol", json!(cli.rank_tol));
    map.insert(
        "pinv_cutoff_rel",
        json!(rkhs_core::numerics::PINV_CUTOFF_REL),
    );
    if let Some(e) = cli.edge_tol {
        map.insert("edge_tol", json!(e));
    }
    json!(map)
}

fn dispatch(cli: &Cli, b: &mut ReportBuilder) -> Result<i32, Error> {
    b.field("tolerances", tolerances(cli));
    match &cli.command {
        Cmd::PsdCheck { kernel, points } => {
            let spec = load_kernel(kernel, "kernel", b)?;
            let pts = resolve_points(points, &spec, cli, b)?;
            let v = kernel_psd_check(&spec, &pts, cli.tol)?;
            b.verdict(&v);
            Ok(if v.is_positive() { 0 } else { 1 })
        }
        Cmd::OrderCheck {
            kernel,
            kernel2,
            points,
        } => {
            let k1 = load_kernel(kernel, "kernel", b)?;
            let k2 = load_kernel(kernel2, "kernel2", b)?;
            let pts = resolve_points(points, &k1, cli, b)?;
            let v = kernel_order_check(&k1, &k2, &pts, cli.tol)?;
            b.verdict(&v);
            Ok(if v.is_positive() { 0 } else { 1 })
        }
        Cmd::MultNorm {
            multiplier,
            kernel,
            kernel2,
            points,
        } => {
            let phi = load_multiplier(multiplier, b)?;
            let k1 = load_kernel(kernel, "kernel", b)?;
            let k2 = match kernel2 {
                Some(p) => load_kernel(p, "kernel2", b)?,
                None => k1.clone(),
            };
            let pts = resolve_points(points, &k1, cli, b)?;
            let c = multiplier_norm_lower(&phi, &k1, &k2, &pts, cli.reg)?;
            b.field("norm_lower_bound", finite_or_null(c));
            if c.is_finite() {
                b.field("verdict", json!("multiplier_candidate"));
                Ok(0)
            } else {
                b.field("verdict", json!("not_a_multiplier_on_sample"));
                Ok(1)
            }
        }
        Cmd::IsometryClassify {
            multiplier,
            kernel,
            kernel2,
            fiber,
            points,
        } => {
            let phi = load_multiplier(multiplier, b)?;
            let k1 = load_kernel(kernel, "kernel", b)?;
            let k2 = load_kernel(kernel2, "kernel2", b)?;
            let pts = resolve_points(points, &k1, cli, b)?;
            b.field("fiber_dim", json!(fiber));
            let space = KernelSpec::Quasiscalar {
                base: Box::new(KernelSpec::Product {
                    factors: vec![k1.clone(), k2.clone()],
                }),
                fiber_dim: *fiber,
            };
            let defects = isometry_defects(&phi, &space, &pts)?;
            b.field(
                "defects",
                json!({
                    "adjoint": defects.adjoint,
                    "forward": defects.forward,
                }),
            );
            let c = isometric_multiplier_classify(&phi, &k1, &k2, *fiber, &pts, cli.tol)?;
            b.field("classification", json!(c.label()));
            match &c {
                Classification::ConstantIsometry { values } => {
                    let vals: Vec<Value> = values
                        .iter()
                        .map(|v| {
                            json!((0..v.nrows())
                                .map(|r| (0..v.ncols())
                                    .map(|cc| [v[(r, cc)].re, v[(r, cc)].im])
                                    .collect::<Vec<_>>())
                                .collect::<Vec<_>>())
                        })
                        .collect();
                    b.field("class_values", json!(vals));
                    Ok(0)
                }
                Classification::NonconstantIsometricOnSample { max_variation } => {
                    b.field("max_variation", json!(max_variation));
                    Ok(1)
                }
                Classification::NotIsometric { defect } => {
                    b.field("defect", json!(defect));
                    Ok(1)
                }
            }
        }
        Cmd::EquivClasses { kernel, points } => {
            let spec = load_kernel(kernel, "kernel", b)?;
            let pts = resolve_points(points, &spec, cli, b)?;
            let part = kernel_equiv_classes(&spec, &pts, cli.edge_tol)?;
            b.field("edge_tol", json!(part.edge_tol));
            b.field("class_ids", json!(part.class_ids));
            b.field("n_classes", json!(part.n_classes()));
            Ok(0)
        }
        Cmd::ProductSpaceCheck {
            kernel,
            kernel2,
            sections,
        } => {
            let k1 = load_kernel(kernel, "kernel", b)?;
            let k2 = load_kernel(kernel2, "kernel2", b)?;
            let secs: Vec<ProductSection> = match sections {
                Some(path) => {
                    let f = load(path)?;
                    b.input("sections", &f.path, &f.bytes);
                    io::sections_from_json(&f.text, k1.domain_hint())?
                }
                None => {
                    b.field(
                        "sections",
                        json!({"generated": true, "m": cli.m, "seed": cli.seed}),
                    );
                    generated_sections(&k1, &k2, cli)?
                }
            };
            let defect = coisometry_defect(&k1, &k2, &secs)?;
            b.field("coisometry_defect", json!(defect));
            // Kronecker Gram identity on a small grid.
            let left = sample_points(
                k1.domain_hint(),
                k1.arity(),
                3,
                SampleStrategy::Pseudorandom,
                cli.seed,
                cli.max_radius,
            )?;
            let right = sample_points(
                k2.domain_hint(),
                k2.arity(),
                3,
                SampleStrategy::Pseudorandom,
                cli.seed.wrapping_add(1),
                cli.max_radius,
            )?;
            let grid = cartesian_grid(&left, &right)?;
            let t = tensor_kernel(&k1, &k2)?;
            let gt = gram(&t, &grid)?;
            let want = linalg::kron(
                gram(&k1, &left)?.as_matrix(),
                gram(&k2, &right)?.as_matrix(),
            );
            let kron_defect = if k1.is_scalar() && k2.is_scalar() {
                linalg::max_abs(&(gt.as_matrix() - &want))
            } else {
                // Fibered case: compare blockwise (index orders differ).
                let m2 = right.len();
                let mut worst = 0.0f64;
                for i in 0..left.len() {
                    for j in 0..m2 {
                        for k in 0..left.len() {
                            for l in 0..m2 {
                                let got = gt.block(i * m2 + j, k * m2 + l);
                                let b1 = k1.eval(&left[i], &left[k])?;
                                let b2 = k2.eval(&right[j], &right[l])?;
                                let w = linalg::kron(&b1, &b2);
                                worst = worst.max(linalg::max_abs(&(got - w)));
                            }
                        }
                    }
                }
                worst
            };
            b.field("kronecker_gram_defect", json!(kron_defect));
            // Product Gram positivity on the diagonal.
            let pk = product_kernel(&k1, &k2)?;
            let pts = sample_points(
                k1.domain_hint(),
                k1.arity(),
                cli.m,
                cli.strategy.into(),
                cli.seed,
                cli.max_radius,
            )?;
            let v = kernel_psd_check(&pk, &pts, cli.tol)?;
            b.verdict(&v);
            let ok = defect <= cli.tol && kron_defect <= cli.tol && v.is_positive();
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::FactorTest { kernel, g, points } => {
            let k = load_kernel(kernel, "K", b)?;
            let gk = load_kernel(g, "g", b)?;
            let pts = resolve_points(points, &k, cli, b)?;
            let ft = factor_test(&k, &gk, &pts, cli.tol)?;
            b.verdict(&ft.verdict);
            Ok(if ft.verdict.is_positive() { 0 } else { 1 })
        }
        Cmd::Dilate { kernel, g, points } => {
            let k = load_kernel(kernel, "K", b)?;
            let gk = load_kernel(g, "g", b)?;
            let pts = resolve_points(points, &k, cli, b)?;
            let model = build_dilation(&k, &gk, &pts, cli.rank_tol)?;
            b.field("phi_rank", json!(model.rank));
            b.field(
                "defects",
                json!({
                    "gram": model.gram_defect,
                    "intertwine": model.intertwine_defect,
                    "pi_orthonormality": model.pi_defect,
                }),
            );
            b.field("verdict", json!("positive"));
            Ok(0)
        }
        Cmd::BrehmerCheck { submodule } => {
            let f = load(submodule)?;
            b.input("submodule", &f.path, &f.bytes);
            let (parent, n, origin) = io::submodule_from_json(&f.text, cli.trunc)?;
            let tm = TruncatedModule::new(&parent, n)?;
            let sub = submodule_truncate(&tm, &origin)?;
            let coeffs = inverse_kernel_poly(tm.scalar_space())?;
            let form = brehmer_form(&tm, &coeffs, Some(&sub))?;
            b.field("trunc", json!(n));
            b.field("shield", json!(form.shield));
            b.field("shielded_dim", json!(form.shielded_dim));
            b.field("submodule_dim", json!(sub.dim()));
            let v = psd_verdict(&form.matrix, cli.tol)?;
            b.verdict(&v);
            Ok(if v.is_positive() { 0 } else { 1 })
        }
        Cmd::DoublyCommuting { submodule } => {
            let f = load(submodule)?;
            b.input("submodule", &f.path, &f.bytes);
            let (parent, n, origin) = io::submodule_from_json(&f.text, cli.trunc)?;
            let tm = TruncatedModule::new(&parent, n)?;
            let sub = submodule_truncate(&tm, &origin)?;
            let defect = doubly_commuting_defect(&sub)?;
            b.field("trunc", json!(n));
            b.field("shield", json!(2));
            b.field("commutator_defect", json!(defect));
            let ok = defect <= cli.tol;
            b.field(
                "verdict",
                json!(if ok { "doubly_commuting" } else { "not_doubly_commuting" }),
            );
            Ok(if ok { 0 } else { 1 })
        }
        Cmd::Crosscheck { kernel, g, points } => {
            let outcomes: Vec<CrosscheckOutcome> = match (kernel, g) {
                (Some(kp), Some(gp)) => {
                    let k = load_kernel(kp, "K", b)?;
                    let gk = load_kernel(gp, "g", b)?;
                    let pts = resolve_points(points, &k, cli, b)?;
                    let pair = CrosscheckPair {
                        k_name: kp.display().to_string(),
                        g_name: gp.display().to_string(),
                        k,
                        g: gk,
                    };
                    vec![crosscheck_pair(&pair, cli.trunc, &pts, cli.tol)?]
                }
                _ => {
                    b.field("catalog", json!(true));
                    catalog_crosscheck(cli.trunc, cli.m.max(4), cli.max_radius, cli.tol)?
                }
            };
            let rows: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    json!({
                        "K": o.k_name,
                        "g": o.g_name,
                        "factor_verdict": report::verdict_label(&o.factor),
                        "factor_lambda_min": o.factor.lambda_min,
                        "brehmer_verdict": report::verdict_label(&o.brehmer),
                        "brehmer_lambda_min": o.brehmer.lambda_min,
                        "shield": o.brehmer_shield,
                        "trunc": o.trunc,
                        "agree": o.agree,
                    })
                })
                .collect();
            let all_agree = outcomes.iter().all(|o| o.agree);
            b.field("pairs", json!(rows));
            b.field(
                "verdict",
                json!(if all_agree { "agreement" } else { "disagreement" }),
            );
            Ok(if all_agree { 0 } else { 1 })
        }
        Cmd::Catalog => {
            let specs = vec![
                json!({"name": "szego_polydisc", "spec": {"type": "szego_polydisc", "n": 1},
                       "notes": "Hardy-space kernel of the polydisc; any n >= 1"}),
                json!({"name": "bergman_ball", "spec": {"type": "bergman_ball", "n": 1, "alpha": 2.0},
                       "notes": "weighted Bergman kernel of the ball; requires alpha > n"}),
                json!({"name": "quasiscalar", "spec": {"type": "quasiscalar", "base": {"type": "szego_polydisc", "n": 1}, "fiber_dim": 2},
                       "notes": "scalar base times the identity on a fiber"}),
                json!({"name": "product", "spec": {"type": "product", "factors": []},
                       "notes": "pointwise Schur product on a shared domain"}),
                json!({"name": "tensor", "spec": {"type": "tensor", "factors": []},
                       "notes": "tensor product on the product domain"}),
                json!({"name": "one_minus_pairing", "spec": {"type": "one_minus_pairing", "n": 1},
                       "notes": "1 - <z, w>; the standard non-kernel"}),
                json!({"name": "gram_table", "spec": {"type": "gram_table", "points": [], "fiber_dim": 1, "blocks": []},
                       "notes": "raw block table; the universal interchange form"}),
            ];
            b.field("kernels", json!(specs));
            let pairs: Vec<Value> = catalog_crosscheck_pairs()
                .iter()
                .map(|p| json!({"K": p.k_name, "g": p.g_name}))
                .collect();
            b.field("crosscheck_pairs", json!(pairs));
            b.field("verdict", json!("ok"));
            Ok(0)
        }
    }
}

/// Deterministic random product sections for a kernel pair.
fn generated_sections(
    k1: &KernelSpec,
    k2: &KernelSpec,
    cli: &Cli,
) -> Result<Vec<ProductSection>, Error> {
    let pts = sample_points(
        k1.domain_hint(),
        k1.arity(),
        cli.m,
        SampleStrategy::Pseudorandom,
        cli.seed,
        cli.max_radius,
    )?;
    let mut state = cli.seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(99);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    pts.into_iter()
        .map(|p| {
            let x1 = DVector::from_fn(k1.fiber_dim(), |_, _| rkhs_core::C64::new(next(), next()));
            let x2 = DVector::from_fn(k2.fiber_dim(), |_, _| rkhs_core::C64::new(next(), next()));
            ProductSection::new(p, x1, x2)
        })
        .collect()
}
