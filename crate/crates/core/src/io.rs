//! JSON wire formats: kernel specs, point files, multipliers, sections and
//! submodule files, plus content hashing for report provenance.
//!
//! Complex numbers are always `[re, im]` pairs. A Gram-table spec is the
//! universal interchange representation: `blocks` is an `m x m` array of
//! `d x d` arrays of `[re, im]` entries. Conversion errors carry a JSON
//! pointer to the offending element.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::C64;
use crate::multiplier::MultiplierSpec;
use crate::point::{DomainTag, Point};
use crate::poly::Polynomial;
use crate::trunc::SubmoduleOrigin;

pub type Cx = [f64; 2];

fn cx(v: Cx) -> C64 {
    C64::new(v[0], v[1])
}

fn uncx(z: C64) -> Cx {
    [z.re, z.im]
}

/// Lowercase hex SHA-256 of raw input bytes, recorded in reports so that a
/// verdict is tied to the exact inputs that produced it.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpecFile {
    SzegoPolydisc {
        n: usize,
    },
    BergmanBall {
        n: usize,
        alpha: f64,
    },
    Quasiscalar {
        base: Box<KernelSpecFile>,
        fiber_dim: usize,
    },
    Product {
        factors: Vec<KernelSpecFile>,
    },
    Tensor {
        factors: Vec<KernelSpecFile>,
    },
    OneMinusPairing {
        n: usize,
    },
    GramTable {
        points: Vec<Vec<Cx>>,
        fiber_dim: usize,
        blocks: Vec<Vec<Vec<Vec<Cx>>>>,
        #[serde(default)]
        domain: Option<DomainTag>,
    },
}

impl KernelSpecFile {
    pub fn to_spec(&self) -> Result<KernelSpec> {
        self.convert("")
    }

    fn convert(&self, ptr: &str) -> Result<KernelSpec> {
        let at = |msg: String| {
            Error::Input(format!(
                "at {}: {msg}",
                if ptr.is_empty() { "/" } else { ptr }
            ))
        };
        let spec = match self {
            KernelSpecFile::SzegoPolydisc { n } => KernelSpec::SzegoPolydisc { n: *n },
            KernelSpecFile::BergmanBall { n, alpha } => {
                if *alpha <= *n as f64 {
                    return Err(at(format!(
                        "bergman_ball requires alpha > n, got alpha = {alpha}, n = {n}"
                    )));
                }
                KernelSpec::BergmanBall {
                    n: *n,
                    alpha: *alpha,
                }
            }
            KernelSpecFile::Quasiscalar { base, fiber_dim } => KernelSpec::Quasiscalar {
                base: Box::new(base.convert(&format!("{ptr}/base"))?),
                fiber_dim: *fiber_dim,
            },
            KernelSpecFile::Product { factors } => KernelSpec::Product {
                factors: factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.convert(&format!("{ptr}/factors/{i}")))
                    .collect::<Result<_>>()?,
            },
            KernelSpecFile::Tensor { factors } => KernelSpec::Tensor {
                factors: factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.convert(&format!("{ptr}/factors/{i}")))
                    .collect::<Result<_>>()?,
            },
            KernelSpecFile::OneMinusPairing { n } => KernelSpec::OneMinusPairing { n: *n },
            KernelSpecFile::GramTable {
                points,
                fiber_dim,
                blocks,
                domain,
            } => {
                let tag = domain.unwrap_or(DomainTag::Generic);
                let pts: Vec<Point> = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        Point::new(p.iter().map(|&v| cx(v)).collect(), tag)
                            .map_err(|e| Error::Input(format!("at {ptr}/points/{i}: {e}")))
                    })
                    .collect::<Result<_>>()?;
                let d = *fiber_dim;
                let mut rows = Vec::with_capacity(blocks.len());
                for (p, row) in blocks.iter().enumerate() {
                    let mut out_row = Vec::with_capacity(row.len());
                    for (q, b) in row.iter().enumerate() {
                        if b.len() != d || b.iter().any(|r| r.len() != d) {
                            return Err(Error::Input(format!(
                                "at {ptr}/blocks/{p}/{q}: block is not {d}x{d}"
                            )));
                        }
                        let m = DMatrix::from_fn(d, d, |r, c| cx(b[r][c]));
                        out_row.push(m);
                    }
                    rows.push(out_row);
                }
                KernelSpec::GramTable {
                    points: pts,
                    fiber_dim: d,
                    blocks: rows,
                }
            }
        };
        spec.validate().map_err(|e| at(format!("{e}")))?;
        Ok(spec)
    }

    pub fn from_spec(spec: &KernelSpec) -> Self {
        match spec {
            KernelSpec::SzegoPolydisc { n } => KernelSpecFile::SzegoPolydisc { n: *n },
            KernelSpec::BergmanBall { n, alpha } => KernelSpecFile::BergmanBall {
                n: *n,
                alpha: *alpha,
            },
            KernelSpec::Quasiscalar { base, fiber_dim } => KernelSpecFile::Quasiscalar {
                base: Box::new(Self::from_spec(base)),
                fiber_dim: *fiber_dim,
            },
            KernelSpec::Product { factors } => KernelSpecFile::Product {
                factors: factors.iter().map(Self::from_spec).collect(),
            },
            KernelSpec::Tensor { factors } => KernelSpecFile::Tensor {
                factors: factors.iter().map(Self::from_spec).collect(),
            },
            KernelSpec::OneMinusPairing { n } => KernelSpecFile::OneMinusPairing { n: *n },
            KernelSpec::GramTable {
                points,
                fiber_dim,
                blocks,
            } => KernelSpecFile::GramTable {
                points: points
                    .iter()
                    .map(|p| p.coords().iter().map(|&z| uncx(z)).collect())
                    .collect(),
                fiber_dim: *fiber_dim,
                blocks: blocks
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|b| {
                                (0..b.nrows())
                                    .map(|r| (0..b.ncols()).map(|c| uncx(b[(r, c)])).collect())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
                domain: None,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    pub domain: DomainTag,
    pub n: usize,
    pub points: Vec<Vec<Cx>>,
}

impl PointsFile {
    pub fn to_points(&self) -> Result<Vec<Point>> {
        if self.points.is_empty() {
            return Err(Error::Input("at /points: need at least one point".into()));
        }
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.len() != self.n {
                    return Err(Error::Input(format!(
                        "at /points/{i}: expected {} coordinates, got {}",
                        self.n,
                        p.len()
                    )));
                }
                Point::new(p.iter().map(|&v| cx(v)).collect(), self.domain)
                    .map_err(|e| Error::Input(format!("at /points/{i}: {e}")))
            })
            .collect()
    }

    pub fn from_points(points: &[Point], domain: DomainTag) -> Self {
        Self {
            domain,
            n: points.first().map_or(0, |p| p.arity()),
            points: points
                .iter()
                .map(|p| p.coords().iter().map(|&z| uncx(z)).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffFile {
    pub k: Vec<u32>,
    pub a: Cx,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub coeffs: Vec<CoeffFile>,
}

impl PolyFile {
    pub fn to_poly(&self, ptr: &str) -> Result<Polynomial> {
        if self.coeffs.is_empty() {
            return Err(Error::Input(format!("at {ptr}: polynomial has no terms")));
        }
        let arity = self.coeffs[0].k.len();
        Polynomial::from_coeffs(arity, self.coeffs.iter().map(|c| (c.k.clone(), cx(c.a))))
            .map_err(|e| Error::Input(format!("at {ptr}: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyEntryFile {
    pub row: usize,
    pub col: usize,
    pub coeffs: Vec<CoeffFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiplierSpecFile {
    Constant {
        matrix: Vec<Vec<Cx>>,
    },
    Coordinate {
        j: usize,
    },
    PolynomialMatrix {
        out_dim: usize,
        in_dim: usize,
        entries: Vec<PolyEntryFile>,
    },
    Product {
        factors: Vec<MultiplierSpecFile>,
    },
    ScalarPolynomial {
        coeffs: Vec<CoeffFile>,
    },
}

impl MultiplierSpecFile {
    pub fn to_spec(&self) -> Result<MultiplierSpec> {
        self.convert("")
    }

    fn convert(&self, ptr: &str) -> Result<MultiplierSpec> {
        let spec = match self {
            MultiplierSpecFile::Constant { matrix } => {
                let rows = matrix.len();
                let cols = matrix.first().map_or(0, |r| r.len());
                if rows == 0 || cols == 0 || matrix.iter().any(|r| r.len() != cols) {
                    return Err(Error::Input(format!(
                        "at {ptr}/matrix: constant multiplier must be a rectangular nonempty matrix"
                    )));
                }
                MultiplierSpec::Constant {
                    matrix: DMatrix::from_fn(rows, cols, |r, c| cx(matrix[r][c])),
                }
            }
            MultiplierSpecFile::Coordinate { j } => MultiplierSpec::Coordinate { j: *j },
            MultiplierSpecFile::PolynomialMatrix {
                out_dim,
                in_dim,
                entries,
            } => {
                let mut arity = None;
                let mut map = std::collections::BTreeMap::new();
                for (i, e) in entries.iter().enumerate() {
                    let p = PolyFile {
                        coeffs: e.coeffs.clone(),
                    }
                    .to_poly(&format!("{ptr}/entries/{i}"))?;
                    match arity {
                        None => arity = Some(p.arity()),
                        Some(a) if a != p.arity() => {
                            return Err(Error::Input(format!(
                                "at {ptr}/entries/{i}: mixed multi-index arity"
                            )))
                        }
                        _ => {}
                    }
                    map.insert((e.row, e.col), p);
                }
                MultiplierSpec::PolynomialMatrix {
                    out_dim: *out_dim,
                    in_dim: *in_dim,
                    arity: arity.ok_or_else(|| {
                        Error::Input(format!("at {ptr}/entries: need at least one entry"))
                    })?,
                    entries: map,
                }
            }
            MultiplierSpecFile::Product { factors } => MultiplierSpec::Product {
                factors: factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.convert(&format!("{ptr}/factors/{i}")))
                    .collect::<Result<_>>()?,
            },
            MultiplierSpecFile::ScalarPolynomial { coeffs } => MultiplierSpec::ScalarPolynomial {
                poly: PolyFile {
                    coeffs: coeffs.clone(),
                }
                .to_poly(&format!("{ptr}/coeffs"))?,
            },
        };
        spec.validate().map_err(|e| {
            Error::Input(format!(
                "at {}: {e}",
                if ptr.is_empty() { "/" } else { ptr }
            ))
        })?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionFile {
    pub mu: Vec<Cx>,
    pub x1: Vec<Cx>,
    pub x2: Vec<Cx>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionsFile {
    pub sections: Vec<SectionFile>,
}

impl SectionsFile {
    pub fn to_sections(&self, domain: DomainTag) -> Result<Vec<crate::algebra::ProductSection>> {
        self.sections
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mu = Point::new(s.mu.iter().map(|&v| cx(v)).collect(), domain)
                    .map_err(|e| Error::Input(format!("at /sections/{i}/mu: {e}")))?;
                crate::algebra::ProductSection::new(
                    mu,
                    DVector::from_iterator(s.x1.len(), s.x1.iter().map(|&v| cx(v))),
                    DVector::from_iterator(s.x2.len(), s.x2.iter().map(|&v| cx(v))),
                )
                .map_err(|e| Error::Input(format!("at /sections/{i}: {e}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OriginFile {
    Generators { polys: Vec<PolyFile> },
    Multiplier { theta: MultiplierSpecFile },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmoduleFile {
    pub parent: KernelSpecFile,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    pub origin: OriginFile,
}

impl SubmoduleFile {
    /// Parent spec, truncation degree (the file value wins over the
    /// fallback), and the origin in core terms.
    pub fn to_parts(&self, fallback_n: usize) -> Result<(KernelSpec, usize, SubmoduleOrigin)> {
        let parent = self
            .parent
            .to_spec()
            .map_err(|e| Error::Input(format!("at /parent: {e}")))?;
        let n = self.n.unwrap_or(fallback_n);
        let origin = match &self.origin {
            OriginFile::Generators { polys } => {
                let gens: Vec<Vec<Polynomial>> = polys
                    .iter()
                    .enumerate()
                    .map(|(i, p)| Ok(vec![p.to_poly(&format!("/origin/polys/{i}"))?]))
                    .collect::<Result<_>>()?;
                SubmoduleOrigin::Generators(gens)
            }
            OriginFile::Multiplier { theta } => SubmoduleOrigin::Multiplier(
                theta
                    .to_spec()
                    .map_err(|e| Error::Input(format!("at /origin/theta: {e}")))?,
            ),
        };
        Ok((parent, n, origin))
    }
}

/// Parse a kernel spec from JSON text with schema checking.
pub fn kernel_from_json(text: &str) -> Result<KernelSpec> {
    let file: KernelSpecFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("kernel spec: {e}")))?;
    file.to_spec()
}

pub fn points_from_json(text: &str) -> Result<Vec<Point>> {
    let file: PointsFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("points file: {e}")))?;
    file.to_points()
}

pub fn multiplier_from_json(text: &str) -> Result<MultiplierSpec> {
    let file: MultiplierSpecFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("multiplier spec: {e}")))?;
    file.to_spec()
}

pub fn sections_from_json(
    text: &str,
    domain: DomainTag,
) -> Result<Vec<crate::algebra::ProductSection>> {
    let file: SectionsFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("sections file: {e}")))?;
    file.to_sections(domain)
}

pub fn submodule_from_json(
    text: &str,
    fallback_n: usize,
) -> Result<(KernelSpec, usize, SubmoduleOrigin)> {
    let file: SubmoduleFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("submodule spec: {e}")))?;
    file.to_parts(fallback_n)
}

/// Complex vector as `[re, im]` pairs for reports.
pub fn vector_to_json(v: &DVector<C64>) -> serde_json::Value {
    serde_json::json!(v.iter().map(|&z| uncx(z)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_specs_round_trip() {
        let texts = [
            r#"{"type":"szego_polydisc","n":2}"#,
            r#"{"type":"bergman_ball","n":1,"alpha":2.0}"#,
            r#"{"type":"quasiscalar","base":{"type":"szego_polydisc","n":1},"fiber_dim":3}"#,
            r#"{"type":"product","factors":[{"type":"szego_polydisc","n":1},{"type":"bergman_ball","n":1,"alpha":2.0}]}"#,
            r#"{"type":"one_minus_pairing","n":1}"#,
        ];
        for t in texts {
            let spec = kernel_from_json(t).unwrap();
            let back = serde_json::to_string(&KernelSpecFile::from_spec(&spec)).unwrap();
            let again = kernel_from_json(&back).unwrap();
            assert_eq!(spec.fiber_dim(), again.fiber_dim());
            assert_eq!(spec.arity(), again.arity());
        }
    }

    #[test]
    fn bergman_alpha_constraint_is_cited() {
        let err = kernel_from_json(r#"{"type":"bergman_ball","n":2,"alpha":1.5}"#).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("alpha > n"), "message was: {msg}");
    }

    #[test]
    fn nested_constraint_violations_carry_a_pointer() {
        let err = kernel_from_json(
            r#"{"type":"product","factors":[{"type":"szego_polydisc","n":1},{"type":"bergman_ball","n":1,"alpha":0.5}]}"#,
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("/factors/1"), "message was: {msg}");
    }

    #[test]
    fn missing_fields_are_schema_errors() {
        let err = kernel_from_json(
            r#"{"type":"gram_table","points":[[[0.0,0.0]]],"blocks":[[[[[1.0,0.0]]]]]}"#,
        )
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("fiber_dim"), "message was: {msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = kernel_from_json(r#"{"type":"szego_polydisc","n":1,"extra":true}"#).unwrap_err();
        assert!(format!("{err}").contains("extra"));
    }

    #[test]
    fn points_file_parses_and_validates() {
        let pts = points_from_json(
            r#"{"domain":"polydisc","n":2,"points":[[[0.0,0.0],[0.1,0.2]],[[0.5,0.0],[0.0,-0.5]]]}"#,
        )
        .unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].arity(), 2);

        let err = points_from_json(r#"{"domain":"polydisc","n":1,"points":[[[1.5,0.0]]]}"#)
            .unwrap_err();
        assert!(format!("{err}").contains("/points/0"));
    }

    #[test]
    fn multiplier_files_parse() {
        let m = multiplier_from_json(r#"{"type":"coordinate","j":1}"#).unwrap();
        assert_eq!(m.out_dim(), 1);
        let m = multiplier_from_json(
            r#"{"type":"polynomial_matrix","out_dim":2,"in_dim":2,"entries":[{"row":0,"col":0,"coeffs":[{"k":[1],"a":[1.0,0.0]}]},{"row":1,"col":1,"coeffs":[{"k":[0],"a":[1.0,0.0]}]}]}"#,
        )
        .unwrap();
        assert_eq!(m.out_dim(), 2);
        let m = multiplier_from_json(r#"{"type":"constant","matrix":[[[2.0,0.0]]]}"#).unwrap();
        assert_eq!(m.in_dim(), 1);
    }

    #[test]
    fn submodule_file_parses() {
        let (parent, n, origin) = submodule_from_json(
            r#"{"parent":{"type":"szego_polydisc","n":2},"N":8,"origin":{"type":"generators","polys":[{"coeffs":[{"k":[1,0],"a":[1.0,0.0]},{"k":[0,1],"a":[-1.0,0.0]}]}]}}"#,
            5,
        )
        .unwrap();
        assert_eq!(parent.arity(), 2);
        assert_eq!(n, 8);
        match origin {
            SubmoduleOrigin::Generators(g) => assert_eq!(g.len(), 1),
            _ => panic!("expected generators"),
        }
    }

    #[test]
    fn content_hash_is_stable() {
        assert_eq!(
            content_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
