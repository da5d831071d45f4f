//! Sampled domain points and deterministic sampling strategies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Which domain a point claims to live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    Polydisc,
    Ball,
    Generic,
}

/// A point of the sampled index set: an n-tuple of complex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<C64>,
    domain: DomainTag,
}

impl Point {
    /// Validates the domain constraint: polydisc needs every `|z_j| < 1`,
    /// ball needs `sum |z_j|^2 < 1`; generic only needs finite coordinates.
    pub fn new(coords: Vec<C64>, domain: DomainTag) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Input("a point needs at least one coordinate".into()));
        }
        if !coords.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Input("point has non-finite coordinates".into()));
        }
        match domain {
            DomainTag::Polydisc => {
                if let Some(z) = coords.iter().find(|z| z.norm() >= 1.0) {
                    return Err(Error::Domain(format!(
                        "polydisc point has |z| = {} >= 1",
                        z.norm()
                    )));
                }
            }
            DomainTag::Ball => {
                let s: f64 = coords.iter().map(|z| z.norm_sqr()).sum();
                if s >= 1.0 {
                    return Err(Error::Domain(format!(
                        "ball point has sum |z|^2 = {s} >= 1"
                    )));
                }
            }
            DomainTag::Generic => {}
        }
        Ok(Self { coords, domain })
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn arity(&self) -> usize {
        self.coords.len()
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    /// `sum_j z_j conj(w_j)`, the sesquilinear pairing behind the ball
    /// kernels.
    pub fn pairing(&self, other: &Point) -> C64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(z, w)| z * w.conj())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStrategy {
    RadialGrid,
    Pseudorandom,
}

/// Deterministically sample `m` distinct interior points.
///
/// The radial grid includes the origin and reaches maximum modulus
/// `max_radius` (0.9 by default at the CLI); coordinates beyond the first
/// are rotated so the sample is not confined to a line. All sampled points
/// stay at modulus <= `max_radius` per coordinate (polydisc) or in norm
/// (ball): Grams blow up near the boundary.
pub fn sample_points(
    domain: DomainTag,
    n: usize,
    m: usize,
    strategy: SampleStrategy,
    seed: u64,
    max_radius: f64,
) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::Input("dimension n must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::Input("need at least one sample point".into()));
    }
    if !(0.0 < max_radius && max_radius < 1.0) {
        return Err(Error::Input(format!(
            "max_radius must lie in (0, 1), got {max_radius}"
        )));
    }
    if domain == DomainTag::Generic {
        return Err(Error::Input(
            "cannot sample the generic domain; supply explicit points".into(),
        ));
    }
    match strategy {
        SampleStrategy::RadialGrid => {
            let mut pts = Vec::with_capacity(m);
            let ball_scale = if domain == DomainTag::Ball {
                1.0 / (n as f64).sqrt()
            } else {
                1.0
            };
            for i in 0..m {
                let r = if m == 1 {
                    0.0
                } else {
                    max_radius * i as f64 / (m - 1) as f64
                };
                let coords: Vec<C64> = (0..n)
                    .map(|j| {
                        let angle = 2.0 * std::f64::consts::PI * (i * j) as f64 / m as f64;
                        C64::from_polar(r * ball_scale, angle)
                    })
                    .collect();
                pts.push(Point::new(coords, domain)?);
            }
            Ok(pts)
        }
        SampleStrategy::Pseudorandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pts: Vec<Point> = Vec::with_capacity(m);
            let mut guard = 0usize;
            while pts.len() < m {
                guard += 1;
                if guard > 10_000 * m {
                    return Err(Error::Input(
                        "sampling failed to produce distinct points".into(),
                    ));
                }
                let coords: Vec<C64> = (0..n).map(|_| disc_sample(&mut rng, max_radius)).collect();
                if domain == DomainTag::Ball {
                    let s: f64 = coords.iter().map(|z| z.norm_sqr()).sum();
                    if s >= max_radius * max_radius {
                        continue;
                    }
                }
                let p = Point::new(coords, domain)?;
                if pts.contains(&p) {
                    continue;
                }
                pts.push(p);
            }
            Ok(pts)
        }
    }
}

fn disc_sample(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    loop {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        if x * x + y * y < 1.0 {
            return C64::new(x * radius, y * radius);
        }
    }
}
