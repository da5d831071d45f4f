//! Multi-index polynomial arithmetic in graded-lex order.
//!
//! Multi-indices are exponent tuples `k` in `N^n`; everywhere in the crate
//! they are ordered by total degree first, ties broken lexicographically on
//! the exponent tuple.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::C64;

pub type MultiIndex = Vec<u32>;

pub fn total_degree(k: &[u32]) -> u32 {
    k.iter().sum()
}

/// Graded-lex comparison: by total degree, ties lexicographic.
pub fn graded_lex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    total_degree(a).cmp(&total_degree(b)).then_with(|| a.cmp(b))
}

/// All multi-indices of arity `n` with total degree at most `deg`, in
/// graded-lex order.
pub fn multi_indices_up_to(n: usize, deg: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(out: &mut Vec<MultiIndex>, cur: &mut MultiIndex, pos: usize, remaining: u32) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=remaining {
            cur[pos] = v;
            rec(out, cur, pos + 1, remaining - v);
        }
        cur[pos] = 0;
    }
    for d in 0..=deg {
        let mut layer = Vec::new();
        rec(&mut layer, &mut cur, 0, d);
        let mut layer: Vec<MultiIndex> = layer.into_iter().filter(|k| total_degree(k) == d).collect();
        layer.sort_by(|a, b| graded_lex_cmp(a, b));
        out.extend(layer);
    }
    out
}

/// A finitely supported polynomial `sum_k a_k z^k` in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    arity: usize,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl Polynomial {
    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, value: C64) -> Self {
        let mut p = Self::zero(arity);
        if value != C64::new(0.0, 0.0) {
            p.coeffs.insert(vec![0; arity], value);
        }
        p
    }

    /// The coordinate monomial `z_j` (1-based index).
    pub fn coordinate(arity: usize, j: usize) -> Result<Self> {
        if j == 0 || j > arity {
            return Err(Error::Input(format!(
                "coordinate index must satisfy 1 <= j <= {arity}, got {j}"
            )));
        }
        let mut k = vec![0u32; arity];
        k[j - 1] = 1;
        let mut p = Self::zero(arity);
        p.coeffs.insert(k, C64::new(1.0, 0.0));
        Ok(p)
    }

    pub fn from_coeffs(arity: usize, coeffs: impl IntoIterator<Item = (MultiIndex, C64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, a) in coeffs {
            if k.len() != arity {
                return Err(Error::Input(format!(
                    "coefficient multi-index has arity {} in a {arity}-variable polynomial",
                    k.len()
                )));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Input("non-finite polynomial coefficient".into()));
            }
            if a != C64::new(0.0, 0.0) {
                *map.entry(k).or_insert(C64::new(0.0, 0.0)) += a;
            }
        }
        map.retain(|_, v| *v != C64::new(0.0, 0.0));
        Ok(Self { arity, coeffs: map })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, k: &[u32]) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|k| total_degree(k)).max().unwrap_or(0)
    }

    pub fn eval(&self, coords: &[C64]) -> Result<C64> {
        if coords.len() != self.arity {
            return Err(Error::Input(format!(
                "evaluating {}-variable polynomial at a {}-tuple",
                self.arity,
                coords.len()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (k, a) in &self.coeffs {
            let mut term = *a;
            for (j, &e) in k.iter().enumerate() {
                term *= coords[j].powu(e);
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: C64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, a)| (k.clone(), a * s))
            .filter(|(_, a)| *a != C64::new(0.0, 0.0))
            .collect();
        Self {
            arity: self.arity,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Input("polynomial arity mismatch in add".into()));
        }
        let mut coeffs = self.coeffs.clone();
        for (k, a) in &other.coeffs {
            let e = coeffs.entry(k.clone()).or_insert(C64::new(0.0, 0.0));
            *e += a;
        }
        coeffs.retain(|_, v| *v != C64::new(0.0, 0.0));
        Ok(Self {
            arity: self.arity,
            coeffs,
        })
    }

    /// Multiply by the monomial `z^k`.
    pub fn shift(&self, k: &[u32]) -> Result<Self> {
        if k.len() != self.arity {
            return Err(Error::Input("monomial arity mismatch in shift".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, a)| {
                let shifted: MultiIndex = m.iter().zip(k).map(|(x, y)| x + y).collect();
                (shifted, *a)
            })
            .collect();
        Ok(Self {
            arity: self.arity,
            coeffs,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Input("polynomial arity mismatch in mul".into()));
        }
        let mut coeffs: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (k1, a1) in &self.coeffs {
            for (k2, a2) in &other.coeffs {
                let k: MultiIndex = k1.iter().zip(k2).map(|(x, y)| x + y).collect();
                *coeffs.entry(k).or_insert(C64::new(0.0, 0.0)) += a1 * a2;
            }
        }
        coeffs.retain(|_, v| *v != C64::new(0.0, 0.0));
        Ok(Self {
            arity: self.arity,
            coeffs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn graded_lex_ordering() {
        let idx = multi_indices_up_to(2, 2);
        let want: Vec<MultiIndex> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![1, 0],
            vec![0, 2],
            vec![1, 1],
            vec![2, 0],
        ];
        assert_eq!(idx, want);
    }

    #[test]
    fn basis_counts() {
        assert_eq!(multi_indices_up_to(1, 3).len(), 4);
        assert_eq!(multi_indices_up_to(2, 2).len(), 6);
        assert_eq!(multi_indices_up_to(3, 8).len(), 165);
    }

    #[test]
    fn polynomial_eval_and_mul() {
        // p = 1 + 2 z^2 on one variable.
        let p = Polynomial::from_coeffs(1, vec![(vec![0], re(1.0)), (vec![2], re(2.0))]).unwrap();
        let v = p.eval(&[re(0.5)]).unwrap();
        assert!((v - re(1.5)).norm() < 1e-15);
        let q = Polynomial::coordinate(1, 1).unwrap();
        let pq = p.mul(&q).unwrap();
        assert_eq!(pq.degree(), 3);
        assert!((pq.coeff(&[1]) - re(1.0)).norm() < 1e-15);
        assert!((pq.coeff(&[3]) - re(2.0)).norm() < 1e-15);
    }

    #[test]
    fn coordinate_bounds_checked() {
        assert!(Polynomial::coordinate(2, 0).is_err());
        assert!(Polynomial::coordinate(2, 3).is_err());
        assert!(Polynomial::coordinate(2, 2).is_ok());
    }
}
