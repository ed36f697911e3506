//! Whether a set of invertible 2×2 matrices generates a semigroup whose
//! complex span is all of `M₂(ℂ)`.
//!
//! For `S = (s_ij)`, `𝔄_S` is the root set of `s₂₁α² + (s₁₁ − s₂₂)α − s₁₂`,
//! i.e. the `α` for which `(1, α)` is a left eigen-covector of `S`. The span
//! is everything exactly when no covector `(1, α)` is common to all inputs
//! and `(0, 1)` is not common either (some `s₂₁ ≠ 0`).

use serde::{Deserialize, Serialize};

use crate::algebra::linalg::determinant;
use crate::algebra::CxMatrix;
use crate::error::{Error, Result};
use crate::scalar::Cx;

/// Roots of different matrices closer than this (relative) coincide.
pub const ROOT_CLUSTER_TOL: f64 = 1e-8;

/// Entries at or below this are treated as zero.
const ZERO_TOL: f64 = 1e-12;

/// Depth limit when closing the input under products.
const MAX_WORD_LEN: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "roots", rename_all = "snake_case")]
pub enum RootSet {
    /// The quadratic vanishes identically (`S` is scalar).
    All,
    Empty,
    Finite(Vec<Cx<f64>>),
}

impl RootSet {
    fn contains(&self, z: Cx<f64>) -> bool {
        match self {
            RootSet::All => true,
            RootSet::Empty => false,
            RootSet::Finite(v) => v.iter().any(|&w| close(w, z)),
        }
    }

    fn intersect(&self, other: &RootSet) -> RootSet {
        match (self, other) {
            (RootSet::All, x) | (x, RootSet::All) => x.clone(),
            (RootSet::Empty, _) | (_, RootSet::Empty) => RootSet::Empty,
            (RootSet::Finite(a), b) => {
                let kept: Vec<Cx<f64>> = a.iter().copied().filter(|&z| b.contains(z)).collect();
                if kept.is_empty() {
                    RootSet::Empty
                } else {
                    RootSet::Finite(kept)
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, RootSet::Empty)
    }
}

fn close(a: Cx<f64>, b: Cx<f64>) -> bool {
    (a - b).norm() <= ROOT_CLUSTER_TOL * 1f64.max(a.norm()).max(b.norm())
}

/// `𝔄_S`, with the literal degenerations of the quadratic when `s₂₁ = 0`.
pub fn root_set(s: &CxMatrix<f64>) -> RootSet {
    let tol = ZERO_TOL * 1f64.max(s.max_abs());
    let a = s[(1, 0)];
    let b = s[(0, 0)] - s[(1, 1)];
    let c = -s[(0, 1)];
    if a.norm() <= tol {
        if b.norm() <= tol {
            return if c.norm() <= tol { RootSet::All } else { RootSet::Empty };
        }
        return RootSet::Finite(vec![-c / b]);
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    let plus = b + disc;
    let minus = b - disc;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    let (r1, r2) = if big.norm() == 0.0 {
        (Cx::new(0.0, 0.0), Cx::new(0.0, 0.0))
    } else {
        let q = -big / 2.0;
        (q / a, c / q)
    };
    if close(r1, r2) {
        RootSet::Finite(vec![r1])
    } else {
        RootSet::Finite(vec![r1, r2])
    }
}

/// A product `M_{w₁} M_{w₂} ⋯` of input matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanElement {
    pub word: Vec<usize>,
    pub matrix: Vec<Vec<Cx<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanVerdict {
    pub spans: bool,
    pub root_sets: Vec<RootSet>,
    pub intersection: RootSet,
    /// Some input has `s₂₁ ≠ 0`.
    pub has_lower_left: bool,
    /// When `spans`: four semigroup elements with independent vectorizations.
    pub spanning_set: Option<Vec<SpanElement>>,
    /// `|det|` of the 4×4 matrix of their vectorizations.
    pub coordinate_det: Option<f64>,
    /// When the intersection is nonempty: a common root (0 if every `𝔄_S = ℂ`).
    pub common_root: Option<Cx<f64>>,
}

fn check_input(mats: &[CxMatrix<f64>]) -> Result<()> {
    for m in mats {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::NonSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det.norm() <= ZERO_TOL {
            return Err(Error::Singular { det: det.norm() });
        }
    }
    Ok(())
}

pub fn span_check_2x2(mats: &[CxMatrix<f64>]) -> Result<SpanVerdict> {
    check_input(mats)?;
    let root_sets: Vec<RootSet> = mats.iter().map(root_set).collect();
    let intersection = root_sets.iter().fold(RootSet::All, |acc, r| acc.intersect(r));
    let has_lower_left = mats
        .iter()
        .any(|m| m[(1, 0)].norm() > ZERO_TOL * 1f64.max(m.max_abs()));
    let spans = !mats.is_empty() && intersection.is_empty() && has_lower_left;
    let common_root = match &intersection {
        RootSet::All if !mats.is_empty() => Some(Cx::new(0.0, 0.0)),
        RootSet::Finite(v) => v.first().copied(),
        _ => None,
    };
    let (spanning_set, coordinate_det) = if spans {
        match spanning_products(mats) {
            Some(set) => {
                let coords = CxMatrix::from_fn(4, 4, |i, j| {
                    let m = &set[j].matrix;
                    m[i / 2][i % 2]
                });
                let det = determinant(&coords)?.norm();
                (Some(set), Some(det))
            }
            None => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(SpanVerdict {
        spans,
        root_sets,
        intersection,
        has_lower_left,
        spanning_set,
        coordinate_det,
        common_root,
    })
}

/// Greedy search of the product closure for four independent elements.
fn spanning_products(mats: &[CxMatrix<f64>]) -> Option<Vec<SpanElement>> {
    let mut basis: Vec<Vec<Cx<f64>>> = Vec::new();
    let mut chosen: Vec<SpanElement> = Vec::new();
    let mut frontier: Vec<(Vec<usize>, CxMatrix<f64>)> =
        mats.iter().enumerate().map(|(i, m)| (vec![i], m.clone())).collect();
    for _ in 0..MAX_WORD_LEN {
        let mut next = Vec::new();
        for (word, m) in &frontier {
            let scale = m.max_abs();
            let v: Vec<Cx<f64>> = m.vectorize().into_iter().map(|z| z / scale).collect();
            if let Some(reduced) = reduce_against(&basis, &v) {
                basis.push(reduced);
                chosen.push(SpanElement {
                    word: word.clone(),
                    matrix: (0..2).map(|i| m.row(i).to_vec()).collect(),
                });
                if chosen.len() == 4 {
                    return Some(chosen);
                }
            }
            for (i, g) in mats.iter().enumerate() {
                let mut w = word.clone();
                w.push(i);
                next.push((w, m * g));
            }
        }
        // Four independent directions show up at short word lengths.
        next.truncate(4096);
        frontier = next;
    }
    None
}

/// Gram–Schmidt step: the component of `v` orthogonal to `basis`, if not negligible.
fn reduce_against(basis: &[Vec<Cx<f64>>], v: &[Cx<f64>]) -> Option<Vec<Cx<f64>>> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let dot: Cx<f64> = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= dot * bi;
            }
        }
    }
    let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (norm > 1e-9).then(|| r.into_iter().map(|z| z / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> CxMatrix<f64> {
        CxMatrix::from_real(rows)
    }

    #[test]
    fn identity_alone_does_not_span() {
        let v = span_check_2x2(&[CxMatrix::identity(2)]).unwrap();
        assert!(!v.spans);
        assert_eq!(v.root_sets[0], RootSet::All);
        assert!(!v.has_lower_left);
    }

    #[test]
    fn swap_and_shears_span() {
        let v = span_check_2x2(&[
            m(&[&[0.0, 1.0], &[1.0, 0.0]]),
            m(&[&[1.0, 1.0], &[0.0, 1.0]]),
            m(&[&[1.0, 0.0], &[1.0, 1.0]]),
        ])
        .unwrap();
        assert!(v.spans);
        assert_eq!(v.root_sets[1], RootSet::Empty);
        assert!(v.coordinate_det.unwrap() > 1e-6);
        assert_eq!(v.spanning_set.unwrap().len(), 4);
    }

    #[test]
    fn diagonal_pair_shares_root_zero() {
        let v = span_check_2x2(&[m(&[&[1.0, 0.0], &[0.0, 2.0]]), m(&[&[2.0, 0.0], &[0.0, 1.0]])]).unwrap();
        assert!(!v.spans);
        assert_eq!(v.intersection, RootSet::Finite(vec![Cx::new(0.0, 0.0)]));
        assert_eq!(v.common_root, Some(Cx::new(0.0, 0.0)));
    }

    #[test]
    fn singular_rejected() {
        assert!(matches!(
            span_check_2x2(&[m(&[&[1.0, 2.0], &[2.0, 4.0]])]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn common_root_is_a_common_covector() {
        // Both matrices have (1, 1) as a left eigen-covector.
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let b = m(&[&[1.0, 3.0], &[2.0, 0.0]]);
        let v = span_check_2x2(&[a.clone(), b.clone()]).unwrap();
        assert!(!v.spans);
        let alpha = v.common_root.unwrap();
        for s in [&a, &b] {
            let q = s[(1, 0)] * alpha * alpha + (s[(0, 0)] - s[(1, 1)]) * alpha - s[(0, 1)];
            assert!(q.norm() < 1e-12);
        }
    }
}
