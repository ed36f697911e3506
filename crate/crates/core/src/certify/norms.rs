use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::algebra::{hermitian_eigen, CxMatrix, PolyMap};
use crate::error::{Error, Result};
use crate::jets::pushforward_matrix;
use crate::scalar::Cx;
use crate::spaces::{jet_gram, SpaceDescriptor};

/// Gram eigenvalues below this fraction of the largest are discarded
/// before solving the norm pencil.
pub const PENCIL_TOL: f64 = 1e-10;

/// Tolerance for `‖A‖ ≤ 1` and for the orthogonality condition on `b`.
const AFFINE_TOL: f64 = 1e-9;

/// Operator norm of the pushforward on the span of the dual jets of order
/// `≤ n` at a fixed point. The span is invariant, so this is a lower bound
/// for the norm of the composition operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionNorm {
    pub n: u32,
    pub norm: f64,
    /// Numerical rank of the dual-jet Gram matrix.
    pub rank: usize,
    pub size: usize,
    /// The dual jets were not independent; the bound is still valid but is
    /// taken over a smaller subspace.
    pub rank_deficient: bool,
}

pub fn finite_section_norm(
    space: &SpaceDescriptor,
    f: &PolyMap<f64>,
    p: &[Cx<f64>],
    n: u32,
) -> Result<SectionNorm> {
    finite_section_norm_with(space, f, p, n, PENCIL_TOL)
}

/// Largest `√μ` of the pencil `Mᴴ G M v = μ G v` on the range of `G`,
/// where `M` is the pushforward matrix and `G` the dual-jet Gram matrix.
/// A dual vector with jet coordinates `v` has squared norm `vᴴ G v`.
pub fn finite_section_norm_with(
    space: &SpaceDescriptor,
    f: &PolyMap<f64>,
    p: &[Cx<f64>],
    n: u32,
    pencil_tol: f64,
) -> Result<SectionNorm> {
    if !space.is_hilbert() {
        return Err(Error::NotHilbert);
    }
    if f.dim_in() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: f.dim_in(),
        });
    }
    let m = pushforward_matrix(f, p, n)?.matrix;
    let gram = jet_gram(space, p, n)?;
    let g = &gram.entries;
    let size = g.rows();
    let d = gram.diagonal_scaling();
    let scaled = CxMatrix::from_fn(size, size, |i, j| g[(i, j)] * (d[i] * d[j]));
    let eig = hermitian_eigen(&scaled)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..size)
        .filter(|&j| eig.values[j] > pencil_tol * top && eig.values[j] > 0.0)
        .collect();
    let k = keep.len();
    if k == 0 {
        return Err(Error::Numerical("dual-jet Gram matrix vanishes".into()));
    }
    // Columns of W are G-orthonormal: Wᴴ G W = I.
    let w = CxMatrix::from_fn(size, k, |i, c| {
        let j = keep[c];
        eig.vectors[(i, j)] * (d[i] / eig.values[j].sqrt())
    });
    let b = &m * &w;
    let kmat = &(&b.adjoint() * g) * &b;
    let top_k = hermitian_eigen(&kmat)?.values.last().copied().unwrap_or(0.0);
    Ok(SectionNorm {
        n,
        norm: top_k.max(0.0).sqrt(),
        rank: k,
        size,
        rank_deficient: k < size,
    })
}

/// Whether `z ↦ A z + b` gives a bounded composition operator on a Fock
/// space: `‖A‖ ≤ 1` and `⟨Aζ, b⟩ = 0` whenever `|Aζ| = |ζ|`.
pub fn fock_affine_bounded(alpha: f64, a: &CxMatrix<f64>, b: &[Cx<f64>]) -> Result<bool> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidDescriptor(format!("Fock parameter must be positive, got {alpha}")));
    }
    let d = a.require_square()?;
    if b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: b.len(),
        });
    }
    let det = crate::algebra::linalg::determinant(a)?;
    if det.norm() <= 1e-12 {
        return Err(Error::Singular { det: det.norm() });
    }
    let gram = &a.adjoint() * a;
    let eig = hermitian_eigen(&gram)?;
    let sigma: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    if sigma.iter().any(|&s| s > 1.0 + AFFINE_TOL) {
        return Ok(false);
    }
    let bnorm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for (j, &s) in sigma.iter().enumerate() {
        if (s - 1.0).abs() > AFFINE_TOL {
            continue;
        }
        let zeta = eig.vectors.column(j);
        let image = a.mul_vec(&zeta);
        let dot: Cx<f64> = image.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        if dot.norm() > AFFINE_TOL * bnorm.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ln ‖z^m‖` in the one-dimensional Fock space `F_α^q`, up to an
/// additive constant independent of `m`.
fn log_monomial_norm(m: u32, alpha: f64, q: f64) -> f64 {
    let m = m as f64;
    if q.is_infinite() {
        // sup_r r^m e^{−αr²/2}, attained at r² = m/α
        if m == 0.0 {
            0.0
        } else {
            0.5 * m * ((m / alpha).ln() - 1.0)
        }
    } else {
        let s = m * q / 2.0 + 1.0;
        (ln_gamma(s) - s * (alpha * q / 2.0).ln()) / q
    }
}

/// Ratios `‖C_f z^n‖ / ‖z^n‖` for `n = 0..=n_max` and `f(z) = a·z^k`.
pub fn monomial_ratio_witness(space: &SpaceDescriptor, f: &PolyMap<f64>, n_max: u32) -> Result<Vec<(u32, f64)>> {
    let (alpha, q) = match space {
        SpaceDescriptor::Fock { dim: 1, alpha, q } => (*alpha, q.0),
        _ => {
            return Err(Error::InvalidDescriptor(
                "monomial witnesses need a one-dimensional Fock space".into(),
            ))
        }
    };
    if f.dim_in() != 1 || f.dim_out() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim_in().max(f.dim_out()),
        });
    }
    let poly = &f.components()[0];
    let mut terms = poly.terms();
    let (k, a) = match (terms.next(), terms.next()) {
        (Some((idx, c)), None) if idx.0[0] >= 1 => (idx.0[0], *c),
        _ => {
            return Err(Error::UnsupportedMap(
                "monomial witnesses need f(z) = a·z^k with k ≥ 1".into(),
            ))
        }
    };
    let log_a = a.norm().ln();
    Ok((0..=n_max)
        .map(|n| {
            let log_ratio = n as f64 * log_a + log_monomial_norm(k * n, alpha, q) - log_monomial_norm(n, alpha, q);
            (n, log_ratio.exp())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiPoly;
    use crate::scalar::cx;

    fn map(c: &[f64]) -> PolyMap<f64> {
        PolyMap::univariate(MultiPoly::univariate_real(c)).unwrap()
    }

    #[test]
    fn identity_has_norm_one() {
        let s = SpaceDescriptor::fock(1, 1.0).unwrap();
        for n in 1..6 {
            let v = finite_section_norm(&s, &map(&[0.0, 1.0]), &[cx(0.4, 0.3)], n).unwrap();
            assert!((v.norm - 1.0).abs() < 1e-9, "{n}: {}", v.norm);
        }
    }

    #[test]
    fn diagonal_fock_norms() {
        let s = SpaceDescriptor::fock(1, 1.0).unwrap();
        for n in 1..=6 {
            let v = finite_section_norm(&s, &map(&[0.0, 0.5]), &[cx(0.0, 0.0)], n).unwrap();
            assert!((v.norm - 1.0).abs() < 1e-12);
            let v = finite_section_norm(&s, &map(&[0.0, 2.0]), &[cx(0.0, 0.0)], n).unwrap();
            assert!((v.norm - 2f64.powi(n as i32)).abs() < 1e-9 * 2f64.powi(n as i32));
        }
    }

    #[test]
    fn affine_rule() {
        let half = CxMatrix::diag(&[cx(0.5, 0.0), cx(0.5, 0.0)]);
        assert!(fock_affine_bounded(1.0, &half, &[cx(3.0, 0.0), cx(1.0, 1.0)]).unwrap());
        let two = CxMatrix::diag(&[cx(2.0, 0.0), cx(2.0, 0.0)]);
        assert!(!fock_affine_bounded(1.0, &two, &[cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap());
        let id = CxMatrix::<f64>::identity(2);
        assert!(!fock_affine_bounded(1.0, &id, &[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap());
        assert!(fock_affine_bounded(1.0, &id, &[cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap());
        // Partial isometry direction e₁; translation along e₂ is allowed.
        let mixed = CxMatrix::diag(&[cx(1.0, 0.0), cx(0.5, 0.0)]);
        assert!(fock_affine_bounded(1.0, &mixed, &[cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap());
        assert!(!fock_affine_bounded(1.0, &mixed, &[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap());
    }

    #[test]
    fn monomial_ratios() {
        let s = SpaceDescriptor::fock(1, 1.0).unwrap();
        let r = monomial_ratio_witness(&s, &map(&[0.0, 0.0, 1.0]), 5).unwrap();
        assert!((r[5].1 - 30240f64.sqrt()).abs() < 1e-9 * r[5].1);
        let r = monomial_ratio_witness(&s, &map(&[0.0, 0.5]), 4).unwrap();
        for (n, v) in r {
            assert!((v - 0.5f64.powi(n as i32)).abs() < 1e-14);
        }
        assert!(monomial_ratio_witness(&s, &map(&[1.0, 0.0, 1.0]), 4).is_err());
    }
}
