//! Jet filtration at a fixed point and the action of a polynomial map on it.
//!
//! Basis element `α` stands for the functional `h ↦ (∂^α h)(p)`. The
//! pushforward acts on columns: column `α` of [`PushforwardMatrix::matrix`]
//! holds the coordinates of `f_*(δ_p ∂^α)`, i.e.
//! `∂^α(h∘f)(p) = Σ_β M[β,α] ∂^β h(p)`. With this convention
//! `M(f∘g) = M(f)·M(g)` for maps fixing `p`.

use serde::{Deserialize, Serialize};

use crate::algebra::{CxMatrix, MultiIndex, MultiPoly, PolyMap};
use crate::error::{Error, Result};
use crate::scalar::{binomial_usize, Cx, Real};

/// Fixed-point residual accepted by [`pushforward_matrix`].
pub const FIXED_POINT_TOL: f64 = 1e-9;

/// Largest tolerated entry below the block diagonal.
pub const LEAKAGE_TOL: f64 = 1e-9;

/// All multi-indices of total degree ≤ `order` in graded-lex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetBasis {
    dim: usize,
    order: u32,
    indices: Vec<MultiIndex>,
    /// `offsets[k]` is the position of the first index of degree `k`;
    /// `offsets[order + 1] == indices.len()`.
    offsets: Vec<usize>,
}

impl JetBasis {
    pub fn new(dim: usize, order: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDescriptor("jet basis needs d ≥ 1".into()));
        }
        let mut indices = Vec::new();
        let mut offsets = Vec::with_capacity(order as usize + 2);
        for k in 0..=order {
            offsets.push(indices.len());
            indices.extend(MultiIndex::of_degree(dim, k));
        }
        offsets.push(indices.len());
        Ok(JetBasis {
            dim,
            order,
            indices,
            offsets,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Position range of the degree-`k` part.
    pub fn grade(&self, k: u32) -> std::ops::Range<usize> {
        self.offsets[k as usize]..self.offsets[k as usize + 1]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        if alpha.dim() != self.dim || alpha.degree() > self.order {
            return None;
        }
        self.indices.binary_search(alpha).ok()
    }
}

/// Matrix of `f_*` on the jet filtration at a fixed point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PushforwardMatrix<T: Real> {
    pub basis: JetBasis,
    pub point: Vec<Cx<T>>,
    pub matrix: CxMatrix<T>,
}

/// Diagonal blocks of a pushforward matrix, one per homogeneous degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GradedBlocks<T: Real> {
    pub blocks: Vec<CxMatrix<T>>,
    /// Largest modulus of an entry mapping a degree into a higher one.
    pub leakage: T,
}

/// `max_i |f(p)_i − p_i|`.
pub fn fixed_point_residual<T: Real>(f: &PolyMap<T>, p: &[Cx<T>]) -> Result<T> {
    let fp = f.eval(p)?;
    Ok(fp
        .iter()
        .zip(p)
        .map(|(a, b)| (*a - *b).norm())
        .fold(T::zero(), T::max))
}

/// Exact pushforward matrix of `f` on `𝒟_n` at the fixed point `p`.
///
/// With `F(u) = f(p+u) − p`, the entry `M[β,α] = α!/β! · [u^α] F(u)^β`,
/// the coefficient read off after expanding `F^β` up to degree `n`.
pub fn pushforward_matrix<T: Real>(
    f: &PolyMap<T>,
    p: &[Cx<T>],
    n: u32,
) -> Result<PushforwardMatrix<T>> {
    if !f.is_self_map() {
        return Err(Error::DimensionMismatch {
            expected: f.dim_in(),
            found: f.dim_out(),
        });
    }
    let d = f.dim_in();
    let residual = fixed_point_residual(f, p)?;
    let tolerance = T::tol(FIXED_POINT_TOL);
    if !(residual <= tolerance) {
        return Err(Error::NotFixedPoint {
            residual: residual.f64(),
            tolerance: tolerance.f64(),
        });
    }
    let basis = JetBasis::new(d, n)?;
    // F(u) = f(p + u) - p, with the constant term dropped so F(0) = 0 exactly.
    let centred: Vec<MultiPoly<T>> = f
        .components()
        .iter()
        .map(|c| {
            let mut s = c.shift(p)?;
            let c0 = s.coeff(&MultiIndex::zero(d));
            s.add_term(MultiIndex::zero(d), -c0);
            Ok(s.truncate(n))
        })
        .collect::<Result<_>>()?;

    let size = basis.len();
    let mut m = CxMatrix::zeros(size, size);
    // powers[i][k] = F_i^k truncated at degree n
    let powers: Vec<Vec<MultiPoly<T>>> = centred
        .iter()
        .map(|fi| {
            let mut row = vec![MultiPoly::one(d)];
            for k in 1..=n as usize {
                let next = row[k - 1].mul_truncated(fi, n);
                row.push(next);
            }
            row
        })
        .collect();
    for (row, beta) in basis.indices().iter().enumerate() {
        let mut fb = MultiPoly::one(d);
        for (i, &e) in beta.0.iter().enumerate() {
            if e > 0 {
                fb = fb.mul_truncated(&powers[i][e as usize], n);
            }
        }
        let beta_fact: T = beta.factorial();
        for (alpha, &c) in fb.terms() {
            if let Some(col) = basis.position(alpha) {
                let alpha_fact: T = alpha.factorial();
                m[(row, col)] = c * (alpha_fact / beta_fact);
            }
        }
    }
    Ok(PushforwardMatrix {
        basis,
        point: p.to_vec(),
        matrix: m,
    })
}

/// Matrix of `t^α ↦ ∏_i (Σ_m A_{mi} t_m)^{α_i}` on homogeneous polynomials
/// of degree `n` in `d` variables, graded-lex basis.
pub fn symmetric_power_matrix<T: Real>(a: &CxMatrix<T>, n: u32) -> Result<CxMatrix<T>> {
    let d = a.require_square()?;
    let basis = MultiIndex::of_degree(d, n);
    let size = basis.len();
    debug_assert_eq!(size, binomial_usize(n as usize + d - 1, d - 1));
    let linear: Vec<MultiPoly<T>> = (0..d)
        .map(|i| {
            let mut l = MultiPoly::zero(d);
            for m in 0..d {
                l.add_term(MultiIndex::unit(d, m), a[(m, i)]);
            }
            l
        })
        .collect();
    let mut out = CxMatrix::zeros(size, size);
    for (col, alpha) in basis.iter().enumerate() {
        let mut prod = MultiPoly::one(d);
        for (i, &e) in alpha.0.iter().enumerate() {
            if e > 0 {
                prod = &prod * &linear[i].pow(e);
            }
        }
        for (row, beta) in basis.iter().enumerate() {
            out[(row, col)] = prod.coeff(beta);
        }
    }
    Ok(out)
}

/// Splits a pushforward matrix into its graded diagonal blocks, failing if
/// any entry maps a degree into a strictly higher one.
pub fn graded_blocks<T: Real>(pm: &PushforwardMatrix<T>) -> Result<GradedBlocks<T>> {
    let basis = &pm.basis;
    let mut leakage = T::zero();
    for (row, beta) in basis.indices().iter().enumerate() {
        for (col, alpha) in basis.indices().iter().enumerate() {
            if beta.degree() > alpha.degree() {
                leakage = leakage.max(pm.matrix[(row, col)].norm());
            }
        }
    }
    let tolerance = T::tol(LEAKAGE_TOL);
    if !(leakage <= tolerance) {
        return Err(Error::BlockLeakage {
            leakage: leakage.f64(),
            tolerance: tolerance.f64(),
        });
    }
    let blocks = (0..=basis.order())
        .map(|k| {
            let r = basis.grade(k);
            pm.matrix.diagonal_block(r.start, r.len())
        })
        .collect();
    Ok(GradedBlocks { blocks, leakage })
}
