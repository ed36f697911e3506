use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::descriptor::{CompositeRule, SeriesFamily, SpaceDescriptor};
use crate::algebra::{hermitian_eigen, CxMatrix, MultiIndex};
use crate::error::{Error, Result};
use crate::jets::JetBasis;
use crate::scalar::{binomial, cone, cre, czero, falling, Cx, Real};

/// The element `e_α` with `⟨h, e_α⟩ = (∂^α h)(p)`.
#[derive(Clone, Debug)]
pub struct DualJet<T: Real> {
    pub space: SpaceDescriptor,
    pub point: Vec<Cx<T>>,
    pub index: MultiIndex,
}

/// Gram matrix `G[α,β] = ⟨e_α, e_β⟩` of the dual jets of order ≤ n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GramMatrix<T: Real> {
    pub basis: JetBasis,
    pub point: Vec<Cx<T>>,
    pub entries: CxMatrix<T>,
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Debug)]
pub struct RankInfo<T: Real> {
    pub rank: usize,
    /// Eigenvalues of the diagonally rescaled Gram matrix, ascending.
    pub scaled_eigenvalues: Vec<T>,
    /// Null direction in jet coordinates when the rank is deficient.
    pub kernel_vector: Option<Vec<Cx<T>>>,
}

pub fn dual_jet<T: Real>(
    space: &SpaceDescriptor,
    p: &[Cx<T>],
    alpha: &MultiIndex,
) -> Result<DualJet<T>> {
    space.check_domain(p)?;
    if alpha.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: alpha.dim(),
        });
    }
    Ok(DualJet {
        space: space.clone(),
        point: p.to_vec(),
        index: alpha.clone(),
    })
}

fn mono<T: Real>(z: &[Cx<T>], a: &MultiIndex) -> Cx<T> {
    z.iter()
        .zip(&a.0)
        .fold(cone(), |acc, (&zi, &e)| acc * zi.powu(e))
}

impl<T: Real> DualJet<T> {
    /// Evaluates the representing element. For power-series and Fock spaces
    /// the argument is a point `w ∈ ℂ^d` and the value is
    /// `w^α (∂^α Φ)(p̄w)`; for shift-invariant spaces the argument is the
    /// frequency `ξ` and the value is `(iξ)^α e^{i p̄·ξ}` in `L²(μ)`.
    pub fn eval(&self, w: &[Cx<T>]) -> Result<Cx<T>> {
        let d = self.space.dim();
        if w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: w.len(),
            });
        }
        let a = &self.index;
        let pw: Vec<Cx<T>> = self
            .point
            .iter()
            .zip(w)
            .map(|(p, wi)| p.conj() * *wi)
            .collect();
        match &self.space {
            SpaceDescriptor::ShiftInvariant { .. } => {
                let i = Cx::new(T::zero(), T::one());
                let iw: Vec<Cx<T>> = w.iter().map(|x| *x * i).collect();
                let phase = pw.iter().fold(czero::<T>(), |acc, z| acc + *z);
                Ok(mono(&iw, a) * (phase * i).exp())
            }
            SpaceDescriptor::PowerSeries {
                series: SeriesFamily::Explicit { terms, .. },
                ..
            } => {
                let mut acc = czero();
                for t in terms {
                    let m = MultiIndex(t.alpha.clone());
                    if let Some(rest) = m.checked_sub(a) {
                        let f: T = a
                            .0
                            .iter()
                            .zip(&m.0)
                            .fold(T::one(), |acc, (&k, &mi)| acc * falling::<T>(mi, k));
                        acc += mono(&pw, &rest) * (T::c(t.c) * f);
                    }
                }
                Ok(mono(w, a) * acc)
            }
            _ => {
                let rule = self.space.composite_rule().expect("composite family");
                let s = pw.iter().fold(czero::<T>(), |acc, z| acc + *z);
                Ok(mono(w, a) * rule.derivative(a.degree(), s))
            }
        }
    }
}

/// Gram matrix of all dual jets of order ≤ `n` at `p`, in closed form.
pub fn jet_gram<T: Real>(space: &SpaceDescriptor, p: &[Cx<T>], n: u32) -> Result<GramMatrix<T>> {
    if !space.is_hilbert() {
        return Err(Error::NotHilbert);
    }
    space.check_domain(p)?;
    let d = space.dim();
    let basis = JetBasis::new(d, n)?;
    let size = basis.len();
    let idx = basis.indices();

    let entry: Box<dyn Fn(&MultiIndex, &MultiIndex) -> Cx<T>> = match space {
        SpaceDescriptor::ShiftInvariant { measure, .. } => {
            let tilt: Vec<T> = p.iter().map(|z| z.im * T::c(2.0)).collect();
            let moments = MixtureMoments::new(measure, &tilt);
            let cache = std::cell::RefCell::new(HashMap::new());
            Box::new(move |a: &MultiIndex, b: &MultiIndex| {
                let m = moments.moment(&a.plus(b), &mut cache.borrow_mut());
                // i^{|a|} (-i)^{|b|}
                cre(m) * Cx::new(T::zero(), T::one()).powi(a.degree() as i32 - b.degree() as i32)
            })
        }
        SpaceDescriptor::PowerSeries {
            series: SeriesFamily::Explicit { terms, .. },
            ..
        } => {
            let terms: Vec<(MultiIndex, T)> = terms
                .iter()
                .filter(|t| t.c != 0.0)
                .map(|t| (MultiIndex(t.alpha.clone()), T::c(t.c)))
                .collect();
            let p = p.to_vec();
            Box::new(move |a: &MultiIndex, b: &MultiIndex| {
                let pbar: Vec<Cx<T>> = p.iter().map(|z| z.conj()).collect();
                let mut acc = czero();
                for (m, c) in &terms {
                    let (Some(ma), Some(mb)) = (m.checked_sub(a), m.checked_sub(b)) else {
                        continue;
                    };
                    let mut f = *c;
                    for i in 0..m.dim() {
                        f = f * falling::<T>(m.0[i], a.0[i]) * falling::<T>(m.0[i], b.0[i]);
                    }
                    acc += mono(&pbar, &ma) * mono(&p, &mb) * f;
                }
                acc
            })
        }
        _ => {
            let rule = space.composite_rule().expect("composite family");
            let p = p.to_vec();
            Box::new(move |a: &MultiIndex, b: &MultiIndex| composite_entry(&rule, &p, a, b))
        }
    };

    let mut g = CxMatrix::zeros(size, size);
    for i in 0..size {
        for j in i..size {
            let v = entry(&idx[i], &idx[j]);
            if i == j {
                g[(i, i)] = cre(v.re);
            } else {
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
    }
    if !g.is_finite() {
        return Err(Error::Numerical("Gram matrix overflowed".into()));
    }
    Ok(GramMatrix {
        basis,
        point: p.to_vec(),
        entries: g,
    })
}

/// `G[a,b] = Σ_{γ ≤ a∧b} C(b,γ)(a)_γ p^{a−γ} p̄^{b−γ} φ^{(|a|+|b|−|γ|)}(|p|²)`,
/// from Leibniz applied to `∂_w^b [w^a φ^{(|a|)}(p̄·w)]` at `w = p`.
fn composite_entry<T: Real>(
    rule: &CompositeRule,
    p: &[Cx<T>],
    a: &MultiIndex,
    b: &MultiIndex,
) -> Cx<T> {
    let d = p.len();
    let r2: T = p.iter().map(|z| z.norm_sqr()).sum();
    let pbar: Vec<Cx<T>> = p.iter().map(|z| z.conj()).collect();
    let bound: Vec<u32> = (0..d).map(|i| a.0[i].min(b.0[i])).collect();
    let mut acc = czero();
    let mut gamma = vec![0u32; d];
    loop {
        let g = MultiIndex(gamma.clone());
        let mut coef = T::one();
        for i in 0..d {
            coef = coef * binomial::<T>(b.0[i], gamma[i]) * falling::<T>(a.0[i], gamma[i]);
        }
        let order = a.degree() + b.degree() - g.degree();
        let term = mono(p, &a.checked_sub(&g).unwrap())
            * mono(&pbar, &b.checked_sub(&g).unwrap())
            * rule.derivative(order, cre(r2))
            * coef;
        acc += term;
        // odometer over 0 ≤ γ ≤ bound
        let mut k = 0;
        loop {
            if k == d {
                return acc;
            }
            if gamma[k] < bound[k] {
                gamma[k] += 1;
                break;
            }
            gamma[k] = 0;
            k += 1;
        }
    }
}

/// Moments `∫ ξ^k e^{t·ξ} dμ` of a Gaussian/atomic mixture.
struct MixtureMoments<T: Real> {
    gaussians: Vec<(T, Vec<T>, Vec<Vec<T>>)>,
    atoms: Vec<(T, Vec<T>)>,
}

impl<T: Real> MixtureMoments<T> {
    fn new(m: &super::descriptor::GaussianMixture, tilt: &[T]) -> Self {
        let d = tilt.len();
        let gaussians = (0..m.weights.len())
            .map(|k| {
                let mean: Vec<T> = m.means[k].iter().map(|&x| T::c(x)).collect();
                let cov: Vec<Vec<T>> = m.covariances[k]
                    .iter()
                    .map(|r| r.iter().map(|&x| T::c(x)).collect())
                    .collect();
                // E[g(ξ) e^{t·ξ}] = e^{t·m + tᵀΣt/2} E_{N(m+Σt, Σ)}[g]
                let st: Vec<T> = (0..d)
                    .map(|i| (0..d).map(|j| cov[i][j] * tilt[j]).sum())
                    .collect();
                let tm: T = (0..d).map(|i| tilt[i] * mean[i]).sum();
                let tst: T = (0..d).map(|i| tilt[i] * st[i]).sum();
                let weight = T::c(m.weights[k]) * (tm + tst * T::c(0.5)).exp();
                let shifted = (0..d).map(|i| mean[i] + st[i]).collect();
                (weight, shifted, cov)
            })
            .collect();
        let atoms = m
            .atoms
            .iter()
            .map(|a| {
                let loc: Vec<T> = a.location.iter().map(|&x| T::c(x)).collect();
                let t: T = (0..d).map(|i| tilt[i] * loc[i]).sum();
                (T::c(a.weight) * t.exp(), loc)
            })
            .collect();
        MixtureMoments { gaussians, atoms }
    }

    fn moment(&self, k: &MultiIndex, cache: &mut HashMap<(usize, Vec<u32>), T>) -> T {
        let mut total = T::zero();
        for (c, (w, mean, cov)) in self.gaussians.iter().enumerate() {
            total += *w * gaussian_moment(c, mean, cov, &k.0, cache);
        }
        for (w, loc) in &self.atoms {
            let v = loc
                .iter()
                .zip(&k.0)
                .fold(T::one(), |acc, (&x, &e)| acc * x.powi(e as i32));
            total += *w * v;
        }
        total
    }
}

/// `E[ξ^k]` under `N(mean, cov)` by the recursion
/// `E[ξ_i ξ^k] = m_i E[ξ^k] + Σ_j Σ_ij k_j E[ξ^{k−e_j}]`.
fn gaussian_moment<T: Real>(
    component: usize,
    mean: &[T],
    cov: &[Vec<T>],
    k: &[u32],
    cache: &mut HashMap<(usize, Vec<u32>), T>,
) -> T {
    let Some(i) = k.iter().position(|&e| e > 0) else {
        return T::one();
    };
    let key = (component, k.to_vec());
    if let Some(&v) = cache.get(&key) {
        return v;
    }
    let mut rest = k.to_vec();
    rest[i] -= 1;
    let mut v = mean[i] * gaussian_moment(component, mean, cov, &rest, cache);
    for j in 0..k.len() {
        if rest[j] > 0 && cov[i][j] != T::zero() {
            let mut lower = rest.clone();
            lower[j] -= 1;
            v += cov[i][j]
                * T::c(rest[j] as f64)
                * gaussian_moment(component, mean, cov, &lower, cache);
        }
    }
    cache.insert(key, v);
    v
}

impl<T: Real> GramMatrix<T> {
    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    /// Smallest eigenvalue relative to the largest diagonal entry; should
    /// be ≥ −tolerance for a positive semidefinite Gram matrix.
    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(hermitian_eigen(&self.entries)?.values[0])
    }

    pub fn is_psd(&self, rel_tol: T) -> Result<bool> {
        let scale = self.entries.max_abs();
        Ok(self.min_eigenvalue()? >= -rel_tol * scale)
    }

    /// Diagonal scaling `D = diag(G)^{-1/2}`, with zero for (numerically)
    /// vanishing dual jets.
    pub fn diagonal_scaling(&self) -> Vec<T> {
        let n = self.size();
        let max_diag = (0..n)
            .map(|i| self.entries[(i, i)].re)
            .fold(T::zero(), T::max);
        let floor = max_diag * T::epsilon() * T::epsilon();
        (0..n)
            .map(|i| {
                let g = self.entries[(i, i)].re;
                if g > floor && g > T::zero() {
                    T::one() / g.sqrt()
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// Numerical rank: eigenvalues of `DGD` above `rel_tol · λ_max`.
    pub fn rank(&self, rel_tol: T) -> Result<RankInfo<T>> {
        let n = self.size();
        let s = self.diagonal_scaling();
        let scaled = CxMatrix::from_fn(n, n, |i, j| self.entries[(i, j)] * (s[i] * s[j]));
        let eig = hermitian_eigen(&scaled)?;
        let top = eig.values.last().copied().unwrap_or(T::zero());
        let cut = rel_tol * top.max(T::zero());
        let rank = eig.values.iter().filter(|&&v| v > cut && v > T::zero()).count();
        let kernel_vector = if rank < n {
            // smallest eigenvector, mapped back through D (zero-scaled
            // coordinates are null directions on their own)
            if let Some(i) = s.iter().position(|&x| x == T::zero()) {
                let mut v = vec![czero(); n];
                v[i] = cone();
                Some(v)
            } else {
                let v: Vec<Cx<T>> = (0..n).map(|i| eig.vectors[(i, 0)] * s[i]).collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
                Some(v.into_iter().map(|z| z / norm).collect())
            }
        } else {
            None
        };
        Ok(RankInfo {
            rank,
            scaled_eigenvalues: eig.values,
            kernel_vector,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::spaces::GaussianMixture;
    use std::f64::consts::PI;

    #[test]
    fn fock_at_origin_is_diagonal_factorials() {
        let s = SpaceDescriptor::fock(1, 1.0).unwrap();
        let g = jet_gram::<f64>(&s, &[cx(0.0, 0.0)], 2).unwrap();
        let want = CxMatrix::diag(&[cx(1.0, 0.0), cx(1.0, 0.0), cx(2.0, 0.0)]).scale(cx(1.0 / PI, 0.0));
        assert!(g.entries.max_diff(&want) < 1e-15);
    }

    #[test]
    fn order_zero_is_kernel_diagonal() {
        let s = SpaceDescriptor::fock(2, 0.7).unwrap();
        let p = [cx(0.3, -0.2), cx(1.1, 0.4)];
        let g = jet_gram::<f64>(&s, &p, 0).unwrap();
        let r2: f64 = p.iter().map(|z| z.norm_sqr()).sum();
        let k = (0.7 / PI).powi(2) * (0.7 * r2).exp();
        assert!((g.entries[(0, 0)].re - k).abs() < 1e-12 * k);
        let e0 = dual_jet(&s, &p, &MultiIndex::zero(2)).unwrap();
        assert!((e0.eval(&p).unwrap() - cx(k, 0.0)).norm() < 1e-12 * k);
    }

    #[test]
    fn gaussian_shift_invariant_gram() {
        let s = SpaceDescriptor::shift_invariant(1, GaussianMixture::standard(1), None).unwrap();
        let g = jet_gram::<f64>(&s, &[cx(0.0, 0.0)], 2).unwrap();
        let want = CxMatrix::<f64>::from_real(&[&[1.0, 0.0, -1.0], &[0.0, 1.0, 0.0], &[-1.0, 0.0, 3.0]]);
        assert!(g.entries.max_diff(&want) < 1e-14);
    }

    #[test]
    fn shift_invariant_dual_jet_sign() {
        let s = SpaceDescriptor::shift_invariant(1, GaussianMixture::standard(1), None).unwrap();
        let e1 = dual_jet::<f64>(&s, &[cx(0.0, 0.0)], &MultiIndex(vec![1])).unwrap();
        assert_eq!(e1.eval(&[cx(2.0, 0.0)]).unwrap(), cx(0.0, 2.0));
    }

    #[test]
    fn exponential_family_dual_jet() {
        let s = SpaceDescriptor::exponential(1).unwrap();
        let p: [Cx<f64>; 1] = [cx(0.5, 0.5)];
        let e1 = dual_jet(&s, &p, &MultiIndex(vec![1])).unwrap();
        let w: Cx<f64> = cx(1.0, -2.0);
        let want = w * (p[0].conj() * w).exp();
        assert!((e1.eval(&[w]).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn fock_q_not_two_refuses_gram() {
        let s = SpaceDescriptor::Fock {
            dim: 1,
            alpha: 1.0,
            q: super::super::FockExponent(1.0),
        };
        assert_eq!(jet_gram::<f64>(&s, &[cx(0.0, 0.0)], 1), Err(Error::NotHilbert));
    }

    #[test]
    fn strip_domain() {
        let s = SpaceDescriptor::shift_invariant(1, GaussianMixture::standard(1), Some(vec![0.5])).unwrap();
        assert!(jet_gram::<f64>(&s, &[cx(0.0, 0.4)], 1).is_ok());
        assert!(matches!(
            jet_gram::<f64>(&s, &[cx(0.0, 0.6)], 1),
            Err(Error::OutsideDomain(_))
        ));
        let s = SpaceDescriptor::shift_invariant(1, GaussianMixture::standard(1), None).unwrap();
        assert!(matches!(
            jet_gram::<f64>(&s, &[cx(0.0, 0.1)], 1),
            Err(Error::OutsideDomain(_))
        ));
    }
}
