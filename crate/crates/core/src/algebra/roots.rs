//! Univariate root finding: companion-matrix eigenvalues (or simultaneous
//! Aberth–Ehrlich iteration for high degree), Newton polish, and clustering
//! of numerically coincident roots into multiplicities.

use serde::{Deserialize, Serialize};

use super::linalg::qr_eigenvalues;
use super::matrix::CxMatrix;
use super::poly::MultiPoly;
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Cx, Real};

/// Roots closer than this (absolute, after polish) are one root.
pub const CLUSTER_RADIUS: f64 = 1e-8;

/// Above this degree the companion matrix is replaced by Aberth iteration.
pub const COMPANION_MAX_DEGREE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Root<T: Real> {
    pub value: Cx<T>,
    pub multiplicity: usize,
}

/// All complex roots of a univariate polynomial with multiplicities.
pub fn roots_univariate<T: Real>(p: &MultiPoly<T>) -> Result<Vec<Root<T>>> {
    let coeffs = p.univariate_coeffs()?;
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Err(Error::ConstantPolynomial);
    }
    // exact roots at the origin
    let zeros_at_origin = coeffs.iter().take_while(|c| **c == czero()).count();
    let reduced: Vec<Cx<T>> = coeffs[zeros_at_origin..].to_vec();
    let m = reduced.len() - 1;

    let mut roots: Vec<Root<T>> = Vec::new();
    if m > 0 {
        let approx = if m <= COMPANION_MAX_DEGREE {
            companion_roots(&reduced)?
        } else {
            let radius = cauchy_bound(&reduced);
            aberth(m, radius, |z| horner_ratio(&reduced, z), 500)
        };
        let polished: Vec<Cx<T>> = approx
            .into_iter()
            .map(|z| newton_polish(z, |w| horner_ratio(&reduced, w), 40))
            .collect();
        roots = cluster(
            &polished,
            m,
            |z| horner_ratio(&reduced, z),
            |z, mult| refine_multiple(&reduced, z, mult),
        );
    }
    if zeros_at_origin > 0 {
        let tol = T::tol(CLUSTER_RADIUS);
        if let Some(r) = roots.iter_mut().find(|r| r.value.norm() <= tol) {
            r.multiplicity += zeros_at_origin;
            r.value = czero();
        } else {
            roots.push(Root {
                value: czero(),
                multiplicity: zeros_at_origin,
            });
        }
    }
    roots.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap()
            .then(a.value.im.partial_cmp(&b.value.im).unwrap())
    });
    Ok(roots)
}

/// Residual scale `(1+|z|)^deg · ‖p‖₁` used for the polish criterion.
pub fn residual_scale<T: Real>(p: &MultiPoly<T>, z: Cx<T>) -> T {
    (T::one() + z.norm()).powi(p.degree() as i32) * p.l1_norm()
}

fn companion_roots<T: Real>(coeffs: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    let m = coeffs.len() - 1;
    let lead = coeffs[m];
    let mut c = CxMatrix::zeros(m, m);
    for i in 1..m {
        c[(i, i - 1)] = cone();
    }
    for i in 0..m {
        c[(i, m - 1)] = -coeffs[i] / lead;
    }
    qr_eigenvalues(&c)
}

fn cauchy_bound<T: Real>(coeffs: &[Cx<T>]) -> T {
    let m = coeffs.len() - 1;
    let lead = coeffs[m].norm();
    let worst = coeffs[..m]
        .iter()
        .map(|c| c.norm() / lead)
        .fold(T::zero(), T::max);
    T::one() + worst
}

/// `(p(z), p'(z))` by Horner.
pub fn horner_with_derivative<T: Real>(coeffs: &[Cx<T>], z: Cx<T>) -> (Cx<T>, Cx<T>) {
    let mut p = czero();
    let mut dp = czero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Newton correction `p(z)/p'(z)`; `None` when undefined.
fn horner_ratio<T: Real>(coeffs: &[Cx<T>], z: Cx<T>) -> Option<Cx<T>> {
    let (p, dp) = horner_with_derivative(coeffs, z);
    if p == czero() {
        return Some(czero());
    }
    if dp == czero() {
        return None;
    }
    let n = p / dp;
    if n.re.is_finite() && n.im.is_finite() {
        Some(n)
    } else {
        None
    }
}

/// Simultaneous Aberth–Ehrlich iteration for the `n` roots of a polynomial
/// of known degree, given its Newton correction. Starting points sit on a
/// circle of the given radius.
pub fn aberth<T: Real>(
    n: usize,
    radius: T,
    newton: impl Fn(Cx<T>) -> Option<Cx<T>>,
    max_iter: usize,
) -> Vec<Cx<T>> {
    let two_pi = T::c(std::f64::consts::TAU);
    let mut z: Vec<Cx<T>> = (0..n)
        .map(|k| {
            let theta = two_pi * T::c(k as f64) / T::c(n as f64) + T::c(0.4);
            Cx::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];
    let eps = T::epsilon() * T::c(4.0);
    for _ in 0..max_iter {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let corr = match newton(zi) {
                Some(c) => c,
                None => zi / T::c(n as f64),
            };
            let mut s = czero::<T>();
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d != czero() {
                        s += cone::<T>() / d;
                    }
                }
            }
            let denom = cone::<T>() - corr * s;
            let w = if denom == czero() { corr } else { corr / denom };
            let w = if w.re.is_finite() && w.im.is_finite() { w } else { corr };
            z[i] = zi - w;
            if w.norm() <= eps * (T::one() + z[i].norm()) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}

/// Newton iteration keeping the iterate with the smallest correction.
pub fn newton_polish<T: Real>(
    z0: Cx<T>,
    newton: impl Fn(Cx<T>) -> Option<Cx<T>>,
    max_iter: usize,
) -> Cx<T> {
    let mut z = z0;
    let mut best = z0;
    let mut best_step = T::infinity();
    for _ in 0..max_iter {
        let Some(step) = newton(z) else { break };
        let size = step.norm();
        if size < best_step {
            best_step = size;
            best = z;
        } else if size > best_step * T::c(2.0) {
            break;
        }
        if size <= T::epsilon() * (T::one() + z.norm()) {
            best = z - step;
            break;
        }
        z -= step;
    }
    best
}

/// Groups approximate roots into clusters using Newton inclusion disks
/// (radius `n·|p/p'|`, floored at [`CLUSTER_RADIUS`]), then replaces each
/// cluster by a refined centre with multiplicity equal to its size.
pub fn cluster<T: Real>(
    points: &[Cx<T>],
    degree: usize,
    newton: impl Fn(Cx<T>) -> Option<Cx<T>>,
    refine: impl Fn(Cx<T>, usize) -> Option<Cx<T>>,
) -> Vec<Root<T>> {
    let n = points.len();
    let floor = T::tol(CLUSTER_RADIUS);
    let radii: Vec<T> = points
        .iter()
        .map(|&z| {
            let cap = T::c(1e-3) * (T::one() + z.norm());
            let r = match newton(z) {
                Some(c) => c.norm() * T::c(degree as f64),
                None => cap,
            };
            r.min(cap).max(floor)
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= radii[i] + radii[j] {
                let a = find(&mut parent, i);
                let b = find(&mut parent, j);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out = Vec::with_capacity(groups.len());
    for members in groups.values() {
        let m = members.len();
        let mean = members
            .iter()
            .fold(czero::<T>(), |acc, &i| acc + points[i])
            / T::c(m as f64);
        let value = if m == 1 {
            mean
        } else {
            let spread = members
                .iter()
                .map(|&i| (points[i] - mean).norm())
                .fold(T::zero(), T::max);
            match refine(mean, m) {
                Some(c) if (c - mean).norm() <= spread.max(floor) * T::c(4.0) => c,
                _ => mean,
            }
        };
        out.push(Root {
            value,
            multiplicity: m,
        });
    }
    out
}

/// Newton on `p^{(m-1)}`, which has a simple root at a root of multiplicity `m`.
fn refine_multiple<T: Real>(coeffs: &[Cx<T>], z0: Cx<T>, m: usize) -> Option<Cx<T>> {
    let mut d: Vec<Cx<T>> = coeffs.to_vec();
    for _ in 0..(m - 1) {
        if d.len() <= 1 {
            return None;
        }
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * T::c(k as f64))
            .collect();
    }
    if d.len() <= 1 {
        return None;
    }
    Some(newton_polish(z0, |z| horner_ratio(&d, z), 30))
}

/// Real-coefficient helper used in tests and examples.
pub fn poly_from_roots<T: Real>(roots: &[Cx<T>]) -> MultiPoly<T> {
    let mut p = MultiPoly::one(1);
    for &r in roots {
        let factor = MultiPoly::univariate(&[-r, cone()]);
        p = &p * &factor;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cre, cx};

    type P = MultiPoly<f64>;

    fn real_root(x: f64) -> Cx<f64> {
        cre(x)
    }

    fn find(roots: &[Root<f64>], z: Cx<f64>) -> Option<Root<f64>> {
        roots.iter().copied().find(|r| (r.value - z).norm() < 1e-9)
    }

    #[test]
    fn simple_quadratic() {
        let p = P::univariate_real(&[0.0, -1.0, 1.0]);
        let r = roots_univariate(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(find(&r, cx(0.0, 0.0)).unwrap().multiplicity, 1);
        assert_eq!(find(&r, cx(1.0, 0.0)).unwrap().multiplicity, 1);
    }

    #[test]
    fn double_root() {
        let p = P::univariate_real(&[4.0, -4.0, 1.0]);
        let r = roots_univariate(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].value - cx(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn higher_multiplicities_cluster() {
        let roots = [
            real_root(1.5),
            real_root(1.5),
            real_root(1.5),
            cx(-0.5, 2.0),
            cx(-0.5, 2.0),
            real_root(3.0),
        ];
        let p = poly_from_roots::<f64>(&roots);
        let r = roots_univariate(&p).unwrap();
        assert_eq!(r.iter().map(|x| x.multiplicity).sum::<usize>(), 6);
        assert_eq!(find(&r, cx(1.5, 0.0)).unwrap().multiplicity, 3);
        assert_eq!(find(&r, cx(-0.5, 2.0)).unwrap().multiplicity, 2);
        assert_eq!(find(&r, cx(3.0, 0.0)).unwrap().multiplicity, 1);
    }

    #[test]
    fn cube_roots_of_unity() {
        let p = P::univariate_real(&[-1.0, 0.0, 0.0, 1.0]);
        let r = roots_univariate(&p).unwrap();
        assert_eq!(r.len(), 3);
        let s3 = 3f64.sqrt();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(((r[i].value - r[j].value).norm() - s3).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_and_constant_rejected() {
        assert_eq!(roots_univariate(&P::zero(1)), Err(Error::ZeroPolynomial));
        assert_eq!(
            roots_univariate(&P::univariate_real(&[2.0])),
            Err(Error::ConstantPolynomial)
        );
    }

    #[test]
    fn high_degree_uses_aberth() {
        // z^100 - 1
        let mut c = vec![0.0; 101];
        c[0] = -1.0;
        c[100] = 1.0;
        let p = P::univariate_real(&c);
        let r = roots_univariate(&p).unwrap();
        assert_eq!(r.len(), 100);
        for root in &r {
            assert!((root.value.norm() - 1.0).abs() < 1e-10);
            let v = p.eval(&[root.value]).unwrap();
            assert!(v.norm() < 1e-10);
        }
    }
}
