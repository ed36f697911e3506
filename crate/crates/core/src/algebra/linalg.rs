//! Small dense complex linear algebra: LU, Hermitian Jacobi eigensolver,
//! Hessenberg QR eigenvalues, characteristic polynomials.

use num_complex::ComplexFloat;

use super::matrix::CxMatrix;
use super::poly::MultiPoly;
use super::roots::roots_univariate;
use crate::error::{Error, Result};
use crate::scalar::{cone, cre, czero, Cx, Real};

/// Largest matrix the general eigenvalue routine accepts.
pub const MAX_EIGEN_SIZE: usize = 64;

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T: Real> {
    lu: CxMatrix<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CxMatrix<T>) -> Result<Self> {
        let n = a.require_square()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        for k in 0..n {
            let (piv, _) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = lu[(k, k)];
            if d == czero() {
                continue;
            }
            for i in (k + 1)..n {
                let l = lu[(i, k)] / d;
                lu[(i, k)] = l;
                if l == czero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn det(&self) -> Cx<T> {
        let n = self.lu.rows();
        (0..n).fold(cre(self.sign), |acc, i| acc * self.lu[(i, i)])
    }

    pub fn min_pivot(&self) -> T {
        let n = self.lu.rows();
        (0..n)
            .map(|i| self.lu[(i, i)].norm())
            .fold(T::infinity(), T::min)
    }

    /// Solves `A x = b`; exactly zero pivots are replaced by a tiny value so
    /// the routine doubles as an inverse-iteration kernel.
    pub fn solve(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.lu.rows();
        let tiny = cre(T::min_positive_value().sqrt());
        let mut x: Vec<Cx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            let d = if self.lu[(i, i)] == czero() { tiny } else { self.lu[(i, i)] };
            x[i] = s / d;
        }
        x
    }
}

pub fn determinant<T: Real>(a: &CxMatrix<T>) -> Result<Cx<T>> {
    Ok(Lu::new(a)?.det())
}

pub fn solve<T: Real>(a: &CxMatrix<T>, b: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    let lu = Lu::new(a)?;
    let scale = a.max_abs().max(T::min_positive_value());
    if lu.min_pivot() <= T::epsilon() * scale {
        return Err(Error::Singular { det: lu.det().norm().f64() });
    }
    Ok(lu.solve(b))
}

pub fn inverse<T: Real>(a: &CxMatrix<T>) -> Result<CxMatrix<T>> {
    let n = a.require_square()?;
    let lu = Lu::new(a)?;
    let scale = a.max_abs().max(T::min_positive_value());
    if lu.min_pivot() <= T::epsilon() * scale {
        return Err(Error::Singular { det: lu.det().norm().f64() });
    }
    let mut inv = CxMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![czero(); n];
        e[j] = cone();
        let col = lu.solve(&e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the unitary matrix whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CxMatrix<T>,
}

/// Cyclic complex Jacobi. Only the Hermitian part of `a` is used.
pub fn hermitian_eigen<T: Real>(a: &CxMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = a.require_square()?;
    let half = T::c(0.5);
    let mut m = CxMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * half);
    let mut v = CxMatrix::identity(n);
    let total = m.norm_fro();
    let target = T::epsilon() * total.max(T::min_positive_value());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let c = apq.norm();
                if c <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / c;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let zeta = (aqq - app) / (T::c(2.0) * c);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let t = if zeta == T::zero() { T::one() } else { t };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                // U = diag(1, conj(phase)) * [[cs, sn], [-sn, cs]] on (p, q)
                let upp = cre(cs);
                let upq = cre(sn);
                let uqp = phase.conj() * (-sn);
                let uqq = phase.conj() * cs;
                for k in 0..n {
                    let x = m[(k, p)];
                    let y = m[(k, q)];
                    m[(k, p)] = x * upp + y * uqp;
                    m[(k, q)] = x * upq + y * uqq;
                }
                for k in 0..n {
                    let x = m[(p, k)];
                    let y = m[(q, k)];
                    m[(p, k)] = upp.conj() * x + uqp.conj() * y;
                    m[(q, k)] = upq.conj() * x + uqq.conj() * y;
                }
                m[(p, q)] = czero();
                m[(q, p)] = czero();
                m[(p, p)] = cre(m[(p, p)].re);
                m[(q, q)] = cre(m[(q, q)].re);
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * upp + y * uqp;
                    v[(k, q)] = x * upq + y * uqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap());
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CxMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values in descending order (via the Hermitian eigenproblem of
/// `A^H A`).
pub fn singular_values<T: Real>(a: &CxMatrix<T>) -> Result<Vec<T>> {
    let ata = &a.adjoint() * a;
    let eig = hermitian_eigen(&ata)?;
    let mut s: Vec<T> = eig.values.iter().map(|&x| x.max(T::zero()).sqrt()).collect();
    s.reverse();
    Ok(s)
}

/// Spectral norm `‖A‖₂`.
pub fn operator_norm<T: Real>(a: &CxMatrix<T>) -> Result<T> {
    Ok(singular_values(a)?.first().copied().unwrap_or_else(T::zero))
}

/// Characteristic polynomial `det(λI − A)` by Faddeev–LeVerrier, returned
/// as a univariate polynomial in `λ`.
pub fn char_poly<T: Real>(a: &CxMatrix<T>) -> Result<MultiPoly<T>> {
    let n = a.require_square()?;
    let mut coeffs = vec![czero::<T>(); n + 1];
    coeffs[n] = cone();
    let mut mk = CxMatrix::zeros(n, n);
    let id = CxMatrix::identity(n);
    for k in 1..=n {
        let am = a * &mk;
        mk = &am + &id.scale(coeffs[n - k + 1]);
        let tr = (a * &mk).trace();
        coeffs[n - k] = -tr / T::c(k as f64);
    }
    Ok(MultiPoly::univariate(&coeffs))
}

/// All eigenvalues with algebraic multiplicity.
///
/// Matrices up to 4×4 go through the characteristic polynomial and the
/// univariate root solver; larger ones through shifted Hessenberg QR.
pub fn eigenvalues<T: Real>(m: &CxMatrix<T>) -> Result<Vec<Cx<T>>> {
    let n = m.require_square()?;
    if n > MAX_EIGEN_SIZE {
        return Err(Error::Numerical(format!(
            "eigenvalue solver limited to {MAX_EIGEN_SIZE}x{MAX_EIGEN_SIZE}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    if n <= 4 {
        let p = char_poly(m)?;
        let roots = roots_univariate(&p)?;
        let mut out = Vec::with_capacity(n);
        for r in roots {
            out.extend(std::iter::repeat_n(r.value, r.multiplicity));
        }
        return Ok(out);
    }
    qr_eigenvalues(m)
}

/// Eigenvalues by Householder reduction to Hessenberg form followed by
/// single-shift complex QR with Wilkinson shifts and deflation.
pub fn qr_eigenvalues<T: Real>(m: &CxMatrix<T>) -> Result<Vec<Cx<T>>> {
    let n = m.require_square()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m);
    let eps = T::epsilon();
    let mut eig = vec![czero::<T>(); n];
    let mut hi = n - 1;
    let mut iter_since = 0usize;
    let mut total = 0usize;
    let scale = m.max_abs().max(T::min_positive_value());
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the bottom of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == T::zero() { scale } else { s };
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter_since = 0;
            continue;
        }
        total += 1;
        iter_since += 1;
        if total > 100 * n.max(10) {
            return Err(Error::Numerical("QR iteration did not converge".into()));
        }
        let mu = if iter_since % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + cre(h[(hi, hi - 1)].norm() * T::c(0.75))
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_step(&mut h, lo, hi, mu);
    }
    Ok(eig)
}

fn wilkinson_shift<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Cx<T> {
    let half = T::c(0.5);
    let tr = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn givens<T: Real>(a: Cx<T>, b: Cx<T>) -> (T, Cx<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), czero());
    }
    if na == T::zero() {
        return (T::zero(), cone());
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

fn qr_step<T: Real>(h: &mut CxMatrix<T>, lo: usize, hi: usize, mu: Cx<T>) {
    for k in lo..=hi {
        h[(k, k)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (idx, k) in (lo..hi).enumerate() {
        let (c, s) = rots[idx];
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += mu;
    }
}

fn hessenberg<T: Real>(m: &CxMatrix<T>) -> CxMatrix<T> {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if alpha_norm == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() { cone() } else { x0 / x0.norm() };
        // v = x + phase * ‖x‖ e1
        let mut v: Vec<Cx<T>> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * alpha_norm;
        let vnorm2: T = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::c(2.0);
        // H <- (I - 2 v v^H / v^H v) H
        for j in 0..n {
            let mut dot = czero();
            for (idx, i) in ((k + 1)..n).enumerate() {
                dot += v[idx].conj() * h[(i, j)];
            }
            let f = dot * (two / vnorm2);
            for (idx, i) in ((k + 1)..n).enumerate() {
                h[(i, j)] -= v[idx] * f;
            }
        }
        // H <- H (I - 2 v v^H / v^H v)
        for i in 0..n {
            let mut dot = czero();
            for (idx, j) in ((k + 1)..n).enumerate() {
                dot += h[(i, j)] * v[idx];
            }
            let f = dot * (two / vnorm2);
            for (idx, j) in ((k + 1)..n).enumerate() {
                h[(i, j)] -= f * v[idx].conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = czero();
        }
    }
    h
}

/// Unit eigenvector for a (computed) eigenvalue `lambda`, by inverse
/// iteration on `M − λI`.
pub fn eigenvector<T: Real>(m: &CxMatrix<T>, lambda: Cx<T>) -> Result<Vec<Cx<T>>> {
    let n = m.require_square()?;
    let scale = m.max_abs().max(T::one());
    let nudge = Cx::new(T::epsilon() * scale, T::epsilon() * scale);
    let shifted = CxMatrix::from_fn(n, n, |i, j| {
        if i == j {
            m[(i, j)] - lambda - nudge
        } else {
            m[(i, j)]
        }
    });
    let lu = Lu::new(&shifted)?;
    let inv_sqrt_n = T::one() / T::c(n as f64).sqrt();
    let mut x: Vec<Cx<T>> = (0..n)
        .map(|i| Cx::new(inv_sqrt_n, T::c(0.1 * i as f64) * inv_sqrt_n))
        .collect();
    for _ in 0..4 {
        let y = lu.solve(&x);
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::Numerical("inverse iteration broke down".into()));
        }
        x = y.into_iter().map(|z| z / norm).collect();
    }
    Ok(x)
}

/// `‖Mv − λv‖` for a unit vector `v`.
pub fn eigen_residual<T: Real>(m: &CxMatrix<T>, lambda: Cx<T>, v: &[Cx<T>]) -> T {
    let mv = m.mul_vec(v);
    mv.iter()
        .zip(v)
        .map(|(&a, &b)| (a - lambda * b).norm_sqr())
        .sum::<T>()
        .sqrt()
}

/// Spectral radius from the eigenvalue list.
pub fn spectral_radius<T: Real>(m: &CxMatrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?
        .into_iter()
        .map(|z| z.abs())
        .fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type M = CxMatrix<f64>;

    fn sorted_re(mut v: Vec<Cx<f64>>) -> Vec<Cx<f64>> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn eigenvalues_of_henon_jacobian() {
        let m = M::from_real(&[&[3.0, -0.5], &[1.0, 0.0]]);
        let ev = sorted_re(eigenvalues(&m).unwrap());
        let s7 = 7f64.sqrt();
        assert!((ev[0] - cx((3.0 - s7) / 2.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - cx((3.0 + s7) / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_identity_and_diag() {
        let ev = eigenvalues(&M::identity(2)).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|z| (*z - cx(1.0, 0.0)).norm() < 1e-12));
        let d = M::diag(&[cx(2.0, 1.0), cx(-3.0, 0.0)]);
        let ev = sorted_re(eigenvalues(&d).unwrap());
        assert!((ev[0] - cx(-3.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - cx(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        let m = M::zeros(2, 3);
        assert!(matches!(eigenvalues(&m), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn qr_path_on_larger_matrix() {
        // companion-like matrix with known spectrum 1..=7
        let n = 7;
        let d = M::diag(&(1..=n).map(|k| cx(k as f64, 0.0)).collect::<Vec<_>>());
        let mut s = M::identity(n);
        for i in 0..n {
            for j in 0..n {
                if j > i {
                    s[(i, j)] = cx(0.3 * (i + j) as f64, 0.1);
                }
            }
        }
        let sinv = inverse(&s).unwrap();
        let a = &(&s * &d) * &sinv;
        let ev = sorted_re(eigenvalues(&a).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((*z - cx((k + 1) as f64, 0.0)).norm() < 1e-8, "{z}");
        }
    }

    #[test]
    fn hermitian_jacobi_reconstructs() {
        let a = M::from_rows(vec![
            vec![cx(2.0, 0.0), cx(1.0, 1.0), cx(0.0, -0.5)],
            vec![cx(1.0, -1.0), cx(3.0, 0.0), cx(0.25, 0.0)],
            vec![cx(0.0, 0.5), cx(0.25, 0.0), cx(-1.0, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eigen(&a).unwrap();
        let lam = M::diag(&e.values.iter().map(|&x| cx(x, 0.0)).collect::<Vec<_>>());
        let rec = &(&e.vectors * &lam) * &e.vectors.adjoint();
        assert!(rec.max_diff(&a) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvector_residual_small() {
        let m = M::from_real(&[&[3.0, -0.5], &[1.0, 0.0]]);
        for lam in eigenvalues(&m).unwrap() {
            let v = eigenvector(&m, lam).unwrap();
            assert!(eigen_residual(&m, lam, &v) < 1e-8 * m.norm_fro());
        }
    }

    #[test]
    fn char_poly_of_2x2() {
        let m = M::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let p = char_poly(&m).unwrap().univariate_coeffs().unwrap();
        // λ² − 5λ − 2
        assert!((p[0] - cx(-2.0, 0.0)).norm() < 1e-12);
        assert!((p[1] - cx(-5.0, 0.0)).norm() < 1e-12);
        assert!((p[2] - cx(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_inverse_rejected() {
        let m = M::from_real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(inverse(&m), Err(Error::Singular { .. })));
    }
}
