use super::{PeriodicOrbit, Stability, StabilityBands};
use crate::algebra::roots::{aberth, cluster, horner_with_derivative, newton_polish, COMPANION_MAX_DEGREE};
use crate::algebra::{roots_univariate, MultiPoly, PolyMap, Root};
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Cx, Real};

pub const MAX_PERIOD_1D: usize = 12;

/// Largest `deg(f)^r` the solver accepts. Simultaneous iteration costs
/// `O(D²)` per sweep, which bounds the practical root count.
pub const MAX_ROOT_COUNT: usize = 8192;

/// A root of `f^r(z) − z` recurs at a smaller period when it returns within this.
pub const RECURRENCE_TOL: f64 = 1e-8;

fn univariate_map<T: Real>(f: &PolyMap<T>) -> Result<Vec<Cx<T>>> {
    if f.dim_in() != 1 || f.dim_out() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim_in().max(f.dim_out()),
        });
    }
    let c = f.components()[0].univariate_coeffs()?;
    if c.len() <= 2 {
        return Err(Error::AffineInput);
    }
    Ok(c)
}

fn eval<T: Real>(c: &[Cx<T>], z: Cx<T>) -> Cx<T> {
    c.iter().rev().fold(czero(), |acc, &a| acc * z + a)
}

fn iterate_point<T: Real>(c: &[Cx<T>], z: Cx<T>, r: usize) -> Cx<T> {
    (0..r).fold(z, |w, _| eval(c, w))
}

/// Newton correction for `f^r(z) − z` without expanding `f^r`. Far from the
/// filled Julia set the iterates overflow; there the correction is tracked
/// through `ρ_k = z_k / Π_{j<k} f'(z_j)`, which stays bounded.
fn iterated_newton<T: Real>(c: &[Cx<T>], z: Cx<T>, r: usize) -> Option<Cx<T>> {
    let deg = c.len() - 1;
    let big = T::c(1e30);
    let mut zk = z;
    let mut deriv = cone::<T>();
    let mut rho = Some(z);
    for k in 0..r {
        if zk.norm() > big {
            let shrink = T::one() / T::c(deg as f64).powi((r - k) as i32);
            return rho.map(|v| v * shrink);
        }
        let (fz, dfz) = horner_with_derivative(c, zk);
        let denom = zk * dfz;
        rho = match rho {
            Some(v) if denom != czero() => Some(v * (fz / denom)),
            _ => None,
        };
        deriv *= dfz;
        zk = fz;
    }
    let num = zk - z;
    let den = deriv - cone();
    if den != czero() {
        let n = num / den;
        if n.re.is_finite() && n.im.is_finite() {
            return Some(n);
        }
    } else if num == czero() {
        return Some(czero());
    }
    rho.filter(|v| v.re.is_finite() && v.im.is_finite())
}

/// All roots of `f^r(z) − z` with multiplicity (minimal or not).
pub fn iterate_fixed_points<T: Real>(f: &PolyMap<T>, r: usize) -> Result<Vec<Root<T>>> {
    let c = univariate_map(f)?;
    if r == 0 || r > MAX_PERIOD_1D {
        return Err(Error::InvalidPeriod(r));
    }
    let deg = c.len() - 1;
    let total = (deg as f64).powi(r as i32);
    if total > MAX_ROOT_COUNT as f64 {
        return Err(Error::DegreeOverflow {
            degree: deg,
            period: r,
            limit: MAX_ROOT_COUNT,
        });
    }
    let total = total as usize;
    if total <= COMPANION_MAX_DEGREE {
        let fr = f.iterate(r)?;
        let p = &fr.components()[0] - &MultiPoly::var(1, 0);
        return roots_univariate(&p);
    }
    let lead = c[deg].norm();
    let radius = (c[..deg].iter().map(|a| a.norm()).sum::<T>() + T::c(2.0)) / lead;
    let radius = radius.max(T::one());
    let newton = |z: Cx<T>| iterated_newton(&c, z, r);
    let approx = aberth(total, radius, newton, 400);
    let polished: Vec<Cx<T>> = approx
        .into_iter()
        .map(|z| newton_polish(z, newton, 40))
        .collect();
    Ok(cluster(&polished, total, newton, |_, _| None))
}

/// Periodic orbits of minimal period `r` of a univariate polynomial of
/// degree ≥ 2, grouped into cycles and classified by multiplier.
pub fn periodic_points_1d<T: Real>(f: &PolyMap<T>, r: usize) -> Result<Vec<PeriodicOrbit<T>>> {
    periodic_points_1d_with(f, r, &StabilityBands::default())
}

pub fn periodic_points_1d_with<T: Real>(
    f: &PolyMap<T>,
    r: usize,
    bands: &StabilityBands,
) -> Result<Vec<PeriodicOrbit<T>>> {
    let c = univariate_map(f)?;
    let dc: Vec<Cx<T>> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * T::c(k as f64))
        .collect();
    let roots = iterate_fixed_points(f, r)?;
    let recur = T::tol(RECURRENCE_TOL);
    let divisors: Vec<usize> = (1..r).filter(|d| r.is_multiple_of(*d)).collect();
    let mut candidates: Vec<Cx<T>> = roots
        .iter()
        .map(|root| root.value)
        .filter(|&z| {
            let scale = T::one().max(z.norm());
            !divisors
                .iter()
                .any(|&d| (iterate_point(&c, z, d) - z).norm() <= recur * scale)
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });

    let match_tol = T::tol(1e-6);
    let mut used = vec![false; candidates.len()];
    let mut orbits = Vec::new();
    for i in 0..candidates.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut pts = vec![candidates[i]];
        let mut cur = candidates[i];
        for _ in 1..r {
            cur = eval(&c, cur);
            let best = (0..candidates.len())
                .filter(|&j| !used[j])
                .min_by(|&a, &b| {
                    (candidates[a] - cur)
                        .norm()
                        .partial_cmp(&(candidates[b] - cur).norm())
                        .unwrap()
                });
            match best {
                Some(j) if (candidates[j] - cur).norm() <= match_tol * T::one().max(cur.norm()) => {
                    used[j] = true;
                    pts.push(candidates[j]);
                    cur = candidates[j];
                }
                _ => pts.push(cur),
            }
        }
        let multiplier = pts.iter().fold(cone::<T>(), |acc, &z| acc * eval(&dc, z));
        let residual = (0..r)
            .map(|k| (eval(&c, pts[k]) - pts[(k + 1) % r]).norm())
            .fold(T::zero(), T::max);
        let class = Stability::classify(&[multiplier], bands);
        orbits.push(PeriodicOrbit {
            points: pts.into_iter().map(|z| vec![z]).collect(),
            period: r,
            multipliers: vec![multiplier],
            class,
            residual,
        });
    }
    Ok(orbits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn poly(c: &[f64]) -> PolyMap<f64> {
        PolyMap::univariate(MultiPoly::univariate_real(c)).unwrap()
    }

    #[test]
    fn square_fixed_points() {
        let orbits = periodic_points_1d(&poly(&[0.0, 0.0, 1.0]), 1).unwrap();
        assert_eq!(orbits.len(), 2);
        let zero = &orbits[0];
        assert!(zero.points[0][0].norm() < 1e-12);
        assert_eq!(zero.class, Stability::Superattracting);
        let one = &orbits[1];
        assert!((one.points[0][0] - cx(1.0, 0.0)).norm() < 1e-12);
        assert!((one.multipliers[0] - cx(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(one.class, Stability::Repelling);
    }

    #[test]
    fn square_period_two() {
        let orbits = periodic_points_1d(&poly(&[0.0, 0.0, 1.0]), 2).unwrap();
        assert_eq!(orbits.len(), 1);
        let o = &orbits[0];
        assert_eq!(o.points.len(), 2);
        assert!((o.multipliers[0] - cx(4.0, 0.0)).norm() < 1e-9);
        for p in &o.points {
            assert!((p[0].norm() - 1.0).abs() < 1e-12);
            assert!((p[0] - cx(1.0, 0.0)).norm() > 1.0);
        }
        assert!(o.residual < 1e-12);
    }

    #[test]
    fn chebyshev_fixed_points() {
        let orbits = periodic_points_1d(&poly(&[-2.0, 0.0, 1.0]), 1).unwrap();
        let mut mult: Vec<f64> = orbits.iter().map(|o| o.multipliers[0].re).collect();
        mult.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mult[0] + 2.0).abs() < 1e-12 && (mult[1] - 4.0).abs() < 1e-12);
        assert!(orbits.iter().all(|o| o.class == Stability::Repelling));
    }

    #[test]
    fn affine_rejected() {
        assert_eq!(periodic_points_1d(&poly(&[1.0, 2.0]), 1), Err(Error::AffineInput));
    }

    #[test]
    fn black_box_path_counts_all_roots() {
        // degree 2^7 = 128 > companion limit
        let f = poly(&[-0.3, 0.0, 1.0]);
        let roots = iterate_fixed_points(&f, 7).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 128);
        let orbits = periodic_points_1d(&f, 7).unwrap();
        // (2^7 - 2) / 7 = 18 cycles of exact period 7
        assert_eq!(orbits.len(), 18);
        assert!(orbits.iter().all(|o| o.residual < 1e-9));
    }
}
