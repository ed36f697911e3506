//! Library results checked against closed forms computed independently here.

use koopman_gate::algebra::{MultiPoly, PolyMap};
use koopman_gate::dynamics::{periodic_points_1d, saddle_search_2d, HenonLetter, SearchParams};
use koopman_gate::jets::pushforward_matrix;
use koopman_gate::spaces::{jet_gram, SpaceDescriptor};
use koopman_gate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

/// Partial Bell polynomials `B_{n,k}(x₁, …)` by the standard recurrence.
fn bell(x: &[C64], n: usize, k: usize) -> C64 {
    if n == 0 && k == 0 {
        return c(1.0, 0.0);
    }
    if n == 0 || k == 0 || k > n {
        return c(0.0, 0.0);
    }
    (1..=n + 1 - k)
        .map(|i| x[i - 1] * bell(x, n - i, k - 1) * binom(n as u32 - 1, i as u32 - 1))
        .sum()
}

/// One variable: the chain rule `∂ⁿ(h∘f)(p) = Σ_k h⁽ᵏ⁾(p) B_{n,k}(f′(p), f″(p), …)`
/// gives the pushforward column `n` as the Bell row `B_{n,·}`.
#[test]
fn pushforward_matches_faa_di_bruno() {
    // f(z) = p + λ(z − p) + 0.3(z − p)² − 0.2i(z − p)³ expanded around p
    let p = c(0.4, -0.7);
    let lam = c(1.3, 0.5);
    let shifted = [c(0.0, 0.0), lam, c(0.3, 0.0), c(0.0, -0.2)];
    let u = MultiPoly::univariate(&[-p, c(1.0, 0.0)]);
    let mut f_poly = MultiPoly::constant(1, p);
    let mut power = MultiPoly::one(1);
    for &a in &shifted[1..] {
        power = &power * &u;
        f_poly = &f_poly + &power.scale(a);
    }
    let f = PolyMap::univariate(f_poly.clone()).unwrap();
    let n = 7u32;
    let m = pushforward_matrix(&f, &[p], n).unwrap().matrix;

    // derivatives f^{(i)}(p) for i = 1..=n
    let mut derivs = Vec::new();
    let mut d = f_poly;
    for _ in 0..n {
        d = d.derivative(0);
        derivs.push(d.eval(&[p]).unwrap());
    }
    let mut worst: f64 = 0.0;
    for col in 0..=n as usize {
        for row in 0..=n as usize {
            let expect = bell(&derivs, col, row);
            worst = worst.max((m[(row, col)] - expect).norm() / 1f64.max(expect.norm()));
        }
    }
    assert!(worst < 1e-10, "Faà di Bruno mismatch {worst:e}");
}

/// `G[a,b] = (α/π) ∂_z^b [(αz)^a e^{α z p̄}]` at `z = p` for the kernel
/// `(α/π) e^{α z w̄}` of `∫ |h|² e^{−α|z|²} dA`.
fn fock_gram_entry(alpha: f64, p: C64, a: u32, b: u32) -> C64 {
    let e = (alpha * p.norm_sqr()).exp();
    (0..=a.min(b))
        .map(|j| {
            binom(b, j)
                * falling(a, j)
                * alpha.powi(a as i32)
                * p.powu(a - j)
                * (p.conj() * alpha).powu(b - j)
        })
        .sum::<C64>()
        * (e * alpha / std::f64::consts::PI)
}

#[test]
fn fock_gram_closed_form() {
    for (alpha, p) in [(1.0, c(0.0, 0.0)), (1.0, c(0.5, -0.3)), (0.7, c(-0.2, 0.9)), (2.0, c(0.3, 0.1))] {
        let space = SpaceDescriptor::fock(1, alpha).unwrap();
        let g = jet_gram(&space, &[p], 6).unwrap().entries;
        for a in 0..=6u32 {
            for b in 0..=6u32 {
                let expect = fock_gram_entry(alpha, p, a, b);
                let got = g[(a as usize, b as usize)];
                assert!(
                    (got - expect).norm() <= 1e-10 * 1f64.max(expect.norm()),
                    "α={alpha}, p={p}, ({a},{b}): {got} vs {expect}"
                );
            }
        }
    }
}

/// `e^{z w̄}` is the exponential power-series kernel and `π` times the `α = 1` Fock kernel.
#[test]
fn exponential_kernel_equals_unit_fock() {
    let p = [c(0.6, 0.2)];
    let fock = jet_gram(&SpaceDescriptor::fock(1, 1.0).unwrap(), &p, 5).unwrap().entries;
    let series = jet_gram(&SpaceDescriptor::exponential(1).unwrap(), &p, 5).unwrap().entries;
    let scaled = series.scale(c(1.0 / std::f64::consts::PI, 0.0));
    assert!(fock.max_diff(&scaled) < 1e-10 * fock.max_abs());
}

/// Period-2 points of `z² + κ` solve `z² + z + κ + 1 = 0`; the multiplier is `4(κ + 1)`.
#[test]
fn quadratic_period_two_closed_form() {
    for kappa in [c(-0.3, 0.0), c(0.25, 0.4), c(-1.7, 0.0), c(0.1, -0.6)] {
        let f = PolyMap::univariate(MultiPoly::univariate(&[kappa, c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        let orbits = periodic_points_1d(&f, 2).unwrap();
        assert_eq!(orbits.len(), 1, "κ = {kappa}");
        let o = &orbits[0];
        for pt in &o.points {
            let z = pt[0];
            assert!((z * z + z + kappa + 1.0).norm() < 1e-10);
        }
        assert!((o.multipliers[0] - (kappa + 1.0) * 4.0).norm() < 1e-9);
    }
}

/// Fixed points of `(x² + κ − b y, x)` solve `x² − (1 + b)x + κ = 0`, and
/// the multipliers are the roots of `λ² − 2xλ + b`.
#[test]
fn henon_fixed_points_closed_form() {
    for (kappa, b) in [(0.0, 0.5), (-1.0, 0.3), (-2.0, -0.4), (0.2, 1.0)] {
        let h = HenonLetter::real(&[kappa, 0.0, 1.0], b).unwrap();
        let params = SearchParams {
            r_max: 1,
            ..SearchParams::default()
        };
        let found = saddle_search_2d::<f64>(&[h], &params).unwrap();
        let disc = c((1.0 + b) * (1.0 + b) - 4.0 * kappa, 0.0).sqrt();
        let xs = [(c(1.0 + b, 0.0) + disc) / 2.0, (c(1.0 + b, 0.0) - disc) / 2.0];
        assert_eq!(found.orbits.len(), if disc.norm() < 1e-12 { 1 } else { 2 });
        for x in xs {
            let o = found
                .orbits
                .iter()
                .find(|o: &&koopman_gate::Orbit| {
                    (o.points[0][0] - x).norm() < 1e-8 && (o.points[0][1] - x).norm() < 1e-8
                })
                .unwrap_or_else(|| panic!("κ={kappa}, b={b}: fixed point {x} missing"));
            for lam in &o.multipliers {
                assert!((lam * lam - x * lam * 2.0 + b).norm() < 1e-8);
            }
        }
    }
}
