//! Invariants over randomly generated inputs.

use koopman_gate::algebra::{CxMatrix, MultiIndex, MultiPoly, PolyMap};
use koopman_gate::certify::{
    finite_section_norm, fock_affine_bounded, monomial_ratio_witness, replay, span_check_2x2, theorem1_certificate,
    Certificate, CertifyOptions, RootSet,
};
use koopman_gate::dynamics::{periodic_points_1d, reduce_word, word_to_polymap, AutWord, Letter, PeriodicOrbit, Stability};
use koopman_gate::jets::pushforward_matrix;
use koopman_gate::spaces::{jet_gram, FockExponent, SpaceDescriptor};
use koopman_gate::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cplx(range: f64) -> impl Strategy<Value = C64> {
    (-range..range, -range..range).prop_map(|(a, b)| c(a, b))
}

/// Self-map of `ℂ^d` of degree ≤ 3 fixing the origin, from a coefficient pool.
fn map_fixing_origin(d: usize, pool: &[C64]) -> PolyMap<f64> {
    let mut k = 0;
    let comps = (0..d)
        .map(|_| {
            let mut p = MultiPoly::zero(d);
            for deg in 1..=3 {
                for alpha in MultiIndex::of_degree(d, deg) {
                    p.add_term(alpha, pool[k % pool.len()] * (1.0 / deg as f64));
                    k += 1;
                }
            }
            p
        })
        .collect();
    PolyMap::new(d, comps).unwrap()
}

fn univariate(coeffs: &[C64]) -> PolyMap<f64> {
    PolyMap::univariate(MultiPoly::univariate(coeffs)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composition_evaluates_pointwise(
        f in prop::collection::vec(cplx(1.0), 1..5),
        g in prop::collection::vec(cplx(1.0), 1..5),
        z in cplx(1.5),
    ) {
        let (f, g) = (univariate(&f), univariate(&g));
        let fg = f.compose(&g).unwrap();
        let direct = f.eval(&g.eval(&[z]).unwrap()).unwrap()[0];
        let composed = fg.eval(&[z]).unwrap()[0];
        prop_assert!((direct - composed).norm() <= 1e-10 * 1f64.max(direct.norm()));
    }

    #[test]
    fn pushforward_is_functorial(d in 1usize..=2, pool_f in prop::collection::vec(cplx(1.0), 6), pool_g in prop::collection::vec(cplx(1.0), 6)) {
        let f = map_fixing_origin(d, &pool_f);
        let g = map_fixing_origin(d, &pool_g);
        let p = vec![c(0.0, 0.0); d];
        let n = 4;
        let mf = pushforward_matrix(&f, &p, n).unwrap().matrix;
        let mg = pushforward_matrix(&g, &p, n).unwrap().matrix;
        let mfg = pushforward_matrix(&f.compose(&g).unwrap(), &p, n).unwrap().matrix;
        let prod = &mf * &mg;
        prop_assert!(mfg.max_diff(&prod) <= 1e-9 * 1f64.max(prod.max_abs()));
    }

    #[test]
    fn fock_gram_is_hermitian_psd(d in 1usize..=2, re in -1.0f64..1.0, im in -1.0f64..1.0, alpha in 0.3f64..2.0, n in 0u32..=5) {
        let space = SpaceDescriptor::fock(d, alpha).unwrap();
        let p = vec![c(re, im); d];
        let g = jet_gram(&space, &p, n).unwrap();
        prop_assert!(g.entries.hermitian_defect() <= 1e-10 * g.entries.max_abs());
        prop_assert!(g.is_psd(1e-8).unwrap());
    }

    #[test]
    fn section_norm_is_monotone(lam in cplx(2.5), quad in cplx(1.0), p in cplx(0.8)) {
        // f(z) = p + λ(z − p) + q(z − p)² fixes p
        let shifted = MultiPoly::univariate(&[-p, c(1.0, 0.0)]);
        let f = &(&MultiPoly::constant(1, p) + &shifted.scale(lam)) + &shifted.pow(2).scale(quad);
        let f = PolyMap::univariate(f).unwrap();
        let space = SpaceDescriptor::fock(1, 1.0).unwrap();
        let mut prev = 0.0;
        for n in 1..=6 {
            let v = finite_section_norm(&space, &f, &[p], n).unwrap().norm;
            prop_assert!(v >= prev * (1.0 - 1e-8), "n = {}: {} < {}", n, v, prev);
            // degree-1 block alone already has norm |λ| or more
            prop_assert!(v >= lam.norm() * (1.0 - 1e-8));
            prev = v;
        }
    }

    #[test]
    fn strict_contractions_are_fock_bounded(s1 in 0.05f64..0.95, s2 in 0.05f64..0.95, theta in 0.0f64..std::f64::consts::TAU, b in prop::collection::vec(cplx(5.0), 2)) {
        let (cs, sn) = (theta.cos(), theta.sin());
        let rot = CxMatrix::from_real(&[&[cs, -sn], &[sn, cs]]);
        let a = &rot * &CxMatrix::diag(&[c(s1, 0.0), c(s2, 0.0)]);
        prop_assert!(fock_affine_bounded(1.0, &a, &b).unwrap());
        let expand = a.scale(c(2.0 / s1.min(s2), 0.0));
        prop_assert!(!fock_affine_bounded(1.0, &expand, &b).unwrap());
    }

    #[test]
    fn linear_monomial_ratio_is_a_power(a in cplx(2.0), q in prop::sample::select(vec![1.0, 2.0, 3.0, f64::INFINITY])) {
        let space = SpaceDescriptor::Fock { dim: 1, alpha: 1.0, q: FockExponent(q) };
        let f = univariate(&[c(0.0, 0.0), a]);
        for (n, r) in monomial_ratio_witness(&space, &f, 8).unwrap() {
            let expect = a.norm().powi(n as i32);
            prop_assert!((r - expect).abs() <= 1e-10 * 1f64.max(expect));
        }
    }

    #[test]
    fn span_verdicts_carry_checkable_certificates(
        mats in prop::collection::vec(prop::collection::vec(cplx(2.0), 4), 1..=3),
    ) {
        let mats: Vec<CxMatrix<f64>> = mats
            .into_iter()
            .map(|e| CxMatrix::from_fn(2, 2, |i, j| e[2 * i + j]))
            .filter(|m| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm() > 1e-3)
            .collect();
        prop_assume!(!mats.is_empty());
        let v = span_check_2x2(&mats).unwrap();
        if v.spans {
            prop_assert!(v.coordinate_det.unwrap() > 1e-12);
        } else if let Some(alpha) = v.common_root {
            if !matches!(v.intersection, RootSet::All) {
                for s in &mats {
                    let q = s[(1, 0)] * alpha * alpha + (s[(0, 0)] - s[(1, 1)]) * alpha - s[(0, 1)];
                    prop_assert!(q.norm() <= 1e-6 * 1f64.max(s.max_abs()) * 1f64.max(alpha.norm_sqr()));
                }
            }
        } else {
            prop_assert!(!v.has_lower_left);
        }
    }

    #[test]
    fn generic_polynomials_have_the_expected_orbit_count(coeffs in prop::collection::vec(cplx(1.0), 2..=3), lead in cplx(1.0)) {
        // degree d: d fixed points and (d² − d)/2 orbits of exact period 2, for generic coefficients
        prop_assume!(lead.norm() > 0.3);
        let mut c = coeffs.clone();
        c.push(lead);
        let d = c.len() - 1;
        let f = univariate(&c);
        let fixed = periodic_points_1d(&f, 1).unwrap();
        let two = periodic_points_1d(&f, 2).unwrap();
        let distinct = fixed.iter().all(|a| fixed.iter().filter(|b| (a.points[0][0] - b.points[0][0]).norm() < 1e-4).count() == 1);
        prop_assume!(distinct);
        prop_assert_eq!(fixed.len(), d);
        prop_assume!(two.iter().all(|o| (o.points[0][0] - o.points[1][0]).norm() > 1e-4));
        prop_assert_eq!(two.len(), (d * d - d) / 2);
    }

    #[test]
    fn multipliers_are_rotation_invariant(coeffs in prop::collection::vec(cplx(1.0), 3..=4), period in 2usize..=3) {
        let f = univariate(&coeffs);
        prop_assume!(coeffs.last().unwrap().norm() > 0.3);
        for o in periodic_points_1d(&f, period).unwrap() {
            let base = o.multipliers[0];
            for shift in 1..o.period {
                let mut lam = c(1.0, 0.0);
                for i in 0..o.period {
                    let z = o.points[(i + shift) % o.period][0];
                    lam *= f.components()[0].derivative(0).eval(&[z]).unwrap();
                }
                prop_assert!((lam - base).norm() <= 2e-6 * 1f64.max(base.norm()), "{} vs {}", lam, base);
            }
        }
    }

    #[test]
    fn reduction_relation_holds_for_real_coefficients(
        q1 in prop::collection::vec(-1.5f64..1.5, 3),
        q2 in prop::collection::vec(-1.5f64..1.5, 2),
        b1 in 0.2f64..1.5,
        shear in -1.5f64..1.5,
        shift in -1.0f64..1.0,
    ) {
        let mut c1 = q1.clone();
        c1.push(1.0);
        let mut c2 = q2.clone();
        c2.push(0.7);
        let w = AutWord::new(vec![
            Letter::linear(CxMatrix::from_real(&[&[1.0, shear], &[0.0, 1.0]])).unwrap(),
            Letter::henon(MultiPoly::univariate_real(&c1), c(b1, 0.0)).unwrap(),
            Letter::elementary(MultiPoly::univariate_real(&c2), c(1.0, 0.0), c(-1.0, 0.0), c(shift, 0.0)).unwrap(),
            Letter::swap(),
        ]).unwrap();
        let r = reduce_word(&w).unwrap();
        let f = word_to_polymap(&w).unwrap();
        let conj = word_to_polymap(&r.conjugator).unwrap();
        let core = word_to_polymap(&r.core.to_word()).unwrap();
        let lhs = conj.compose(&f).unwrap();
        let rhs = core.compose(&conj).unwrap();
        let scale = 1f64.max(lhs.max_abs_coeff());
        prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-9 * scale);
    }
}

#[test]
fn certificate_json_round_trip_and_replay() {
    let space = SpaceDescriptor::fock(1, 1.0).unwrap();
    let f = univariate(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let orbit = PeriodicOrbit {
        points: vec![vec![c(golden, 0.0)]],
        period: 1,
        multipliers: vec![],
        class: Stability::Indifferent,
        residual: 0.0,
    };
    let opts = CertifyOptions {
        norm_trace: true,
        ..CertifyOptions::default()
    };
    let cert = theorem1_certificate(&space, &f, &orbit, &opts).unwrap();
    let json = serde_json::to_string(&cert).unwrap();
    let back: Certificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cert);
    let again = replay(&back).unwrap();
    assert_eq!(again.verdict, cert.verdict);
    assert_eq!(again.witness, cert.witness);
    assert_eq!(again.provenance.config_hash, cert.provenance.config_hash);
}
