use serde::{Deserialize, Serialize};

use super::norms::{finite_section_norm_with, fock_affine_bounded, SectionNorm};
use super::span::span_check_2x2;
use super::{
    AuxiliaryAffine, Certificate, CertifyOptions, Condition2, Evidence, Pipeline, Provenance, SearchStep, Verdict,
    SCHEMA_VERSION,
};
use crate::algebra::{eigenvalues, CxMatrix, PolyMap};
use crate::dynamics::{
    periodic_points_1d_with, reduce_word, saddle_search_2d, word_to_polymap, AutWord, Core, Letter, PeriodicOrbit,
    ReducedForm, SearchParams, Stability, MAX_PERIOD_1D, MAX_PERIOD_2D,
};
use crate::error::{Error, Result};
use crate::scalar::Cx;
use crate::spaces::{
    infinite_dimensionality_with, kappa_injectivity_with, structural_injectivity, Dimensionality, Injectivity,
    SpaceDescriptor,
};

/// Matrices assumed to lie in `𝒢₂(V)` for the span hypothesis.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum ProbeSource {
    /// [`default_fock_probe`] for Fock spaces, nothing otherwise.
    #[default]
    Default,
    /// Caller-attested matrices.
    Custom(Vec<CxMatrix<f64>>),
    None,
}

/// Four contractions spanning `M₂(ℂ)`, one with nonzero lower-left entry.
/// Each has operator norm below 1, so `z ↦ Az` is bounded on every Fock space.
pub fn default_fock_probe() -> Vec<CxMatrix<f64>> {
    vec![
        CxMatrix::from_real(&[&[0.5, 0.0], &[0.0, 0.5]]),
        CxMatrix::from_real(&[&[0.0, 0.5], &[0.5, 0.0]]),
        CxMatrix::from_real(&[&[0.5, 0.0], &[0.0, 0.25]]),
        CxMatrix::from_real(&[&[0.5, 0.0], &[0.5, 0.5]]),
    ]
}

const SCOPE_NOTE: &str =
    "injectivity of dual jets was checked only at the witness point and the probed orders, not globally";

/// Inputs recorded in provenance; `replay` re-runs from these.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "snake_case")]
enum Inputs {
    PeriodicPoint {
        space: SpaceDescriptor,
        map: PolyMap<f64>,
        orbit: PeriodicOrbit<f64>,
    },
    OneDimensional {
        space: SpaceDescriptor,
        map: PolyMap<f64>,
    },
    PlaneAutomorphism {
        space: SpaceDescriptor,
        word: AutWord<f64>,
        probe: Vec<CxMatrix<f64>>,
    },
}

fn provenance(inputs: &Inputs, opts: &CertifyOptions) -> Provenance {
    Provenance::new(serde_json::to_value(inputs).expect("inputs serialize"), opts)
}

/// What the periodic-point argument concludes about one orbit.
struct OrbitOutcome {
    verdict: Verdict,
    witness: PeriodicOrbit<f64>,
    condition2: Condition2,
    norm_trace: Option<Vec<SectionNorm>>,
    dimensionality: Option<Dimensionality>,
    notes: Vec<String>,
}

fn cx(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}

fn inf_norm(v: &[Cx<f64>]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Recomputes residual and multipliers of `points` under `f`.
fn verify_orbit(f: &PolyMap<f64>, points: &[Vec<Cx<f64>>], opts: &CertifyOptions) -> Result<PeriodicOrbit<f64>> {
    let r = points.len();
    if r == 0 {
        return Err(Error::InvalidPeriod(0));
    }
    let d = f.dim_in();
    let mut residual: f64 = 0.0;
    let mut jac = CxMatrix::identity(d);
    for (i, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        let next = &points[(i + 1) % r];
        let image = f.eval(p)?;
        let diff: Vec<Cx<f64>> = image.iter().zip(next).map(|(a, b)| a - b).collect();
        residual = residual.max(inf_norm(&diff) / 1f64.max(inf_norm(next)));
        jac = &f.jacobian(p)? * &jac;
    }
    let tolerance = opts.tolerances.orbit_residual;
    if !(residual <= tolerance) {
        return Err(Error::OrbitResidual { residual, tolerance });
    }
    let multipliers = eigenvalues(&jac)?;
    let class = Stability::classify(&multipliers, &opts.tolerances.bands());
    Ok(PeriodicOrbit {
        points: points.to_vec(),
        period: r,
        multipliers,
        class,
        residual,
    })
}

/// Condition (2) at `p`: structural, else numerical Gram rank at order
/// `n_max`, else (one variable) an infinite-dimensional probe.
fn condition2_at(
    space: &SpaceDescriptor,
    p: &[Cx<f64>],
    opts: &CertifyOptions,
) -> Result<(Condition2, Option<Dimensionality>)> {
    let n = opts.n_max;
    let verdict = kappa_injectivity_with(space, p, n, opts.tolerances.rank)?;
    let reason = match verdict {
        Injectivity::Injective {
            structural: Some(reason),
            ..
        } => return Ok((Condition2::InjectiveStructural { reason }, None)),
        Injectivity::Injective { structural: None, .. } => {
            return Ok((
                Condition2::InjectiveNumerical {
                    orders: (0..=n).collect(),
                },
                None,
            ))
        }
        Injectivity::NotInjective {
            rank,
            expected,
            kernel_vector,
        } => {
            return Ok((
                Condition2::NotInjective {
                    order: n,
                    rank,
                    expected,
                    kernel_vector,
                },
                None,
            ))
        }
        Injectivity::Unknown { reason } => reason,
    };
    if space.dim() == 1 {
        if let Ok(dim) = infinite_dimensionality_with(space, p, opts.dimension_depth, opts.tolerances.rank) {
            if dim.is_infinite() {
                return Ok((
                    Condition2::InjectiveStructural {
                        reason: "one variable: the space is infinite-dimensional, so every dual-jet map is injective"
                            .into(),
                    },
                    Some(dim),
                ));
            }
            return Ok((Condition2::Unknown { reason }, Some(dim)));
        }
    }
    Ok((Condition2::Unknown { reason }, None))
}

fn norm_trace(
    space: &SpaceDescriptor,
    f: &PolyMap<f64>,
    orbit: &PeriodicOrbit<f64>,
    opts: &CertifyOptions,
    notes: &mut Vec<String>,
) -> Option<Vec<SectionNorm>> {
    if !opts.norm_trace {
        return None;
    }
    if !space.is_hilbert() {
        notes.push("norm trace skipped: the space is not a Hilbert space".into());
        return None;
    }
    let fr = match f.iterate(orbit.period) {
        Ok(fr) => fr,
        Err(e) => {
            notes.push(format!("norm trace skipped: {e}"));
            return None;
        }
    };
    let mut trace = Vec::new();
    for n in 1..=opts.n_max {
        match finite_section_norm_with(space, &fr, orbit.base_point(), n, opts.tolerances.pencil) {
            Ok(s) => trace.push(s),
            Err(e) => {
                notes.push(format!("norm trace stopped at n = {n}: {e}"));
                break;
            }
        }
    }
    Some(trace)
}

fn certify_orbit(
    space: &SpaceDescriptor,
    f: &PolyMap<f64>,
    points: &[Vec<Cx<f64>>],
    opts: &CertifyOptions,
) -> Result<OrbitOutcome> {
    let witness = verify_orbit(f, points, opts)?;
    space.check_domain(witness.base_point())?;
    log::debug!(
        "orbit of period {} verified: residual {:e}, max |λ| {}",
        witness.period,
        witness.residual,
        witness.max_multiplier_modulus()
    );
    let mut notes = Vec::new();
    if !witness.class.has_expanding_direction() {
        notes.push(
            "no multiplier leaves the unit band; the periodic-point obstruction does not apply and boundedness is not claimed"
                .into(),
        );
        return Ok(OrbitOutcome {
            verdict: Verdict::NoObstruction,
            witness,
            condition2: Condition2::NotEvaluated,
            norm_trace: None,
            dimensionality: None,
            notes,
        });
    }
    let (condition2, dimensionality) = condition2_at(space, witness.base_point(), opts)?;
    let verdict = if condition2.is_injective() {
        notes.push(SCOPE_NOTE.into());
        Verdict::Unbounded
    } else {
        notes.push("an expanding multiplier was found but dual-jet injectivity is not established".into());
        Verdict::Inconclusive
    };
    let norm_trace = norm_trace(space, f, &witness, opts, &mut notes);
    Ok(OrbitOutcome {
        verdict,
        witness,
        condition2,
        norm_trace,
        dimensionality,
        notes,
    })
}

fn check_self_map(space: &SpaceDescriptor, f: &PolyMap<f64>) -> Result<()> {
    for found in [f.dim_in(), f.dim_out()] {
        if found != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found,
            });
        }
    }
    Ok(())
}

fn assemble(
    pipeline: Pipeline,
    outcome: OrbitOutcome,
    mut evidence: Evidence,
    mut notes: Vec<String>,
    provenance: Provenance,
) -> Certificate {
    if evidence.dimensionality.is_none() {
        evidence.dimensionality = outcome.dimensionality;
    }
    notes.extend(outcome.notes);
    Certificate {
        schema: SCHEMA_VERSION.into(),
        verdict: outcome.verdict,
        theorem: pipeline,
        witness: Some(outcome.witness),
        condition2: outcome.condition2,
        norm_trace: outcome.norm_trace,
        evidence,
        notes,
        provenance,
    }
}

fn without_witness(
    pipeline: Pipeline,
    verdict: Verdict,
    evidence: Evidence,
    notes: Vec<String>,
    provenance: Provenance,
) -> Certificate {
    Certificate {
        schema: SCHEMA_VERSION.into(),
        verdict,
        theorem: pipeline,
        witness: None,
        condition2: Condition2::NotEvaluated,
        norm_trace: None,
        evidence,
        notes,
        provenance,
    }
}

/// The periodic-point obstruction for a given orbit. Residual and
/// multipliers are recomputed from `f`; those stored in `orbit` are ignored.
pub fn theorem1_certificate(
    space: &SpaceDescriptor,
    f: &PolyMap<f64>,
    orbit: &PeriodicOrbit<f64>,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    opts.tolerances.validate()?;
    check_self_map(space, f)?;
    let outcome = certify_orbit(space, f, &orbit.points, opts)?;
    let inputs = Inputs::PeriodicPoint {
        space: space.clone(),
        map: f.clone(),
        orbit: orbit.clone(),
    };
    Ok(assemble(
        Pipeline::PeriodicPoint,
        outcome,
        Evidence::default(),
        Vec::new(),
        provenance(&inputs, opts),
    ))
}

/// Whether the one-variable space is infinite-dimensional, with the probe.
fn dimension_evidence(space: &SpaceDescriptor, opts: &CertifyOptions) -> (Option<bool>, Option<Dimensionality>, String) {
    let origin = [cx(0.0, 0.0)];
    let probe_point = [cx(0.5, 0.0)];
    let structural = structural_injectivity(space, &origin).or_else(|| structural_injectivity(space, &probe_point));
    let probe = if space.is_hilbert() {
        infinite_dimensionality_with(space, &probe_point, opts.dimension_depth, opts.tolerances.rank).ok()
    } else {
        None
    };
    match (structural, probe) {
        (Some(reason), probe) => (Some(true), probe, format!("infinite-dimensional: {reason}")),
        (None, Some(dim)) => {
            let infinite = dim.is_infinite();
            let msg = if infinite {
                format!("dimension probe found new dual jets up to depth {}", opts.dimension_depth)
            } else {
                "dimension probe: the dual-jet span stabilizes, the space looks finite-dimensional".into()
            };
            (Some(infinite), Some(dim), msg)
        }
        (None, None) => (None, None, "no dimension evidence is available for this space".into()),
    }
}

/// Search for a repelling orbit of a self-map of `ℂ`. Affine maps are
/// decided directly from the slope.
pub fn affine_only_1d(space: &SpaceDescriptor, f: &PolyMap<f64>, opts: &CertifyOptions) -> Result<Certificate> {
    opts.tolerances.validate()?;
    if space.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: space.dim(),
        });
    }
    check_self_map(space, f)?;
    let inputs = Inputs::OneDimensional {
        space: space.clone(),
        map: f.clone(),
    };
    let prov = provenance(&inputs, opts);
    let pipeline = Pipeline::OneDimensional;
    let (infinite, dimensionality, dim_note) = dimension_evidence(space, opts);
    let mut evidence = Evidence {
        dimensionality,
        ..Evidence::default()
    };
    let mut notes = vec![dim_note];
    if infinite != Some(true) {
        notes.push("the one-variable argument needs an infinite-dimensional space".into());
        return Ok(without_witness(pipeline, Verdict::Inconclusive, evidence, notes, prov));
    }

    if let Some((a, b)) = f.as_affine() {
        let slope = a[(0, 0)];
        if slope.norm() <= 1.0 + opts.tolerances.expanding_band {
            notes.push(format!(
                "affine map with |a| = {} ≤ 1; boundedness is not claimed",
                slope.norm()
            ));
            return Ok(without_witness(pipeline, Verdict::NoObstruction, evidence, notes, prov));
        }
        let p = b[0] / (cx(1.0, 0.0) - slope);
        let outcome = certify_orbit(space, f, &[vec![p]], opts)?;
        return Ok(assemble(pipeline, outcome, evidence, notes, prov));
    }

    let bands = opts.tolerances.bands();
    let mut steps = Vec::new();
    let r_max = opts.r_max.min(MAX_PERIOD_1D);
    let mut result = None;
    'periods: for r in 1..=r_max {
        let orbits = match periodic_points_1d_with(f, r, &bands) {
            Ok(o) => o,
            Err(e) => {
                steps.push(SearchStep {
                    period: r,
                    orbits: 0,
                    repelling: 0,
                    error: Some(e.to_string()),
                });
                break;
            }
        };
        let mut repelling: Vec<&PeriodicOrbit<f64>> =
            orbits.iter().filter(|o| o.class.has_expanding_direction()).collect();
        log::debug!("period {r}: {} orbits", orbits.len());
        steps.push(SearchStep {
            period: r,
            orbits: orbits.len(),
            repelling: repelling.len(),
            error: None,
        });
        repelling.sort_by(|a, b| b.max_multiplier_modulus().total_cmp(&a.max_multiplier_modulus()));
        for o in repelling {
            match certify_orbit(space, f, &o.points, opts) {
                Ok(outcome) if outcome.verdict == Verdict::Unbounded => {
                    result = Some(outcome);
                    break 'periods;
                }
                Ok(outcome) => {
                    result.get_or_insert(outcome);
                }
                Err(e) => notes.push(format!("period {r} orbit rejected: {e}")),
            }
        }
    }
    evidence.search = Some(steps);
    match result {
        Some(outcome) => Ok(assemble(pipeline, outcome, evidence, notes, prov)),
        None => {
            notes.push(format!("no repelling orbit found up to period {r_max}"));
            Ok(without_witness(pipeline, Verdict::Inconclusive, evidence, notes, prov))
        }
    }
}

fn resolve_probe(space: &SpaceDescriptor, probe: &ProbeSource) -> Vec<CxMatrix<f64>> {
    match probe {
        ProbeSource::Default => match space {
            SpaceDescriptor::Fock { .. } => default_fock_probe(),
            _ => Vec::new(),
        },
        ProbeSource::Custom(m) => m.clone(),
        ProbeSource::None => Vec::new(),
    }
}

/// Saddle search on a Hénon core, mapping the best certifiable orbit back to `f`.
fn henon_branch(
    space: &SpaceDescriptor,
    f: &PolyMap<f64>,
    reduced: &ReducedForm<f64>,
    opts: &CertifyOptions,
    evidence: &mut Evidence,
    notes: &mut Vec<String>,
) -> Result<Option<OrbitOutcome>> {
    let Some(letters) = reduced.core.henon_letters() else {
        return Ok(None);
    };
    let params = SearchParams {
        r_max: opts.r_max.clamp(1, MAX_PERIOD_2D),
        starts: opts.saddle_starts,
        seed: opts.seed,
        bands: opts.tolerances.bands(),
        ..SearchParams::default()
    };
    let search = saddle_search_2d(letters, &params)?;
    for entry in &search.log {
        log::debug!(
            "saddle search period {} ({}): {} orbits, {} expanding",
            entry.period,
            entry.method,
            entry.orbits_found,
            entry.expanding_found
        );
    }
    evidence.saddle_log = Some(search.log.clone());
    let mut candidates: Vec<&PeriodicOrbit<f64>> =
        search.orbits.iter().filter(|o| o.class.has_expanding_direction()).collect();
    candidates.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then(b.max_multiplier_modulus().total_cmp(&a.max_multiplier_modulus()))
    });
    let mut fallback = None;
    for o in candidates {
        let points: Vec<Vec<Cx<f64>>> = o
            .points
            .iter()
            .map(|p| reduced.conjugator.apply_inverse([p[0], p[1]]).to_vec())
            .collect();
        match certify_orbit(space, f, &points, opts) {
            Ok(outcome) if outcome.verdict == Verdict::Unbounded => return Ok(Some(outcome)),
            Ok(outcome) => {
                fallback.get_or_insert(outcome);
            }
            Err(e) => notes.push(format!("period {} orbit rejected: {e}", o.period)),
        }
    }
    if fallback.is_none() {
        notes.push(format!("no saddle or repelling orbit found up to period {}", params.r_max));
    }
    Ok(fallback)
}

/// Reduction of a plane automorphism word followed by a saddle search on
/// its Hénon core. The probe feeds the span hypothesis and, for triangular
/// cores, supplies a bounded affine map that moves the input into the
/// Hénon branch.
pub fn polyaut_2d_certificate(
    space: &SpaceDescriptor,
    w: &AutWord<f64>,
    probe: &ProbeSource,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    opts.tolerances.validate()?;
    if space.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: space.dim(),
        });
    }
    w.validate()?;
    let mats = resolve_probe(space, probe);
    let inputs = Inputs::PlaneAutomorphism {
        space: space.clone(),
        word: w.clone(),
        probe: mats.clone(),
    };
    let prov = provenance(&inputs, opts);
    let pipeline = Pipeline::PlaneAutomorphism;
    let mut notes = Vec::new();
    let mut evidence = Evidence::default();

    let mut usable = Vec::new();
    for (i, m) in mats.iter().enumerate() {
        if let SpaceDescriptor::Fock { alpha, .. } = space {
            match fock_affine_bounded(*alpha, m, &[cx(0.0, 0.0), cx(0.0, 0.0)]) {
                Ok(true) => {}
                Ok(false) => {
                    notes.push(format!("probe matrix {i} fails the Fock affine boundedness rule and is ignored"));
                    continue;
                }
                Err(e) => {
                    notes.push(format!("probe matrix {i} ignored: {e}"));
                    continue;
                }
            }
        }
        usable.push((i, m.clone()));
    }
    if !usable.is_empty() {
        let only: Vec<CxMatrix<f64>> = usable.iter().map(|(_, m)| m.clone()).collect();
        let span = span_check_2x2(&only)?;
        if !span.spans {
            notes.push("the probe does not span M₂(ℂ); the span hypothesis is not available".into());
        }
        evidence.span = Some(span);
    } else {
        notes.push("no probe matrices; the span hypothesis is not available".into());
    }

    let f = word_to_polymap(w)?;
    let reduced = reduce_word(w)?;
    log::debug!(
        "word reduced with relation residual {:e}, conjugator length {}",
        reduced.relation_residual,
        reduced.conjugator.len()
    );
    evidence.reduction = Some(reduced.clone());

    match &reduced.core {
        Core::Affine { a, b } => {
            let a = CxMatrix::from_rows(a.clone())?;
            // A fixed point of the core pulls back to a fixed point of f with the same multipliers.
            let fixed = crate::algebra::linalg::solve(&(&CxMatrix::identity(2) - &a), b);
            if let Ok(z) = fixed {
                let p = reduced.conjugator.apply_inverse([z[0], z[1]]).to_vec();
                if let Ok(outcome) = certify_orbit(space, &f, &[p], opts) {
                    if outcome.verdict != Verdict::NoObstruction {
                        return Ok(assemble(pipeline, outcome, evidence, notes, prov));
                    }
                }
            }
            if let SpaceDescriptor::Fock { alpha, .. } = space {
                if reduced.conjugator.is_empty() {
                    let bounded = fock_affine_bounded(*alpha, &a, b)?;
                    notes.push(format!("Fock affine boundedness rule for the core: {bounded}"));
                }
            }
            notes.push("the map is conjugate to an affine map with no expanding fixed point".into());
            Ok(without_witness(pipeline, Verdict::NoObstruction, evidence, notes, prov))
        }
        Core::Henon { .. } => match henon_branch(space, &f, &reduced, opts, &mut evidence, &mut notes)? {
            Some(outcome) => Ok(assemble(pipeline, outcome, evidence, notes, prov)),
            None => Ok(without_witness(pipeline, Verdict::Inconclusive, evidence, notes, prov)),
        },
        Core::ElementaryLike { .. } => {
            let spans = evidence.span.as_ref().is_some_and(|s| s.spans);
            if !spans {
                notes.push("triangular core and no spanning probe: outside the Hénon branch".into());
                return Ok(without_witness(pipeline, Verdict::Inconclusive, evidence, notes, prov));
            }
            for (i, h) in usable.iter().filter(|(_, m)| m[(1, 0)].norm() > 1e-12) {
                let mut letters = vec![Letter::linear(h.clone())?];
                letters.extend(w.letters.iter().cloned());
                let g_word = AutWord::new(letters)?;
                let g_reduced = reduce_word(&g_word)?;
                if g_reduced.core.henon_letters().is_none() {
                    continue;
                }
                let g = word_to_polymap(&g_word)?;
                let mut g_notes = Vec::new();
                let outcome = henon_branch(space, &g, &g_reduced, opts, &mut evidence, &mut g_notes)?;
                notes.extend(g_notes);
                evidence.reduction = Some(g_reduced);
                evidence.auxiliary_affine = Some(AuxiliaryAffine {
                    matrix: (0..2).map(|r| h.row(r).to_vec()).collect(),
                    translation: [cx(0.0, 0.0), cx(0.0, 0.0)],
                    word: vec![*i],
                });
                notes.push(format!(
                    "triangular core: the witness is an orbit of h∘f with h the bounded probe matrix {i}; \
                     C_(h∘f) = C_f C_h, so unboundedness transfers to C_f"
                ));
                return Ok(match outcome {
                    Some(outcome) => assemble(pipeline, outcome, evidence, notes, prov),
                    None => without_witness(pipeline, Verdict::Inconclusive, evidence, notes, prov),
                });
            }
            notes.push("triangular core and no probe matrix moves it into the Hénon branch".into());
            Ok(without_witness(pipeline, Verdict::Inconclusive, evidence, notes, prov))
        }
    }
}

/// Re-runs the pipeline recorded in a certificate's provenance.
pub fn replay(cert: &Certificate) -> Result<Certificate> {
    let inputs: Inputs = serde_json::from_value(cert.provenance.inputs.clone())
        .map_err(|e| Error::InvalidDescriptor(format!("unreadable provenance inputs: {e}")))?;
    let opts = &cert.provenance.options;
    match inputs {
        Inputs::PeriodicPoint { space, map, orbit } => theorem1_certificate(&space, &map, &orbit, opts),
        Inputs::OneDimensional { space, map } => affine_only_1d(&space, &map, opts),
        Inputs::PlaneAutomorphism { space, word, probe } => {
            polyaut_2d_certificate(&space, &word, &ProbeSource::Custom(probe), opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiPoly;
    use crate::dynamics::HenonLetter;
    use crate::spaces::SeriesFamily;

    fn map(c: &[f64]) -> PolyMap<f64> {
        PolyMap::univariate(MultiPoly::univariate_real(c)).unwrap()
    }

    fn orbit(points: &[f64]) -> PeriodicOrbit<f64> {
        PeriodicOrbit {
            points: points.iter().map(|&x| vec![cx(x, 0.0)]).collect(),
            period: points.len(),
            multipliers: Vec::new(),
            class: Stability::Indifferent,
            residual: 0.0,
        }
    }

    fn fock1() -> SpaceDescriptor {
        SpaceDescriptor::fock(1, 1.0).unwrap()
    }

    fn one_plus_z() -> SpaceDescriptor {
        SpaceDescriptor::explicit(1, &[(&[0], 1.0), (&[1], 1.0)], true).unwrap()
    }

    #[test]
    fn square_on_fock_is_unbounded() {
        let c = theorem1_certificate(&fock1(), &map(&[0.0, 0.0, 1.0]), &orbit(&[1.0]), &CertifyOptions::default())
            .unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
        assert!(matches!(c.condition2, Condition2::InjectiveStructural { .. }));
        assert!((c.witness.as_ref().unwrap().multipliers[0] - cx(2.0, 0.0)).norm() < 1e-12);
        assert!(c.is_consistent());
    }

    #[test]
    fn contraction_has_no_obstruction() {
        let c = theorem1_certificate(&fock1(), &map(&[0.0, 0.5]), &orbit(&[0.0]), &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NoObstruction);
        assert_eq!(c.condition2, Condition2::NotEvaluated);
    }

    #[test]
    fn finite_dimensional_space_gates() {
        let c = theorem1_certificate(&one_plus_z(), &map(&[0.0, 0.0, 1.0]), &orbit(&[1.0]), &CertifyOptions::default())
            .unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(matches!(c.condition2, Condition2::NotInjective { rank: 2, .. }));
    }

    #[test]
    fn bad_orbit_rejected() {
        let e = theorem1_certificate(&fock1(), &map(&[0.0, 0.0, 1.0]), &orbit(&[1.1]), &CertifyOptions::default());
        assert!(matches!(e, Err(Error::OrbitResidual { .. })));
    }

    #[test]
    fn one_dimensional_pipeline() {
        let opts = CertifyOptions::default();
        let c = affine_only_1d(&fock1(), &map(&[0.0, 0.0, 1.0]), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
        let w = c.witness.unwrap();
        assert_eq!(w.period, 1);
        assert!((w.points[0][0] - cx(1.0, 0.0)).norm() < 1e-9);
        let c = affine_only_1d(&fock1(), &map(&[3.0, 0.5]), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::NoObstruction);
        let c = affine_only_1d(&fock1(), &map(&[0.0, 2.0]), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
        assert!(c.witness.unwrap().points[0][0].norm() < 1e-12);
        let c = affine_only_1d(&one_plus_z(), &map(&[0.0, 0.0, 1.0]), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn exponential_kernel_uses_numerical_rank() {
        let s = SpaceDescriptor::PowerSeries {
            dim: 1,
            series: SeriesFamily::Exponential,
        };
        let c = affine_only_1d(&s, &map(&[0.0, 0.0, 1.0]), &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
    }

    #[test]
    fn henon_fixed_point_witness() {
        let s = SpaceDescriptor::fock(2, 1.0).unwrap();
        let w = AutWord::new(vec![Letter::Henon(HenonLetter::real(&[0.0, 0.0, 1.0], 1.0).unwrap())]).unwrap();
        let c = polyaut_2d_certificate(&s, &w, &ProbeSource::Default, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
        let wit = c.witness.as_ref().unwrap();
        assert!((wit.points[0][0] - cx(2.0, 0.0)).norm() < 1e-9);
        assert!((wit.max_multiplier_modulus() - (2.0 + 3f64.sqrt())).abs() < 1e-9);
        assert!(c.evidence.span.as_ref().unwrap().spans);
        let again = replay(&c).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn affine_core_and_triangular_core() {
        let s = SpaceDescriptor::fock(2, 1.0).unwrap();
        let diag = CxMatrix::from_real(&[&[0.5, 0.0], &[0.0, 1.0 / 3.0]]);
        let w = AutWord::new(vec![Letter::linear(diag).unwrap()]).unwrap();
        let c = polyaut_2d_certificate(&s, &w, &ProbeSource::Default, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NoObstruction);

        let tri = AutWord::new(vec![Letter::elementary(
            MultiPoly::univariate_real(&[0.0, 0.0, 1.0]),
            cx(1.0, 0.0),
            cx(1.0, 0.0),
            cx(0.0, 0.0),
        )
        .unwrap()])
        .unwrap();
        let lower_free = ProbeSource::Custom(vec![
            CxMatrix::from_real(&[&[0.5, 0.0], &[0.0, 0.5]]),
            CxMatrix::from_real(&[&[0.5, 0.25], &[0.0, 0.5]]),
        ]);
        let c = polyaut_2d_certificate(&s, &tri, &lower_free, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        let c = polyaut_2d_certificate(&s, &tri, &ProbeSource::Default, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
        assert!(c.evidence.auxiliary_affine.is_some());
    }

    #[test]
    fn expanding_affine_word_is_caught() {
        let s = SpaceDescriptor::fock(2, 1.0).unwrap();
        let w = AutWord::new(vec![Letter::linear(CxMatrix::from_real(&[&[2.0, 0.0], &[0.0, 0.5]])).unwrap()]).unwrap();
        let c = polyaut_2d_certificate(&s, &w, &ProbeSource::Default, &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Unbounded);
    }

    #[test]
    fn norm_trace_grows() {
        let opts = CertifyOptions {
            norm_trace: true,
            ..CertifyOptions::default()
        };
        let c = theorem1_certificate(&fock1(), &map(&[0.0, 0.0, 1.0]), &orbit(&[1.0]), &opts).unwrap();
        let trace = c.norm_trace.unwrap();
        assert_eq!(trace.len(), opts.n_max as usize);
        assert!(trace.windows(2).all(|w| w[1].norm >= w[0].norm * (1.0 - 1e-9)));
    }
}
