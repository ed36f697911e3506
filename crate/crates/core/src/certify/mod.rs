//! Boundedness-obstruction certificates.
//!
//! The mechanism is one-directional: a periodic point with an expanding
//! multiplier plus injective dual jets at that point rules out a bounded
//! composition operator. Nothing here ever claims boundedness;
//! [`Verdict::NoObstruction`] is the strongest positive outcome.

mod norms;
mod pipelines;
mod span;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{PeriodLog, PeriodicOrbit, ReducedForm, StabilityBands};
use crate::spaces::Dimensionality;
use crate::scalar::Cx;

pub use norms::{
    finite_section_norm, finite_section_norm_with, fock_affine_bounded, monomial_ratio_witness, SectionNorm,
    PENCIL_TOL,
};
pub use pipelines::{
    affine_only_1d, default_fock_probe, polyaut_2d_certificate, replay, theorem1_certificate, ProbeSource,
};
pub use span::{root_set, span_check_2x2, RootSet, SpanElement, SpanVerdict, ROOT_CLUSTER_TOL};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No bounded composition operator exists.
    Unbounded,
    /// Every multiplier found is in the closed unit band, or the map is an
    /// affine contraction; the obstruction does not fire.
    NoObstruction,
    Inconclusive,
}

/// Which pipeline produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// A given periodic orbit of a given map.
    PeriodicPoint,
    /// Search for a repelling orbit of a self-map of `ℂ`.
    OneDimensional,
    /// Reduction of a plane automorphism word and saddle search.
    PlaneAutomorphism,
}

/// Evidence that dual jets at the witness are linearly independent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Condition2 {
    InjectiveStructural { reason: String },
    /// Full numerical Gram rank at every order in `orders`.
    InjectiveNumerical { orders: Vec<u32> },
    /// Evidence against: the Gram matrix is rank deficient.
    NotInjective {
        order: u32,
        rank: usize,
        expected: usize,
        kernel_vector: Vec<Cx<f64>>,
    },
    Unknown { reason: String },
    /// Not evaluated because no expanding multiplier was found.
    NotEvaluated,
}

impl Condition2 {
    pub fn is_injective(&self) -> bool {
        matches!(
            self,
            Condition2::InjectiveStructural { .. } | Condition2::InjectiveNumerical { .. }
        )
    }
}

/// Numerical thresholds a certificate was produced with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub profile: String,
    /// A multiplier is expanding when `|λ| > 1 + expanding_band`.
    pub expanding_band: f64,
    /// Relative orbit residual accepted for a witness.
    pub orbit_residual: f64,
    /// Relative eigenvalue threshold for Gram rank.
    pub rank: f64,
    /// Relative eigenvalue threshold for the finite-section pencil.
    pub pencil: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            profile: "default".into(),
            expanding_band: 1e-9,
            orbit_residual: 1e-9,
            rank: 1e-10,
            pencil: 1e-10,
        }
    }
}

impl Tolerances {
    /// Wider safety margins: a multiplier must clear the unit circle by
    /// `1e-6`, witnesses must close to `1e-11`, and Gram rank is counted
    /// only above `1e-8`.
    pub fn strict() -> Self {
        Tolerances {
            profile: "strict".into(),
            expanding_band: 1e-6,
            orbit_residual: 1e-11,
            rank: 1e-8,
            pencil: 1e-8,
        }
    }

    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "strict" => Some(Self::strict()),
            _ => None,
        }
    }

    pub fn bands(&self) -> StabilityBands {
        StabilityBands {
            indifferent: self.expanding_band,
            ..StabilityBands::default()
        }
    }

    /// Every threshold must be at least machine epsilon.
    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("expanding_band", self.expanding_band),
            ("orbit_residual", self.orbit_residual),
            ("rank", self.rank),
            ("pencil", self.pencil),
        ] {
            if !(v >= f64::EPSILON) || !v.is_finite() {
                return Err(crate::Error::InvalidDescriptor(format!(
                    "tolerance {name} = {v:e} is below machine epsilon"
                )));
            }
        }
        Ok(())
    }
}

/// Run parameters shared by the pipelines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    pub tolerances: Tolerances,
    /// Largest period searched.
    pub r_max: usize,
    /// Largest jet order for injectivity probes and norm traces.
    pub n_max: u32,
    /// Depth of the dimension probe.
    pub dimension_depth: u32,
    pub seed: u64,
    /// Newton starts per period in the plane saddle search.
    pub saddle_starts: usize,
    /// Attach finite-section norms `n = 1..=n_max` when the space is Hilbert.
    pub norm_trace: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            tolerances: Tolerances::default(),
            r_max: 6,
            n_max: 6,
            dimension_depth: 8,
            seed: 0x5eed,
            saddle_starts: 4096,
            norm_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub tolerances: Tolerances,
    /// SHA-256 of the canonical JSON of `inputs` and the options.
    pub config_hash: String,
    /// Everything needed to re-run the pipeline.
    pub inputs: serde_json::Value,
    pub options: CertifyOptions,
}

impl Provenance {
    pub(crate) fn new(inputs: serde_json::Value, options: &CertifyOptions) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(inputs.to_string().as_bytes());
        hasher.update(serde_json::to_string(options).expect("options serialize").as_bytes());
        Provenance {
            seed: options.seed,
            tolerances: options.tolerances.clone(),
            config_hash: hex::encode(hasher.finalize()),
            inputs,
            options: options.clone(),
        }
    }
}

/// One period of a one-dimensional repelling-orbit search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub period: usize,
    pub orbits: usize,
    pub repelling: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A bounded affine map composed with the input so that the result
/// reduces to Hénon form; unboundedness then transfers to the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryAffine {
    pub matrix: Vec<Vec<Cx<f64>>>,
    pub translation: [Cx<f64>; 2],
    /// Products of probe matrices, by index, that produced `matrix`.
    pub word: Vec<usize>,
}

/// Pipeline-specific supporting evidence.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensionality: Option<Dimensionality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<Vec<SearchStep>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReducedForm<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saddle_log: Option<Vec<PeriodLog>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SpanVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auxiliary_affine: Option<AuxiliaryAffine>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub verdict: Verdict,
    pub theorem: Pipeline,
    pub witness: Option<PeriodicOrbit<f64>>,
    pub condition2: Condition2,
    pub norm_trace: Option<Vec<SectionNorm>>,
    pub evidence: Evidence,
    /// Human-readable remarks, including the scope of the injectivity check.
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl Certificate {
    /// Checks the structural invariant: an `Unbounded` verdict carries a
    /// witness with an expanding multiplier and injectivity evidence.
    pub fn is_consistent(&self) -> bool {
        match self.verdict {
            Verdict::Unbounded => {
                let band = 1.0 + self.provenance.tolerances.expanding_band;
                self.condition2.is_injective()
                    && self
                        .witness
                        .as_ref()
                        .is_some_and(|w| w.max_multiplier_modulus() > band)
            }
            _ => true,
        }
    }
}
