//! Job files: one JSON object per job.

use koopman_gate::algebra::{CxMatrix, MultiPoly, PolyMap};
use koopman_gate::dynamics::AutWord;
use koopman_gate::{SpaceDescriptor, Tolerances, C64};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

/// A complex scalar written as a number or `[re, im]`.
#[derive(Clone, Copy, Debug)]
pub struct Scalar(pub C64);

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
        }
        let repr = Repr::deserialize(d)
            .map_err(|_| D::Error::custom("expected a number or a [re, im] pair"))?;
        Ok(Scalar(match repr {
            Repr::Real(r) => C64::new(r, 0.0),
            Repr::Pair([r, i]) => C64::new(r, i),
        }))
    }
}

fn scalars(v: &[Scalar]) -> Vec<C64> {
    v.iter().map(|s| s.0).collect()
}

/// The map or word a pipeline acts on.
#[derive(Clone, Debug)]
pub enum Target {
    Map(PolyMap<f64>),
    Word(AutWord<f64>),
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Object(o) if o.contains_key("letters") => {
                AutWord::deserialize(v).map(Target::Word).map_err(D::Error::custom)
            }
            serde_json::Value::Array(_) => {
                let coeffs: Vec<Scalar> = serde_json::from_value(v).map_err(D::Error::custom)?;
                if coeffs.is_empty() {
                    return Err(D::Error::custom("coefficient list is empty"));
                }
                PolyMap::univariate(MultiPoly::univariate(&scalars(&coeffs)))
                    .map(Target::Map)
                    .map_err(D::Error::custom)
            }
            serde_json::Value::Object(_) => PolyMap::deserialize(v).map(Target::Map).map_err(D::Error::custom),
            _ => Err(D::Error::custom(
                "expected a coefficient list, a polynomial map object or a word with \"letters\"",
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Theorem1,
    Affine1d,
    Polyaut2d,
    SpanCheck,
    FiniteSection,
    MonomialWitness,
}

/// Partial tolerance overrides applied on top of the profile.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub expanding_band: Option<f64>,
    pub orbit_residual: Option<f64>,
    pub rank: Option<f64>,
    pub pencil: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, t: &mut Tolerances) {
        let pairs = [
            (&mut t.expanding_band, self.expanding_band),
            (&mut t.orbit_residual, self.orbit_residual),
            (&mut t.rank, self.rank),
            (&mut t.pencil, self.pencil),
        ];
        let mut changed = false;
        for (slot, v) in pairs {
            if let Some(v) = v {
                *slot = v;
                changed = true;
            }
        }
        if changed {
            t.profile = format!("{}+overrides", t.profile);
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub r_max: Option<usize>,
    pub n_max: Option<u32>,
    pub seed: Option<u64>,
    pub tolerance_profile: Option<String>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub norm_trace: Option<bool>,
    pub saddle_starts: Option<usize>,
    pub dimension_depth: Option<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub id: Option<String>,
    pub pipeline: PipelineKind,
    #[serde(default)]
    pub space: Option<SpaceDescriptor>,
    #[serde(default)]
    pub target: Option<Target>,
    /// Orbit points for `theorem1`.
    #[serde(default)]
    pub orbit: Option<Vec<Vec<Scalar>>>,
    /// Fixed point for `finite_section`.
    #[serde(default)]
    pub point: Option<Vec<Scalar>>,
    /// Largest order for `finite_section` and `monomial_witness`.
    #[serde(default)]
    pub n: Option<u32>,
    /// Probe matrices for `polyaut2d`; omitted means the built-in default.
    #[serde(default)]
    pub probe: Option<Vec<[[Scalar; 2]; 2]>>,
    /// Input matrices for `span_check`.
    #[serde(default)]
    pub matrices: Option<Vec<[[Scalar; 2]; 2]>>,
    #[serde(default)]
    pub params: Params,
}

pub fn matrix(m: &[[Scalar; 2]; 2]) -> CxMatrix<f64> {
    CxMatrix::from_fn(2, 2, |i, j| m[i][j].0)
}

pub fn points(v: &[Vec<Scalar>]) -> Vec<Vec<C64>> {
    v.iter().map(|p| scalars(p)).collect()
}

pub fn point(v: &[Scalar]) -> Vec<C64> {
    scalars(v)
}

/// Parses one job with the JSON path of the first error in the message.
pub fn parse_job(text: &str) -> Result<JobConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.into_inner().to_string()
        } else {
            format!("{path}: {}", e.into_inner())
        }
    })
}
