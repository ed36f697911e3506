use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{hermitian_eigen, CxMatrix};
use crate::error::{Error, Result};
use crate::scalar::{factorial, Cx, Real};

/// One coefficient `c_α z^α` of an explicit power series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTerm {
    pub alpha: Vec<u32>,
    pub c: f64,
}

/// Coefficient rule for `φ` in `Φ(z) = φ(z₁ + ⋯ + z_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompositeRule {
    /// `φ(s) = prefactor · e^{scale·s}`.
    Exponential { scale: f64, prefactor: f64 },
    /// `φ(s) = prefactor / (1 − scale·s)`.
    Geometric { scale: f64, prefactor: f64 },
    /// `φ(s) = Σ_k coeffs[k] s^k`, a finite list.
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesFamily {
    /// Finite list of coefficients. `complete` declares that every omitted
    /// coefficient is zero; otherwise the tail is unspecified.
    Explicit {
        terms: Vec<SeriesTerm>,
        #[serde(default)]
        complete: bool,
    },
    Composite { rule: CompositeRule },
    /// `Φ(z) = e^{z₁ + ⋯ + z_d}`.
    Exponential,
}

/// Exponent `q ∈ (0, ∞]` of a Fock space; serialized as a number or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockExponent(pub f64);

impl FockExponent {
    pub fn is_hilbert(self) -> bool {
        self.0 == 2.0
    }
}

impl Serialize for FockExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for FockExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(FockExponent(x)),
            Repr::Str(s) if s == "inf" || s == "infinity" => Ok(FockExponent(f64::INFINITY)),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "Fock exponent must be a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

/// Finite mixture of Gaussians and point masses on `ℝ^d`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixture {
    #[serde(default)]
    pub weights: Vec<f64>,
    #[serde(default)]
    pub means: Vec<Vec<f64>>,
    #[serde(default)]
    pub covariances: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

impl GaussianMixture {
    /// Standard normal distribution on `ℝ^d`.
    pub fn standard(d: usize) -> Self {
        GaussianMixture {
            weights: vec![1.0],
            means: vec![vec![0.0; d]],
            covariances: vec![(0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()],
            atoms: vec![],
        }
    }

    pub fn single_atom(location: Vec<f64>) -> Self {
        GaussianMixture {
            atoms: vec![Atom {
                location,
                weight: 1.0,
            }],
            ..Default::default()
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDescriptor(msg));
        if self.weights.len() != self.means.len() || self.weights.len() != self.covariances.len() {
            return bad("measure needs equally many weights, means and covariances".into());
        }
        if self.weights.is_empty() && self.atoms.is_empty() {
            return bad("measure has no components".into());
        }
        for (k, w) in self.weights.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return bad(format!("measure.weights[{k}] must be positive"));
            }
            if self.means[k].len() != d || self.means[k].iter().any(|x| !x.is_finite()) {
                return bad(format!("measure.means[{k}] must have {d} finite entries"));
            }
            let cov = &self.covariances[k];
            if cov.len() != d || cov.iter().any(|r| r.len() != d) {
                return bad(format!("measure.covariances[{k}] must be {d}x{d}"));
            }
            for i in 0..d {
                for j in 0..d {
                    if !cov[i][j].is_finite() || cov[i][j] != cov[j][i] {
                        return bad(format!("measure.covariances[{k}] must be finite and symmetric"));
                    }
                }
            }
            let min = Self::min_eigen(cov)?;
            let scale = cov.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            if min < -1e-12 * scale.max(1.0) {
                return bad(format!("measure.covariances[{k}] is not positive semidefinite"));
            }
        }
        for (k, a) in self.atoms.iter().enumerate() {
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return bad(format!("measure.atoms[{k}].weight must be positive"));
            }
            if a.location.len() != d || a.location.iter().any(|x| !x.is_finite()) {
                return bad(format!("measure.atoms[{k}].location must have {d} finite entries"));
            }
        }
        Ok(())
    }

    fn min_eigen(cov: &[Vec<f64>]) -> Result<f64> {
        let d = cov.len();
        let m = CxMatrix::<f64>::from_fn(d, d, |i, j| Cx::new(cov[i][j], 0.0));
        Ok(hermitian_eigen(&m)?.values[0])
    }

    /// True when some Gaussian component has a nonsingular covariance, so
    /// the measure has Zariski-dense support.
    pub fn has_absolutely_continuous_part(&self) -> bool {
        self.covariances.iter().any(|cov| {
            let scale = cov.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            Self::min_eigen(cov).map(|m| m > 1e-12 * scale).unwrap_or(false)
        })
    }
}

/// Tagged description of a kernel function space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    rename_all = "snake_case",
    try_from = "unchecked::SpaceDescriptor"
)]
pub enum SpaceDescriptor {
    /// RKHS of `k(z,w) = Φ(z̄₁w₁, …, z̄_d w_d)`.
    PowerSeries { dim: usize, series: SeriesFamily },
    /// Fock space `F_α^q` on `ℂ^d`.
    Fock {
        dim: usize,
        alpha: f64,
        q: FockExponent,
    },
    /// RKHS of `k(x,y) = μ̂(x − y)`, optionally extended to the strip
    /// `|Im z_j| < strip[j]`.
    ShiftInvariant {
        dim: usize,
        measure: GaussianMixture,
        #[serde(default)]
        strip: Option<Vec<f64>>,
    },
}

mod unchecked {
    use super::*;

    #[derive(Deserialize)]
    #[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
    pub enum SpaceDescriptor {
        PowerSeries {
            dim: usize,
            series: SeriesFamily,
        },
        Fock {
            dim: usize,
            alpha: f64,
            #[serde(default = "two")]
            q: FockExponent,
        },
        ShiftInvariant {
            dim: usize,
            measure: GaussianMixture,
            #[serde(default)]
            strip: Option<Vec<f64>>,
        },
    }

    fn two() -> FockExponent {
        FockExponent(2.0)
    }
}

impl TryFrom<unchecked::SpaceDescriptor> for SpaceDescriptor {
    type Error = Error;
    fn try_from(raw: unchecked::SpaceDescriptor) -> Result<Self> {
        let s = match raw {
            unchecked::SpaceDescriptor::PowerSeries { dim, series } => {
                SpaceDescriptor::PowerSeries { dim, series }
            }
            unchecked::SpaceDescriptor::Fock { dim, alpha, q } => {
                SpaceDescriptor::Fock { dim, alpha, q }
            }
            unchecked::SpaceDescriptor::ShiftInvariant {
                dim,
                measure,
                strip,
            } => SpaceDescriptor::ShiftInvariant {
                dim,
                measure,
                strip,
            },
        };
        s.validate()?;
        Ok(s)
    }
}

impl SpaceDescriptor {
    /// Fock space with `q = 2`.
    pub fn fock(dim: usize, alpha: f64) -> Result<Self> {
        let s = SpaceDescriptor::Fock {
            dim,
            alpha,
            q: FockExponent(2.0),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn exponential(dim: usize) -> Result<Self> {
        let s = SpaceDescriptor::PowerSeries {
            dim,
            series: SeriesFamily::Exponential,
        };
        s.validate()?;
        Ok(s)
    }

    /// Explicit power series from `(α, c_α)` pairs.
    pub fn explicit(dim: usize, terms: &[(&[u32], f64)], complete: bool) -> Result<Self> {
        let s = SpaceDescriptor::PowerSeries {
            dim,
            series: SeriesFamily::Explicit {
                terms: terms
                    .iter()
                    .map(|(a, c)| SeriesTerm {
                        alpha: a.to_vec(),
                        c: *c,
                    })
                    .collect(),
                complete,
            },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn shift_invariant(dim: usize, measure: GaussianMixture, strip: Option<Vec<f64>>) -> Result<Self> {
        let s = SpaceDescriptor::ShiftInvariant {
            dim,
            measure,
            strip,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceDescriptor::PowerSeries { dim, .. }
            | SpaceDescriptor::Fock { dim, .. }
            | SpaceDescriptor::ShiftInvariant { dim, .. } => *dim,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SpaceDescriptor::PowerSeries { .. } => "power_series",
            SpaceDescriptor::Fock { .. } => "fock",
            SpaceDescriptor::ShiftInvariant { .. } => "shift_invariant",
        }
    }

    /// Whether Gram-matrix operations are available.
    pub fn is_hilbert(&self) -> bool {
        match self {
            SpaceDescriptor::Fock { q, .. } => q.is_hilbert(),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDescriptor(msg));
        let d = self.dim();
        if d == 0 {
            return bad("dim must be positive".into());
        }
        match self {
            SpaceDescriptor::PowerSeries { series, .. } => match series {
                SeriesFamily::Explicit { terms, .. } => {
                    if terms.is_empty() {
                        return bad("explicit series needs at least one term".into());
                    }
                    for (k, t) in terms.iter().enumerate() {
                        if t.alpha.len() != d {
                            return bad(format!("series.terms[{k}].alpha must have length {d}"));
                        }
                        if !(t.c.is_finite() && t.c >= 0.0) {
                            return bad(format!(
                                "series.terms[{k}].c must be nonnegative; negative coefficients do not give a positive definite kernel"
                            ));
                        }
                    }
                    if terms.iter().all(|t| t.c == 0.0) {
                        return bad("explicit series has only zero coefficients".into());
                    }
                }
                SeriesFamily::Composite { rule } => match rule {
                    CompositeRule::Exponential { scale, prefactor }
                    | CompositeRule::Geometric { scale, prefactor } => {
                        if !(scale.is_finite() && *scale > 0.0) {
                            return bad("series.rule.scale must be positive".into());
                        }
                        if !(prefactor.is_finite() && *prefactor > 0.0) {
                            return bad("series.rule.prefactor must be positive".into());
                        }
                    }
                    CompositeRule::Polynomial { coeffs } => {
                        if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                            return bad("series.rule.coeffs must be nonnegative".into());
                        }
                        if coeffs.iter().all(|c| *c == 0.0) {
                            return bad("series.rule.coeffs are all zero".into());
                        }
                    }
                },
                SeriesFamily::Exponential => {}
            },
            SpaceDescriptor::Fock { alpha, q, .. } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad("alpha must be positive".into());
                }
                if q.0.is_nan() || q.0 <= 0.0 {
                    return bad("q must lie in (0, inf]".into());
                }
            }
            SpaceDescriptor::ShiftInvariant { measure, strip, .. } => {
                measure.validate(d)?;
                if let Some(a) = strip {
                    if a.len() != d || a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                        return bad(format!("strip must list {d} positive widths"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The composite rule when `Φ(z) = φ(z₁ + ⋯ + z_d)`.
    pub(crate) fn composite_rule(&self) -> Option<CompositeRule> {
        match self {
            SpaceDescriptor::PowerSeries { series, .. } => match series {
                SeriesFamily::Composite { rule } => Some(rule.clone()),
                SeriesFamily::Exponential => Some(CompositeRule::Exponential {
                    scale: 1.0,
                    prefactor: 1.0,
                }),
                SeriesFamily::Explicit { .. } => None,
            },
            SpaceDescriptor::Fock { dim, alpha, .. } => Some(CompositeRule::Exponential {
                scale: *alpha,
                prefactor: (alpha / std::f64::consts::PI).powi(*dim as i32),
            }),
            SpaceDescriptor::ShiftInvariant { .. } => None,
        }
    }

    /// Checks that `p` lies in the domain on which the kernel is defined.
    pub fn check_domain<T: Real>(&self, p: &[Cx<T>]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.len(),
            });
        }
        if p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::OutsideDomain("non-finite coordinate".into()));
        }
        match self {
            SpaceDescriptor::ShiftInvariant { strip, .. } => match strip {
                None => {
                    if p.iter().any(|z| z.im != T::zero()) {
                        return Err(Error::OutsideDomain(
                            "shift-invariant space without strip accepts real points only".into(),
                        ));
                    }
                }
                Some(a) => {
                    for (j, z) in p.iter().enumerate() {
                        if !(z.im.abs() < T::c(a[j])) {
                            return Err(Error::OutsideDomain(format!(
                                "|Im p[{j}]| = {} is not below the strip width {}",
                                z.im.abs(),
                                a[j]
                            )));
                        }
                    }
                }
            },
            _ => {
                if let Some(CompositeRule::Geometric { scale, .. }) = self.composite_rule() {
                    let r2: T = p.iter().map(|z| z.norm_sqr()).sum();
                    if !(r2 * T::c(scale) < T::one()) {
                        return Err(Error::OutsideDomain(format!(
                            "|p|² = {r2} must be below 1/scale = {}",
                            1.0 / scale
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl CompositeRule {
    /// `φ^{(k)}(s)`.
    pub(crate) fn derivative<T: Real>(&self, k: u32, s: Cx<T>) -> Cx<T> {
        match self {
            CompositeRule::Exponential { scale, prefactor } => {
                let a = T::c(*scale);
                (s * a).exp() * (T::c(*prefactor) * a.powi(k as i32))
            }
            CompositeRule::Geometric { scale, prefactor } => {
                let a = T::c(*scale);
                let one = Cx::new(T::one(), T::zero());
                let denom = (one - s * a).powi(k as i32 + 1);
                Cx::new(T::c(*prefactor) * factorial::<T>(k) * a.powi(k as i32), T::zero()) / denom
            }
            CompositeRule::Polynomial { coeffs } => {
                let mut acc = Cx::new(T::zero(), T::zero());
                for j in (k as usize..coeffs.len()).rev() {
                    let c = T::c(coeffs[j]) * crate::scalar::falling::<T>(j as u32, k);
                    acc = acc * s + Cx::new(c, T::zero());
                }
                acc
            }
        }
    }

    /// Whether infinitely many `φ_k` are nonzero.
    pub(crate) fn is_transcendental(&self) -> bool {
        !matches!(self, CompositeRule::Polynomial { .. })
    }
}
