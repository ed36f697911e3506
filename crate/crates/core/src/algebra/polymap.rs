use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::CxMatrix;
use super::poly::{MultiIndex, MultiPoly};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Polynomial map `ℂ^{dim_in} → ℂ^{dim_out}` given by its components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap<T: Real> {
    dim_in: usize,
    components: Vec<MultiPoly<T>>,
}

impl<T: Real> PolyMap<T> {
    pub fn new(dim_in: usize, components: Vec<MultiPoly<T>>) -> Result<Self> {
        if dim_in == 0 || components.is_empty() {
            return Err(Error::InvalidDescriptor(
                "polynomial map needs positive input and output dimension".into(),
            ));
        }
        for c in &components {
            if c.dim() != dim_in {
                return Err(Error::DimensionMismatch {
                    expected: dim_in,
                    found: c.dim(),
                });
            }
        }
        Ok(PolyMap { dim_in, components })
    }

    /// Self-map of `ℂ^1` given by one polynomial.
    pub fn univariate(p: MultiPoly<T>) -> Result<Self> {
        Self::new(1, vec![p])
    }

    pub fn identity(d: usize) -> Self {
        PolyMap {
            dim_in: d,
            components: (0..d).map(|i| MultiPoly::var(d, i)).collect(),
        }
    }

    /// `z ↦ A z + b`.
    pub fn affine(a: &CxMatrix<T>, b: &[Cx<T>]) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: b.len(),
            });
        }
        let d = a.cols();
        let components = (0..a.rows())
            .map(|m| {
                let mut p = MultiPoly::constant(d, b[m]);
                for j in 0..d {
                    p.add_term(MultiIndex::unit(d, j), a[(m, j)]);
                }
                p
            })
            .collect();
        Self::new(d, components)
    }

    pub fn linear(a: &CxMatrix<T>) -> Result<Self> {
        let zeros = vec![crate::scalar::czero(); a.rows()];
        Self::affine(a, &zeros)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MultiPoly<T>] {
        &self.components
    }

    pub fn is_self_map(&self) -> bool {
        self.dim_in == self.dim_out()
    }

    pub fn degree(&self) -> usize {
        self.components.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap<T>) -> Result<Self> {
        if inner.dim_out() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: inner.dim_out(),
            });
        }
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        Self::new(inner.dim_in, components)
    }

    /// The `r`-fold iterate; `r = 0` gives the identity.
    pub fn iterate(&self, r: usize) -> Result<Self> {
        if !self.is_self_map() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: self.dim_out(),
            });
        }
        let mut acc = Self::identity(self.dim_in);
        for _ in 0..r {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Jacobian matrix `(∂f_m/∂z_j)(p)`.
    pub fn jacobian(&self, p: &[Cx<T>]) -> Result<CxMatrix<T>> {
        if p.len() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                found: p.len(),
            });
        }
        let mut j = CxMatrix::zeros(self.dim_out(), self.dim_in);
        for (m, c) in self.components.iter().enumerate() {
            for k in 0..self.dim_in {
                j[(m, k)] = c.derivative(k).eval(p)?;
            }
        }
        Ok(j)
    }

    /// Largest coefficient deviation over all components.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_coeff_diff(b))
            .fold(T::zero(), T::max)
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs_coeff(&self) -> T {
        self.components
            .iter()
            .map(|c| c.max_abs_coeff())
            .fold(T::zero(), T::max)
    }

    /// Linear and constant parts when every component has degree ≤ 1.
    pub fn as_affine(&self) -> Option<(CxMatrix<T>, Vec<Cx<T>>)> {
        if self.degree() > 1 {
            return None;
        }
        let d = self.dim_in;
        let a = CxMatrix::from_fn(self.dim_out(), d, |m, j| {
            self.components[m].coeff(&MultiIndex::unit(d, j))
        });
        let b = self
            .components
            .iter()
            .map(|c| c.coeff(&MultiIndex::zero(d)))
            .collect();
        Some((a, b))
    }

    pub fn map_coeffs<U: Real>(&self, f: impl Fn(Cx<T>) -> Cx<U> + Copy) -> PolyMap<U> {
        PolyMap {
            dim_in: self.dim_in,
            components: self.components.iter().map(|c| c.map_coeffs(f)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "")]
struct MapJson<T: Real> {
    dim_in: usize,
    components: Vec<MultiPoly<T>>,
}

impl<T: Real> Serialize for PolyMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapJson {
            dim_in: self.dim_in,
            components: self.components.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for PolyMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MapJson::<T>::deserialize(d)?;
        PolyMap::new(raw.dim_in, raw.components).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type P = MultiPoly<f64>;

    fn henon(b: f64) -> PolyMap<f64> {
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        PolyMap::new(2, vec![&x.pow(2) - &y.scale(cx(b, 0.0)), x]).unwrap()
    }

    #[test]
    fn compose_with_identity() {
        let g = henon(1.0);
        assert_eq!(PolyMap::identity(2).compose(&g).unwrap(), g);
        assert_eq!(g.compose(&PolyMap::identity(2)).unwrap(), g);
    }

    #[test]
    fn henon_square_pointwise() {
        let h = henon(1.0);
        let hh = h.compose(&h).unwrap();
        assert_eq!(hh.degree(), 4);
        for k in 0..20 {
            let t = k as f64 * 0.37 - 3.0;
            let z = [cx(t, 0.5 * t.sin()), cx(t.cos(), -0.3 * t)];
            let direct = h.eval(&h.eval(&z).unwrap()).unwrap();
            let composed = hh.eval(&z).unwrap();
            for i in 0..2 {
                assert!((direct[i] - composed[i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobian_examples() {
        let f = PolyMap::univariate(P::var(1, 0).pow(2)).unwrap();
        assert_eq!(f.jacobian(&[cx(1.0, 0.0)]).unwrap()[(0, 0)], cx(2.0, 0.0));

        let h = henon(0.5);
        let j = h.jacobian(&[cx(1.5, 0.0), cx(1.5, 0.0)]).unwrap();
        assert_eq!(j, CxMatrix::from_real(&[&[3.0, -0.5], &[1.0, 0.0]]));

        let a = CxMatrix::<f64>::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let lin = PolyMap::linear(&a).unwrap();
        assert_eq!(lin.jacobian(&[cx(7.0, 1.0), cx(-2.0, 0.0)]).unwrap(), a);
    }

    #[test]
    fn json_roundtrip() {
        let h = henon(0.5);
        let s = serde_json::to_string(&h).unwrap();
        let back: PolyMap<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
    }
}
