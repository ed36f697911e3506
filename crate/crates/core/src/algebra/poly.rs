use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, is_finite, Cx, Real};

/// Exponent vector of a monomial `z^α`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vector compared lexicographically with larger leading exponents first, so
/// that in two variables the order reads `1, z1, z2, z1^2, z1 z2, z2^2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !self.dominates(other) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `α! = Π α_i!`
    pub fn factorial<T: Real>(&self) -> T {
        self.0
            .iter()
            .fold(T::one(), |acc, &a| acc * crate::scalar::factorial::<T>(a))
    }

    /// Every multi-index of length `dim` and total degree exactly `k`, in
    /// graded-lex order.
    pub fn of_degree(dim: usize, k: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(k);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for first in (0..=k).rev() {
                prefix.push(first);
                rec(dim, k - first, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            return out;
        }
        rec(dim, k, &mut Vec::with_capacity(dim), &mut out);
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with complex coefficients.
///
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<T: Real> {
    dim: usize,
    terms: BTreeMap<MultiIndex, Cx<T>>,
}

impl<T: Real> MultiPoly<T> {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Cx<T>) -> Self {
        Self::monomial(dim, MultiIndex::zero(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, cone())
    }

    /// The coordinate function `z_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(dim, MultiIndex::unit(dim, i), cone())
    }

    pub fn monomial(dim: usize, alpha: MultiIndex, c: Cx<T>) -> Self {
        debug_assert_eq!(alpha.dim(), dim);
        let mut p = Self::zero(dim);
        p.add_term(alpha, c);
        p
    }

    /// Builds a polynomial from `(α, c)` pairs, summing repeated exponents.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Cx<T>)>,
    {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            if !is_finite(c) {
                return Err(Error::Numerical("non-finite coefficient".into()));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// Univariate polynomial from ascending coefficients `c0 + c1 z + ...`.
    pub fn univariate(coeffs: &[Cx<T>]) -> Self {
        let mut p = Self::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(MultiIndex(vec![k as u32]), c);
        }
        p
    }

    /// Univariate polynomial from real ascending coefficients.
    pub fn univariate_real(coeffs: &[f64]) -> Self {
        let c: Vec<Cx<T>> = coeffs.iter().map(|&x| Cx::new(T::c(x), T::zero())).collect();
        Self::univariate(&c)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Cx<T>) {
        if c == czero() {
            return;
        }
        let entry = self.terms.entry(alpha);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == czero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Cx<T>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Cx<T> {
        self.terms.get(alpha).copied().unwrap_or_else(czero)
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .next_back()
            .map(|a| a.degree() as usize)
            .unwrap_or(0)
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, var: usize) -> usize {
        self.terms.keys().map(|a| a.0[var] as usize).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms
            .values()
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }

    /// Sum of coefficient moduli (the `l1` norm of the coefficient vector).
    pub fn l1_norm(&self) -> T {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &c) in &self.terms {
            p.add_term(a.clone(), c * s);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.dim);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Drops every term of total degree above `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Self {
        MultiPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() <= max_degree)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// Product truncated at total degree `max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &ca) in &self.terms {
            let da = a.degree();
            if da > max_degree {
                break;
            }
            for (b, &cb) in &other.terms {
                if da + b.degree() > max_degree {
                    break;
                }
                p.add_term(a.plus(b), ca * cb);
            }
        }
        p
    }

    /// Evaluates at `z` using precomputed power tables per coordinate.
    pub fn eval(&self, z: &[Cx<T>]) -> Result<Cx<T>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        if self.dim == 1 {
            return Ok(self.horner_1d(z[0]));
        }
        let powers = self.power_table(z);
        let mut acc = czero();
        for (a, &c) in &self.terms {
            let mut m = c;
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    m *= powers[i][e as usize];
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    fn horner_1d(&self, z: Cx<T>) -> Cx<T> {
        let deg = self.degree();
        let mut acc = czero();
        for k in (0..=deg).rev() {
            acc = acc * z + self.coeff(&MultiIndex(vec![k as u32]));
        }
        acc
    }

    fn power_table(&self, z: &[Cx<T>]) -> Vec<Vec<Cx<T>>> {
        (0..self.dim)
            .map(|i| {
                let d = self.degree_in(i);
                let mut row = Vec::with_capacity(d + 1);
                row.push(cone());
                for k in 1..=d {
                    let prev: Cx<T> = row[k - 1];
                    row.push(prev * z[i]);
                }
                row
            })
            .collect()
    }

    /// Partial derivative `∂/∂z_var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &c) in &self.terms {
            let e = a.0[var];
            if e == 0 {
                continue;
            }
            let mut b = a.clone();
            b.0[var] -= 1;
            p.add_term(b, c * T::c(e as f64));
        }
        p
    }

    /// Mixed partial `∂^α`.
    pub fn derivative_multi(&self, alpha: &MultiIndex) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, &c) in &self.terms {
            if let Some(b) = a.checked_sub(alpha) {
                let mut factor = T::one();
                for (i, &k) in alpha.0.iter().enumerate() {
                    factor *= crate::scalar::falling::<T>(a.0[i], k);
                }
                p.add_term(b, c * factor);
            }
        }
        p
    }

    /// Substitutes `subs[i]` for `z_i`. All substitutes must share a
    /// dimension, which becomes the dimension of the result.
    pub fn compose(&self, subs: &[MultiPoly<T>]) -> Result<Self> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: subs.len(),
            });
        }
        let out_dim = subs.first().map(|s| s.dim).unwrap_or(0);
        if let Some(bad) = subs.iter().find(|s| s.dim != out_dim) {
            return Err(Error::DimensionMismatch {
                expected: out_dim,
                found: bad.dim,
            });
        }
        self.compose_with(subs, out_dim, None)
    }

    /// As [`compose`](Self::compose), dropping terms above `max_degree`
    /// throughout the expansion.
    pub fn compose_truncated(&self, subs: &[MultiPoly<T>], max_degree: u32) -> Result<Self> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: subs.len(),
            });
        }
        let out_dim = subs.first().map(|s| s.dim).unwrap_or(0);
        self.compose_with(subs, out_dim, Some(max_degree))
    }

    fn compose_with(
        &self,
        subs: &[MultiPoly<T>],
        out_dim: usize,
        cap: Option<u32>,
    ) -> Result<Self> {
        let mul = |a: &Self, b: &Self| match cap {
            Some(m) => a.mul_truncated(b, m),
            None => a * b,
        };
        let powers: Vec<Vec<MultiPoly<T>>> = (0..self.dim)
            .map(|i| {
                let d = self.degree_in(i);
                let mut row = Vec::with_capacity(d + 1);
                row.push(MultiPoly::one(out_dim));
                for k in 1..=d {
                    let next = mul(&row[k - 1], &subs[i]);
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = MultiPoly::zero(out_dim);
        for (a, &c) in &self.terms {
            let mut m = MultiPoly::constant(out_dim, c);
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    m = mul(&m, &powers[i][e as usize]);
                }
            }
            acc = &acc + &m;
        }
        Ok(acc)
    }

    /// Taylor re-expansion about `p`: returns `u ↦ self(p + u)`.
    pub fn shift(&self, p: &[Cx<T>]) -> Result<Self> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        let subs: Vec<MultiPoly<T>> = (0..self.dim)
            .map(|i| &MultiPoly::var(self.dim, i) + &MultiPoly::constant(self.dim, p[i]))
            .collect();
        self.compose(&subs)
    }

    /// Ascending coefficient vector of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Result<Vec<Cx<T>>> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim,
            });
        }
        let deg = self.degree();
        Ok((0..=deg)
            .map(|k| self.coeff(&MultiIndex(vec![k as u32])))
            .collect())
    }

    /// Removes coefficients with modulus at most `tol · max|c|`.
    pub fn prune(&self, rel_tol: T) -> Self {
        let cut = rel_tol * self.max_abs_coeff();
        MultiPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > cut)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// Maximum coefficient deviation between two polynomials.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let diff = self - other;
        diff.max_abs_coeff()
    }

    pub fn map_coeffs<U: Real>(&self, f: impl Fn(Cx<T>) -> Cx<U>) -> MultiPoly<U> {
        let mut p = MultiPoly::zero(self.dim);
        for (a, &c) in &self.terms {
            p.add_term(a.clone(), f(c));
        }
        p
    }
}

impl<'a, T: Real> Add<&'a MultiPoly<T>> for &'a MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn add(self, rhs: &'a MultiPoly<T>) -> MultiPoly<T> {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut p = self.clone();
        for (a, &c) in &rhs.terms {
            p.add_term(a.clone(), c);
        }
        p
    }
}

impl<'a, T: Real> Sub<&'a MultiPoly<T>> for &'a MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn sub(self, rhs: &'a MultiPoly<T>) -> MultiPoly<T> {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut p = self.clone();
        for (a, &c) in &rhs.terms {
            p.add_term(a.clone(), -c);
        }
        p
    }
}

impl<'a, T: Real> Mul<&'a MultiPoly<T>> for &'a MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn mul(self, rhs: &'a MultiPoly<T>) -> MultiPoly<T> {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut p = MultiPoly::zero(self.dim);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                p.add_term(a.plus(b), ca * cb);
            }
        }
        p
    }
}

impl<T: Real> Neg for &MultiPoly<T> {
    type Output = MultiPoly<T>;
    fn neg(self) -> MultiPoly<T> {
        self.scale(-cone::<T>())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson<T> {
    alpha: Vec<u32>,
    re: T,
    im: T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson<T> {
    dim: usize,
    terms: Vec<TermJson<T>>,
}

impl<T: Real> Serialize for MultiPoly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson {
                    alpha: a.0.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for MultiPoly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::<T>::deserialize(d)?;
        if raw.dim == 0 {
            return Err(D::Error::custom("polynomial dim must be positive"));
        }
        MultiPoly::from_terms(
            raw.dim,
            raw.terms
                .into_iter()
                .map(|t| (MultiIndex(t.alpha), Cx::new(t.re, t.im))),
        )
        .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type P = MultiPoly<f64>;

    #[test]
    fn graded_lex_order() {
        let idx = MultiIndex::of_degree(2, 2);
        assert_eq!(
            idx,
            vec![
                MultiIndex(vec![2, 0]),
                MultiIndex(vec![1, 1]),
                MultiIndex(vec![0, 2])
            ]
        );
        assert!(MultiIndex(vec![1, 0]) < MultiIndex(vec![0, 1]));
        assert!(MultiIndex(vec![0, 1]) < MultiIndex(vec![2, 0]));
    }

    #[test]
    fn eval_examples() {
        let z2 = P::var(1, 0).pow(2);
        assert_eq!(z2.eval(&[cx(3.0, 0.0)]).unwrap(), cx(9.0, 0.0));

        let p = &(&P::var(2, 0) * &P::var(2, 1)) + &P::one(2);
        assert_eq!(p.eval(&[cx(2.0, 0.0), cx(5.0, 0.0)]).unwrap(), cx(11.0, 0.0));

        let q = P::var(1, 0).scale(cx(1.0, 1.0));
        let v = q.eval(&[cx(1.0, -1.0)]).unwrap();
        assert!((v - cx(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let p = P::var(2, 0);
        assert!(matches!(
            p.eval(&[cx(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn compose_square_of_shift() {
        let f = P::var(1, 0).pow(2);
        let g = &P::var(1, 0) + &P::one(1);
        let h = f.compose(&[g]).unwrap();
        assert_eq!(h, P::univariate_real(&[1.0, 2.0, 1.0]));
    }

    #[test]
    fn zero_terms_are_not_stored() {
        let x = P::var(1, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.num_terms(), 0);
    }

    #[test]
    fn derivative_multi_matches_repeated_single() {
        let x = P::var(2, 0);
        let y = P::var(2, 1);
        let p = &(&x.pow(3) * &y.pow(2)) + &x;
        let a = p.derivative_multi(&MultiIndex(vec![2, 1]));
        let b = p.derivative(0).derivative(0).derivative(1);
        assert_eq!(a, b);
        assert_eq!(a.coeff(&MultiIndex(vec![1, 1])), cx(12.0, 0.0));
    }

    #[test]
    fn json_shape() {
        let p = &P::var(2, 0) + &P::constant(2, cx(0.5, -1.0));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"dim\":2,\"terms\":["));
        let back: P = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"dim":2,"terms":[{"alpha":[1],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<P>(bad).is_err());
    }
}
