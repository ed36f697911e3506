use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{CxMatrix, MultiPoly, PolyMap};
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Cx, Real};

/// Letters with `|det A|`, `|a·b|` or `|b|` at or below this are rejected.
pub const INVERTIBILITY_TOL: f64 = 1e-12;

/// Hénon transform `(x, y) ↦ (Q(x) − b·y, x)` with `deg Q ≥ 2`, `b ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HenonLetter<T: Real> {
    /// Univariate polynomial (`dim = 1`).
    pub q: MultiPoly<T>,
    pub b: Cx<T>,
}

impl<T: Real> HenonLetter<T> {
    pub fn new(q: MultiPoly<T>, b: Cx<T>) -> Result<Self> {
        let h = HenonLetter { q, b };
        h.validate()?;
        Ok(h)
    }

    /// Real-coefficient convenience constructor, coefficients ascending.
    pub fn real(q: &[f64], b: f64) -> Result<Self> {
        Self::new(MultiPoly::univariate_real(q), Cx::new(T::c(b), T::zero()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.dim() != 1 {
            return Err(Error::InvalidWord("Hénon polynomial must be univariate".into()));
        }
        if self.q.degree() < 2 {
            return Err(Error::InvalidWord(format!(
                "Hénon polynomial has degree {}, need at least 2",
                self.q.degree()
            )));
        }
        if self.b.norm() <= T::c(INVERTIBILITY_TOL) {
            return Err(Error::InvalidWord("Hénon letter has b = 0".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.q.degree()
    }

    pub fn apply(&self, x: Cx<T>, y: Cx<T>) -> (Cx<T>, Cx<T>) {
        (self.q.eval(&[x]).expect("univariate") - self.b * y, x)
    }

    /// Jacobian `[[Q′(x), −b], [1, 0]]`.
    pub fn jacobian(&self, x: Cx<T>) -> CxMatrix<T> {
        let dq = self.q.derivative(0).eval(&[x]).expect("univariate");
        CxMatrix::from_rows(vec![vec![dq, -self.b], vec![cone(), czero()]]).expect("2x2")
    }

    pub fn to_polymap(&self) -> PolyMap<T> {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let qx = self.q.compose(std::slice::from_ref(&x)).expect("univariate");
        let first = &qx - &y.scale(self.b);
        PolyMap::new(2, vec![first, x]).expect("two components")
    }
}

/// A generator of the plane automorphism group.
#[derive(Clone, Debug, PartialEq)]
pub enum Letter<T: Real> {
    /// `z ↦ A z + b` with `A ∈ GL₂`.
    Affine { a: CxMatrix<T>, b: [Cx<T>; 2] },
    /// `(x, y) ↦ (a·x + P(y), b·y + c)` with `a·b ≠ 0`.
    Elementary {
        p: MultiPoly<T>,
        a: Cx<T>,
        b: Cx<T>,
        c: Cx<T>,
    },
    Henon(HenonLetter<T>),
}

impl<T: Real> Letter<T> {
    pub fn affine(a: CxMatrix<T>, b: [Cx<T>; 2]) -> Result<Self> {
        let l = Letter::Affine { a, b };
        l.validate()?;
        Ok(l)
    }

    pub fn linear(a: CxMatrix<T>) -> Result<Self> {
        Self::affine(a, [czero(), czero()])
    }

    pub fn elementary(p: MultiPoly<T>, a: Cx<T>, b: Cx<T>, c: Cx<T>) -> Result<Self> {
        let l = Letter::Elementary { p, a, b, c };
        l.validate()?;
        Ok(l)
    }

    pub fn henon(q: MultiPoly<T>, b: Cx<T>) -> Result<Self> {
        Ok(Letter::Henon(HenonLetter::new(q, b)?))
    }

    /// The coordinate swap `(x, y) ↦ (y, x)`.
    pub fn swap() -> Self {
        Letter::Affine {
            a: CxMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]),
            b: [czero(), czero()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::c(INVERTIBILITY_TOL);
        match self {
            Letter::Affine { a, .. } => {
                if a.rows() != 2 || a.cols() != 2 {
                    return Err(Error::InvalidWord("affine letter needs a 2x2 matrix".into()));
                }
                let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
                if det.norm() <= tol {
                    return Err(Error::InvalidWord(format!(
                        "affine letter is singular (|det| = {:e})",
                        det.norm().f64()
                    )));
                }
            }
            Letter::Elementary { p, a, b, .. } => {
                if p.dim() != 1 {
                    return Err(Error::InvalidWord("elementary polynomial must be univariate".into()));
                }
                if (*a * *b).norm() <= tol {
                    return Err(Error::InvalidWord("elementary letter has a·b = 0".into()));
                }
            }
            Letter::Henon(h) => h.validate()?,
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        match self {
            Letter::Affine { .. } => 1,
            Letter::Elementary { p, .. } => p.degree().max(1),
            Letter::Henon(h) => h.degree(),
        }
    }

    /// Image of a point of `ℂ²`.
    pub fn apply(&self, z: [Cx<T>; 2]) -> [Cx<T>; 2] {
        let [x, y] = z;
        match self {
            Letter::Affine { a, b } => [
                a[(0, 0)] * x + a[(0, 1)] * y + b[0],
                a[(1, 0)] * x + a[(1, 1)] * y + b[1],
            ],
            Letter::Elementary { p, a, b, c } => {
                [*a * x + p.eval(&[y]).expect("univariate"), *b * y + *c]
            }
            Letter::Henon(h) => {
                let (u, v) = h.apply(x, y);
                [u, v]
            }
        }
    }

    /// Preimage of a point of `ℂ²` (every letter is invertible).
    pub fn apply_inverse(&self, z: [Cx<T>; 2]) -> [Cx<T>; 2] {
        let [u, v] = z;
        match self {
            Letter::Affine { a, b } => {
                let (s, t) = (u - b[0], v - b[1]);
                let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
                [
                    (a[(1, 1)] * s - a[(0, 1)] * t) / det,
                    (a[(0, 0)] * t - a[(1, 0)] * s) / det,
                ]
            }
            Letter::Elementary { p, a, b, c } => {
                let y = (v - *c) / *b;
                [(u - p.eval(&[y]).expect("univariate")) / *a, y]
            }
            Letter::Henon(h) => {
                let x = v;
                [x, (h.q.eval(&[x]).expect("univariate") - u) / h.b]
            }
        }
    }

    pub fn to_polymap(&self) -> PolyMap<T> {
        match self {
            Letter::Affine { a, b } => PolyMap::affine(a, b).expect("2x2 affine"),
            Letter::Elementary { p, a, b, c } => {
                let x = MultiPoly::var(2, 0);
                let y = MultiPoly::var(2, 1);
                let py = p.compose(std::slice::from_ref(&y)).expect("univariate");
                let first = &x.scale(*a) + &py;
                let second = &y.scale(*b) + &MultiPoly::constant(2, *c);
                PolyMap::new(2, vec![first, second]).expect("two components")
            }
            Letter::Henon(h) => h.to_polymap(),
        }
    }
}

/// A word `L₁ L₂ ⋯ L_k` in the generators, read as the composition
/// `L₁ ∘ L₂ ∘ ⋯ ∘ L_k` (the rightmost letter acts first).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AutWord<T: Real> {
    pub letters: Vec<Letter<T>>,
}

impl<T: Real> AutWord<T> {
    pub fn new(letters: Vec<Letter<T>>) -> Result<Self> {
        let w = AutWord { letters };
        w.validate()?;
        Ok(w)
    }

    pub fn identity() -> Self {
        AutWord { letters: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, l) in self.letters.iter().enumerate() {
            l.validate()
                .map_err(|e| Error::InvalidWord(format!("letter {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `L₁(L₂(⋯L_k(z)))`.
    pub fn apply(&self, z: [Cx<T>; 2]) -> [Cx<T>; 2] {
        self.letters.iter().rev().fold(z, |w, l| l.apply(w))
    }

    /// The unique `w` with `self.apply(w) = z`.
    pub fn apply_inverse(&self, z: [Cx<T>; 2]) -> [Cx<T>; 2] {
        self.letters.iter().fold(z, |w, l| l.apply_inverse(w))
    }
}

/// The polynomial map of a word; the empty word is the identity of `ℂ²`.
pub fn word_to_polymap<T: Real>(w: &AutWord<T>) -> Result<PolyMap<T>> {
    w.validate()?;
    let mut acc = PolyMap::identity(2);
    for l in &w.letters {
        acc = acc.compose(&l.to_polymap())?;
    }
    Ok(acc)
}

// JSON: complex scalars as a number or `[re, im]`; polynomials as an
// ascending coefficient list or the full sparse form.

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(untagged)]
enum CxJson {
    Real(f64),
    Pair([f64; 2]),
}

impl CxJson {
    fn to<T: Real>(self) -> Cx<T> {
        match self {
            CxJson::Real(r) => Cx::new(T::c(r), T::zero()),
            CxJson::Pair([r, i]) => Cx::new(T::c(r), T::c(i)),
        }
    }

    fn from<T: Real>(z: Cx<T>) -> Self {
        CxJson::Pair([z.re.f64(), z.im.f64()])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolyJson {
    Coeffs(Vec<CxJson>),
    Sparse(MultiPoly<f64>),
}

impl PolyJson {
    fn to<T: Real>(self) -> MultiPoly<T> {
        match self {
            PolyJson::Coeffs(c) => {
                let c: Vec<Cx<T>> = c.into_iter().map(CxJson::to).collect();
                MultiPoly::univariate(&c)
            }
            PolyJson::Sparse(p) => p.map_coeffs(|z| Cx::new(T::c(z.re), T::c(z.im))),
        }
    }

    fn from<T: Real>(p: &MultiPoly<T>) -> Self {
        PolyJson::Sparse(p.map_coeffs(|z| Cx::new(z.re.f64(), z.im.f64())))
    }
}

fn zero_pair() -> [CxJson; 2] {
    [CxJson::Real(0.0), CxJson::Real(0.0)]
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LetterJson {
    Affine {
        #[serde(rename = "A")]
        a: [[CxJson; 2]; 2],
        #[serde(default = "zero_pair")]
        b: [CxJson; 2],
    },
    Elementary {
        #[serde(rename = "P")]
        p: PolyJson,
        a: CxJson,
        b: CxJson,
        c: CxJson,
    },
    Henon {
        #[serde(rename = "Q")]
        q: PolyJson,
        b: CxJson,
    },
}

impl<T: Real> From<&Letter<T>> for LetterJson {
    fn from(l: &Letter<T>) -> Self {
        match l {
            Letter::Affine { a, b } => LetterJson::Affine {
                a: [
                    [CxJson::from(a[(0, 0)]), CxJson::from(a[(0, 1)])],
                    [CxJson::from(a[(1, 0)]), CxJson::from(a[(1, 1)])],
                ],
                b: [CxJson::from(b[0]), CxJson::from(b[1])],
            },
            Letter::Elementary { p, a, b, c } => LetterJson::Elementary {
                p: PolyJson::from(p),
                a: CxJson::from(*a),
                b: CxJson::from(*b),
                c: CxJson::from(*c),
            },
            Letter::Henon(h) => LetterJson::Henon {
                q: PolyJson::from(&h.q),
                b: CxJson::from(h.b),
            },
        }
    }
}

impl LetterJson {
    fn into_letter<T: Real>(self) -> Result<Letter<T>> {
        match self {
            LetterJson::Affine { a, b } => {
                let rows = a.iter().map(|r| r.iter().map(|z| z.to()).collect()).collect();
                Letter::affine(CxMatrix::from_rows(rows)?, [b[0].to(), b[1].to()])
            }
            LetterJson::Elementary { p, a, b, c } => {
                Letter::elementary(p.to(), a.to(), b.to(), c.to())
            }
            LetterJson::Henon { q, b } => Letter::henon(q.to(), b.to()),
        }
    }
}

impl<T: Real> Serialize for Letter<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LetterJson::from(self).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Letter<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        LetterJson::deserialize(d)?.into_letter().map_err(D::Error::custom)
    }
}

impl<T: Real> Serialize for HenonLetter<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LetterJson::Henon {
            q: PolyJson::from(&self.q),
            b: CxJson::from(self.b),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for HenonLetter<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match LetterJson::deserialize(d)?.into_letter().map_err(D::Error::custom)? {
            Letter::Henon(h) => Ok(h),
            _ => Err(D::Error::custom("expected a letter of kind \"henon\"")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordJson {
    letters: Vec<LetterJson>,
}

impl<T: Real> Serialize for AutWord<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WordJson {
            letters: self.letters.iter().map(LetterJson::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for AutWord<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = WordJson::deserialize(d)?;
        let letters = raw
            .letters
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                l.into_letter()
                    .map_err(|e| D::Error::custom(format!("letters[{i}]: {e}")))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(AutWord { letters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn henon_polymap() {
        let w = AutWord::new(vec![Letter::Henon(HenonLetter::<f64>::real(&[0.0, 0.0, 1.0], 1.0).unwrap())]).unwrap();
        let f = word_to_polymap(&w).unwrap();
        let v = f.eval(&[cx(3.0, 0.0), cx(2.0, 0.0)]).unwrap();
        assert_eq!(v, vec![cx(7.0, 0.0), cx(3.0, 0.0)]);
        assert_eq!(f.degree(), 2);
    }

    #[test]
    fn identity_affine_word() {
        let w = AutWord::new(vec![Letter::<f64>::linear(CxMatrix::identity(2)).unwrap()]).unwrap();
        assert_eq!(word_to_polymap(&w).unwrap().max_coeff_diff(&PolyMap::identity(2)), 0.0);
    }

    #[test]
    fn composition_degree_multiplies() {
        let h = Letter::Henon(HenonLetter::<f64>::real(&[0.0, 0.0, 1.0], 1.0).unwrap());
        let w = AutWord::new(vec![h.clone(), h]).unwrap();
        assert_eq!(word_to_polymap(&w).unwrap().degree(), 4);
    }

    #[test]
    fn rightmost_letter_acts_first() {
        let e = Letter::elementary(MultiPoly::univariate_real(&[0.0, 0.0, 1.0]), cone(), cone(), czero()).unwrap();
        let w = AutWord::<f64>::new(vec![e, Letter::swap()]).unwrap();
        // swap then e: (x, y) -> (y, x) -> (y + x², x)
        let v = word_to_polymap(&w).unwrap().eval(&[cx(2.0, 0.0), cx(5.0, 0.0)]).unwrap();
        assert_eq!(v, vec![cx(9.0, 0.0), cx(2.0, 0.0)]);
    }

    #[test]
    fn pointwise_inverse() {
        let json = r#"{"letters":[
            {"kind":"henon","Q":[1,0,1],"b":0.5},
            {"kind":"affine","A":[[1,2],[3,[0,1]]],"b":[1,-1]},
            {"kind":"elementary","P":[0,1,0,1],"a":2,"b":[0,1],"c":3}
        ]}"#;
        let w: AutWord<f64> = serde_json::from_str(json).unwrap();
        let f = word_to_polymap(&w).unwrap();
        let z = [cx(0.3, -0.2), cx(-0.7, 0.4)];
        let fz = w.apply(z);
        let direct = f.eval(&z).unwrap();
        assert!((fz[0] - direct[0]).norm() < 1e-12 && (fz[1] - direct[1]).norm() < 1e-12);
        let back = w.apply_inverse(fz);
        assert!((back[0] - z[0]).norm() < 1e-12 && (back[1] - z[1]).norm() < 1e-12);
    }

    #[test]
    fn invalid_letters_rejected() {
        assert!(HenonLetter::<f64>::real(&[0.0, 1.0], 1.0).is_err());
        assert!(HenonLetter::<f64>::real(&[0.0, 0.0, 1.0], 0.0).is_err());
        assert!(Letter::<f64>::elementary(MultiPoly::univariate_real(&[1.0]), czero(), cone(), czero()).is_err());
        assert!(Letter::<f64>::linear(CxMatrix::from_real(&[&[1.0, 2.0], &[2.0, 4.0]])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"letters":[
            {"kind":"henon","Q":[0,0,1],"b":0.5},
            {"kind":"affine","A":[[0,1],[1,[0,2]]],"b":[1,0]},
            {"kind":"elementary","P":[0,0,0,1],"a":2,"b":[0,1],"c":0}
        ]}"#;
        let w: AutWord<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(w.len(), 3);
        let back: AutWord<f64> = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        let bad = r#"{"letters":[{"kind":"henon","Q":[0,1],"b":1}]}"#;
        let err = serde_json::from_str::<AutWord<f64>>(bad).unwrap_err().to_string();
        assert!(err.contains("letters[0]"), "{err}");
    }
}
