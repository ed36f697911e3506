//! Cyclic reduction of automorphism words to a Hénon core.
//!
//! Rewriting rules, with words read as compositions `I₁ ∘ ⋯ ∘ I_k`:
//!
//! * `h_{Q,b} = e_{Q,−b,1,0} ∘ σ`, where `σ` is the coordinate swap.
//! * An affine letter with `a₂₁ = 0` is the elementary `e_{a₁₂y+b₁, a₁₁, a₂₂, b₂}`;
//!   an elementary letter with `deg P ≤ 1` is affine.
//! * Adjacent affine letters merge, adjacent elementary letters merge.
//! * Rotating the last letter `L` to the front replaces the map by `L ∘ F ∘ L⁻¹`.
//! * A non-triangular affine map splits as `T₁ ∘ σ ∘ U₂` with `T₁`, `U₂`
//!   upper triangular (`A = [[p,q],[r,s]]`, `r ≠ 0`):
//!   `T₁ = e_{(p/r)y+v₁, −det/r, 1, v₂}`, `U₂ = e_{sy, r, 1, 0}`.
//! * A cyclic word `(E₁σ)(E₂σ)⋯(E_mσ)` with `E_i = e_{P_i,a_i,b_i,c_i}` is
//!   conjugate by `D₁ = (x, b₁y + c₁)` to `h₁ ∘ ⋯ ∘ h_m` with
//!   `Q_i = P_i + a_i c_{i+1}` and `β_i = −a_i b_{i+1}` (indices cyclic).
//!
//! The conjugator `C` is maintained so that `C ∘ F = K ∘ C` for the input
//! map `F` and core `K`; that identity is checked on coefficients at the end.

use serde::{Deserialize, Serialize};

use super::word::{word_to_polymap, AutWord, HenonLetter, Letter};
use crate::algebra::{CxMatrix, MultiIndex, MultiPoly, PolyMap};
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Cx, Real};

/// Relative coefficient tolerance of the conjugation relation.
pub const RELATION_TOL: f64 = 1e-9;

/// Entries below this (relative) count as exact zeros during rewriting.
const ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum Core<T: Real> {
    /// Composition `h₁ ∘ ⋯ ∘ h_m`.
    Henon { letters: Vec<HenonLetter<T>> },
    /// `z ↦ A z + b`.
    Affine { a: Vec<Vec<Cx<T>>>, b: [Cx<T>; 2] },
    /// A triangular (non-affine elementary) map; not conjugate to Hénon maps.
    ElementaryLike { letter: Letter<T> },
}

impl<T: Real> Core<T> {
    pub fn to_word(&self) -> AutWord<T> {
        match self {
            Core::Henon { letters } => AutWord {
                letters: letters.iter().cloned().map(Letter::Henon).collect(),
            },
            Core::Affine { a, b } => AutWord {
                letters: vec![Letter::Affine {
                    a: CxMatrix::from_rows(a.clone()).expect("2x2"),
                    b: *b,
                }],
            },
            Core::ElementaryLike { letter } => AutWord {
                letters: vec![letter.clone()],
            },
        }
    }

    pub fn henon_letters(&self) -> Option<&[HenonLetter<T>]> {
        match self {
            Core::Henon { letters } => Some(letters),
            _ => None,
        }
    }

    pub fn affine_parts(&self) -> Option<(CxMatrix<T>, [Cx<T>; 2])> {
        match self {
            Core::Affine { a, b } => Some((CxMatrix::from_rows(a.clone()).ok()?, *b)),
            _ => None,
        }
    }
}

/// `C ∘ F = K ∘ C`, i.e. `F = C⁻¹ ∘ K ∘ C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReducedForm<T: Real> {
    pub conjugator: AutWord<T>,
    pub core: Core<T>,
    /// Largest coefficient deviation of `C ∘ F − K ∘ C`, relative to
    /// `max(1, largest coefficient)`.
    pub relation_residual: T,
}

#[derive(Clone, Debug)]
struct Elem<T: Real> {
    p: MultiPoly<T>,
    a: Cx<T>,
    b: Cx<T>,
    c: Cx<T>,
}

#[derive(Clone, Debug)]
struct Aff<T: Real> {
    m: [[Cx<T>; 2]; 2],
    v: [Cx<T>; 2],
}

#[derive(Clone, Debug)]
enum Item<T: Real> {
    E(Elem<T>),
    A(Aff<T>),
}

/// Drops coefficients that are rounding debris relative to `scale`.
fn clean<T: Real>(p: &MultiPoly<T>, scale: T) -> MultiPoly<T> {
    let cut = T::c(ZERO_TOL) * T::one().max(scale);
    let terms: Vec<(MultiIndex, Cx<T>)> = p
        .terms()
        .filter(|(_, c)| c.norm() > cut)
        .map(|(a, c)| (a.clone(), *c))
        .collect();
    MultiPoly::from_terms(p.dim(), terms).expect("same dimension")
}

fn small<T: Real>(z: Cx<T>, scale: T) -> bool {
    z.norm() <= T::c(ZERO_TOL) * T::one().max(scale)
}

impl<T: Real> Elem<T> {
    fn is_affine(&self) -> bool {
        self.p.degree() <= 1
    }

    fn to_aff(&self) -> Aff<T> {
        let lin = self.p.coeff(&MultiIndex(vec![1]));
        let cst = self.p.coeff(&MultiIndex(vec![0]));
        Aff {
            m: [[self.a, lin], [czero(), self.b]],
            v: [cst, self.c],
        }
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &Elem<T>) -> Elem<T> {
        let arg = MultiPoly::univariate(&[inner.c, inner.b]);
        let shifted = self.p.compose(&[arg]).expect("univariate");
        let p = &inner.p.scale(self.a) + &shifted;
        let scale = inner.p.max_abs_coeff().max(shifted.max_abs_coeff());
        Elem {
            p: clean(&p, scale),
            a: self.a * inner.a,
            b: self.b * inner.b,
            c: self.b * inner.c + self.c,
        }
    }

    fn is_identity(&self) -> bool {
        let one = cone::<T>();
        self.p.is_zero() && small(self.a - one, T::one()) && small(self.b - one, T::one()) && small(self.c, T::one())
    }

    fn letter(&self) -> Letter<T> {
        Letter::Elementary {
            p: self.p.clone(),
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }
}

impl<T: Real> Aff<T> {
    fn scale(&self) -> T {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    fn is_triangular(&self) -> bool {
        small(self.m[1][0], self.scale())
    }

    fn to_elem(&self) -> Elem<T> {
        Elem {
            p: MultiPoly::univariate(&[self.v[0], self.m[0][1]]),
            a: self.m[0][0],
            b: self.m[1][1],
            c: self.v[1],
        }
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &Aff<T>) -> Aff<T> {
        let (m, n) = (&self.m, &inner.m);
        let mut out = [[czero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = m[i][0] * n[0][j] + m[i][1] * n[1][j];
            }
        }
        let v = [
            m[0][0] * inner.v[0] + m[0][1] * inner.v[1] + self.v[0],
            m[1][0] * inner.v[0] + m[1][1] * inner.v[1] + self.v[1],
        ];
        Aff { m: out, v }
    }

    fn is_identity(&self) -> bool {
        let one = cone::<T>();
        small(self.m[0][0] - one, T::one())
            && small(self.m[1][1] - one, T::one())
            && small(self.m[0][1], T::one())
            && small(self.m[1][0], T::one())
            && small(self.v[0], T::one())
            && small(self.v[1], T::one())
    }

    fn swap() -> Aff<T> {
        Aff {
            m: [[czero(), cone()], [cone(), czero()]],
            v: [czero(), czero()],
        }
    }

    /// `(T₁, U₂)` with `self = T₁ ∘ σ ∘ U₂`.
    fn bruhat(&self) -> (Elem<T>, Elem<T>) {
        let [[p, q], [r, s]] = self.m;
        let det = p * s - q * r;
        let t1 = Elem {
            p: MultiPoly::univariate(&[self.v[0], p / r]),
            a: -det / r,
            b: cone(),
            c: self.v[1],
        };
        let u2 = Elem {
            p: MultiPoly::univariate(&[czero(), s]),
            a: r,
            b: cone(),
            c: czero(),
        };
        (t1, u2)
    }

    fn letter(&self) -> Letter<T> {
        Letter::Affine {
            a: CxMatrix::from_rows(self.m.iter().map(|r| r.to_vec()).collect()).expect("2x2"),
            b: self.v,
        }
    }
}

impl<T: Real> Item<T> {
    fn letter(&self) -> Letter<T> {
        match self {
            Item::E(e) => e.letter(),
            Item::A(a) => a.letter(),
        }
    }
}

fn items_of<T: Real>(w: &AutWord<T>) -> Vec<Item<T>> {
    let mut out = Vec::new();
    for l in &w.letters {
        match l {
            Letter::Affine { a, b } => out.push(Item::A(Aff {
                m: [[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]],
                v: *b,
            })),
            Letter::Elementary { p, a, b, c } => out.push(Item::E(Elem {
                p: p.clone(),
                a: *a,
                b: *b,
                c: *c,
            })),
            Letter::Henon(h) => {
                out.push(Item::E(Elem {
                    p: h.q.clone(),
                    a: -h.b,
                    b: cone(),
                    c: czero(),
                }));
                out.push(Item::A(Aff::swap()));
            }
        }
    }
    out
}

/// One pass of local simplification; returns true if anything changed.
fn simplify_pass<T: Real>(items: &mut Vec<Item<T>>) -> bool {
    let before = items.len();
    // Affine elementary letters are affine maps.
    for it in items.iter_mut() {
        if let Item::E(e) = it {
            if e.is_affine() {
                *it = Item::A(e.to_aff());
            }
        }
    }
    let mut merged: Vec<Item<T>> = Vec::with_capacity(items.len());
    for it in items.drain(..) {
        match (merged.last_mut(), it) {
            (Some(Item::A(left)), Item::A(right)) => *left = left.compose(&right),
            (_, it) => merged.push(it),
        }
    }
    merged.retain(|it| match it {
        Item::A(a) => !a.is_identity(),
        Item::E(e) => !e.is_identity(),
    });
    // Triangular affine maps are elementary; fold them into a neighbour.
    let has_elem = merged.iter().any(|it| matches!(it, Item::E(_)));
    if has_elem {
        for it in merged.iter_mut() {
            if let Item::A(a) = it {
                if a.is_triangular() {
                    let mut e = a.to_elem();
                    e.p = clean(&e.p, T::zero());
                    *it = Item::E(e);
                }
            }
        }
    }
    let mut out: Vec<Item<T>> = Vec::with_capacity(merged.len());
    for it in merged {
        match (out.last_mut(), it) {
            (Some(Item::E(left)), Item::E(right)) => *left = left.compose(&right),
            (_, it) => out.push(it),
        }
    }
    out.retain(|it| match it {
        Item::A(a) => !a.is_identity(),
        Item::E(e) => !e.is_identity(),
    });
    let changed = out.len() != before;
    *items = out;
    changed
}

fn simplify<T: Real>(items: &mut Vec<Item<T>>) {
    while simplify_pass(items) {}
    // A final pass normalizes letter kinds even when nothing merged.
    simplify_pass(items);
}

fn same_kind<T: Real>(a: &Item<T>, b: &Item<T>) -> bool {
    matches!((a, b), (Item::A(_), Item::A(_)) | (Item::E(_), Item::E(_)))
}

/// Moves the last item to the front: `K ← L ∘ K ∘ L⁻¹`, `C ← L ∘ C`.
fn rotate<T: Real>(items: &mut Vec<Item<T>>, conj: &mut Vec<Letter<T>>) {
    if let Some(last) = items.pop() {
        conj.insert(0, last.letter());
        items.insert(0, last);
    }
}

/// Reduces a word to a Hénon composition, an affine map, or a triangular
/// map, up to conjugation, and certifies the relation on coefficients.
pub fn reduce_word<T: Real>(w: &AutWord<T>) -> Result<ReducedForm<T>> {
    w.validate()?;
    let mut items = items_of(w);
    let mut conj: Vec<Letter<T>> = Vec::new();
    simplify(&mut items);
    while items.len() >= 2 && same_kind(&items[0], &items[items.len() - 1]) {
        rotate(&mut items, &mut conj);
        simplify(&mut items);
    }

    let core = match items.len() {
        0 => Core::Affine {
            a: vec![vec![cone(), czero()], vec![czero(), cone()]],
            b: [czero(), czero()],
        },
        1 => match &items[0] {
            Item::A(a) => Core::Affine {
                a: a.m.iter().map(|r| r.to_vec()).collect(),
                b: a.v,
            },
            Item::E(e) => Core::ElementaryLike { letter: e.letter() },
        },
        _ => henon_core(items, &mut conj)?,
    };

    let conjugator = AutWord { letters: conj };
    let relation_residual = relation_residual(w, &conjugator, &core)?;
    if !(relation_residual <= T::c(RELATION_TOL)) {
        return Err(Error::Numerical(format!(
            "word reduction relation residual {:e} exceeds {:e}",
            relation_residual.f64(),
            RELATION_TOL
        )));
    }
    Ok(ReducedForm {
        conjugator,
        core,
        relation_residual,
    })
}

/// Converts a cyclically reduced alternating word into Hénon letters.
fn henon_core<T: Real>(mut items: Vec<Item<T>>, conj: &mut Vec<Letter<T>>) -> Result<Core<T>> {
    if matches!(items[0], Item::A(_)) {
        rotate(&mut items, conj);
    }
    // items = E₁ A₁ E₂ A₂ ⋯ E_m A_m with every A_i non-triangular.
    let mut elems: Vec<Elem<T>> = Vec::new();
    let mut pending: Option<Elem<T>> = None;
    for it in items {
        match it {
            Item::E(e) => {
                let e = match pending.take() {
                    Some(u) => u.compose(&e),
                    None => e,
                };
                elems.push(e);
            }
            Item::A(a) => {
                let (t1, u2) = a.bruhat();
                let last = elems
                    .last_mut()
                    .ok_or_else(|| Error::Numerical("alternating word must start with an elementary letter".into()))?;
                *last = last.compose(&t1);
                pending = Some(u2);
            }
        }
    }
    // The trailing U₂ rotates to the front and merges with E₁.
    if let Some(u) = pending {
        conj.insert(0, u.letter());
        elems[0] = u.compose(&elems[0]);
    }
    let m = elems.len();
    // Now K = (E₁σ)(E₂σ)⋯(E_mσ); conjugate by D₁⁻¹.
    let d1 = &elems[0];
    conj.insert(
        0,
        Letter::Elementary {
            p: MultiPoly::zero(1),
            a: cone(),
            b: cone::<T>() / d1.b,
            c: -d1.c / d1.b,
        },
    );
    let mut letters = Vec::with_capacity(m);
    for i in 0..m {
        let e = &elems[i];
        let next = &elems[(i + 1) % m];
        let q = &e.p + &MultiPoly::constant(1, e.a * next.c);
        let h = HenonLetter {
            q: clean(&q, e.p.max_abs_coeff()),
            b: -(e.a * next.b),
        };
        h.validate()
            .map_err(|err| Error::Numerical(format!("Hénon conversion produced an invalid letter: {err}")))?;
        letters.push(h);
    }
    Ok(Core::Henon { letters })
}

fn relation_residual<T: Real>(w: &AutWord<T>, conj: &AutWord<T>, core: &Core<T>) -> Result<T> {
    let f = word_to_polymap(w)?;
    let c: PolyMap<T> = word_to_polymap(conj)?;
    let k = word_to_polymap(&core.to_word())?;
    let lhs = c.compose(&f)?;
    let rhs = k.compose(&c)?;
    let scale = T::one().max(lhs.max_abs_coeff()).max(rhs.max_abs_coeff());
    Ok(lhs.max_coeff_diff(&rhs) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn henon(q: &[f64], b: f64) -> Letter<f64> {
        Letter::Henon(HenonLetter::real(q, b).unwrap())
    }

    fn elem(p: &[f64], a: f64, b: f64, c: f64) -> Letter<f64> {
        Letter::elementary(MultiPoly::univariate_real(p), cx(a, 0.0), cx(b, 0.0), cx(c, 0.0)).unwrap()
    }

    fn aff(m: &[&[f64]], v: [f64; 2]) -> Letter<f64> {
        Letter::affine(CxMatrix::from_real(m), [cx(v[0], 0.0), cx(v[1], 0.0)]).unwrap()
    }

    #[test]
    fn affine_word_has_affine_core() {
        let r = reduce_word(&AutWord::new(vec![aff(&[&[2.0, 1.0], &[1.0, 1.0]], [0.0, 0.0])]).unwrap()).unwrap();
        assert!(matches!(r.core, Core::Affine { .. }));
    }

    #[test]
    fn single_henon_is_its_own_core() {
        let w = AutWord::new(vec![henon(&[0.0, 0.0, 1.0], 1.0)]).unwrap();
        let r = reduce_word(&w).unwrap();
        let hs = r.core.henon_letters().unwrap();
        assert_eq!(hs.len(), 1);
        assert!((hs[0].b - cx(1.0, 0.0)).norm() < 1e-12);
        assert!(hs[0].q.max_coeff_diff(&MultiPoly::univariate_real(&[0.0, 0.0, 1.0])) < 1e-12);
        let c = word_to_polymap(&r.conjugator).unwrap();
        assert!(c.max_coeff_diff(&PolyMap::identity(2)) < 1e-12);
    }

    #[test]
    fn elementary_times_swap() {
        let w = AutWord::new(vec![elem(&[0.0, 0.0, 1.0], 1.0, 1.0, 0.0), Letter::swap()]).unwrap();
        let r = reduce_word(&w).unwrap();
        let hs = r.core.henon_letters().unwrap();
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].degree(), 2);
        // (x, y) ↦ (x² + y, x) has Jacobian determinant −1, so β = −1.
        assert!((hs[0].b - cx(-1.0, 0.0)).norm() < 1e-12);
        assert!(r.relation_residual < 1e-12);
    }

    #[test]
    fn triangular_word_is_elementary_like() {
        let w = AutWord::new(vec![elem(&[0.0, 0.0, 1.0], 1.0, 1.0, 0.0)]).unwrap();
        assert!(matches!(reduce_word(&w).unwrap().core, Core::ElementaryLike { .. }));
        let w = AutWord::new(vec![
            elem(&[0.0, 0.0, 1.0], 1.0, 1.0, 0.0),
            aff(&[&[2.0, 1.0], &[0.0, 3.0]], [1.0, -1.0]),
            elem(&[1.0, 0.0, 0.0, 2.0], 1.0, 2.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(reduce_word(&w).unwrap().core, Core::ElementaryLike { .. }));
    }

    #[test]
    fn conjugated_henon_reduces() {
        let a = aff(&[&[1.0, 2.0], &[3.0, -1.0]], [1.0, 2.0]);
        let a_inv = {
            let m = crate::algebra::linalg::inverse(&CxMatrix::from_real(&[&[1.0, 2.0], &[3.0, -1.0]])).unwrap();
            let v = m.mul_vec(&[cx(-1.0, 0.0), cx(-2.0, 0.0)]);
            Letter::affine(m, [v[0], v[1]]).unwrap()
        };
        let w = AutWord::new(vec![a_inv, henon(&[1.0, 0.0, -1.0, 1.0], 2.0), henon(&[0.0, 0.0, 1.0], 0.5), a]).unwrap();
        let r = reduce_word(&w).unwrap();
        let hs = r.core.henon_letters().unwrap();
        assert_eq!(hs.len(), 2);
        assert_eq!(hs.iter().map(|h| h.degree()).product::<usize>(), 6);
        assert!(r.relation_residual < 1e-9);
    }

    #[test]
    fn inverse_pair_cancels() {
        let e = elem(&[0.0, 0.0, 1.0], 1.0, 1.0, 0.0);
        let e_inv = elem(&[0.0, 0.0, -1.0], 1.0, 1.0, 0.0);
        let w = AutWord::new(vec![e, e_inv]).unwrap();
        let r = reduce_word(&w).unwrap();
        assert!(matches!(r.core, Core::Affine { .. }));
    }
}
