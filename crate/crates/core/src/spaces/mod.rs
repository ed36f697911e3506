//! Function-space descriptors and their dual-jet functionals.
//!
//! Pairing convention: the dual jet `e_α` of a point `p` is the element with
//! `⟨h, e_α⟩ = (∂^α h)(p)` for every `h` in the space, the inner product
//! being linear in its first slot. Every conjugation below follows from that.
//! Gram entries are `G[α,β] = ⟨e_α, e_β⟩ = (∂^β e_α)(p)`.

mod descriptor;
mod gram;
mod kappa;

pub use descriptor::{
    Atom, CompositeRule, FockExponent, GaussianMixture, SeriesFamily, SeriesTerm, SpaceDescriptor,
};
pub use gram::{dual_jet, jet_gram, DualJet, GramMatrix, RankInfo};
pub use kappa::{
    assumption35_check, infinite_dimensionality, kappa_injectivity, kappa_injectivity_with,
    infinite_dimensionality_with, structural_injectivity, Assumption35, Dimensionality,
    Injectivity, RANK_TOL,
};
