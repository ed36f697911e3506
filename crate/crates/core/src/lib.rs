//! Certificates that a composition operator `C_f h = h ∘ f` cannot be
//! bounded on a reproducing-kernel space of holomorphic functions.
//!
//! The obstruction: a periodic point of `f` with an expanding multiplier,
//! at which the space's dual jets are linearly independent, forces
//! `C_f` to be unbounded. The modules build up to that check:
//!
//! - [`algebra`]: polynomials, polynomial maps, dense complex matrices, roots.
//! - [`jets`]: the pushforward of a fixed-point map on jet space.
//! - [`spaces`]: space descriptors, dual-jet Gram matrices, injectivity.
//! - [`dynamics`]: periodic orbits in one variable, plane automorphism words,
//!   their reduction to Hénon form and saddle search.
//! - [`certify`]: the certificate pipelines.
//!
//! The numerical core is generic over [`scalar::Real`]; the aliases below
//! fix the reference precision `f64`. Certificates are `f64` only.

pub mod algebra;
pub mod certify;
pub mod dynamics;
pub mod error;
pub mod jets;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};

pub use certify::{Certificate, CertifyOptions, Condition2, Pipeline, ProbeSource, Tolerances, Verdict};
pub use spaces::SpaceDescriptor;

/// Complex scalar at the reference precision.
pub type C64 = scalar::Cx<f64>;
pub type Poly = algebra::MultiPoly<f64>;
pub type Map = algebra::PolyMap<f64>;
pub type Matrix = algebra::CxMatrix<f64>;
pub type Orbit = dynamics::PeriodicOrbit<f64>;
pub type Word = dynamics::AutWord<f64>;
pub type Henon = dynamics::HenonLetter<f64>;
pub type AutLetter = dynamics::Letter<f64>;
pub type Reduced = dynamics::ReducedForm<f64>;
pub type Gram = spaces::GramMatrix<f64>;
pub type Pushforward = jets::PushforwardMatrix<f64>;

/// Single-precision variants, for quick exploratory runs.
pub type C32 = scalar::Cx<f32>;
pub type Poly32 = algebra::MultiPoly<f32>;
pub type Map32 = algebra::PolyMap<f32>;
pub type Matrix32 = algebra::CxMatrix<f32>;
