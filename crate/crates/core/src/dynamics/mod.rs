//! Periodic orbits of polynomial maps: exhaustive search in dimension one,
//! automorphism words and saddle search in dimension two.

mod orbits1d;
mod reduce;
mod saddle;
mod word;

use serde::{Deserialize, Serialize};

use crate::scalar::{Cx, Real};

pub use orbits1d::{
    iterate_fixed_points, periodic_points_1d, periodic_points_1d_with, MAX_PERIOD_1D, MAX_ROOT_COUNT, RECURRENCE_TOL,
};
pub use reduce::{reduce_word, Core, ReducedForm, RELATION_TOL};
pub use saddle::{saddle_search_2d, PeriodLog, SaddleSearch, SearchParams, MAX_PERIOD_2D};
pub use word::{word_to_polymap, AutWord, HenonLetter, Letter};

/// Thresholds for stability classes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityBands {
    /// `|λ|` below this is superattracting.
    pub superattracting: f64,
    /// Half-width of the indifferent band around `|λ| = 1`.
    pub indifferent: f64,
}

impl Default for StabilityBands {
    fn default() -> Self {
        StabilityBands {
            superattracting: 1e-9,
            indifferent: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Superattracting,
    Attracting,
    Indifferent,
    Repelling,
    Saddle,
}

impl Stability {
    pub fn classify<T: Real>(multipliers: &[Cx<T>], bands: &StabilityBands) -> Stability {
        let hi = T::one() + T::c(bands.indifferent);
        let lo = T::one() - T::c(bands.indifferent);
        let mods: Vec<T> = multipliers.iter().map(|z| z.norm()).collect();
        let expanding = mods.iter().filter(|&&m| m > hi).count();
        if expanding == mods.len() && !mods.is_empty() {
            Stability::Repelling
        } else if expanding > 0 {
            Stability::Saddle
        } else if mods.iter().all(|&m| m < lo) {
            if mods.iter().all(|&m| m < T::c(bands.superattracting)) {
                Stability::Superattracting
            } else {
                Stability::Attracting
            }
        } else {
            Stability::Indifferent
        }
    }

    /// Some multiplier lies strictly outside the closed unit disk band.
    pub fn has_expanding_direction(self) -> bool {
        matches!(self, Stability::Repelling | Stability::Saddle)
    }
}

/// A periodic orbit with the spectrum of `df^r` at its first point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PeriodicOrbit<T: Real> {
    pub points: Vec<Vec<Cx<T>>>,
    pub period: usize,
    pub multipliers: Vec<Cx<T>>,
    pub class: Stability,
    /// `max_i ‖f(points[i]) − points[i+1 mod r]‖`.
    pub residual: T,
}

impl<T: Real> PeriodicOrbit<T> {
    pub fn max_multiplier_modulus(&self) -> T {
        self.multipliers
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    pub fn base_point(&self) -> &[Cx<T>] {
        &self.points[0]
    }
}
