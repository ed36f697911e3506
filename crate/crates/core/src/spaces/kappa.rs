use serde::{Deserialize, Serialize};

use super::descriptor::{SeriesFamily, SpaceDescriptor};
use super::gram::{jet_gram, GramMatrix};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

/// Relative eigenvalue threshold for numerical Gram rank.
pub const RANK_TOL: f64 = 1e-10;

/// Verdict on injectivity of `κ_p^m` for all `m ≤ n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Injectivity {
    /// `structural` names the argument when no rank computation was needed.
    Injective {
        structural: Option<String>,
        rank: Option<usize>,
    },
    NotInjective {
        rank: usize,
        expected: usize,
        kernel_vector: Vec<Cx<f64>>,
    },
    Unknown { reason: String },
}

impl Injectivity {
    pub fn is_injective(&self) -> bool {
        matches!(self, Injectivity::Injective { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption35 {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Dimensionality {
    /// The graded quotient was still nonzero at the probe depth; a
    /// heuristic, not a proof.
    InfiniteDimensional {
        ranks: Vec<usize>,
        nonzero_grades: Vec<u32>,
    },
    FiniteDimensional {
        dim: usize,
        ranks: Vec<usize>,
        nonzero_grades: Vec<u32>,
    },
}

impl Dimensionality {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Dimensionality::InfiniteDimensional { .. })
    }

    pub fn ranks(&self) -> &[usize] {
        match self {
            Dimensionality::InfiniteDimensional { ranks, .. }
            | Dimensionality::FiniteDimensional { ranks, .. } => ranks,
        }
    }
}

/// Whether the coefficient support of a power-series kernel satisfies the
/// density assumption (read as: infinitely many nonzero coefficients, and
/// the fibre condition over every nonempty proper subset of coordinates).
pub fn assumption35_check(space: &SpaceDescriptor) -> Result<Assumption35> {
    match space {
        SpaceDescriptor::PowerSeries { series, .. } => Ok(match series {
            SeriesFamily::Exponential => Assumption35::Holds,
            SeriesFamily::Composite { rule } => {
                if rule.is_transcendental() {
                    Assumption35::Holds
                } else {
                    Assumption35::Fails
                }
            }
            SeriesFamily::Explicit { complete, .. } => {
                if *complete {
                    Assumption35::Fails
                } else {
                    Assumption35::Unknown
                }
            }
        }),
        _ => Err(Error::NotPowerSeries),
    }
}

/// The structural argument guaranteeing injective dual jets at `p`, if any.
pub fn structural_injectivity<T: Real>(space: &SpaceDescriptor, p: &[Cx<T>]) -> Option<String> {
    match space {
        SpaceDescriptor::Fock { .. } => Some("fock: dual jets are polynomial multiples of a nowhere-vanishing kernel section".into()),
        SpaceDescriptor::ShiftInvariant { measure, .. } => {
            if measure.has_absolutely_continuous_part() {
                Some("shift_invariant: measure has a nondegenerate Gaussian component, so polynomials embed in L²(μ)".into())
            } else {
                None
            }
        }
        SpaceDescriptor::PowerSeries { .. } => {
            let nonzero = p.iter().any(|z| z.norm() > T::zero());
            let holds = assumption35_check(space).ok() == Some(Assumption35::Holds);
            if holds && nonzero {
                Some("power_series: coefficient support satisfies the density assumption and p ≠ 0".into())
            } else {
                None
            }
        }
    }
}

pub fn kappa_injectivity<T: Real>(space: &SpaceDescriptor, p: &[Cx<T>], n: u32) -> Result<Injectivity> {
    kappa_injectivity_with(space, p, n, RANK_TOL)
}

/// Injectivity of `κ_p^m` for every `m ≤ n`: structural when a known
/// argument applies, otherwise full numerical rank of the order-`n` Gram.
pub fn kappa_injectivity_with<T: Real>(
    space: &SpaceDescriptor,
    p: &[Cx<T>],
    n: u32,
    rank_tol: f64,
) -> Result<Injectivity> {
    space.check_domain(p)?;
    if let Some(reason) = structural_injectivity(space, p) {
        return Ok(Injectivity::Injective {
            structural: Some(reason),
            rank: None,
        });
    }
    if !space.is_hilbert() {
        return Ok(Injectivity::Unknown {
            reason: "no Gram matrix for a non-Hilbert descriptor".into(),
        });
    }
    let gram = match jet_gram(space, p, n) {
        Ok(g) => g,
        Err(Error::Numerical(msg)) => return Ok(Injectivity::Unknown { reason: msg }),
        Err(e) => return Err(e),
    };
    numerical_verdict(&gram, rank_tol)
}

fn numerical_verdict<T: Real>(gram: &GramMatrix<T>, rank_tol: f64) -> Result<Injectivity> {
    let info = gram.rank(T::tol(rank_tol))?;
    let expected = gram.size();
    if info.rank == expected {
        Ok(Injectivity::Injective {
            structural: None,
            rank: Some(info.rank),
        })
    } else {
        Ok(Injectivity::NotInjective {
            rank: info.rank,
            expected,
            kernel_vector: info
                .kernel_vector
                .unwrap_or_default()
                .into_iter()
                .map(|z| Cx::new(z.re.f64(), z.im.f64()))
                .collect(),
        })
    }
}

/// Ranks of the dual-jet spans `ι′(𝒟_n)` for `n = 0..=depth`.
pub fn infinite_dimensionality<T: Real>(
    space: &SpaceDescriptor,
    p: &[Cx<T>],
    depth: u32,
) -> Result<Dimensionality> {
    infinite_dimensionality_with(space, p, depth, RANK_TOL)
}

pub fn infinite_dimensionality_with<T: Real>(
    space: &SpaceDescriptor,
    p: &[Cx<T>],
    depth: u32,
    rank_tol: f64,
) -> Result<Dimensionality> {
    if depth == 0 {
        return Err(Error::InvalidDescriptor("probe depth must be at least 1".into()));
    }
    let full = jet_gram(space, p, depth)?;
    let mut ranks = Vec::with_capacity(depth as usize + 1);
    for n in 0..=depth {
        let size = full.basis.grade(n).end;
        let sub = GramMatrix {
            basis: crate::jets::JetBasis::new(space.dim(), n)?,
            point: full.point.clone(),
            entries: full.entries.diagonal_block(0, size),
        };
        ranks.push(sub.rank(T::tol(rank_tol))?.rank);
    }
    let nonzero_grades: Vec<u32> = (0..=depth)
        .filter(|&n| if n == 0 { ranks[0] > 0 } else { ranks[n as usize] > ranks[n as usize - 1] })
        .collect();
    let last = depth as usize;
    Ok(if ranks[last] > ranks[last - 1] {
        Dimensionality::InfiniteDimensional {
            ranks,
            nonzero_grades,
        }
    } else {
        Dimensionality::FiniteDimensional {
            dim: ranks[last],
            ranks,
            nonzero_grades,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::spaces::GaussianMixture;

    fn one_plus_z() -> SpaceDescriptor {
        SpaceDescriptor::explicit(1, &[(&[0], 1.0), (&[1], 1.0)], true).unwrap()
    }

    #[test]
    fn fock_is_structurally_injective() {
        let s = SpaceDescriptor::fock(2, 1.0).unwrap();
        let v = kappa_injectivity::<f64>(&s, &[cx(0.0, 0.0), cx(3.0, 1.0)], 5).unwrap();
        assert!(matches!(v, Injectivity::Injective { structural: Some(_), .. }));
    }

    #[test]
    fn finite_series_not_injective() {
        let v = kappa_injectivity::<f64>(&one_plus_z(), &[cx(0.5, 0.0)], 2).unwrap();
        match v {
            Injectivity::NotInjective { rank, expected, .. } => {
                assert_eq!((rank, expected), (2, 3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_atom_has_rank_one() {
        let s = SpaceDescriptor::shift_invariant(1, GaussianMixture::single_atom(vec![1.0]), None).unwrap();
        let v = kappa_injectivity::<f64>(&s, &[cx(0.0, 0.0)], 1).unwrap();
        assert!(matches!(v, Injectivity::NotInjective { rank: 1, .. }));
    }

    #[test]
    fn assumption_verdicts() {
        assert_eq!(assumption35_check(&SpaceDescriptor::exponential(3).unwrap()), Ok(Assumption35::Holds));
        assert_eq!(assumption35_check(&one_plus_z()), Ok(Assumption35::Fails));
        let open = SpaceDescriptor::explicit(1, &[(&[0], 1.0), (&[1], 1.0)], false).unwrap();
        assert_eq!(assumption35_check(&open), Ok(Assumption35::Unknown));
        assert_eq!(
            assumption35_check(&SpaceDescriptor::fock(1, 1.0).unwrap()),
            Err(Error::NotPowerSeries)
        );
    }

    #[test]
    fn dimension_probe() {
        let fock = SpaceDescriptor::fock(1, 1.0).unwrap();
        let d = infinite_dimensionality::<f64>(&fock, &[cx(0.0, 0.0)], 10).unwrap();
        assert!(d.is_infinite());
        assert_eq!(d.ranks(), (1..=11).collect::<Vec<_>>().as_slice());

        let d = infinite_dimensionality::<f64>(&one_plus_z(), &[cx(0.5, 0.0)], 10).unwrap();
        match d {
            Dimensionality::FiniteDimensional { dim, ranks, .. } => {
                assert_eq!(dim, 2);
                assert_eq!(&ranks[..4], &[1, 2, 2, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_coefficients_rejected() {
        assert!(SpaceDescriptor::explicit(1, &[(&[0], 1.0), (&[1], -1.0)], true).is_err());
        let json = r#"{"family":"power_series","dim":1,"series":{"kind":"explicit","terms":[{"alpha":[0],"c":-2.0}],"complete":true}}"#;
        assert!(serde_json::from_str::<SpaceDescriptor>(json).is_err());
    }
}
