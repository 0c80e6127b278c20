//! Stability stratification of an affine representation by coordinate
//! supports.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::action::{stabilizer, DiagonalizableAction};
use crate::polyhedral::{cone_is_linear_subspace, exists_strictly_positive_functional};
use crate::{Error, Exec, Result};

pub const DEFAULT_BOUND: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportStratum {
    pub support: Vec<usize>,
    pub stabilizer_dim: usize,
    pub stabilizer_torsion: Vec<i64>,
    pub orbit_closed: bool,
    pub stable: bool,
    pub in_nullcone_closure: bool,
}

impl SupportStratum {
    pub fn codim(&self, d: usize) -> usize {
        d - self.support.len()
    }
}

/// A natural number or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtNat {
    Finite(usize),
    Infinite,
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Finite(n) => write!(f, "{n}"),
            ExtNat::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtNat::Finite(n) => s.serialize_u64(*n as u64),
            ExtNat::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "inf" => Ok(ExtNat::Infinite),
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|n| ExtNat::Finite(n as usize))
                .ok_or_else(|| serde::de::Error::custom("expected a natural number")),
            _ => Err(serde::de::Error::custom("expected a natural number or \"inf\"")),
        }
    }
}

pub fn orbit_closed(action: &DiagonalizableAction, support: &[usize]) -> bool {
    let gens: Vec<Vec<i64>> = support.iter().map(|&i| action.torus_part(i)).collect();
    cone_is_linear_subspace(&gens)
}

/// Whether points with this support have the origin in their orbit closure.
pub fn in_nullcone(action: &DiagonalizableAction, support: &[usize]) -> bool {
    let gens: Vec<Vec<i64>> = support.iter().map(|&i| action.torus_part(i)).collect();
    exists_strictly_positive_functional(action.torus_rank, &gens).is_some()
}

pub fn support_stratum(action: &DiagonalizableAction, support: Vec<usize>) -> SupportStratum {
    let stab = stabilizer(action, &support);
    let closed = orbit_closed(action, &support);
    let null = in_nullcone(action, &support);
    SupportStratum {
        stable: closed && stab.dim == 0,
        stabilizer_dim: stab.dim,
        stabilizer_torsion: stab.group.invariant_factors,
        orbit_closed: closed,
        in_nullcone_closure: null,
        support,
    }
}

fn support_of(mask: u64, d: usize) -> Vec<usize> {
    (0..d).filter(|i| mask >> i & 1 == 1).collect()
}

/// All `2^d` support strata, ordered by the bitmask of the support.
pub fn stratify(action: &DiagonalizableAction, exec: Exec) -> Result<Vec<SupportStratum>> {
    stratify_bounded(action, DEFAULT_BOUND, exec)
}

pub fn stratify_bounded(action: &DiagonalizableAction, bound: usize, exec: Exec) -> Result<Vec<SupportStratum>> {
    let d = action.dim();
    if d > bound {
        return Err(Error::TooLarge { d, bound });
    }
    Ok(exec.map_range(1usize << d, |mask| support_stratum(action, support_of(mask as u64, d))))
}

/// Codimension of the unstable locus, from precomputed strata.
pub fn unstable_codim_of(strata: &[SupportStratum], d: usize) -> ExtNat {
    strata
        .iter()
        .filter(|s| !s.stable)
        .map(|s| s.codim(d))
        .min()
        .map_or(ExtNat::Infinite, ExtNat::Finite)
}

pub fn unstable_codim(action: &DiagonalizableAction, exec: Exec) -> Result<ExtNat> {
    Ok(unstable_codim_of(&stratify(action, exec)?, action.dim()))
}

/// Hypothesis (Hi): the unstable locus has codimension at least `i`.
pub fn check_hi(action: &DiagonalizableAction, i: usize, exec: Exec) -> Result<bool> {
    Ok(unstable_codim(action, exec)? >= ExtNat::Finite(i))
}

pub fn is_generic_of(strata: &[SupportStratum], d: usize) -> bool {
    strata
        .iter()
        .filter(|s| s.codim(d) <= 1)
        .all(|s| s.stable && s.stabilizer_torsion.is_empty())
}

/// Every stratum of codimension at most one is stable with trivial stabilizer.
pub fn is_generic(action: &DiagonalizableAction, exec: Exec) -> Result<bool> {
    Ok(is_generic_of(&stratify(action, exec)?, action.dim()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GitSummary {
    pub unstable_codim: ExtNat,
    pub h1: bool,
    pub h2: bool,
    pub generic: bool,
    pub faithful: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GitReport {
    pub strata: Vec<SupportStratum>,
    pub summary: GitSummary,
}

pub fn analyze(action: &DiagonalizableAction, exec: Exec) -> Result<GitReport> {
    let strata = stratify(action, exec)?;
    let d = action.dim();
    let codim = unstable_codim_of(&strata, d);
    let summary = GitSummary {
        unstable_codim: codim,
        h1: codim >= ExtNat::Finite(1),
        h2: codim >= ExtNat::Finite(2),
        generic: is_generic_of(&strata, d),
        faithful: action.is_faithful(),
    };
    Ok(GitReport { strata, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conifold() -> DiagonalizableAction {
        DiagonalizableAction::gm(&[-1, -1, 1, 1], &[0, 1])
    }

    #[test]
    fn orbit_closedness() {
        let c = conifold();
        assert!(orbit_closed(&c, &[0, 2]));
        assert!(!orbit_closed(&c, &[2, 3]));
        assert!(orbit_closed(&c, &[]));
    }

    #[test]
    fn conifold_stable_supports() {
        let c = conifold();
        let strata = stratify(&c, Exec::Sequential).unwrap();
        assert_eq!(strata.len(), 16);
        for s in &strata {
            let meets = |a: usize, b: usize| s.support.contains(&a) || s.support.contains(&b);
            assert_eq!(s.stable, meets(0, 1) && meets(2, 3), "{:?}", s.support);
        }
        assert_eq!(unstable_codim_of(&strata, 4), ExtNat::Finite(2));
        assert!(is_generic_of(&strata, 4));
    }

    #[test]
    fn trivial_group_everything_stable() {
        let a = DiagonalizableAction::new(0, vec![], vec![vec![]; 3], vec![vec![]]).unwrap();
        let strata = stratify(&a, Exec::Sequential).unwrap();
        assert!(strata.iter().all(|s| s.stable));
        assert_eq!(unstable_codim(&a, Exec::Sequential).unwrap(), ExtNat::Infinite);
        assert!(is_generic(&a, Exec::Sequential).unwrap());
    }

    #[test]
    fn small_cases() {
        let a = DiagonalizableAction::gm(&[-1, 1], &[0]);
        assert_eq!(unstable_codim(&a, Exec::Sequential).unwrap(), ExtNat::Finite(1));
        assert!(!check_hi(&a, 2, Exec::Sequential).unwrap());

        let b = DiagonalizableAction::gm(&[-2, 2], &[0]);
        assert!(!is_generic(&b, Exec::Sequential).unwrap());

        let w = DiagonalizableAction::gm(&[-2, -1, 1, 2], &[0]);
        let s = support_stratum(&w, vec![0, 3]);
        assert!(s.orbit_closed && s.stable);
        assert_eq!(s.stabilizer_torsion, vec![2]);
        let u = support_stratum(&w, vec![2, 3]);
        assert!(!u.stable && u.in_nullcone_closure);
    }

    #[test]
    fn too_large() {
        let a = DiagonalizableAction::gm(&[1; 5], &[0]);
        assert_eq!(stratify_bounded(&a, 4, Exec::Sequential).unwrap_err(), Error::TooLarge { d: 5, bound: 4 });
    }

    #[test]
    fn extnat_json() {
        assert_eq!(serde_json::to_string(&ExtNat::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<ExtNat>("3").unwrap(), ExtNat::Finite(3));
    }
}
