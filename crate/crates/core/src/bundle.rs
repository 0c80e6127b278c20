//! Equivariant bundles as multisets of characters with exceptional twists,
//! and the abelian forms of the full / saturated / generator conditions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::action::StabilizerDesc;
use crate::lattice::Class;
use crate::tower::{AmbientStage, CenterDesc};
use crate::{Error, Exec, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Summand {
    pub character: Vec<i64>,
    /// Step index -> power of that step's exceptional divisor.
    pub twists: BTreeMap<usize, i64>,
}

/// Summands with explicit twists, each further tensored with `O(k E_j)` for
/// every `k < n` and every `(j, n)` in `tweaks`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedBundle {
    pub summands: Vec<Summand>,
    #[serde(default)]
    pub tweaks: BTreeMap<usize, u64>,
}

impl TwistedBundle {
    pub fn from_characters(chars: &[Vec<i64>]) -> Self {
        TwistedBundle {
            summands: chars.iter().map(|c| Summand { character: c.clone(), twists: BTreeMap::new() }).collect(),
            tweaks: BTreeMap::new(),
        }
    }

    /// Total number of line bundle summands.
    pub fn len(&self) -> u64 {
        self.tweaks.values().fold(self.summands.len() as u64, |acc, n| acc.saturating_mul(*n))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every summand listed explicitly. Only sensible for small bundles.
    pub fn expand(&self) -> Vec<Summand> {
        let mut out = self.summands.clone();
        for (&j, &n) in &self.tweaks {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..n as i64).map(move |k| {
                        let mut t = s.clone();
                        *t.twists.entry(j).or_default() += k;
                        t
                    })
                })
                .collect();
        }
        out
    }

    pub fn union(&self, other: &TwistedBundle) -> TwistedBundle {
        if self.tweaks == other.tweaks {
            let mut summands = self.summands.clone();
            summands.extend(other.summands.iter().cloned());
            return TwistedBundle { summands, tweaks: self.tweaks.clone() };
        }
        let mut summands = self.expand();
        summands.extend(other.expand());
        TwistedBundle { summands, tweaks: BTreeMap::new() }
    }

    /// Number of distinct untwisted characters.
    pub fn distinct_characters(&self) -> usize {
        self.summands.iter().map(|s| &s.character).collect::<BTreeSet<_>>().len()
    }

    /// Multiplicity of each class among the summands at the stratum of `cone`.
    pub fn class_counts_at(
        &self,
        stage: &AmbientStage,
        cone: &[usize],
        stab: &StabilizerDesc,
    ) -> Result<BTreeMap<Class, u64>> {
        let mut twist_cache: BTreeMap<usize, Class> = BTreeMap::new();
        let mut twist = |step: usize| -> Result<Class> {
            if let Some(t) = twist_cache.get(&step) {
                return Ok(t.clone());
            }
            let t = stage.step_twist_class(step, cone, stab)?;
            twist_cache.insert(step, t.clone());
            Ok(t)
        };
        let g = &stab.group;
        let mut counts: BTreeMap<Class, u64> = BTreeMap::new();
        for s in &self.summands {
            let mut c = stab.restrict(&s.character);
            for (&step, &k) in &s.twists {
                if k != 0 {
                    c = g.add(&c, &g.scale(&twist(step)?, k));
                }
            }
            *counts.entry(c).or_default() += 1;
        }
        for (&step, &n) in &self.tweaks {
            let t = twist(step)?;
            // k t for k < n cycles with the order of t
            let period = g.element_order(&t).map_or(n, |o| o.min(n));
            let (q, rem) = (n / period, n % period);
            let mut next: BTreeMap<Class, u64> = BTreeMap::new();
            for (c, m) in &counts {
                let mut x = c.clone();
                for k in 0..period {
                    *next.entry(x.clone()).or_default() += m * (q + u64::from(k < rem));
                    x = g.add(&x, &t);
                }
            }
            counts = next;
        }
        Ok(counts)
    }
}

/// `N` copies of every summand, twisted by `0..N` times the exceptional
/// divisor of step `j`.
pub fn tweak_bundle(u: &TwistedBundle, j: usize, n: u64) -> TwistedBundle {
    let mut out = if u.tweaks.contains_key(&j) {
        TwistedBundle { summands: u.expand(), tweaks: BTreeMap::new() }
    } else {
        u.clone()
    };
    out.tweaks.insert(j, n);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterBlockReport {
    pub step: usize,
    pub center: usize,
    pub distinct_blocks: usize,
    /// Distinct classes with their multiplicities, in lexicographic order.
    pub block_characters: Vec<(Class, u64)>,
}

pub fn block_table(classes: &[Class]) -> Vec<(Class, u64)> {
    let mut m: BTreeMap<Class, u64> = BTreeMap::new();
    for c in classes {
        *m.entry(c.clone()).or_default() += 1;
    }
    m.into_iter().collect()
}

/// Restricts the bundle to the generic stabilizer of a center; `stage` is
/// the stage on which the center lives.
pub fn center_block_count(
    u: &TwistedBundle,
    stage: &AmbientStage,
    step: usize,
    index: usize,
    center: &CenterDesc,
) -> Result<CenterBlockReport> {
    let table: Vec<(Class, u64)> = u.class_counts_at(stage, &center.cone, &center.stabilizer)?.into_iter().collect();
    Ok(CenterBlockReport { step, center: index, distinct_blocks: table.len(), block_characters: table })
}

/// Every element of the finite group is hit.
pub fn is_full_classes(classes: &[Class], stab: &StabilizerDesc) -> Result<bool> {
    if stab.dim > 0 {
        return Err(Error::InfiniteStabilizer(stab.dim));
    }
    let hit: BTreeSet<&Class> = classes.iter().collect();
    let order = stab.group.order().expect("finite group") as usize;
    Ok(hit.len() == order)
}

pub fn is_full(chars: &[Vec<i64>], stab: &StabilizerDesc) -> Result<bool> {
    let classes: Vec<Class> = chars.iter().map(|c| stab.restrict(c)).collect();
    is_full_classes(&classes, stab)
}

/// The set of classes in `X(G_x)` is a union of fibres of the restriction
/// to `H`, whose character group is `X(G) / (relations of G_x + extra)`.
pub fn is_saturated(classes: &[Class], gx: &StabilizerDesc, h_extra_relations: &[Vec<i64>]) -> bool {
    let set: BTreeSet<Class> = classes.iter().cloned().collect();
    let gens: Vec<Class> = h_extra_relations.iter().map(|r| gx.restrict(r)).collect();
    set.iter().all(|c| gens.iter().all(|k| set.contains(&gx.group.add(c, k))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumVerdict {
    pub cone: Vec<usize>,
    pub support: Option<Vec<usize>>,
    pub stabilizer_torsion: Vec<i64>,
    pub classes: Vec<Class>,
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub pass: bool,
    pub generic: bool,
    pub checked: Vec<StratumVerdict>,
    pub witnesses: Vec<StratumVerdict>,
}

fn support_of(stage: &AmbientStage, cone: &[usize]) -> Option<Vec<usize>> {
    (stage.step_index == 0).then(|| (0..stage.d()).filter(|i| !cone.contains(i)).collect())
}

/// Whether every stratum of codimension at most one is stable with trivial
/// stabilizer.
pub fn stage_is_generic(stage: &AmbientStage, exec: Exec) -> bool {
    let low: Vec<Vec<usize>> = stage.kept_cones().into_iter().filter(|c| c.len() <= 1).collect();
    exec.map(&low, |c| stage.is_stable(c) && stage.stratum_stabilizer(c).group.is_trivial())
        .into_iter()
        .all(|x| x)
}

fn verdict(stage: &AmbientStage, u: &TwistedBundle, cone: &[usize]) -> Result<StratumVerdict> {
    let stab = stage.stratum_stabilizer(cone);
    let distinct: Vec<Class> = u.class_counts_at(stage, cone, &stab)?.into_keys().collect();
    let full = is_full_classes(&distinct, &stab)?;
    Ok(StratumVerdict {
        cone: cone.to_vec(),
        support: support_of(stage, cone),
        stabilizer_torsion: stab.group.invariant_factors.clone(),
        classes: distinct,
        full,
    })
}

/// Generator-in-codimension-one audit: automatic for generic stages,
/// otherwise fullness at every codimension <= 1 stable stratum.
pub fn generator_codim1_audit(stage: &AmbientStage, u: &TwistedBundle, exec: Exec) -> Result<AuditReport> {
    let generic = stage_is_generic(stage, exec);
    let low: Vec<Vec<usize>> = stage
        .kept_cones()
        .into_iter()
        .filter(|c| c.len() <= 1 && stage.is_stable(c))
        .collect();
    let checked: Vec<StratumVerdict> =
        exec.map(&low, |c| verdict(stage, u, c)).into_iter().collect::<Result<_>>()?;
    let witnesses: Vec<StratumVerdict> = checked.iter().filter(|v| !v.full).cloned().collect();
    Ok(AuditReport { pass: !u.is_empty() && (generic || witnesses.is_empty()), generic, checked, witnesses })
}

/// Fullness at every kept stratum with finite stabilizer.
pub fn fullness_report(stage: &AmbientStage, u: &TwistedBundle, exec: Exec) -> Result<Vec<StratumVerdict>> {
    let finite: Vec<Vec<usize>> =
        stage.kept_cones().into_iter().filter(|c| stage.stratum_stabilizer_dim(c) == 0).collect();
    exec.map(&finite, |c| verdict(stage, u, c)).into_iter().collect()
}
