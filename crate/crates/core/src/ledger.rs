//! Bookkeeping for the semi-orthogonal decomposition attached to a Kirwan
//! tower: one head component for the endomorphism algebra of the bundle
//! and `c - 1` copies of a block category per center.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};

use crate::bundle::{center_block_count, generator_codim1_audit, tweak_bundle, TwistedBundle};
use crate::lattice::Class;
use crate::stacky::{k0_rank, StackyFan};
use crate::tower::ResolutionLog;
use crate::{Error, Exec, Result};

/// A K0 rank that is either known or only described.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rank {
    Numeric(u64),
    Symbolic(String),
}

impl Rank {
    pub fn numeric(&self) -> Option<u64> {
        match self {
            Rank::Numeric(n) => Some(*n),
            Rank::Symbolic(_) => None,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Numeric(n) => write!(f, "{n}"),
            Rank::Symbolic(s) => f.write_str(s),
        }
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rank::Numeric(n) => s.serialize_u64(*n),
            Rank::Symbolic(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for Rank {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => {
                n.as_u64().map(Rank::Numeric).ok_or_else(|| serde::de::Error::custom("bad rank"))
            }
            serde_json::Value::String(s) => Ok(Rank::Symbolic(s)),
            _ => Err(serde::de::Error::custom("rank must be a number or a string")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub j: usize,
    pub i: usize,
    pub k: usize,
    pub block_count: usize,
    pub center: Vec<usize>,
    pub codim: usize,
    pub center_is_point: bool,
    pub h_free_rank: usize,
    pub h_invariant_factors: Vec<i64>,
    pub block_characters: Vec<(Class, u64)>,
    pub rank_per_block: Rank,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Head {
    pub characters: usize,
    pub catalog: String,
    pub conditional: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SODTree {
    pub head: Head,
    pub entries: Vec<LedgerEntry>,
    pub total_rank: Rank,
}

/// Builds the ledger. Labels are 1-based as `(j, i, k)` with
/// `k = 0..c-2`; the bundle at step `j` carries the tweaks of earlier steps.
pub fn sod_ledger(log: &ResolutionLog, u: &TwistedBundle, catalog_known: bool, exec: Exec) -> Result<SODTree> {
    if !log.final_is_dm {
        return Err(Error::HypothesisViolation("tower is not finished".into()));
    }
    let stage0 = &log.stages[0];
    if !generator_codim1_audit(stage0, u, exec)?.pass {
        return Err(Error::HypothesisViolation("bundle is not a generator in codimension one".into()));
    }
    if let crate::git::ExtNat::Finite(c) = stage0.unstable_codim(exec) {
        if c < 2 {
            return Err(Error::HypothesisViolation(format!("H2: unstable locus has codimension {c}")));
        }
    }
    let mut bundle = u.clone();
    let mut entries = Vec::new();
    for (s, step) in log.steps.iter().enumerate() {
        let stage = &log.stages[s];
        for (ci, center) in step.centers.iter().enumerate() {
            let rep = center_block_count(&bundle, stage, step.step, ci + 1, center)?;
            let rank_per_block = if center.center_is_point {
                Rank::Numeric(1)
            } else {
                Rank::Symbolic(format!("rk K0 of stratum {:?} modulo G/H", center.cone))
            };
            for k in 0..center.codim.saturating_sub(1) {
                entries.push(LedgerEntry {
                    j: step.step,
                    i: ci + 1,
                    k,
                    block_count: rep.distinct_blocks,
                    center: center.cone.clone(),
                    codim: center.codim,
                    center_is_point: center.center_is_point,
                    h_free_rank: center.stabilizer.group.free_rank,
                    h_invariant_factors: center.stabilizer.group.invariant_factors.clone(),
                    block_characters: rep.block_characters.clone(),
                    rank_per_block: rank_per_block.clone(),
                });
            }
        }
        bundle = tweak_bundle(&bundle, step.step, step.descent_period);
    }
    entries.sort_by_key(|e| (e.j, e.i, e.k));
    let head = Head {
        characters: u.distinct_characters(),
        catalog: if catalog_known { "known".into() } else { "unknown".into() },
        conditional: !catalog_known,
    };
    let mut tree = SODTree { head, entries, total_rank: Rank::Numeric(0) };
    tree.total_rank = k0_accounting(&tree);
    Ok(tree)
}

/// Head rank plus blocks times rank per block; symbolic if any part is.
pub fn k0_accounting(tree: &SODTree) -> Rank {
    let mut total = tree.head.characters as u64;
    let mut symbolic = Vec::new();
    for e in &tree.entries {
        match &e.rank_per_block {
            Rank::Numeric(n) => total += e.block_count as u64 * n,
            Rank::Symbolic(s) => symbolic.push(format!("{} x {}", e.block_count, s)),
        }
    }
    if symbolic.is_empty() {
        Rank::Numeric(total)
    } else {
        Rank::Symbolic(format!("{total} + {}", symbolic.join(" + ")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub pass: bool,
    pub ledger_rank: u64,
    pub fan_rank: u64,
}

/// Compares the ledger's rank with the box count of the final stacky fan.
pub fn cross_validate(tree: &SODTree, fan: &StackyFan) -> Result<CrossValidation> {
    let ledger_rank = k0_accounting(tree).numeric().ok_or(Error::SymbolicRank)?;
    let fan_rank = k0_rank(fan)?;
    Ok(CrossValidation { pass: ledger_rank == fan_rank, ledger_rank, fan_rank })
}

/// Graphviz rendering of the ledger as an ordered chain.
pub fn to_dot(tree: &SODTree) -> String {
    let mut out = String::from("digraph sod {\n  rankdir=LR;\n");
    let _ = writeln!(out, "  head [label=\"D(Lambda)\\n{} characters\"];", tree.head.characters);
    let mut prev = "head".to_string();
    for e in &tree.entries {
        let id = format!("e{}_{}_{}", e.j, e.i, e.k);
        let _ = writeln!(out, "  {id} [label=\"({},{},{})\\n{} blocks\"];", e.j, e.i, e.k, e.block_count);
        let _ = writeln!(out, "  {prev} -> {id};");
        prev = id;
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::DiagonalizableAction;
    use crate::stacky::quotient_stacky_fan;
    use crate::tower::kirwan_resolve;

    #[test]
    fn conifold_ledger() {
        let a = DiagonalizableAction::gm(&[-1, -1, 1, 1], &[0, 1]);
        let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
        let u = TwistedBundle::from_characters(&a.bundle);
        let tree = sod_ledger(&log, &u, true, Exec::Sequential).unwrap();
        assert_eq!(tree.head.characters, 2);
        assert_eq!(tree.entries.len(), 3);
        assert!(tree.entries.iter().all(|e| e.block_count == 2));
        assert_eq!(tree.total_rank, Rank::Numeric(8));
        let fan = quotient_stacky_fan(log.final_stage(), Exec::Sequential);
        let cv = cross_validate(&tree, &fan).unwrap();
        assert!(cv.pass);
        assert_eq!(cv.fan_rank, 8);
        assert!(to_dot(&tree).contains("e1_1_2"));
    }

    #[test]
    fn trivial_group_ledger() {
        let a = DiagonalizableAction::new(0, vec![], vec![vec![]; 2], vec![vec![]]).unwrap();
        let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
        let tree = sod_ledger(&log, &TwistedBundle::from_characters(&a.bundle), false, Exec::Sequential).unwrap();
        assert!(tree.entries.is_empty());
        assert_eq!(tree.total_rank, Rank::Numeric(1));
        assert!(tree.head.conditional);
        let fan = quotient_stacky_fan(log.final_stage(), Exec::Sequential);
        assert!(cross_validate(&tree, &fan).unwrap().pass);
    }

    #[test]
    fn h2_violation() {
        let a = DiagonalizableAction::gm(&[-1, 1], &[0]);
        let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
        let err = sod_ledger(&log, &TwistedBundle::from_characters(&a.bundle), false, Exec::Sequential).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolation(ref m) if m.starts_with("H2")));
    }

    #[test]
    fn symbolic_rank() {
        let a = DiagonalizableAction::gm(&[0, 1, -1], &[0]);
        let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
        let tree = sod_ledger(&log, &TwistedBundle::from_characters(&a.bundle), false, Exec::Sequential);
        // H2 fails here (the axes x2 = 0, x3 = 0 are unstable divisors)
        assert!(tree.is_err());
        let t = SODTree {
            head: Head { characters: 1, catalog: "unknown".into(), conditional: true },
            entries: vec![],
            total_rank: Rank::Symbolic("x".into()),
        };
        assert_eq!(k0_accounting(&t), Rank::Numeric(1));
        assert_eq!(serde_json::to_string(&Rank::Symbolic("a".into())).unwrap(), "\"a\"");
    }
}
