//! Exact combinatorics of torus actions on affine space: GIT strata,
//! Reichstein towers ending in a Kirwan partial resolution, stacky quotient
//! fans, and bookkeeping for the resulting semi-orthogonal decompositions.
//!
//! All arithmetic is exact. Heavy enumerations run on rayon when the
//! `parallel` feature is enabled (the default) and fall back to plain
//! iteration otherwise; [`Exec`] selects between the two at run time.

pub mod action;
pub mod bundle;
pub mod corpus;
pub mod covariants;
pub mod exec;
pub mod git;
pub mod lattice;
pub mod ledger;
pub mod polyhedral;
pub mod stacky;
pub mod tower;

pub use exec::Exec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ray {ray:?} is not in the relative interior of cone {cone:?}")]
    RayNotInterior { ray: Vec<i64>, cone: Vec<usize> },
    #[error("dimension {d} exceeds enumeration bound {bound}")]
    TooLarge { d: usize, bound: usize },
    #[error("orbit of support {0:?} is not closed")]
    OrbitNotClosed(Vec<usize>),
    #[error("all stabilizers are already finite")]
    AlreadyDM,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("stabilizer has positive dimension {0}")]
    InfiniteStabilizer(usize),
    #[error("cone markings are dependent (stabilizer dimension {dim})")]
    DependentMarkings { dim: usize },
    #[error("fan is not Deligne-Mumford")]
    NotDM,
    #[error("rank is symbolic")]
    SymbolicRank,
    #[error("internal assertion failed: {0}")]
    Assertion(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
