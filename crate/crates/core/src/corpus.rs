//! Seeded generator of small test instances.
//!
//! Three families: rank-one actions whose weights come in pairs `±a`, with
//! the window bundle `{0, .., n-1}` where `n` is the sum of the positive
//! weights; random rank one and rank two torus actions; and rank-one actions
//! with an extra finite cyclic factor.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::DiagonalizableAction;
use crate::tower::AmbientStage;
use crate::Exec;

pub const DEFAULT_SEED: u64 = 0x6b69_7277;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub name: String,
    pub family: Family,
    pub action: DiagonalizableAction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SymmetricWindow,
    Random,
    FiniteFactor,
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusSizes {
    pub symmetric: usize,
    pub random: usize,
    pub finite: usize,
}

impl Default for CorpusSizes {
    fn default() -> Self {
        CorpusSizes { symmetric: 30, random: 24, finite: 8 }
    }
}

fn h1(action: &DiagonalizableAction) -> bool {
    AmbientStage::initial(action).has_stable_point(Exec::Sequential)
}

/// Weights `±a_i` for `a_i` in `1..=3`, so the action has no zero weights.
fn symmetric(rng: &mut ChaCha8Rng) -> DiagonalizableAction {
    let pairs = rng.gen_range(2..=3);
    let mut w = Vec::new();
    for _ in 0..pairs {
        let a = rng.gen_range(1..=3);
        w.push(a);
        w.push(-a);
    }
    w.shuffle(rng);
    let n: i64 = w.iter().filter(|&&a| a > 0).sum();
    let bundle: Vec<i64> = (0..n).collect();
    DiagonalizableAction::gm(&w, &bundle)
}

fn random_torus(rng: &mut ChaCha8Rng) -> DiagonalizableAction {
    let r = rng.gen_range(1..=2);
    let d = rng.gen_range(r + 1..=6);
    let weights: Vec<Vec<i64>> = (0..d).map(|_| (0..r).map(|_| rng.gen_range(-3..=3)).collect()).collect();
    let k = rng.gen_range(1..=3);
    let bundle: Vec<Vec<i64>> = (0..k).map(|_| (0..r).map(|_| rng.gen_range(-2..=2)).collect()).collect();
    DiagonalizableAction::torus(weights, bundle).expect("shapes agree")
}

fn finite_factor(rng: &mut ChaCha8Rng) -> DiagonalizableAction {
    let m = rng.gen_range(2..=3);
    let d = rng.gen_range(2..=5);
    let weights: Vec<Vec<i64>> = (0..d).map(|_| vec![rng.gen_range(-2..=2), rng.gen_range(0..m)]).collect();
    let k = rng.gen_range(1..=3);
    let bundle: Vec<Vec<i64>> = (0..k).map(|_| vec![rng.gen_range(-1..=1), rng.gen_range(0..m)]).collect();
    DiagonalizableAction::new(1, vec![m], weights, bundle).expect("shapes agree")
}

/// Draws until every family has its quota of instances satisfying (H1).
pub fn generate(seed: u64, sizes: CorpusSizes) -> Vec<CorpusInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let plan = [
        (Family::SymmetricWindow, sizes.symmetric, symmetric as fn(&mut ChaCha8Rng) -> DiagonalizableAction),
        (Family::Random, sizes.random, random_torus),
        (Family::FiniteFactor, sizes.finite, finite_factor),
    ];
    for (family, quota, draw) in plan {
        let mut got = 0;
        while got < quota {
            let a = draw(&mut rng);
            if !h1(&a) {
                continue;
            }
            out.push(CorpusInstance { name: format!("{family:?}-{got}").to_lowercase(), family, action: a });
            got += 1;
        }
    }
    out
}

pub fn default_corpus() -> Vec<CorpusInstance> {
    generate(DEFAULT_SEED, CorpusSizes::default())
}
