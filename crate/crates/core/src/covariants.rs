//! Graded dimensions of modules of covariants, a small catalog of known
//! noncommutative crepant resolutions, and the Z/4 slice scenario.
//!
//! Sign convention: the covariants `(chi ⊗ S)^G` are spanned by monomials
//! `x^m` of weight `-chi`, i.e. `sum m_i a_i + chi = 0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::{luna_slice_localized, stabilizer, DiagonalizableAction};
use crate::bundle::is_full;
use crate::lattice::{unimodular_transform, IntMatrix};
use crate::{Error, Exec, Result};

pub const DEFAULT_MAX_DEGREE: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedDims {
    pub dims: Vec<u64>,
}

fn is_zero_character(action: &DiagonalizableAction, c: &[i64]) -> bool {
    let r = action.torus_rank;
    c[..r].iter().all(|&x| x == 0)
        && action.finite_orders.iter().enumerate().all(|(k, &m)| c[r + k].rem_euclid(m) == 0)
}

/// Counts monomials of degree `n` and weight `-chi` for `n = 0..=bound`.
pub fn covariant_dims(action: &DiagonalizableAction, chi: &[i64], bound: usize, exec: Exec) -> Result<GradedDims> {
    covariant_dims_limited(action, chi, bound, DEFAULT_MAX_DEGREE, exec)
}

pub fn covariant_dims_limited(
    action: &DiagonalizableAction,
    chi: &[i64],
    bound: usize,
    max_degree: usize,
    exec: Exec,
) -> Result<GradedDims> {
    if bound > max_degree {
        return Err(Error::TooLarge { d: bound, bound: max_degree });
    }
    if chi.len() != action.char_len() {
        return Err(Error::InvalidInput(format!("character {chi:?} has the wrong length")));
    }
    let dims = exec.map_range(bound + 1, |n| count_degree(action, chi, n));
    Ok(GradedDims { dims })
}

fn count_degree(action: &DiagonalizableAction, chi: &[i64], n: usize) -> u64 {
    let d = action.dim();
    if d == 0 {
        return u64::from(n == 0 && is_zero_character(action, chi));
    }
    let mut acc = chi.to_vec();
    let mut count = 0;
    walk(action, 0, n, &mut acc, &mut count);
    count
}

/// Distributes `left` units over coordinates `i..d`, tracking the weight.
fn walk(action: &DiagonalizableAction, i: usize, left: usize, acc: &mut Vec<i64>, count: &mut u64) {
    let d = action.dim();
    let w = &action.weights[i];
    if i == d - 1 {
        for (a, x) in acc.iter_mut().zip(w) {
            *a += *x * left as i64;
        }
        if is_zero_character(action, acc) {
            *count += 1;
        }
        for (a, x) in acc.iter_mut().zip(w) {
            *a -= *x * left as i64;
        }
        return;
    }
    for k in 0..=left {
        walk(action, i + 1, left - k, acc, count);
        for (a, x) in acc.iter_mut().zip(w) {
            *a += x;
        }
    }
    for (a, x) in acc.iter_mut().zip(w) {
        *a -= *x * (left as i64 + 1);
    }
}

/// Entry `(i, j)` is the module of covariants for `chi_j - chi_i`.
pub fn endo_graded_dims(
    action: &DiagonalizableAction,
    bundle: &[Vec<i64>],
    bound: usize,
    exec: Exec,
) -> Result<Vec<Vec<GradedDims>>> {
    bundle
        .iter()
        .map(|ci| {
            bundle
                .iter()
                .map(|cj| {
                    let chi: Vec<i64> = cj.iter().zip(ci).map(|(a, b)| a - b).collect();
                    covariant_dims(action, &chi, bound, exec)
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub rank: usize,
    #[serde(default)]
    pub finite_orders: Vec<i64>,
    pub weights: Vec<Vec<i64>>,
    pub bundle: Vec<Vec<i64>>,
    pub citation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CatalogMatch {
    Known { citation: String },
    Unknown,
}

impl CatalogMatch {
    pub fn is_known(&self) -> bool {
        matches!(self, CatalogMatch::Known { .. })
    }
}

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    serde_json::from_str(include_str!("../data/catalog.json")).expect("bundled catalog parses")
}

pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("catalog: {e}")))
}

pub fn nccr_catalog_lookup(action: &DiagonalizableAction, catalog: &[CatalogEntry]) -> CatalogMatch {
    for e in catalog {
        if entry_matches(action, e) {
            return CatalogMatch::Known { citation: e.citation.clone() };
        }
    }
    CatalogMatch::Unknown
}

/// Sorted multiset, translated so its smallest element is zero.
fn normalized(mut v: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    v.sort();
    if let Some(first) = v.first().cloned() {
        for x in v.iter_mut() {
            for (a, b) in x.iter_mut().zip(&first) {
                *a -= b;
            }
        }
    }
    v.sort();
    v
}

/// Match up to an automorphism of the torus character lattice, a
/// permutation of coordinates and a translation of the bundle.
fn entry_matches(action: &DiagonalizableAction, e: &CatalogEntry) -> bool {
    let r = action.torus_rank;
    if e.rank != r
        || e.finite_orders != action.finite_orders
        || e.weights.len() != action.dim()
        || e.bundle.len() != action.bundle.len()
        || !action.finite_orders.is_empty()
    {
        return false;
    }
    let mut target_w = e.weights.clone();
    target_w.sort();
    let target_b = normalized(e.bundle.clone());
    if r == 0 {
        let mut w = action.weights.clone();
        w.sort();
        return w == target_w;
    }
    let rows: Vec<Vec<i64>> = action.weights.clone();
    let mut basis = Vec::new();
    for i in 0..rows.len() {
        let mut cand: Vec<Vec<i64>> = basis.iter().map(|&j: &usize| rows[j].clone()).collect();
        cand.push(rows[i].clone());
        if IntMatrix::from_rows(r, &cand).rank() == cand.len() {
            basis.push(i);
        }
        if basis.len() == r {
            break;
        }
    }
    if basis.len() < r {
        return false;
    }
    let src: Vec<Vec<i64>> = basis.iter().map(|&i| rows[i].clone()).collect();
    let mut choice = vec![0usize; r];
    loop {
        let dst: Vec<Vec<i64>> = choice.iter().map(|&j| e.weights[j].clone()).collect();
        if let Some(m) = unimodular_transform(&src, &dst) {
            let apply = |v: &Vec<i64>| -> Vec<i64> { m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };
            let mut w: Vec<Vec<i64>> = action.weights.iter().map(apply).collect();
            w.sort();
            if w == target_w && normalized(action.bundle.iter().map(apply).collect()) == target_b {
                return true;
            }
        }
        // next tuple of target indices
        let mut k = 0;
        loop {
            if k == r {
                return false;
            }
            choice[k] += 1;
            if choice[k] < e.weights.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Report of the Z/4 slice computation on `G_m x G_m` with weights
/// (-2,1), (-1,1), (1,1), (2,1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceScenarioReport {
    pub support: Vec<usize>,
    pub stabilizer_invariant_factors: Vec<i64>,
    /// An element generating the stabilizer, as exponents in `(Q/Z)^2`.
    pub generator: (String, String),
    pub generator_order: u64,
    /// Weights of the generator on the slice and on the bundle, in quarters.
    pub slice_classes: Vec<i64>,
    pub bundle_classes: Vec<i64>,
    pub is_full: bool,
    pub ambient_catalog: CatalogMatch,
    pub note: String,
}

pub fn counterexample_75_scenario(extra_bundle: &[Vec<i64>]) -> Result<SliceScenarioReport> {
    let mut bundle = vec![vec![0, 0], vec![1, 0], vec![2, 0]];
    bundle.extend(extra_bundle.iter().cloned());
    let action = DiagonalizableAction::torus(vec![vec![-2, 1], vec![-1, 1], vec![1, 1], vec![2, 1]], bundle.clone())?;
    let support = vec![0, 3];
    let stab = stabilizer(&action, &support);
    if stab.group.invariant_factors != vec![4] || stab.dim != 0 {
        return Err(Error::Assertion(format!("stabilizer is {:?}", stab.group)));
    }
    // t = (1/4, 1/2): pairs integrally with the support weights and has order 4
    let t = [(1i64, 4i64), (1, 2)];
    let pair = |c: &[i64]| -> i64 { (c[0] * 4 / t[0].1 * t[0].0 + c[1] * 4 / t[1].1 * t[1].0).rem_euclid(4) };
    for &i in &support {
        if pair(&action.weights[i]) != 0 {
            return Err(Error::Assertion("generator is not in the stabilizer".into()));
        }
    }
    let order = (1..=4).find(|k| t.iter().all(|(p, q)| (k * p) % q == 0)).expect("order divides 4") as u64;
    let slice = luna_slice_localized(&action, &support, &support)?;
    let slice_classes: Vec<i64> = slice.weights.iter().map(|w| w[0]).collect();
    let bundle_classes: Vec<i64> = slice.bundle.iter().map(|w| w[0]).collect();
    // the presentation class must agree with evaluation at t
    for (w, &c) in action.weights.iter().zip(&slice_classes_full(&action, &stab)) {
        if pair(w) != c {
            return Err(Error::Assertion("class and evaluation at the generator disagree".into()));
        }
    }
    let full = is_full(&bundle, &stab)?;
    let gm = DiagonalizableAction::gm(&[-2, -1, 1, 2], &bundle.iter().map(|c| c[0]).collect::<Vec<_>>());
    let ambient_catalog = nccr_catalog_lookup(&gm, &builtin_catalog());
    let note = if full {
        "bundle restricted to the Z/4 slice contains every character".to_string()
    } else {
        "bundle restricted to the Z/4 slice misses a character, so the localized chart fails the fullness \
         condition although the ambient algebra is a known NCCR"
            .to_string()
    };
    Ok(SliceScenarioReport {
        support,
        stabilizer_invariant_factors: stab.group.invariant_factors.clone(),
        generator: ("1/4".into(), "1/2".into()),
        generator_order: order,
        slice_classes,
        bundle_classes,
        is_full: full,
        ambient_catalog,
        note,
    })
}

fn slice_classes_full(action: &DiagonalizableAction, stab: &crate::action::StabilizerDesc) -> Vec<i64> {
    action.weights.iter().map(|w| stab.restrict(w)[0]).collect()
}

/// Coefficients of `prod_i 1/(1 - z^{a_i} t)` up to `t^bound`, keyed by
/// torus weight. Exposed for cross-checks of [`covariant_dims`].
pub fn generating_series(weights: &[i64], bound: usize) -> Vec<BTreeMap<i64, u64>> {
    let mut series: Vec<BTreeMap<i64, u64>> = vec![BTreeMap::new(); bound + 1];
    series[0].insert(0, 1);
    for &a in weights {
        let mut next: Vec<BTreeMap<i64, u64>> = vec![BTreeMap::new(); bound + 1];
        for (deg, terms) in series.iter().enumerate() {
            for (&w, &c) in terms {
                for k in 0..=(bound - deg) {
                    *next[deg + k].entry(w + a * k as i64).or_default() += c;
                }
            }
        }
        series = next;
    }
    series
}
