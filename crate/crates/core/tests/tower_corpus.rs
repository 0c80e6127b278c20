use std::collections::BTreeSet;

use kirwan_core::bundle::{tweak_bundle, TwistedBundle};
use kirwan_core::corpus::{default_corpus, generate, CorpusSizes};
use kirwan_core::ledger::{cross_validate, sod_ledger};
use kirwan_core::polyhedral::{star_subdivide, Cone};
use kirwan_core::stacky::{quotient_stacky_fan, StackyFan};
use kirwan_core::lattice::{kernel_basis, IntMatrix};
use kirwan_core::tower::{kirwan_resolve, strict_transform_oracle, AmbientStage};
use kirwan_core::action::DiagonalizableAction;
use kirwan_core::Exec;
use num_integer::Integer;
use proptest::prelude::*;

#[test]
fn removal_matches_strict_transform_on_corpus() {
    for inst in default_corpus() {
        let log = kirwan_resolve(&inst.action, Exec::Sequential).unwrap();
        for (s, rec) in log.steps.iter().enumerate() {
            let old = &log.stages[s];
            let mut fan = old.fan.clone();
            for c in &rec.centers {
                fan = star_subdivide(&fan, &Cone::new(old.d(), c.cone.clone()), &c.center_ray).unwrap();
            }
            let centers: Vec<Vec<usize>> = rec.centers.iter().map(|c| c.cone.clone()).collect();
            let gone = strict_transform_oracle(old, &centers, &fan);
            let next = &log.stages[s + 1];
            assert_eq!(fan.rays, next.fan.rays);
            for (cone, &cand) in &fan.cones {
                let want = cand && !gone.contains(cone);
                assert_eq!(next.fan.is_kept(cone), want, "{} step {} cone {cone:?}", inst.name, rec.step);
            }
        }
    }
}

/// Chart index: the smallest `N > 0` for which some invariant Laurent
/// monomial has divisor `N E` on the chart of `cone`, i.e. pairs to `N` with
/// the new rays of the step and to zero with the other rays of the cone.
fn chart_index(stage: &AmbientStage, cone: &[usize], new_rays: &[usize]) -> Option<u64> {
    let a = &stage.action;
    let (d, r, f) = (a.dim(), a.torus_rank, a.finite_orders.len());
    let hit: Vec<usize> = cone.iter().copied().filter(|x| new_rays.contains(x)).collect();
    if hit.is_empty() {
        return Some(1);
    }
    // unknowns: m in Z^d, then one multiplier per finite factor
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for t in 0..r {
        let mut row: Vec<i64> = (0..d).map(|i| a.weights[i][t]).collect();
        row.extend(std::iter::repeat(0).take(f));
        rows.push(row);
    }
    for (k, &m) in a.finite_orders.iter().enumerate() {
        let mut row: Vec<i64> = (0..d).map(|i| a.weights[i][r + k]).collect();
        row.extend((0..f).map(|j| if j == k { m } else { 0 }));
        rows.push(row);
    }
    let pad = |v: &[i64]| -> Vec<i64> { v.iter().copied().chain(std::iter::repeat(0).take(f)).collect() };
    for &rho in cone.iter().filter(|x| !hit.contains(x)) {
        rows.push(pad(&stage.fan.rays[rho]));
    }
    for w in hit.windows(2) {
        let diff: Vec<i64> = stage.fan.rays[w[0]].iter().zip(&stage.fan.rays[w[1]]).map(|(x, y)| x - y).collect();
        rows.push(pad(&diff));
    }
    let k = kernel_basis(&IntMatrix::from_rows(d + f, &rows)).to_i64_rows();
    let v = &stage.fan.rays[hit[0]];
    let g = k.iter().fold(0i64, |acc, m| acc.gcd(&m[..d].iter().zip(v).map(|(x, y)| x * y).sum::<i64>()));
    (g != 0).then_some(g as u64)
}

#[test]
fn descent_period_matches_chart_indices() {
    let mut steps = 0;
    for inst in default_corpus() {
        let log = kirwan_resolve(&inst.action, Exec::Sequential).unwrap();
        for rec in &log.steps {
            let next = &log.stages[rec.step];
            let n = next
                .fan
                .maximal_kept()
                .iter()
                .map(|c| chart_index(next, c, &rec.new_rays).expect("finite chart index"))
                .fold(1u64, |acc, x| acc.lcm(&x));
            assert_eq!(rec.descent_period, n, "{} step {}", inst.name, rec.step);
            steps += 1;
        }
    }
    assert!(steps >= 60);
}

#[test]
fn mu_drops_on_other_seeds() {
    for seed in [1, 2, 3] {
        for inst in generate(seed, CorpusSizes { symmetric: 4, random: 12, finite: 4 }) {
            let log = kirwan_resolve(&inst.action, Exec::Parallel).unwrap();
            let mu = log.mu_sequence();
            assert!(mu.windows(2).all(|w| w[1] < w[0]), "{} {mu:?}", inst.name);
            assert!(log.steps.len() <= inst.action.torus_rank);
        }
    }
}

#[test]
fn three_plus_three_weights() {
    let w = [-1, -1, -1, 1, 1, 1];
    // two characters are not a window for this weight set: the ledger
    // undercounts the box count
    let a = DiagonalizableAction::gm(&w, &[0, 1]);
    let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
    let fan = quotient_stacky_fan(log.final_stage(), Exec::Sequential);
    let tree = sod_ledger(&log, &TwistedBundle::from_characters(&a.bundle), false, Exec::Sequential).unwrap();
    assert_eq!(tree.entries.len(), 5);
    assert!(tree.entries.iter().all(|e| e.block_count == 2));
    let cv = cross_validate(&tree, &fan).unwrap();
    assert_eq!((cv.ledger_rank, cv.fan_rank), (12, 18));
    assert!(!cv.pass);

    let a = DiagonalizableAction::gm(&w, &[0, 1, 2]);
    let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
    let tree = sod_ledger(&log, &TwistedBundle::from_characters(&a.bundle), false, Exec::Sequential).unwrap();
    let cv = cross_validate(&tree, &quotient_stacky_fan(log.final_stage(), Exec::Sequential)).unwrap();
    assert_eq!((cv.ledger_rank, cv.fan_rank), (18, 18));
}

#[test]
fn ledger_shape_on_corpus() {
    for inst in default_corpus() {
        let log = kirwan_resolve(&inst.action, Exec::Sequential).unwrap();
        let u = TwistedBundle::from_characters(&inst.action.bundle);
        let Ok(tree) = sod_ledger(&log, &u, false, Exec::Sequential) else { continue };
        let labels: Vec<(usize, usize, usize)> = tree.entries.iter().map(|e| (e.j, e.i, e.k)).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        let expected: usize = log.steps.iter().flat_map(|s| s.centers.iter().map(|c| c.codim - 1)).sum();
        assert_eq!(tree.entries.len(), expected, "{}", inst.name);

        // dropping the tweaks changes block data at most, never multiplicities
        let mut plain = log.clone();
        for s in &mut plain.steps {
            s.descent_period = 1;
        }
        let untweaked = sod_ledger(&plain, &u, false, Exec::Sequential).unwrap();
        let key = |t: &kirwan_core::ledger::SODTree| -> Vec<_> { t.entries.iter().map(|e| (e.j, e.i, e.k, e.codim)).collect() };
        assert_eq!(key(&tree), key(&untweaked));
    }
}

#[test]
fn fans_round_trip_through_json() {
    for inst in default_corpus() {
        let log = kirwan_resolve(&inst.action, Exec::Sequential).unwrap();
        for st in &log.stages {
            let fan = quotient_stacky_fan(st, Exec::Sequential);
            let text = serde_json::to_string(&fan.to_json()).unwrap();
            assert_eq!(StackyFan::from_json(&serde_json::from_str(&text).unwrap()).unwrap(), fan);
        }
    }
}

proptest! {
    #[test]
    fn tweak_multiplies_counts(chars in prop::collection::vec(-4i64..4, 1..5), n in 1u64..6, m in 1u64..4) {
        let rows: Vec<Vec<i64>> = chars.iter().map(|&c| vec![c]).collect();
        let u = TwistedBundle::from_characters(&rows);
        let t = tweak_bundle(&tweak_bundle(&u, 1, n), 2, m);
        prop_assert_eq!(t.len(), u.len() * n * m);
        let listed = t.expand();
        prop_assert_eq!(listed.len() as u64, t.len());
        let distinct: BTreeSet<_> = listed.iter().map(|s| (s.character.clone(), s.twists.clone())).collect();
        let chars_distinct: BTreeSet<_> = chars.iter().collect();
        prop_assert_eq!(distinct.len(), chars_distinct.len() * (n * m) as usize);
        prop_assert_eq!(t.distinct_characters(), u.distinct_characters());
    }
}
