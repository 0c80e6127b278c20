//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kirwan_cli::{find_scenario, run, Command, JobConfig};
use kirwan_core::bundle::{fullness_report, generator_codim1_audit, stage_is_generic, tweak_bundle, TwistedBundle};
use kirwan_core::corpus::{default_corpus, CorpusInstance, Family};
use kirwan_core::covariants::{covariant_dims, covariant_dims_limited};
use kirwan_core::git::{check_hi, stratify};
use kirwan_core::lattice::{hermite_normal_form, smith_normal_form, IntMatrix};
use kirwan_core::ledger::{cross_validate, sod_ledger};
use kirwan_core::stacky::{cone_index, quotient_stacky_fan, star_subdivide, QuotientMap};
use kirwan_core::tower::{kirwan_resolve, ResolutionLog};
use kirwan_core::action::DiagonalizableAction;
use kirwan_core::Exec;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn demo_summary(name: &str) -> (Value, Duration) {
    let mut cfg = JobConfig::new(Command::Demo);
    cfg.scenario = Some(name.into());
    let t = Instant::now();
    let out = run(&cfg);
    let elapsed = t.elapsed();
    assert_eq!(out.code, 0, "demo {name} failed: {:?}", out.diagnostics);
    let v: Value = serde_json::from_str(out.report.as_deref().unwrap()).unwrap();
    (v["summary"].clone(), elapsed)
}

fn scenario_criterion(name: &str, limit: Duration) -> Verdict {
    let expected = find_scenario(name).unwrap().fixture_value().unwrap()["expected"].clone();
    let (got, elapsed) = demo_summary(name);
    let mut diffs = Vec::new();
    for (k, want) in expected.as_object().unwrap() {
        if &got[k] != want {
            diffs.push(format!("{k}: got {} want {want}", got[k]));
        }
    }
    let fast = elapsed < limit;
    let detail = if diffs.is_empty() {
        format!("all {} fixture fields match in {elapsed:.2?}", expected.as_object().unwrap().len())
    } else {
        diffs.join("; ")
    };
    verdict(diffs.is_empty() && fast, detail)
}

/// Largest stabilizer dimension over coordinate supports, read off the
/// weights directly.
fn mu_by_supports(a: &DiagonalizableAction) -> usize {
    stratify(a, Exec::Sequential).unwrap().iter().map(|s| s.stabilizer_dim).max().unwrap_or(0)
}

fn criterion_3(corpus: &[CorpusInstance], logs: &[ResolutionLog], elapsed: Duration) -> Verdict {
    let mut bad = Vec::new();
    for (inst, log) in corpus.iter().zip(logs) {
        let mu = log.mu_sequence();
        let strictly = mu.windows(2).all(|w| w[1] < w[0]);
        let ok = strictly
            && mu[0] == mu_by_supports(&inst.action)
            && *mu.last().unwrap() == 0
            && log.steps.len() <= inst.action.torus_rank;
        if !ok {
            bad.push(format!("{} {mu:?}", inst.name));
        }
    }
    let fast = elapsed < Duration::from_secs(30);
    verdict(
        bad.is_empty() && fast && corpus.len() >= 50,
        format!("{} instances resolved in {elapsed:.2?}; violations {bad:?}", corpus.len()),
    )
}

fn criterion_4(corpus: &[CorpusInstance], logs: &[ResolutionLog]) -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (inst, log) in corpus.iter().zip(logs) {
        if !check_hi(&inst.action, 2, Exec::Sequential).unwrap() {
            continue;
        }
        checked += 1;
        for (s, stage) in log.stages.iter().enumerate() {
            if !stage.chart_local_h2(Exec::Parallel).unwrap() {
                bad.push(format!("{} stage {s}", inst.name));
            }
        }
    }
    verdict(bad.is_empty() && checked > 0, format!("{checked} instances with (H2); violations {bad:?}"))
}

/// Subdivides the quotient fan of each stage at the images of its centers
/// and compares with the quotient fan of the next stage.
fn functorial(log: &ResolutionLog) -> Result<(), String> {
    for (s, step) in log.steps.iter().enumerate() {
        let stage = &log.stages[s];
        let q = QuotientMap::new(stage);
        let mut fan = quotient_stacky_fan(stage, Exec::Sequential);
        for c in &step.centers {
            let images: Vec<Vec<i64>> = c.cone.iter().map(|&i| q.beta(&stage.fan.rays[i])).collect();
            let target = cone_index(&fan, &images).ok_or(format!("center {:?} is not a cone of the quotient", c.cone))?;
            let mut v = vec![0i64; stage.d()];
            for &i in &c.cone {
                for (x, y) in v.iter_mut().zip(&stage.fan.rays[i]) {
                    *x += y;
                }
            }
            fan = star_subdivide(&fan, &target, &q.beta(&v)).map_err(|e| e.to_string())?;
        }
        let next = quotient_stacky_fan(&log.stages[s + 1], Exec::Sequential);
        if !fan.same_as(&next) {
            return Err(format!("step {}: fans differ", step.step));
        }
    }
    Ok(())
}

fn criterion_5(corpus: &[CorpusInstance], logs: &[ResolutionLog]) -> Verdict {
    let bad: Vec<String> = corpus
        .iter()
        .zip(logs)
        .filter_map(|(inst, log)| functorial(log).err().map(|e| format!("{}: {e}", inst.name)))
        .collect();
    verdict(bad.is_empty(), format!("{} instances; mismatches {bad:?}", corpus.len()))
}

fn criterion_6(corpus: &[CorpusInstance], logs: &[ResolutionLog]) -> Verdict {
    let mut checked = 0;
    let mut window_ok = 0;
    let mut bad = Vec::new();
    for (inst, log) in corpus.iter().zip(logs) {
        let stage0 = &log.stages[0];
        let points = log.steps.iter().all(|s| s.centers.iter().all(|c| c.center_is_point));
        if !points || !stage0.chart_local_h2(Exec::Sequential).unwrap() || !stage_is_generic(stage0, Exec::Sequential) {
            continue;
        }
        let u = TwistedBundle::from_characters(&inst.action.bundle);
        let tree = sod_ledger(log, &u, false, Exec::Sequential).unwrap();
        let fan = quotient_stacky_fan(log.final_stage(), Exec::Sequential);
        let Ok(cv) = cross_validate(&tree, &fan) else { continue };
        checked += 1;
        if cv.pass {
            window_ok += usize::from(inst.family == Family::SymmetricWindow);
        } else {
            bad.push(format!("{} ledger {} fan {}", inst.name, cv.ledger_rank, cv.fan_rank));
        }
    }
    verdict(
        bad.is_empty() && checked >= 20,
        format!("{checked} instances checked ({window_ok} window bundles agree); mismatches {bad:?}"),
    )
}

fn criterion_7(corpus: &[CorpusInstance], logs: &[ResolutionLog]) -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut bad_windows = 0;
    for (inst, log) in corpus.iter().zip(logs) {
        let u = TwistedBundle::from_characters(&inst.action.bundle);
        if !generator_codim1_audit(&log.stages[0], &u, Exec::Sequential).unwrap().pass {
            continue;
        }
        checked += 1;
        let tweaked = log.steps.iter().fold(u, |b, s| tweak_bundle(&b, s.step, s.descent_period));
        let report = fullness_report(log.final_stage(), &tweaked, Exec::Sequential).unwrap();
        if let Some(w) = report.iter().find(|v| !v.full) {
            bad_windows += usize::from(inst.family == Family::SymmetricWindow);
            bad.push(format!("{} at cone {:?} (Z/{:?} hit {:?})", inst.name, w.cone, w.stabilizer_torsion, w.classes));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{checked} instances pass the generator audit; {} not full at the end ({bad_windows} window bundles): {}",
            bad.len(),
            bad.join(", ")
        ),
    )
}

/// Coefficients of `prod_i (1 - z^{w_i} t)^{-1}` by repeated convolution.
fn series_oracle(weights: &[i64], bound: usize) -> Vec<BTreeMap<i64, u64>> {
    let mut s: Vec<BTreeMap<i64, u64>> = vec![BTreeMap::new(); bound + 1];
    s[0].insert(0, 1);
    for &w in weights {
        for deg in 1..=bound {
            // multiplying by 1/(1 - z^w t) is the recurrence s[deg] += z^w s[deg-1]
            let prev: Vec<(i64, u64)> = s[deg - 1].iter().map(|(k, v)| (*k, *v)).collect();
            for (k, v) in prev {
                *s[deg].entry(k + w).or_default() += v;
            }
        }
    }
    s
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let a = DiagonalizableAction::gm(&[-1, -1, 1, 1], &[0, 1]);
    let chi0 = covariant_dims(&a, &[0], 20, Exec::Parallel).unwrap().dims;
    let chi1 = covariant_dims_limited(&a, &[1], 21, 21, Exec::Parallel).unwrap().dims;
    let oracle = series_oracle(&[-1, -1, 1, 1], 21);
    let mut bad = Vec::new();
    for n in 0..=10u64 {
        let e = 2 * n as usize;
        if chi0[e] != (n + 1).pow(2) || oracle[e].get(&0).copied().unwrap_or(0) != chi0[e] {
            bad.push(format!("chi0 degree {e}"));
        }
        if chi1[e + 1] != (n + 1) * (n + 2) || oracle[e + 1].get(&-1).copied().unwrap_or(0) != chi1[e + 1] {
            bad.push(format!("chi1 degree {}", e + 1));
        }
    }
    let elapsed = t.elapsed();
    verdict(bad.is_empty() && elapsed < Duration::from_secs(5), format!("degrees up to 21 in {elapsed:.2?}; bad {bad:?}"))
}

fn det_oracle(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] as i128 * det_oracle(&minor)
        })
        .sum()
}

fn is_unit(m: &IntMatrix) -> bool {
    m.det().abs() == BigInt::from(1)
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    let total = 240;
    for trial in 0..total {
        let (r, c) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let rows: Vec<Vec<i64>> = (0..r).map(|_| (0..c).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let m = IntMatrix::from_rows(c, &rows);
        let (u, d, v) = smith_normal_form(&m);
        let mut ok = u.mul(&m).mul(&v) == d && is_unit(&u) && is_unit(&v);
        let diag: Vec<BigInt> = (0..r.min(c)).map(|i| d[(i, i)].clone()).collect();
        for i in 0..r {
            for j in 0..c {
                ok &= i == j || d[(i, j)].is_zero();
            }
        }
        ok &= diag.iter().all(|x| !x.is_negative());
        ok &= diag.windows(2).all(|w| if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() });
        if r == c {
            let prod: BigInt = diag.iter().product();
            ok &= prod == BigInt::from(det_oracle(&rows).abs());
        }
        let (h, uh) = hermite_normal_form(&m);
        ok &= uh.mul(&m) == h && is_unit(&uh);
        let mut last_pivot: Option<usize> = None;
        let mut zero_seen = false;
        for i in 0..r {
            match (0..c).find(|&j| !h[(i, j)].is_zero()) {
                None => zero_seen = true,
                Some(p) => {
                    ok &= !zero_seen && last_pivot.map_or(true, |q| p > q) && h[(i, p)].is_positive();
                    for k in 0..i {
                        ok &= !h[(k, p)].is_negative() && h[(k, p)] < h[(i, p)];
                    }
                    last_pivot = Some(p);
                }
            }
        }
        if !ok {
            bad.push(trial);
        }
    }
    verdict(bad.is_empty(), format!("{total} random matrices up to 6x6; failures {bad:?}"))
}

fn main() -> ExitCode {
    let corpus = default_corpus();
    let t = Instant::now();
    let logs: Vec<ResolutionLog> =
        Exec::Parallel.map(&corpus, |inst| kirwan_resolve(&inst.action, Exec::Sequential).expect("corpus resolves"));
    let resolve_time = t.elapsed();

    let results = [
        ("conifold end-to-end", scenario_criterion("conifold", Duration::from_secs(1))),
        ("Z/4 slice regression", scenario_criterion("counterexample75", Duration::from_secs(1))),
        ("mu decreases and the tower terminates", criterion_3(&corpus, &logs, resolve_time)),
        ("(H2) is preserved", criterion_4(&corpus, &logs)),
        ("quotient fan commutes with the transform", criterion_5(&corpus, &logs)),
        ("K0 ledger matches the fan box count", criterion_6(&corpus, &logs)),
        ("fullness propagates through the tower", criterion_7(&corpus, &logs)),
        ("covariant dimensions", criterion_8()),
        ("Smith and Hermite normal forms", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("criterion {} {}: {name} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
