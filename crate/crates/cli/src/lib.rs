//! Job runner behind the `kirwan` binary. Every command produces a JSON
//! report; failures map to exit codes and structured diagnostics.

use std::fs;
use std::path::PathBuf;

use kirwan_core::action::DiagonalizableAction;
use kirwan_core::bundle::{fullness_report, generator_codim1_audit, tweak_bundle, TwistedBundle};
use kirwan_core::corpus::{generate, CorpusSizes};
use kirwan_core::covariants::{builtin_catalog, counterexample_75_scenario, endo_graded_dims, nccr_catalog_lookup};
use kirwan_core::ledger::{cross_validate, sod_ledger, to_dot, Rank};
use kirwan_core::stacky::{k0_rank, lattice_equivalent, quotient_stacky_fan, StackyFan, LatticeDesc};
use kirwan_core::tower::{kirwan_resolve, ResolutionLog};
use kirwan_core::{git, Exec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const DEFAULT_DEGREE_BOUND: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Resolve,
    Sod,
    Audit,
    Hilbert,
    Demo,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    File(PathBuf),
    Inline(String),
}

/// One job. `scenario` is only meaningful for `Demo`.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub command: Command,
    pub input: Option<Input>,
    pub scenario: Option<String>,
    pub emit_fan: Option<PathBuf>,
    pub emit_dot: Option<PathBuf>,
    pub degree_bound: Option<usize>,
    pub seed: Option<u64>,
    pub exec: Exec,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            input: None,
            scenario: None,
            emit_fan: None,
            emit_dot: None,
            degree_bound: None,
            seed: None,
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let demo = self.command == Command::Demo;
        if demo && self.input.is_some() {
            return Err(CliError::Usage("demo takes a scenario name, not --input".into()));
        }
        if demo && self.scenario.is_none() {
            return Err(CliError::Usage("demo needs a scenario name".into()));
        }
        if !demo && self.input.is_none() {
            return Err(CliError::Usage("--input is required".into()));
        }
        if !demo && self.scenario.is_some() {
            return Err(CliError::Usage("only demo takes a scenario".into()));
        }
        if self.emit_fan.is_some() && self.command != Command::Resolve {
            return Err(CliError::Usage("--emit-fan only applies to resolve".into()));
        }
        if self.emit_dot.is_some() && self.command != Command::Sod {
            return Err(CliError::Usage("--emit-dot only applies to sod".into()));
        }
        if self.degree_bound.is_some() && self.command != Command::Hilbert {
            return Err(CliError::Usage("--degree-bound only applies to hilbert".into()));
        }
        if self.seed.is_some() && !(demo && self.scenario.as_deref() == Some("corpus")) {
            return Err(CliError::Usage("--seed only applies to demo corpus".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed input: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error(transparent)]
    Core(#[from] kirwan_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use kirwan_core::Error as E;
        match self {
            CliError::Core(E::HypothesisViolation(_)) => 2,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse(_) | CliError::UnknownScenario(_) => 3,
            CliError::Core(E::InvalidInput(_) | E::TooLarge { .. }) => 3,
            CliError::Core(_) => 4,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Usage(_) => "usage".into(),
            CliError::Io { .. } => "io".into(),
            CliError::Parse(_) => "parse".into(),
            CliError::UnknownScenario(_) => "unknown_scenario".into(),
            CliError::Core(e) => format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("core").to_string(),
        }
    }
}

/// Input schema: weights and bundle characters are integer vectors of
/// length `rank` followed by one residue per finite factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDoc {
    pub rank: usize,
    #[serde(default)]
    pub finite_orders: Vec<i64>,
    pub weights: Vec<Vec<i64>>,
    #[serde(default)]
    pub bundle: Vec<Vec<i64>>,
    #[serde(default)]
    pub options: InputOptions,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<usize>,
}

impl InputDoc {
    pub fn to_action(&self) -> Result<DiagonalizableAction, CliError> {
        Ok(DiagonalizableAction::new(
            self.rank,
            self.finite_orders.clone(),
            self.weights.clone(),
            self.bundle.clone(),
        )?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub level: &'static str,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    /// Pretty JSON for standard output; absent on failure.
    pub report: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Outcome {
    pub fn diagnostic_lines(&self) -> Vec<String> {
        self.diagnostics.iter().map(|d| serde_json::to_string(d).expect("diagnostic serializes")).collect()
    }
}

pub fn run(cfg: &JobConfig) -> Outcome {
    match cfg.validate().and_then(|()| dispatch(cfg)) {
        Ok((report, diagnostics)) => Outcome {
            code: 0,
            report: Some(serde_json::to_string_pretty(&report).expect("report serializes")),
            diagnostics,
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            report: None,
            diagnostics: vec![Diagnostic { level: "error", kind: e.kind(), message: e.to_string() }],
        },
    }
}

fn read_input(input: &Input) -> Result<InputDoc, CliError> {
    let text = match input {
        Input::File(p) => fs::read_to_string(p).map_err(|source| CliError::Io { path: p.clone(), source })?,
        Input::Inline(s) => s.clone(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
}

type Report = (Value, Vec<Diagnostic>);

fn dispatch(cfg: &JobConfig) -> Result<Report, CliError> {
    if cfg.command == Command::Demo {
        let name = cfg.scenario.as_deref().expect("validated");
        return run_scenario(name, cfg);
    }
    let doc = read_input(cfg.input.as_ref().expect("validated"))?;
    let action = doc.to_action()?;
    let ex = cfg.exec;
    let mut diags = Vec::new();
    if !action.is_faithful() {
        diags.push(Diagnostic {
            level: "warning",
            kind: "non_faithful".into(),
            message: "the action has a kernel; stabilizers include it everywhere".into(),
        });
    }
    let report = match cfg.command {
        Command::Analyze => serde_json::to_value(git::analyze(&action, ex)?)?,
        Command::Resolve => resolve_report(&action, cfg)?,
        Command::Sod => sod_report(&action, cfg, &mut diags)?,
        Command::Audit => audit_report(&action, ex)?,
        Command::Hilbert => {
            let bound = cfg.degree_bound.or(doc.options.degree_bound).unwrap_or(DEFAULT_DEGREE_BOUND);
            let m = endo_graded_dims(&action, &action.bundle, bound, ex)?;
            json!({ "degree_bound": bound, "bundle": action.bundle, "entries": m })
        }
        Command::Demo => unreachable!(),
    };
    Ok((report, diags))
}

fn resolve_report(action: &DiagonalizableAction, cfg: &JobConfig) -> Result<Value, CliError> {
    let log = kirwan_resolve(action, cfg.exec)?;
    let fan = quotient_stacky_fan(log.final_stage(), cfg.exec);
    if let Some(path) = &cfg.emit_fan {
        let text = serde_json::to_string_pretty(&fan.to_json())?;
        write_file(path, &text)?;
        let back = StackyFan::from_json(&serde_json::from_str(&text)?)?;
        if back != fan {
            return Err(kirwan_core::Error::Assertion("emitted fan does not re-parse to itself".into()).into());
        }
    }
    Ok(json!({
        "mu_sequence": log.mu_sequence(),
        "log": log,
        "final_fan": fan,
        "k0_rank": k0_rank(&fan).ok(),
    }))
}

fn sod_report(action: &DiagonalizableAction, cfg: &JobConfig, diags: &mut Vec<Diagnostic>) -> Result<Value, CliError> {
    let log = kirwan_resolve(action, cfg.exec)?;
    let u = TwistedBundle::from_characters(&action.bundle);
    let catalog = nccr_catalog_lookup(action, &builtin_catalog());
    let tree = sod_ledger(&log, &u, catalog.is_known(), cfg.exec)?;
    if tree.head.conditional {
        diags.push(Diagnostic {
            level: "warning",
            kind: "conditional".into(),
            message: "the endomorphism algebra is not certified as an NCCR; the ledger is conditional".into(),
        });
    }
    if let Some(path) = &cfg.emit_dot {
        write_file(path, &to_dot(&tree))?;
    }
    let fan = quotient_stacky_fan(log.final_stage(), cfg.exec);
    let cv = match cross_validate(&tree, &fan) {
        Ok(c) => serde_json::to_value(c)?,
        Err(kirwan_core::Error::SymbolicRank) => json!({ "skipped": "symbolic rank" }),
        Err(e) => return Err(e.into()),
    };
    Ok(json!({ "tree": tree, "catalog": catalog, "cross_validation": cv }))
}

fn tweaked(log: &ResolutionLog, u: &TwistedBundle) -> TwistedBundle {
    log.steps.iter().fold(u.clone(), |b, s| tweak_bundle(&b, s.step, s.descent_period))
}

fn audit_report(action: &DiagonalizableAction, ex: Exec) -> Result<Value, CliError> {
    let log = kirwan_resolve(action, ex)?;
    let u = TwistedBundle::from_characters(&action.bundle);
    let generator = generator_codim1_audit(&log.stages[0], &u, ex)?;
    let fullness = fullness_report(log.final_stage(), &tweaked(&log, &u), ex)?;
    let all_full = fullness.iter().all(|v| v.full);
    Ok(json!({ "generator_codim1": generator, "final_fullness": { "all_full": all_full, "strata": fullness } }))
}

/// A named end-to-end scenario with its expected-output fixture.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub fixture: Option<&'static str>,
}

impl Scenario {
    pub fn fixture_value(&self) -> Option<Value> {
        self.fixture.map(|f| serde_json::from_str(f).expect("fixture parses"))
    }
}

pub fn scenario_registry() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "conifold",
            description: "weights -1,-1,1,1 with two consecutive characters",
            fixture: Some(include_str!("../fixtures/conifold.json")),
        },
        Scenario {
            name: "counterexample75",
            description: "Z/4 slice of a rank two torus action where fullness fails",
            fixture: Some(include_str!("../fixtures/counterexample75.json")),
        },
        Scenario { name: "corpus", description: "summary of the seeded test corpus", fixture: None },
    ]
}

pub fn find_scenario(name: &str) -> Option<Scenario> {
    scenario_registry().into_iter().find(|s| s.name == name)
}

fn run_scenario(name: &str, cfg: &JobConfig) -> Result<Report, CliError> {
    let sc = find_scenario(name).ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    let report = match sc.name {
        "conifold" => conifold_demo(&sc.fixture_value().expect("fixture"), cfg.exec)?,
        "counterexample75" => slice_demo(&sc.fixture_value().expect("fixture"))?,
        "corpus" => corpus_demo(cfg.seed.unwrap_or(kirwan_core::corpus::DEFAULT_SEED), cfg.exec)?,
        _ => unreachable!(),
    };
    Ok((report, Vec::new()))
}

fn fan_from_fixture(rank: usize, cones: &Value) -> Result<StackyFan, CliError> {
    let cones: Vec<Vec<Vec<i64>>> = serde_json::from_value(cones.clone())?;
    Ok(StackyFan::from_cone_vectors(LatticeDesc { rank, torsion: vec![] }, &cones))
}

fn conifold_demo(fixture: &Value, ex: Exec) -> Result<Value, CliError> {
    let doc: InputDoc = serde_json::from_value(fixture["input"].clone())?;
    let action = doc.to_action()?;
    let log = kirwan_resolve(&action, ex)?;
    let before = quotient_stacky_fan(&log.stages[0], ex);
    let after = quotient_stacky_fan(log.final_stage(), ex);
    let refs = &fixture["reference_fans"];
    let rank = refs["rank"].as_u64().unwrap_or(0) as usize;
    let u = TwistedBundle::from_characters(&action.bundle);
    let catalog = nccr_catalog_lookup(&action, &builtin_catalog());
    let tree = sod_ledger(&log, &u, catalog.is_known(), ex)?;
    let cv = cross_validate(&tree, &after)?;
    let block_rank = tree.entries.first().map(|e| e.rank_per_block.clone()).unwrap_or(Rank::Numeric(0));
    let summary = json!({
        "steps": log.steps.len(),
        "center_codims": log.steps.iter().flat_map(|s| s.centers.iter().map(|c| c.codim)).collect::<Vec<_>>(),
        "descent_periods": log.steps.iter().map(|s| s.descent_period).collect::<Vec<_>>(),
        "k0_rank": cv.fan_rank,
        "head_rank": tree.head.characters,
        "ledger_entries": tree.entries.len(),
        "blocks_per_entry": tree.entries.iter().map(|e| e.block_count).collect::<Vec<_>>(),
        "block_rank": block_rank,
        "k0_accounting": cv.ledger_rank,
        "catalog": tree.head.catalog,
        "fan_before_matches": lattice_equivalent(&before, &fan_from_fixture(rank, &refs["before"])?),
        "fan_after_matches": lattice_equivalent(&after, &fan_from_fixture(rank, &refs["after"])?),
    });
    Ok(json!({
        "scenario": "conifold",
        "summary": summary,
        "fan_before": before,
        "fan_after": after,
        "tree": tree,
    }))
}

fn slice_demo(fixture: &Value) -> Result<Value, CliError> {
    let rep = counterexample_75_scenario(&[])?;
    let extra: Vec<i64> = serde_json::from_value(fixture["extra_character"].clone())?;
    let with_extra = counterexample_75_scenario(&[extra])?;
    let summary = json!({
        "support": rep.support,
        "stabilizer_invariant_factors": rep.stabilizer_invariant_factors,
        "generator": [rep.generator.0, rep.generator.1],
        "generator_order": rep.generator_order,
        "slice_classes": rep.slice_classes,
        "bundle_classes": rep.bundle_classes,
        "is_full": rep.is_full,
        "catalog": if rep.ambient_catalog.is_known() { "known" } else { "unknown" },
        "is_full_with_extra_character": with_extra.is_full,
    });
    Ok(json!({ "scenario": "counterexample75", "summary": summary, "report": rep }))
}

fn corpus_demo(seed: u64, ex: Exec) -> Result<Value, CliError> {
    let corpus = generate(seed, CorpusSizes::default());
    let rows: Vec<Value> = ex
        .map(&corpus, |inst| -> Result<Value, CliError> {
            let log = kirwan_resolve(&inst.action, Exec::Sequential)?;
            let fan = quotient_stacky_fan(log.final_stage(), Exec::Sequential);
            Ok(json!({
                "name": inst.name,
                "weights": inst.action.weights,
                "finite_orders": inst.action.finite_orders,
                "mu_sequence": log.mu_sequence(),
                "k0_rank": k0_rank(&fan).ok(),
            }))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(json!({ "scenario": "corpus", "seed": seed, "instances": rows }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(cmd: Command, input: &str) -> JobConfig {
        let mut c = JobConfig::new(cmd);
        c.input = Some(Input::Inline(input.into()));
        c
    }

    #[test]
    fn registry() {
        assert!(find_scenario("conifold").is_some());
        assert!(find_scenario("counterexample75").is_some());
        assert!(find_scenario("nope").is_none());
    }

    #[test]
    fn validation() {
        let mut c = JobConfig::new(Command::Demo);
        assert_eq!(run(&c).code, 3);
        c.scenario = Some("conifold".into());
        c.degree_bound = Some(3);
        assert_eq!(run(&c).code, 3);
        assert_eq!(run(&job(Command::Analyze, "{")).code, 3);
        assert_eq!(run(&job(Command::Analyze, r#"{"rank":1,"weights":[[1]],"extra":0}"#)).code, 3);
    }

    #[test]
    fn analyze_trivial_group() {
        let out = run(&job(Command::Analyze, r#"{"rank":0,"weights":[[],[]],"bundle":[[]]}"#));
        assert_eq!(out.code, 0);
        let v: Value = serde_json::from_str(out.report.as_deref().unwrap()).unwrap();
        assert_eq!(v["summary"]["generic"], true);
        assert_eq!(v["summary"]["unstable_codim"], "inf");
    }

    #[test]
    fn sod_h2_violation() {
        let out = run(&job(Command::Sod, r#"{"rank":1,"weights":[[-1],[1]],"bundle":[[0]]}"#));
        assert_eq!(out.code, 2);
        assert!(out.report.is_none());
        assert!(out.diagnostics[0].message.contains("H2"));
        assert_eq!(out.diagnostics[0].kind, "HypothesisViolation");
    }

    #[test]
    fn bad_character_length() {
        assert_eq!(run(&job(Command::Analyze, r#"{"rank":1,"weights":[[1,2]]}"#)).code, 3);
    }
}
