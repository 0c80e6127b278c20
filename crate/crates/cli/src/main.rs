use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kirwan_cli::{run, Command, Input, JobConfig};
use kirwan_core::Exec;

#[derive(Parser)]
#[command(name = "kirwan", version, about = "Kirwan resolutions of torus quotients of affine space")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Input file with rank, weights and bundle; `-` reads standard input.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the final stacky fan as JSON (resolve).
    #[arg(long, global = true)]
    emit_fan: Option<PathBuf>,
    /// Write the ledger as Graphviz (sod).
    #[arg(long, global = true)]
    emit_dot: Option<PathBuf>,
    /// Highest degree for Hilbert data (hilbert).
    #[arg(long, global = true)]
    degree_bound: Option<usize>,
    /// Corpus seed (demo corpus).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON report on standard output. Always on; kept for scripts.
    #[arg(long, global = true, default_value_t = true)]
    json: bool,
    /// Run without rayon.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stability strata and the (H1), (H2) and genericity checks.
    Analyze,
    /// Reichstein tower and the final stacky fan.
    Resolve,
    /// Semi-orthogonal decomposition ledger with its K0 cross-check.
    Sod,
    /// Generator and fullness audits of the bundle.
    Audit,
    /// Graded dimensions of the endomorphism algebra.
    Hilbert,
    /// Built-in scenario: conifold, counterexample75 or corpus.
    Demo { scenario: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, scenario) = match cli.command {
        Cmd::Analyze => (Command::Analyze, None),
        Cmd::Resolve => (Command::Resolve, None),
        Cmd::Sod => (Command::Sod, None),
        Cmd::Audit => (Command::Audit, None),
        Cmd::Hilbert => (Command::Hilbert, None),
        Cmd::Demo { scenario } => (Command::Demo, Some(scenario)),
    };
    let c = cli.common;
    let input = match c.input {
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            if let Err(e) = std::io::Read::read_to_string(&mut std::io::stdin(), &mut s) {
                eprintln!("{}", serde_json::json!({"level": "error", "kind": "io", "message": e.to_string()}));
                return ExitCode::from(3);
            }
            Some(Input::Inline(s))
        }
        Some(p) => Some(Input::File(p)),
        None => None,
    };
    let cfg = JobConfig {
        command,
        input,
        scenario,
        emit_fan: c.emit_fan,
        emit_dot: c.emit_dot,
        degree_bound: c.degree_bound,
        seed: c.seed,
        exec: if c.sequential { Exec::Sequential } else { Exec::Parallel },
    };
    let out = run(&cfg);
    for line in out.diagnostic_lines() {
        eprintln!("{line}");
    }
    if let Some(report) = out.report {
        // a closed pipe downstream is not our failure
        let _ = writeln!(std::io::stdout().lock(), "{report}");
    }
    ExitCode::from(out.code as u8)
}
