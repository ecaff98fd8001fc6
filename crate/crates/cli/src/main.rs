use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faraday::{execute, load_for_replay, parse_config, parse_override, CliError, Scenario};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "faraday", version, about = "Zeeman-beat Faraday rotation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zeeman coherence time traces with fitted beat frequency and damping.
    Fig2(RunArgs),
    /// Rotation angle and transmitted power of a finite cell.
    Rotation(RunArgs),
    /// Beat frequency and damping as functions of the field.
    SweepB(RunArgs),
    /// Phase of one beam as a function of the other beam's intensity.
    CrossMod(RunArgs),
    /// Evaluate the validity conditions of the closed forms.
    RegimeCheck(RunArgs),
    /// Re-run from the resolved configuration stored in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted-path override, e.g. `system.delta=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Reserved; every scenario is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Fail with exit code 3 when the regime check fails.
    #[arg(long)]
    strict: bool,
}

fn run(scenario: Scenario, args: RunArgs) -> Result<(), CliError> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    let mut overrides = args
        .set
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(out) = &args.out {
        overrides.push(("output_dir".into(), Value::String(out.to_string_lossy().into_owned())));
    }
    let cfg = parse_config(&text, Some(scenario), &overrides)?;
    report(execute(&cfg, args.strict)?);
    Ok(())
}

fn report(m: faraday::RunManifest) {
    eprintln!(
        "{}: {} file(s) in {} ({:.2} s, regime {})",
        m.scenario.name(),
        m.outputs.len(),
        m.resolved.output_dir,
        m.wall_seconds,
        if m.regime_pass { "ok" } else { "violated" }
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fig2(a) => run(Scenario::Fig2, a),
        Command::Rotation(a) => run(Scenario::Rotation, a),
        Command::SweepB(a) => run(Scenario::SweepB, a),
        Command::CrossMod(a) => run(Scenario::CrossMod, a),
        Command::RegimeCheck(a) => run(Scenario::RegimeCheck, a),
        Command::Replay { manifest, out } => {
            load_for_replay(&manifest, out.as_deref()).and_then(|(cfg, strict)| execute(&cfg, strict).map(report))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
