use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use ghflow::cli::{self, execute::ExecError, RunReport, Scenario, ScenarioError};
use ghflow::stability;

#[derive(Parser)]
#[command(name = "ghflow", version, about = "Curve flow in Gibbons-Hawking potentials, through neck pinches")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or bundled scenario and write its outputs.
    Run {
        scenario: String,
        /// Output root; overrides GHFLOW_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled scenarios.
    List,
    /// Stability classification of a scenario's initial curve.
    Classify { scenario: String },
    /// Predicted limit chain of a scenario's initial curve.
    Oracle { scenario: String },
    /// Summarize the report in a run directory.
    Report { run_dir: PathBuf },
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Validation(e.into())
    }
}

fn load(arg: &str) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Validation)?;
        Ok(cli::parse_scenario(&text)?)
    } else {
        Ok(cli::bundled(arg)?)
    }
}

fn print_report(r: &RunReport) {
    println!("scenario {}: {:?} at t = {:.6} ({:.2} s)", r.scenario, r.termination, r.final_time, r.elapsed_seconds);
    for e in &r.events {
        println!("  surgery at singularity {} t = {:.6} (+/- {:.1e})", e.singularity, e.singular_time, e.time_uncertainty);
    }
    if !r.chain_phases_degrees.is_empty() {
        let p: Vec<String> = r.chain_phases_degrees.iter().map(|x| format!("{x:.2}")).collect();
        println!("  chain phases (deg): {}", p.join(", "));
    }
    if let Some(d) = &r.destabilization {
        println!("  destabilization: {}", d.bracketing);
    }
    for f in &r.flags {
        let measured = f.measured.map(|m| format!("{m:.4e}")).unwrap_or_else(|| "n/a".into());
        println!("  [{}] {} measured {measured} threshold {:.4e}", if f.pass { "PASS" } else { "FAIL" }, f.name, f.threshold);
    }
    for p in &r.partial_outputs {
        println!("  not written: {p}");
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::List => {
            for (name, description) in cli::list_scenarios() {
                println!("{name:22} {description}");
            }
        }
        Command::Run { scenario, out } => {
            let s = load(&scenario)?;
            let root = out.unwrap_or_else(cli::output_root);
            let (report, dir) = cli::execute(&s, &root).map_err(|e| match e {
                ExecError::Scenario(e) => Failure::Validation(e.into()),
                e => Failure::Runtime(e.into()),
            })?;
            print_report(&report);
            println!("outputs in {}", dir.display());
            if !report.all_pass() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Classify { scenario } => {
            let s = load(&scenario)?;
            let (field, curve) = s.validate()?;
            let v = stability::classify(&field, &curve).map_err(|e| Failure::Runtime(e.into()))?;
            println!("{}", serde_json::to_string_pretty(&v).expect("verdict serializes"));
        }
        Command::Oracle { scenario } => {
            let s = load(&scenario)?;
            let (field, curve) = s.validate()?;
            let c = stability::limit_oracle(&field, &curve).map_err(|e| Failure::Runtime(e.into()))?;
            let value = serde_json::json!({
                "chain": c,
                "phases_degrees": stability::phases_degrees(&c),
                "destabilization": stability::destabilization_order(&c),
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("oracle serializes"));
        }
        Command::Report { run_dir } => {
            let path = run_dir.join("report.json");
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Runtime)?;
            let report: RunReport = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))
                .map_err(Failure::Validation)?;
            print_report(&report);
            if !report.all_pass() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Args::parse().command) {
        Ok(code) => code,
        Err(Failure::Validation(e)) => {
            eprintln!("validation error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("runtime error: {e:#}");
            ExitCode::from(2)
        }
    }
}
