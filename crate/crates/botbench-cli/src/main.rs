//! `botbench`: command-line front end exposing every pipeline stage.
//!
//! Exit codes are a frozen contract:
//!   0 success / SAT
//!   1 check UNSAT
//!   2 simulation ended with an interpreter error
//!   3 simulation ended with a robot execution error
//!   64 usage error (bad flags, missing files)
//!   65 data error (malformed world, task, check, trace, or config)

mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use botbench_core::lang::DEFAULT_STEP_BUDGET;
use botbench_core::rtl::parse_rtl;
use botbench_core::sim::{parse_trace, serialize_trace, simulate, SimulationOutcome};
use botbench_core::{check, SourceProgram, Verdict, CORPUS_SCHEMA_VERSION, RTL_GRAMMAR_VERSION};

const EXIT_UNSAT: u8 = 1;
const EXIT_PYTHON: u8 = 2;
const EXIT_ROBOT: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

fn engine_version() -> String {
    format!(
        "{} (corpus schema {}, rtl grammar {})",
        env!("CARGO_PKG_VERSION"),
        CORPUS_SCHEMA_VERSION,
        RTL_GRAMMAR_VERSION
    )
}

#[derive(Parser)]
#[command(
    name = "botbench",
    version = &*engine_version().leak(),
    about = "Batch evaluation of generated robot skill programs in a symbolic simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one program against one world and print the outcome.
    Simulate {
        /// Program file (.lmp).
        program: PathBuf,
        /// World file (TOML, schema 1).
        world: PathBuf,
        /// Interpreter step budget.
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        budget: u64,
        /// Write the trace in the wire format to this path.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Check a serialized trace against a temporal check file.
    Check {
        /// Trace file in the wire format.
        trace: PathBuf,
        /// Check file (labeled clauses).
        check: PathBuf,
    },
    /// Evaluate a generator over a benchmark corpus and write report files.
    Eval {
        /// Corpus directory (holds tasks/, worlds/, programs/).
        corpus: PathBuf,
        /// Generator config (TOML; corpus or http mode).
        #[arg(long)]
        generator: PathBuf,
        /// Samples per prompt (defaults to the generator config value).
        #[arg(long)]
        samples: Option<u32>,
        /// RNG seed; mandatory for reproducibility.
        #[arg(long)]
        seed: u64,
        /// Directory for report.json, cdf.csv, per_task.csv, failures.csv.
        #[arg(long)]
        report_dir: PathBuf,
        /// Keep only open-world-knowledge tasks and their flagged clauses.
        #[arg(long)]
        open_world_only: bool,
        /// Worker threads over (prompt, sample) units; output is identical
        /// for any value.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Interpreter step budget per simulation.
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        budget: u64,
    },
    /// Rejection-sampling sweep over retry limits; writes sweep CSVs.
    Resample {
        /// Corpus directory.
        corpus: PathBuf,
        /// Generator config (TOML; corpus, http, or scripted mode).
        #[arg(long)]
        generator: PathBuf,
        /// Maximum retry limits to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 4, 8, 100])]
        limits: Vec<u32>,
        /// Stochastic simulations per candidate.
        #[arg(long, default_value_t = 5)]
        runs: u32,
        /// RNG seed; mandatory for reproducibility.
        #[arg(long)]
        seed: u64,
        /// Directory for sweep.csv and sweep_summary.csv.
        #[arg(long)]
        report_dir: PathBuf,
        /// Interpreter step budget per simulation.
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        budget: u64,
    },
}

/// Command failure carrying its exit code.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate {
            program,
            world,
            budget,
            trace_out,
        } => cmd_simulate(&program, &world, budget, trace_out.as_deref()),
        Command::Check { trace, check } => cmd_check(&trace, &check),
        Command::Eval {
            corpus,
            generator,
            samples,
            seed,
            report_dir,
            open_world_only,
            jobs,
            budget,
        } => pipeline::cmd_eval(&pipeline::EvalArgs {
            corpus,
            generator,
            samples,
            seed,
            report_dir,
            open_world_only,
            jobs,
            budget,
            engine_version: engine_version(),
        }),
        Command::Resample {
            corpus,
            generator,
            limits,
            runs,
            seed,
            report_dir,
            budget,
        } => pipeline::cmd_resample(&pipeline::ResampleArgs {
            corpus,
            generator,
            limits,
            runs,
            seed,
            report_dir,
            budget,
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("botbench: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn cmd_simulate(
    program_path: &Path,
    world_path: &Path,
    budget: u64,
    trace_out: Option<&Path>,
) -> Result<u8, Failure> {
    if budget == 0 {
        return Err(Failure::usage("--budget must be positive"));
    }
    let program_text = read_input(program_path)?;
    let world_text = read_input(world_path)?;
    let world = botbench_core::load_world(&world_text)
        .map_err(|e| Failure::data(format!("{}: {e}", world_path.display())))?;
    let origin = program_path.display().to_string();
    let result = simulate(&SourceProgram::new(program_text, origin), &world, budget);
    if let Some(out) = trace_out {
        let case = world_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "world".to_string());
        std::fs::write(out, serialize_trace(&result.trace, &case))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", out.display())))?;
    }
    match &result.outcome {
        SimulationOutcome::Success => {
            println!("Success ({} trace elements)", result.trace.elements.len());
            Ok(0)
        }
        SimulationOutcome::PythonError(e) => {
            println!("PythonError");
            eprintln!("{e}");
            Ok(EXIT_PYTHON)
        }
        SimulationOutcome::RobotError(e) => {
            println!("RobotError");
            eprintln!("{e}");
            Ok(EXIT_ROBOT)
        }
    }
}

fn cmd_check(trace_path: &Path, check_path: &Path) -> Result<u8, Failure> {
    let trace_text = read_input(trace_path)?;
    let check_text = read_input(check_path)?;
    let (trace, _case) = parse_trace(&trace_text)
        .map_err(|e| Failure::data(format!("{}: {e}", trace_path.display())))?;
    let rtl_check = parse_rtl(&check_text)
        .map_err(|e| Failure::data(format!("{}: {e}", check_path.display())))?;
    let result = check(&trace, &rtl_check);
    match result.verdict {
        Verdict::Sat => {
            println!("SAT");
            Ok(0)
        }
        Verdict::Unsat => {
            println!("UNSAT");
            let labels: Vec<&str> = result.failed_labels.iter().map(|l| l.label()).collect();
            println!("failed: {}", labels.join(", "));
            Ok(EXIT_UNSAT)
        }
    }
}
