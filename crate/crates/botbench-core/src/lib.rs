//! botbench-core: a batch engine for evaluating generated service-robot
//! programs inside a symbolic simulator.
//!
//! The pipeline is: a generator backend ([`gateway`]) produces candidate
//! programs in a small Python-syntax skill DSL ([`lang`]); the symbolic
//! simulator ([`sim`]) executes them against a declarative world model
//! ([`world`]) and records a skill trace; temporal checks ([`rtl`]) decide
//! whether a trace completes its task; the [`evaluator`] classifies failures
//! and computes pass@k statistics over a benchmark [`corpus`]; and the
//! [`resample`] loop filters candidates through stochastic simulation
//! before acceptance.

pub mod corpus;
pub mod evaluator;
pub mod gateway;
pub mod lang;
pub mod resample;
pub mod rtl;
pub mod seed;
pub mod sim;
pub mod world;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use corpus::{load_corpus, load_task, open_world_subset, TaskDefinition};
pub use evaluator::{evaluate_sample, pass_at_k, FailureCategory, FailureRecord, PromptScore};
pub use gateway::{build_prompt, GenerationConfig, PromptRef};
pub use lang::{extract_program, parse, InterpreterError, InterpreterErrorKind, SourceProgram};
pub use rtl::{check, eval_ltl, lower_rtl, parse_rtl, CheckResult, CompletionCategory, LtlFormula, RtlCheck, Verdict};
pub use sim::{
    simulate, simulate_stochastic, RobotErrorKind, RobotExecutionError, SimulationOutcome,
    SimulationResult, StochasticWorldSpec, Trace, TraceElement,
};
pub use world::{load_world, PersonSpec, RobotState, WorldState};

/// Version of the benchmark corpus schema (`schema = N` in world and task files).
pub const CORPUS_SCHEMA_VERSION: u32 = 1;

/// Version of the temporal check grammar (see `docs/rtl_grammar.md`).
pub const RTL_GRAMMAR_VERSION: u32 = 1;
