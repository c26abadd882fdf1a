//! Eval and resample orchestration: corpus loading, generation, parallel
//! evaluation over (prompt, sample) units, and report emission. The report
//! bytes are identical for any worker count: units are evaluated
//! independently and aggregation sorts before folding.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use botbench_core::corpus::{load_corpus, open_world_subset, TaskDefinition, TaskTag};
use botbench_core::evaluator::{
    aggregate, evaluate_sample, FailureRecord, PromptScore, Report, ReportMeta, SampleRef,
};
use botbench_core::gateway::{
    build_prompt, generate, BackendMode, GenerationConfig, PromptPrefix, PromptRef,
};
use botbench_core::resample::{
    resample_sweep, FileCorpusGenerator, GeneratorError, GeneratorPort, ScriptedGenerator,
    SweepReport,
};
use botbench_core::{CORPUS_SCHEMA_VERSION, RTL_GRAMMAR_VERSION};

use crate::Failure;

pub struct EvalArgs {
    pub corpus: PathBuf,
    pub generator: PathBuf,
    pub samples: Option<u32>,
    pub seed: u64,
    pub report_dir: PathBuf,
    pub open_world_only: bool,
    pub jobs: usize,
    pub budget: u64,
    pub engine_version: String,
}

pub struct ResampleArgs {
    pub corpus: PathBuf,
    pub generator: PathBuf,
    pub limits: Vec<u32>,
    pub runs: u32,
    pub seed: u64,
    pub report_dir: PathBuf,
    pub budget: u64,
}

fn load_tasks(corpus: &Path, open_world_only: bool) -> Result<Vec<TaskDefinition>, Failure> {
    let tasks = load_corpus(corpus).map_err(|e| Failure::data(e.to_string()))?;
    if tasks.is_empty() {
        return Err(Failure::data(format!(
            "no task documents found under {}",
            corpus.display()
        )));
    }
    if !open_world_only {
        return Ok(tasks);
    }
    let mut subset = Vec::new();
    for task in &tasks {
        if task.tags.contains(&TaskTag::OpenWorldKnowledge) {
            subset.push(open_world_subset(task).map_err(|e| Failure::data(e.to_string()))?);
        }
    }
    if subset.is_empty() {
        return Err(Failure::data(
            "no tasks tagged open_world_knowledge in this corpus",
        ));
    }
    Ok(subset)
}

fn load_generator_config(path: &Path) -> Result<GenerationConfig, Failure> {
    if !path.exists() {
        return Err(Failure::usage(format!(
            "generator config {} does not exist",
            path.display()
        )));
    }
    GenerationConfig::load(path).map_err(|e| Failure::data(e.to_string()))
}

fn write_report_file(dir: &Path, name: &str, content: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_eval(args: &EvalArgs) -> Result<u8, Failure> {
    if args.jobs == 0 {
        return Err(Failure::usage("--jobs must be positive"));
    }
    if args.budget == 0 {
        return Err(Failure::usage("--budget must be positive"));
    }
    let tasks = load_tasks(&args.corpus, args.open_world_only)?;
    let config = load_generator_config(&args.generator)?;
    if config.mode == BackendMode::Scripted {
        return Err(Failure::data(
            "eval requires a corpus or http generator; scripted mode is for resample",
        ));
    }
    if let Some(samples) = args.samples {
        if samples == 0 {
            return Err(Failure::usage("--samples must be positive"));
        }
    }
    let samples = args.samples.unwrap_or(config.samples_per_prompt);
    let prefix = PromptPrefix::default_prefix();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::usage(format!("cannot build worker pool: {e}")))?;

    // Phase 1: generate every prompt's samples (parallel over prompts).
    let prompts: Vec<(usize, usize)> = tasks
        .iter()
        .enumerate()
        .flat_map(|(t, task)| (0..task.prompts.len()).map(move |p| (t, p)))
        .collect();
    let generated: Vec<Result<Vec<botbench_core::SourceProgram>, Failure>> =
        pool.install(|| {
            prompts
                .par_iter()
                .map(|&(task_index, prompt_index)| {
                    let task = &tasks[task_index];
                    let text = build_prompt(&task.prompts[prompt_index], &prefix)
                        .map_err(|e| Failure::data(e.to_string()))?;
                    let prompt = PromptRef {
                        id: task.prompt_id(prompt_index),
                        text,
                    };
                    generate(&prompt, &config, samples).map_err(|e| Failure::data(e.to_string()))
                })
                .collect()
        });
    let mut programs_by_prompt = Vec::with_capacity(generated.len());
    for result in generated {
        programs_by_prompt.push(result?);
    }

    // Phase 2: evaluate (prompt, sample) units in parallel; the report is
    // independent of scheduling because aggregation sorts before folding.
    let units: Vec<(usize, usize)> = (0..prompts.len())
        .flat_map(|slot| (0..programs_by_prompt[slot].len()).map(move |s| (slot, s)))
        .collect();
    let evaluations: Vec<(bool, Vec<FailureRecord>)> = pool.install(|| {
        units
            .par_iter()
            .map(|&(slot, sample_index)| {
                let (task_index, prompt_index) = prompts[slot];
                let task = &tasks[task_index];
                let evaluation = evaluate_sample(
                    &programs_by_prompt[slot][sample_index],
                    task,
                    SampleRef {
                        task: &task.name,
                        prompt_index,
                        sample_index,
                    },
                    args.budget,
                );
                (evaluation.passed, evaluation.failures)
            })
            .collect()
    });

    // Phase 3: fold per-prompt tallies.
    let mut scores: Vec<PromptScore> = prompts
        .iter()
        .enumerate()
        .map(|(slot, &(task_index, prompt_index))| PromptScore {
            task: tasks[task_index].name.clone(),
            prompt_index,
            n: programs_by_prompt[slot].len() as u64,
            c: 0,
        })
        .collect();
    let mut failures = Vec::new();
    for (&(slot, _), (passed, records)) in units.iter().zip(evaluations) {
        if passed {
            scores[slot].c += 1;
        }
        failures.extend(records);
    }

    let report = aggregate(
        &scores,
        &failures,
        ReportMeta {
            engine_version: args.engine_version.clone(),
            corpus_schema: CORPUS_SCHEMA_VERSION,
            rtl_grammar: RTL_GRAMMAR_VERSION,
            generator: config.backend_id().to_string(),
            prefix_hash: prefix.hash(),
            seed: args.seed,
            samples_per_prompt: samples as u64,
            open_world_only: args.open_world_only,
        },
    );
    write_reports(&args.report_dir, &report)?;
    println!(
        "evaluated {} task(s), {} prompt(s), {} sample(s)",
        tasks.len(),
        scores.len(),
        scores.iter().map(|s| s.n).sum::<u64>()
    );
    println!("report: {}", args.report_dir.join("report.json").display());
    Ok(0)
}

fn write_reports(dir: &Path, report: &Report) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    write_report_file(dir, "report.json", &report.to_json())?;
    write_report_file(dir, "cdf.csv", &report.cdf_csv())?;
    write_report_file(dir, "per_task.csv", &report.per_task_csv())?;
    write_report_file(dir, "failures.csv", &report.failures_csv())?;
    Ok(())
}

/// HTTP-backed candidate source for the resampling loop: one fresh sample
/// per attempt.
struct GatewayGenerator {
    config: GenerationConfig,
}

impl GeneratorPort for GatewayGenerator {
    fn next_candidate(
        &mut self,
        prompt: &PromptRef,
        _attempt: u32,
    ) -> Result<botbench_core::SourceProgram, GeneratorError> {
        let mut programs = generate(prompt, &self.config, 1)
            .map_err(|e| GeneratorError(e.to_string()))?;
        if programs.is_empty() {
            return Err(GeneratorError("backend returned no samples".to_string()));
        }
        Ok(programs.remove(0))
    }
}

fn build_resample_generator(
    config: &GenerationConfig,
) -> Result<Box<dyn GeneratorPort>, Failure> {
    match config.mode {
        BackendMode::Corpus => Ok(Box::new(FileCorpusGenerator::new(&config.endpoint))),
        BackendMode::Http => Ok(Box::new(GatewayGenerator {
            config: config.clone(),
        })),
        BackendMode::Scripted => {
            let mut generator = ScriptedGenerator::new();
            for script in &config.scripts {
                let mut texts = Vec::with_capacity(script.programs.len());
                for path in &script.programs {
                    let text = fs::read_to_string(path).map_err(|e| {
                        Failure::data(format!("scripted program {path}: {e}"))
                    })?;
                    texts.push(text);
                }
                let refs: Vec<&str> = texts.iter().map(|t| t.as_str()).collect();
                generator = generator.script(&script.prompt, &refs);
            }
            Ok(Box::new(generator))
        }
    }
}

pub fn cmd_resample(args: &ResampleArgs) -> Result<u8, Failure> {
    if args.runs == 0 {
        return Err(Failure::usage("--runs must be positive"));
    }
    if args.limits.is_empty() || args.limits.contains(&0) {
        return Err(Failure::usage("--limits must be positive integers"));
    }
    if args.budget == 0 {
        return Err(Failure::usage("--budget must be positive"));
    }
    let tasks = load_tasks(&args.corpus, false)?;
    let config = load_generator_config(&args.generator)?;
    let mut generator = build_resample_generator(&config)?;

    // Prompts in a sweep carry the assembled text for http backends; file
    // and scripted backends key on the id only.
    let prefix = PromptPrefix::default_prefix();
    let mut prompt_checked_tasks = Vec::with_capacity(tasks.len());
    for task in tasks {
        for prompt in &task.prompts {
            build_prompt(prompt, &prefix).map_err(|e| Failure::data(e.to_string()))?;
        }
        prompt_checked_tasks.push(task);
    }

    let report = resample_sweep(
        generator.as_mut(),
        &prompt_checked_tasks,
        &args.limits,
        args.runs,
        args.seed,
        args.budget,
    );
    write_sweep(&args.report_dir, &report)?;
    for summary in &report.summaries {
        println!(
            "limit {:>4}: executable {}, post-filter pass {}",
            summary.limit, summary.executable_fraction, summary.post_filter_pass_fraction
        );
    }
    println!("sweep: {}", args.report_dir.join("sweep.csv").display());
    Ok(0)
}

fn write_sweep(dir: &Path, report: &SweepReport) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    write_report_file(dir, "sweep.csv", &report.to_csv())?;
    write_report_file(dir, "sweep_summary.csv", &report.summary_csv())?;
    Ok(())
}
