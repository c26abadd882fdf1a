//! Sample evaluation, failure classification, pass@k, and report
//! aggregation.
//!
//! A sample passes iff every world case simulates to Success and its check
//! is SAT. Each failing case yields exactly one failure record, classified
//! with the precedence interpreter error > robot execution error > task
//! completion.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{ExpectedFailure, TaskDefinition};
use crate::lang::{InterpreterErrorKind, SourceProgram};
use crate::rtl::{check, CompletionCategory, Verdict};
use crate::sim::{simulate, RobotErrorKind, SimulationOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureCategory {
    Python(InterpreterErrorKind),
    Robot(RobotErrorKind),
    Completion(Vec<CompletionCategory>),
}

impl FailureCategory {
    pub fn bucket(&self) -> &'static str {
        match self {
            FailureCategory::Python(_) => "python",
            FailureCategory::Robot(_) => "robot",
            FailureCategory::Completion(_) => "completion",
        }
    }

    /// Sub-kind text: the error kind, or the failed labels joined with ';'.
    pub fn detail(&self) -> String {
        match self {
            FailureCategory::Python(kind) => kind.label().to_string(),
            FailureCategory::Robot(kind) => kind.label().to_string(),
            FailureCategory::Completion(labels) => labels
                .iter()
                .map(|l| l.label())
                .collect::<Vec<_>>()
                .join(";"),
        }
    }

    pub fn matches_expected(&self, expected: &ExpectedFailure) -> bool {
        match (self, expected) {
            (FailureCategory::Python(got), ExpectedFailure::Python(want)) => got == want,
            (FailureCategory::Robot(got), ExpectedFailure::Robot(want)) => got == want,
            (FailureCategory::Completion(got), ExpectedFailure::Completion(want)) => got == want,
            _ => false,
        }
    }
}

/// One failing (sample, world case) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureRecord {
    pub task: String,
    pub prompt_index: usize,
    pub sample_index: usize,
    pub case_index: usize,
    pub category: FailureCategory,
}

#[derive(Debug, Clone)]
pub struct CaseVerdict {
    pub case_index: usize,
    pub passed: bool,
    pub failure: Option<FailureCategory>,
}

#[derive(Debug, Clone)]
pub struct SampleEvaluation {
    pub per_case: Vec<CaseVerdict>,
    /// True iff every world case passed.
    pub passed: bool,
    pub failures: Vec<FailureRecord>,
}

/// Identifies a sample inside the benchmark grid.
#[derive(Debug, Clone, Copy)]
pub struct SampleRef<'a> {
    pub task: &'a str,
    pub prompt_index: usize,
    pub sample_index: usize,
}

/// Simulates the program on every world case of the task and classifies
/// each failing case.
pub fn evaluate_sample(
    program: &SourceProgram,
    task: &TaskDefinition,
    sample: SampleRef<'_>,
    budget: u64,
) -> SampleEvaluation {
    let mut per_case = Vec::with_capacity(task.world_cases.len());
    let mut failures = Vec::new();
    for (case_index, case) in task.world_cases.iter().enumerate() {
        let result = simulate(program, &case.world, budget);
        let failure = match &result.outcome {
            SimulationOutcome::PythonError(e) => Some(FailureCategory::Python(e.kind)),
            SimulationOutcome::RobotError(e) => Some(FailureCategory::Robot(e.kind)),
            SimulationOutcome::Success => {
                let outcome = check(&result.trace, &case.check);
                match outcome.verdict {
                    Verdict::Sat => None,
                    Verdict::Unsat => {
                        Some(FailureCategory::Completion(outcome.failed_labels))
                    }
                }
            }
        };
        if let Some(category) = &failure {
            failures.push(FailureRecord {
                task: sample.task.to_string(),
                prompt_index: sample.prompt_index,
                sample_index: sample.sample_index,
                case_index,
                category: category.clone(),
            });
        }
        per_case.push(CaseVerdict {
            case_index,
            passed: failure.is_none(),
            failure,
        });
    }
    SampleEvaluation {
        passed: per_case.iter().all(|v| v.passed),
        per_case,
        failures,
    }
}

// ---------------------------------------------------------------------------
// pass@k
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("pass@k domain error: n={n}, c={c}, k={k}")]
pub struct PassAtKDomainError {
    pub n: u64,
    pub c: u64,
    pub k: u64,
}

/// Unbiased estimator `1 - C(n-c, k) / C(n, k)` in product form.
/// Requires 0 ≤ c ≤ n and 1 ≤ k ≤ n; `k = 1` reduces to `c / n`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, PassAtKDomainError> {
    if c > n || k < 1 || k > n {
        return Err(PassAtKDomainError { n, c, k });
    }
    if n - c < k {
        // Fewer failures than slots: every subset contains a pass.
        return Ok(1.0);
    }
    let mut miss = 1.0f64;
    for i in 0..k {
        miss *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}

/// Per-prompt tally: `n` samples generated, `c` passing all world cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptScore {
    pub task: String,
    pub prompt_index: usize,
    pub n: u64,
    pub c: u64,
}

impl PromptScore {
    /// pass@1 as the exact rational c/n, formatted to 4 decimals.
    pub fn pass1(&self) -> String {
        format_ratio(self.c as u128, self.n.max(1) as u128)
    }
}

/// Formats num/den to 4 decimal places, rounding half up, using integer
/// arithmetic only (no float round-off in reports).
pub fn format_ratio(num: u128, den: u128) -> String {
    assert!(den > 0, "ratio denominator must be positive");
    let scaled = (num * 20_000 + den) / (2 * den);
    format!("{}.{:04}", scaled / 10_000, scaled % 10_000)
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub engine_version: String,
    pub corpus_schema: u32,
    pub rtl_grammar: u32,
    pub generator: String,
    pub prefix_hash: String,
    pub seed: u64,
    pub samples_per_prompt: u64,
    pub open_world_only: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CdfPoint {
    pub threshold: String,
    pub percent_prompts_at_or_above: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct TaskSummary {
    pub task: String,
    pub prompts: usize,
    pub mean_pass1: String,
    pub min_pass1: String,
    pub max_pass1: String,
}

/// Failure counts at case granularity: a sample that fails two cases
/// contributes two counts; each failed completion label counts once per
/// failing case.
#[derive(Debug, Clone, Serialize, Default, PartialEq, Eq)]
pub struct FailureHistogram {
    pub python: u64,
    pub robot: u64,
    pub completion: u64,
    pub python_kinds: BTreeMap<String, u64>,
    pub robot_kinds: BTreeMap<String, u64>,
    pub completion_categories: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct PromptScoreRow {
    pub task: String,
    pub prompt_index: usize,
    pub n: u64,
    pub c: u64,
    pub pass1: String,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FailureRow {
    pub task: String,
    pub prompt_index: usize,
    pub sample_index: usize,
    pub case_index: usize,
    pub category: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metadata: ReportMeta,
    pub cdf: Vec<CdfPoint>,
    pub per_task: Vec<TaskSummary>,
    pub histogram: FailureHistogram,
    /// Fraction of prompts with zero passing samples.
    pub zero_pass_fraction: String,
    pub prompt_scores: Vec<PromptScoreRow>,
    pub failures: Vec<FailureRow>,
}

/// Deterministic fold over scores and failure records. Inputs are sorted
/// internally, so the report is independent of evaluation order.
pub fn aggregate(
    scores: &[PromptScore],
    failures: &[FailureRecord],
    metadata: ReportMeta,
) -> Report {
    let mut scores: Vec<PromptScore> = scores.to_vec();
    scores.sort_by(|a, b| (&a.task, a.prompt_index).cmp(&(&b.task, b.prompt_index)));
    let mut failures: Vec<FailureRecord> = failures.to_vec();
    failures.sort_by(|a, b| {
        (&a.task, a.prompt_index, a.sample_index, a.case_index).cmp(&(
            &b.task,
            b.prompt_index,
            b.sample_index,
            b.case_index,
        ))
    });

    // CDF over thresholds {i/n}: percentage of prompts with pass@1 >= i/n.
    let grid = scores.iter().map(|s| s.n).max().unwrap_or(0);
    let total_prompts = scores.len() as u128;
    let mut cdf = Vec::new();
    for i in 0..=grid {
        let at_or_above = scores
            .iter()
            .filter(|s| (s.c as u128) * (grid as u128) >= (i as u128) * (s.n as u128))
            .count() as u128;
        cdf.push(CdfPoint {
            threshold: format_ratio(i as u128, grid.max(1) as u128),
            percent_prompts_at_or_above: format_ratio(
                at_or_above * 100,
                total_prompts.max(1),
            ),
        });
    }

    // Per-task mean/min/max of the exact per-prompt rationals.
    let mut by_task: BTreeMap<&str, Vec<&PromptScore>> = BTreeMap::new();
    for score in &scores {
        by_task.entry(&score.task).or_default().push(score);
    }
    let per_task = by_task
        .iter()
        .map(|(task, prompt_scores)| {
            let (mut num, mut den): (u128, u128) = (0, 1);
            for s in prompt_scores.iter() {
                let (n2, d2) = (s.c as u128, s.n.max(1) as u128);
                num = num * d2 + n2 * den;
                den *= d2;
                let g = gcd(num.max(1), den);
                num /= g;
                den /= g;
            }
            den *= prompt_scores.len().max(1) as u128;
            let min = prompt_scores
                .iter()
                .min_by(|a, b| ((a.c as u128) * (b.n as u128)).cmp(&((b.c as u128) * (a.n as u128))))
                .expect("non-empty group");
            let max = prompt_scores
                .iter()
                .max_by(|a, b| ((a.c as u128) * (b.n as u128)).cmp(&((b.c as u128) * (a.n as u128))))
                .expect("non-empty group");
            TaskSummary {
                task: task.to_string(),
                prompts: prompt_scores.len(),
                mean_pass1: format_ratio(num, den),
                min_pass1: min.pass1(),
                max_pass1: max.pass1(),
            }
        })
        .collect();

    let mut histogram = FailureHistogram::default();
    for record in &failures {
        match &record.category {
            FailureCategory::Python(kind) => {
                histogram.python += 1;
                *histogram
                    .python_kinds
                    .entry(kind.label().to_string())
                    .or_default() += 1;
            }
            FailureCategory::Robot(kind) => {
                histogram.robot += 1;
                *histogram
                    .robot_kinds
                    .entry(kind.label().to_string())
                    .or_default() += 1;
            }
            FailureCategory::Completion(labels) => {
                histogram.completion += 1;
                for label in labels {
                    *histogram
                        .completion_categories
                        .entry(label.label().to_string())
                        .or_default() += 1;
                }
            }
        }
    }

    let zero_pass = scores.iter().filter(|s| s.c == 0).count() as u128;
    let prompt_scores = scores
        .iter()
        .map(|s| PromptScoreRow {
            task: s.task.clone(),
            prompt_index: s.prompt_index,
            n: s.n,
            c: s.c,
            pass1: s.pass1(),
        })
        .collect();
    let failure_rows = failures
        .iter()
        .map(|record| FailureRow {
            task: record.task.clone(),
            prompt_index: record.prompt_index,
            sample_index: record.sample_index,
            case_index: record.case_index,
            category: record.category.bucket().to_string(),
            detail: record.category.detail(),
        })
        .collect();

    Report {
        metadata,
        cdf,
        per_task,
        histogram,
        zero_pass_fraction: format_ratio(zero_pass, total_prompts.max(1)),
        prompt_scores,
        failures: failure_rows,
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// `cdf.csv`: threshold, percent_prompts_at_or_above.
    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("threshold,percent_prompts_at_or_above\n");
        for point in &self.cdf {
            out.push_str(&format!(
                "{},{}\n",
                point.threshold, point.percent_prompts_at_or_above
            ));
        }
        out
    }

    /// `per_task.csv`: task, prompts, mean_pass1, min_pass1, max_pass1.
    pub fn per_task_csv(&self) -> String {
        let mut out = String::from("task,prompts,mean_pass1,min_pass1,max_pass1\n");
        for row in &self.per_task {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_quote(&row.task),
                row.prompts,
                row.mean_pass1,
                row.min_pass1,
                row.max_pass1
            ));
        }
        out
    }

    /// `failures.csv`: histogram rows as category, kind, count.
    pub fn failures_csv(&self) -> String {
        let mut out = String::from("category,kind,count\n");
        for (kind, count) in &self.histogram.python_kinds {
            out.push_str(&format!("python,{},{}\n", csv_quote(kind), count));
        }
        for (kind, count) in &self.histogram.robot_kinds {
            out.push_str(&format!("robot,{},{}\n", csv_quote(kind), count));
        }
        for (kind, count) in &self.histogram.completion_categories {
            out.push_str(&format!("completion,{},{}\n", csv_quote(kind), count));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Corpus lint
// ---------------------------------------------------------------------------

/// Checks the corpus invariants of one task: every reference solution
/// passes every world case, at least one mutant exists, every mutant fails,
/// and every mutant failure matches its declared classification.
pub fn lint_task(task: &TaskDefinition, budget: u64) -> Vec<String> {
    let mut problems = Vec::new();
    if task.solutions.is_empty() {
        problems.push(format!("task {}: no reference solution", task.name));
    }
    for (index, solution) in task.solutions.iter().enumerate() {
        let eval = evaluate_sample(
            solution,
            task,
            SampleRef {
                task: &task.name,
                prompt_index: 0,
                sample_index: index,
            },
            budget,
        );
        for record in &eval.failures {
            problems.push(format!(
                "task {}: solution {} fails case {} with {}:{}",
                task.name,
                index,
                record.case_index,
                record.category.bucket(),
                record.category.detail()
            ));
        }
    }
    if task.mutants.is_empty() {
        problems.push(format!("task {}: no mutants", task.name));
    }
    for (index, mutant) in task.mutants.iter().enumerate() {
        let eval = evaluate_sample(
            &mutant.program,
            task,
            SampleRef {
                task: &task.name,
                prompt_index: 0,
                sample_index: index,
            },
            budget,
        );
        if eval.passed {
            problems.push(format!(
                "task {}: mutant {} unexpectedly passes all cases",
                task.name, index
            ));
            continue;
        }
        for record in &eval.failures {
            if !record.category.matches_expected(&mutant.expected) {
                problems.push(format!(
                    "task {}: mutant {} case {} classified {}:{}, expected {:?}",
                    task.name,
                    index,
                    record.case_index,
                    record.category.bucket(),
                    record.category.detail(),
                    mutant.expected
                ));
            }
        }
    }
    problems
}
