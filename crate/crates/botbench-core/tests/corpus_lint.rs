//! Corpus lint: every fixture's reference solution simulates to Success and
//! checks SAT on every world case; every fixture ships at least one mutant
//! whose classification matches its declaration.

use std::path::PathBuf;

use botbench_core::corpus::{load_corpus, TaskTag};
use botbench_core::evaluator::lint_task;
use botbench_core::lang::DEFAULT_STEP_BUDGET;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

#[test]
fn fixture_corpus_passes_lint() {
    let tasks = load_corpus(&corpus_dir()).expect("corpus loads");
    assert_eq!(tasks.len(), 6, "six fixture tasks");
    let mut problems = Vec::new();
    for task in &tasks {
        problems.extend(lint_task(task, DEFAULT_STEP_BUDGET));
    }
    assert!(problems.is_empty(), "lint problems:\n{}", problems.join("\n"));
}

#[test]
fn fixtures_cover_every_check_category_and_skill() {
    use botbench_core::rtl::CompletionCategory;
    let tasks = load_corpus(&corpus_dir()).expect("corpus loads");
    let mut categories = std::collections::BTreeSet::new();
    for task in &tasks {
        for case in &task.world_cases {
            for clause in &case.check.clauses {
                categories.insert(clause.label);
            }
        }
    }
    for category in CompletionCategory::ALL {
        assert!(
            categories.contains(&category),
            "no fixture exercises {category}"
        );
    }
    let programs: String = tasks
        .iter()
        .flat_map(|t| t.solutions.iter())
        .map(|s| s.text.clone())
        .collect();
    for skill in botbench_core::sim::SkillKind::ALL {
        assert!(
            programs.contains(skill.fn_name()),
            "no fixture solution uses {}",
            skill.fn_name()
        );
    }
}

#[test]
fn relay_solution_trace_is_go_ask_say() {
    // Hand-walked against the skill semantics: go to the office, ask about
    // lunch (answered yes in this world), relay the lobby message.
    use botbench_core::sim::{simulate, SkillKind, TraceValue};
    let tasks = load_corpus(&corpus_dir()).expect("corpus loads");
    let task = tasks.iter().find(|t| t.name == "lunch_relay").unwrap();
    let yes_case = &task.world_cases[0];
    let result = simulate(&task.solutions[0], &yes_case.world, DEFAULT_STEP_BUDGET);
    assert!(result.outcome.is_success());
    let skills: Vec<SkillKind> = result.trace.elements.iter().map(|e| e.skill).collect();
    assert_eq!(skills, vec![SkillKind::GoTo, SkillKind::Ask, SkillKind::Say]);
    assert_eq!(result.trace.elements[1].result, TraceValue::Str("yes".into()));
    assert!(result.trace.elements[2].args[0].render().contains("lobby"));
    // The no-world case keeps the ask but never relays.
    let no_case = &task.world_cases[1];
    let result = simulate(&task.solutions[0], &no_case.world, DEFAULT_STEP_BUDGET);
    assert!(result.outcome.is_success());
    let skills: Vec<SkillKind> = result.trace.elements.iter().map(|e| e.skill).collect();
    assert_eq!(skills, vec![SkillKind::GoTo, SkillKind::Ask]);
}

#[test]
fn truncating_the_final_say_fails_the_say_clause() {
    use botbench_core::rtl::{check, CompletionCategory, Verdict};
    use botbench_core::sim::simulate;
    let tasks = load_corpus(&corpus_dir()).expect("corpus loads");
    let task = tasks.iter().find(|t| t.name == "lunch_relay").unwrap();
    let yes_case = &task.world_cases[0];
    let mut result = simulate(&task.solutions[0], &yes_case.world, DEFAULT_STEP_BUDGET);
    assert_eq!(check(&result.trace, &yes_case.check).verdict, Verdict::Sat);
    result.trace.elements.pop();
    let truncated = check(&result.trace, &yes_case.check);
    assert_eq!(truncated.verdict, Verdict::Unsat);
    assert!(truncated
        .failed_labels
        .contains(&CompletionCategory::SayAtLocation));
}

#[test]
fn come_back_task_has_two_world_cases() {
    let tasks = load_corpus(&corpus_dir()).expect("corpus loads");
    let come_back = tasks
        .iter()
        .find(|t| t.name == "come_back_tell")
        .expect("come_back_tell fixture");
    assert_eq!(come_back.world_cases.len(), 2);
    assert!(come_back.tags.contains(&TaskTag::ComeBack));
}
