//! Benchmark task schema and loader. A task bundles prompt paraphrases,
//! world cases with their temporal checks, difficulty tags, and corpus
//! programs (reference solutions and classified mutants) used by lint and
//! the acceptance suites.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{InterpreterErrorKind, SourceProgram};
use crate::rtl::{parse_rtl, CompletionCategory, RtlCheck};
use crate::sim::RobotErrorKind;
use crate::world::{load_world, WorldState};
use crate::CORPUS_SCHEMA_VERSION;

/// Paraphrase count per task.
pub const PROMPTS_PER_TASK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskTag {
    OpenWorldKnowledge,
    Arithmetic,
    ControlFlow,
    ExhaustiveSearch,
    ComeBack,
}

impl fmt::Display for TaskTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            TaskTag::OpenWorldKnowledge => "open_world_knowledge",
            TaskTag::Arithmetic => "arithmetic",
            TaskTag::ControlFlow => "control_flow",
            TaskTag::ExhaustiveSearch => "exhaustive_search",
            TaskTag::ComeBack => "come_back",
        };
        f.write_str(label)
    }
}

/// One world to simulate in, with the check that defines correct behavior
/// for that world.
#[derive(Debug, Clone)]
pub struct WorldCase {
    pub name: String,
    pub world: WorldState,
    pub check: RtlCheck,
}

/// Expected classification of a mutant program, asserted by corpus lint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpectedFailure {
    Python(InterpreterErrorKind),
    Robot(RobotErrorKind),
    Completion(Vec<CompletionCategory>),
}

#[derive(Debug, Clone)]
pub struct Mutant {
    pub program: SourceProgram,
    pub expected: ExpectedFailure,
}

#[derive(Debug, Clone)]
pub struct TaskDefinition {
    pub name: String,
    pub prompts: Vec<String>,
    pub world_cases: Vec<WorldCase>,
    pub tags: BTreeSet<TaskTag>,
    pub solutions: Vec<SourceProgram>,
    pub mutants: Vec<Mutant>,
}

impl TaskDefinition {
    pub fn prompt_id(&self, prompt_index: usize) -> String {
        format!("{}-p{}", self.name, prompt_index)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("task {task}: not valid TOML: {source}")]
    Toml {
        task: String,
        source: toml::de::Error,
    },
    #[error("task {task}: schema: expected version {expected}, found {found}")]
    SchemaVersion {
        task: String,
        expected: u32,
        found: u32,
    },
    #[error("task {task}: prompts: expected exactly {expected}, found {found}")]
    PromptCount {
        task: String,
        expected: usize,
        found: usize,
    },
    #[error("task {task}: prompts: duplicate prompt text at index {index}")]
    DuplicatePrompt { task: String, index: usize },
    #[error("task {task}: cases: at least one world case is required")]
    NoCases { task: String },
    #[error("task {task}, case {case}: world: {source}")]
    World {
        task: String,
        case: String,
        source: crate::world::WorldError,
    },
    #[error("task {task}, case {case}: check: {source}")]
    Check {
        task: String,
        case: String,
        source: crate::rtl::RtlParseError,
    },
    #[error("task {task}, case {case}: open_world_labels: unknown clause label {label:?}")]
    UnknownOpenWorldLabel {
        task: String,
        case: String,
        label: String,
    },
    #[error("task {task}: mutants[{index}].expected: {message}")]
    BadExpected {
        task: String,
        index: usize,
        message: String,
    },
    #[error("task {task}: {message}")]
    Invalid { task: String, message: String },
    #[error("task {task} is not tagged open_world_knowledge")]
    NotOpenWorldTask { task: String },
    #[error("task {task}, case {case}: no clauses carry the open_world flag")]
    NoOpenWorldClauses { task: String, case: String },
}

// Serde image of the task document.
#[derive(Debug, Deserialize)]
struct TaskDoc {
    schema: u32,
    name: String,
    prompts: Vec<String>,
    #[serde(default)]
    tags: Vec<TaskTag>,
    cases: Vec<CaseDoc>,
    #[serde(default)]
    solutions: Vec<String>,
    #[serde(default)]
    mutants: Vec<MutantDoc>,
}

#[derive(Debug, Deserialize)]
struct CaseDoc {
    world: WorldRef,
    check: String,
    #[serde(default)]
    open_world_labels: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum WorldRef {
    Path(String),
    Inline(toml::Table),
}

#[derive(Debug, Deserialize)]
struct MutantDoc {
    program: String,
    expected: ExpectedDoc,
}

#[derive(Debug, Deserialize)]
struct ExpectedDoc {
    #[serde(default)]
    python: Option<String>,
    #[serde(default)]
    robot: Option<String>,
    #[serde(default)]
    completion: Option<Vec<String>>,
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and validates one task document. File references inside the
/// document resolve relative to the document's directory.
pub fn load_task(path: &Path) -> Result<TaskDefinition, CorpusError> {
    let text = read_file(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let doc: TaskDoc = toml::from_str(&text).map_err(|source| CorpusError::Toml {
        task: path.display().to_string(),
        source,
    })?;
    task_from_doc(doc, base)
}

fn task_from_doc(doc: TaskDoc, base: &Path) -> Result<TaskDefinition, CorpusError> {
    let task = doc.name.clone();
    if doc.schema != CORPUS_SCHEMA_VERSION {
        return Err(CorpusError::SchemaVersion {
            task,
            expected: CORPUS_SCHEMA_VERSION,
            found: doc.schema,
        });
    }
    if doc.prompts.len() != PROMPTS_PER_TASK {
        return Err(CorpusError::PromptCount {
            task,
            expected: PROMPTS_PER_TASK,
            found: doc.prompts.len(),
        });
    }
    for (index, prompt) in doc.prompts.iter().enumerate() {
        if doc.prompts[..index].contains(prompt) {
            return Err(CorpusError::DuplicatePrompt { task, index });
        }
    }
    if doc.cases.is_empty() {
        return Err(CorpusError::NoCases { task });
    }

    let mut world_cases = Vec::with_capacity(doc.cases.len());
    for (index, case) in doc.cases.iter().enumerate() {
        let (case_name, world_text) = match &case.world {
            WorldRef::Path(rel) => {
                let path = base.join(rel);
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| format!("case{index}"));
                (name, read_file(&path)?)
            }
            WorldRef::Inline(table) => (
                format!("{}_case{}", doc.name, index),
                toml::to_string(table).expect("table reserializes"),
            ),
        };
        let world = load_world(&world_text).map_err(|source| CorpusError::World {
            task: doc.name.clone(),
            case: case_name.clone(),
            source,
        })?;
        let mut check = parse_rtl(&case.check).map_err(|source| CorpusError::Check {
            task: doc.name.clone(),
            case: case_name.clone(),
            source,
        })?;
        for label in &case.open_world_labels {
            let category = CompletionCategory::parse_label(label).ok_or_else(|| {
                CorpusError::UnknownOpenWorldLabel {
                    task: doc.name.clone(),
                    case: case_name.clone(),
                    label: label.clone(),
                }
            })?;
            let mut hit = false;
            for clause in check.clauses.iter_mut() {
                if clause.label == category {
                    clause.open_world = true;
                    hit = true;
                }
            }
            if !hit {
                return Err(CorpusError::UnknownOpenWorldLabel {
                    task: doc.name.clone(),
                    case: case_name,
                    label: label.clone(),
                });
            }
        }
        world_cases.push(WorldCase {
            name: case_name,
            world,
            check,
        });
    }

    let mut solutions = Vec::with_capacity(doc.solutions.len());
    for (index, rel) in doc.solutions.iter().enumerate() {
        let text = read_file(&base.join(rel))?;
        solutions.push(SourceProgram::new(
            text,
            format!("{}:solution{}", doc.name, index),
        ));
    }
    let mut mutants = Vec::with_capacity(doc.mutants.len());
    for (index, mutant) in doc.mutants.iter().enumerate() {
        let text = read_file(&base.join(&mutant.program))?;
        let expected = parse_expected(&mutant.expected).map_err(|message| {
            CorpusError::BadExpected {
                task: doc.name.clone(),
                index,
                message,
            }
        })?;
        mutants.push(Mutant {
            program: SourceProgram::new(text, format!("{}:mutant{}", doc.name, index)),
            expected,
        });
    }

    Ok(TaskDefinition {
        name: doc.name,
        prompts: doc.prompts,
        world_cases,
        tags: doc.tags.into_iter().collect(),
        solutions,
        mutants,
    })
}

fn parse_expected(doc: &ExpectedDoc) -> Result<ExpectedFailure, String> {
    let set = [
        doc.python.is_some(),
        doc.robot.is_some(),
        doc.completion.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if set != 1 {
        return Err("exactly one of python, robot, completion is required".to_string());
    }
    if let Some(kind) = &doc.python {
        return InterpreterErrorKind::parse_label(kind)
            .map(ExpectedFailure::Python)
            .ok_or_else(|| format!("unknown interpreter error kind {kind:?}"));
    }
    if let Some(kind) = &doc.robot {
        return RobotErrorKind::parse_label(kind)
            .map(ExpectedFailure::Robot)
            .ok_or_else(|| format!("unknown robot error kind {kind:?}"));
    }
    let labels = doc.completion.as_ref().unwrap();
    if labels.is_empty() {
        return Err("completion categories must be non-empty".to_string());
    }
    let mut categories = Vec::with_capacity(labels.len());
    for label in labels {
        categories.push(
            CompletionCategory::parse_label(label)
                .ok_or_else(|| format!("unknown completion category {label:?}"))?,
        );
    }
    Ok(ExpectedFailure::Completion(categories))
}

/// Loads every task under `corpus_dir` (a `tasks/` subdirectory if present,
/// otherwise the directory itself), sorted by file name.
pub fn load_corpus(corpus_dir: &Path) -> Result<Vec<TaskDefinition>, CorpusError> {
    let tasks_dir = if corpus_dir.join("tasks").is_dir() {
        corpus_dir.join("tasks")
    } else {
        corpus_dir.to_path_buf()
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(&tasks_dir)
        .map_err(|source| CorpusError::Io {
            path: tasks_dir.clone(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| path.extension().map(|e| e == "toml").unwrap_or(false))
        .collect();
    paths.sort();
    let mut tasks = Vec::with_capacity(paths.len());
    for path in paths {
        tasks.push(load_task(&path)?);
    }
    Ok(tasks)
}

/// Reduces a task to its open-world-knowledge clauses: every case keeps
/// only the clauses flagged `open_world`. Idempotent.
pub fn open_world_subset(task: &TaskDefinition) -> Result<TaskDefinition, CorpusError> {
    if !task.tags.contains(&TaskTag::OpenWorldKnowledge) {
        return Err(CorpusError::NotOpenWorldTask {
            task: task.name.clone(),
        });
    }
    let mut subset = task.clone();
    for case in subset.world_cases.iter_mut() {
        case.check.clauses.retain(|clause| clause.open_world);
        if case.check.clauses.is_empty() {
            return Err(CorpusError::NoOpenWorldClauses {
                task: task.name.clone(),
                case: case.name.clone(),
            });
        }
    }
    Ok(subset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(path: &Path, content: &str) {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        let mut f = fs::File::create(path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
    }

    const WORLD: &str = "schema = 1\nrooms = [\"office\", \"lobby\"]\nrobot_start = \"lobby\"\n";

    fn minimal_task_doc(prompts: &[&str]) -> String {
        let prompts = prompts
            .iter()
            .map(|p| format!("{p:?}"))
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "schema = 1\nname = \"t\"\nprompts = [{prompts}]\n\n\
             [[cases]]\nworld = \"w.toml\"\ncheck = \"SayAtLocation: F say(/hi/)\"\n"
        )
    }

    #[test]
    fn loads_task_with_world_ref_and_inline_world() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("w.toml"), WORLD);
        write(
            &dir.path().join("t.toml"),
            &format!(
                "{}\n[[cases]]\ncheck = \"SayAtLocation: F say(/hi/)\"\n\
                 [cases.world]\nschema = 1\nrooms = [\"den\"]\nrobot_start = \"den\"\n",
                minimal_task_doc(&["a", "b", "c", "d", "e"])
            ),
        );
        let task = load_task(&dir.path().join("t.toml")).unwrap();
        assert_eq!(task.world_cases.len(), 2);
        assert_eq!(task.world_cases[0].name, "w");
        assert_eq!(task.world_cases[1].world.rooms, vec!["den"]);
    }

    #[test]
    fn wrong_prompt_count_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("w.toml"), WORLD);
        write(
            &dir.path().join("t.toml"),
            &minimal_task_doc(&["a", "b", "c", "d"]),
        );
        let err = load_task(&dir.path().join("t.toml")).unwrap_err();
        assert!(matches!(err, CorpusError::PromptCount { found: 4, .. }));
    }

    #[test]
    fn duplicate_prompts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("w.toml"), WORLD);
        write(
            &dir.path().join("t.toml"),
            &minimal_task_doc(&["a", "b", "a", "d", "e"]),
        );
        let err = load_task(&dir.path().join("t.toml")).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicatePrompt { index: 2, .. }));
    }

    #[test]
    fn bad_rtl_is_reported_with_task_and_case() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("w.toml"), WORLD);
        write(
            &dir.path().join("t.toml"),
            "schema = 1\nname = \"t\"\nprompts = [\"a\", \"b\", \"c\", \"d\", \"e\"]\n\n\
             [[cases]]\nworld = \"w.toml\"\ncheck = \"SayAtLocation: F F(\"\n",
        );
        let err = load_task(&dir.path().join("t.toml")).unwrap_err();
        match err {
            CorpusError::Check { task, case, .. } => {
                assert_eq!(task, "t");
                assert_eq!(case, "w");
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    fn open_world_task(dir: &Path, tags: &str, labels: &str) -> TaskDefinition {
        write(&dir.join("w.toml"), WORLD);
        write(
            &dir.join("t.toml"),
            &format!(
                "schema = 1\nname = \"t\"\nprompts = [\"a\", \"b\", \"c\", \"d\", \"e\"]\n\
                 tags = [{tags}]\n\n\
                 [[cases]]\nworld = \"w.toml\"\n\
                 check = \"AskAtLocation: F ask(opts~/.*bread.*/); SayAtLocation: F say(/hi/)\"\n\
                 {labels}\n"
            ),
        );
        load_task(&dir.join("t.toml")).unwrap()
    }

    #[test]
    fn open_world_subset_keeps_flagged_clauses() {
        let dir = tempfile::tempdir().unwrap();
        let task = open_world_task(
            dir.path(),
            "\"open_world_knowledge\"",
            "open_world_labels = [\"AskAtLocation\"]",
        );
        let subset = open_world_subset(&task).unwrap();
        assert_eq!(subset.world_cases[0].check.clauses.len(), 1);
        assert_eq!(
            subset.world_cases[0].check.clauses[0].label,
            CompletionCategory::AskAtLocation
        );
        // Idempotent.
        let again = open_world_subset(&subset).unwrap();
        assert_eq!(
            again.world_cases[0].check.clauses,
            subset.world_cases[0].check.clauses
        );
    }

    #[test]
    fn open_world_subset_requires_tag_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let untagged = open_world_task(dir.path(), "", "open_world_labels = [\"AskAtLocation\"]");
        assert!(matches!(
            open_world_subset(&untagged),
            Err(CorpusError::NotOpenWorldTask { .. })
        ));
        let dir = tempfile::tempdir().unwrap();
        let unflagged = open_world_task(dir.path(), "\"open_world_knowledge\"", "");
        assert!(matches!(
            open_world_subset(&unflagged),
            Err(CorpusError::NoOpenWorldClauses { .. })
        ));
    }

    #[test]
    fn expected_failure_descriptors_parse() {
        let dir = tempfile::tempdir().unwrap();
        write(&dir.path().join("w.toml"), WORLD);
        write(&dir.path().join("m.lmp"), "say(undefined)\n");
        write(
            &dir.path().join("t.toml"),
            &format!(
                "{}\n[[mutants]]\nprogram = \"m.lmp\"\nexpected = {{ python = \"Name\" }}\n\
                 [[mutants]]\nprogram = \"m.lmp\"\nexpected = {{ robot = \"GoToInvalidLocation\" }}\n\
                 [[mutants]]\nprogram = \"m.lmp\"\nexpected = {{ completion = [\"InitialTerminal\"] }}\n",
                minimal_task_doc(&["a", "b", "c", "d", "e"])
            ),
        );
        let task = load_task(&dir.path().join("t.toml")).unwrap();
        assert_eq!(
            task.mutants[0].expected,
            ExpectedFailure::Python(InterpreterErrorKind::Name)
        );
        assert_eq!(
            task.mutants[1].expected,
            ExpectedFailure::Robot(RobotErrorKind::GoToInvalidLocation)
        );
        assert_eq!(
            task.mutants[2].expected,
            ExpectedFailure::Completion(vec![CompletionCategory::InitialTerminal])
        );
    }
}
