//! Program-generation backends: an HTTP completions-style client, an
//! offline file-corpus provider, and prompt-prefix assembly. The corpus
//! backend is fully deterministic and is the only one benchmark goldens
//! rely on.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lang::{extract_program, SourceProgram};
use crate::sim::SkillKind;

/// A prompt with the stable identifier used for corpus layout and seeding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptRef {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendMode {
    Http,
    Corpus,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RetryPolicy {
    #[serde(default = "default_retry_count")]
    pub count: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            count: default_retry_count(),
            backoff_ms: default_backoff_ms(),
        }
    }
}

fn default_retry_count() -> u32 {
    2
}

fn default_backoff_ms() -> u64 {
    100
}

fn default_temperature() -> f64 {
    0.2
}

fn default_top_p() -> f64 {
    0.95
}

fn default_max_tokens() -> u32 {
    512
}

fn default_samples() -> u32 {
    1
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_in_flight() -> u32 {
    4
}

/// Scripted-backend entry: the attempt-ordered program files for a prompt.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScriptDoc {
    pub prompt: String,
    pub programs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GenerationConfig {
    pub mode: BackendMode,
    /// HTTP endpoint URL, or corpus root directory.
    #[serde(default)]
    pub endpoint: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub stop_sequences: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples_per_prompt: u32,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Bound on concurrent HTTP requests across threads.
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: u32,
    #[serde(default)]
    pub retry: RetryPolicy,
    /// Scripted mode only.
    #[serde(default)]
    pub scripts: Vec<ScriptDoc>,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("generation unavailable after {attempts} attempt(s): {message}")]
    GenerationUnavailable { attempts: u32, message: String },
    #[error("malformed generation response (attempt {attempts}): {message}")]
    ProtocolError { attempts: u32, message: String },
    #[error("prompt build error: {0}")]
    PromptBuild(String),
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.temperature < 0.0 {
            return Err(GatewayError::InvalidConfig(
                "temperature must be >= 0".to_string(),
            ));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GatewayError::InvalidConfig(
                "top_p must be in (0, 1]".to_string(),
            ));
        }
        if self.samples_per_prompt < 1 {
            return Err(GatewayError::InvalidConfig(
                "samples_per_prompt must be >= 1".to_string(),
            ));
        }
        if self.max_in_flight < 1 {
            return Err(GatewayError::InvalidConfig(
                "max_in_flight must be >= 1".to_string(),
            ));
        }
        Ok(())
    }

    /// Parses a TOML config file. A relative corpus endpoint or script path
    /// resolves against the config file's directory.
    pub fn load(path: &Path) -> Result<GenerationConfig, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut config: GenerationConfig = toml::from_str(&text)
            .map_err(|e| GatewayError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if config.mode == BackendMode::Corpus && !config.endpoint.is_empty() {
            let endpoint = PathBuf::from(&config.endpoint);
            if endpoint.is_relative() {
                config.endpoint = base.join(endpoint).display().to_string();
            }
        }
        if config.mode == BackendMode::Scripted {
            for script in config.scripts.iter_mut() {
                for program in script.programs.iter_mut() {
                    let p = PathBuf::from(&program);
                    if p.is_relative() {
                        *program = base.join(p).display().to_string();
                    }
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn backend_id(&self) -> &'static str {
        match self.mode {
            BackendMode::Http => "http",
            BackendMode::Corpus => "corpus",
            BackendMode::Scripted => "scripted",
        }
    }
}

// ---------------------------------------------------------------------------
// Prompt prefix
// ---------------------------------------------------------------------------

/// Skill interface documentation plus few-shot example programs, assembled
/// in front of every task prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptPrefix {
    pub skill_docs: String,
    pub examples: Vec<String>,
    pub version: String,
}

const DEFAULT_SKILL_DOCS: &str = r#"# Robot skill interface.
def get_current_location():
    """Returns the name of the room the robot is currently in."""

def get_all_rooms():
    """Returns the list of all room names in the building."""

def is_in_room(object):
    """Returns True if the named object is in the robot's current room."""

def go_to(location):
    """Moves the robot to the named room."""

def ask(person, question, options):
    """Asks the person a multiple-choice question and returns the chosen option."""

def say(message):
    """Speaks the message aloud at the robot's current location."""

def pick(object):
    """Picks up the named object in the current room."""

def place(object):
    """Puts down the held object in the current room."""
"#;

const DEFAULT_EXAMPLE_GREET: &str = r#"# Task: Go to the lobby and say hello.
def task():
    go_to("lobby")
    say("hello")

task()
"#;

const DEFAULT_EXAMPLE_CHECK: &str = r#"# Task: Check if there is a marker in the office, then come back and tell me whether it is there.
def task():
    start = get_current_location()
    go_to("office")
    found = is_in_room("marker")
    go_to(start)
    if found:
        say("there is a marker in the office")
    else:
        say("there is no marker in the office")

task()
"#;

impl PromptPrefix {
    /// The shipped prefix. Versioned so report metadata can pin it.
    pub fn default_prefix() -> Self {
        PromptPrefix {
            skill_docs: DEFAULT_SKILL_DOCS.to_string(),
            examples: vec![
                DEFAULT_EXAMPLE_GREET.to_string(),
                DEFAULT_EXAMPLE_CHECK.to_string(),
            ],
            version: "prefix-v1".to_string(),
        }
    }

    fn assembled(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.skill_docs);
        for example in &self.examples {
            out.push('\n');
            out.push_str(example);
        }
        out
    }

    /// SHA-256 of the assembled prefix and its version tag.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.version.as_bytes());
        hasher.update([0]);
        hasher.update(self.assembled().as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Concatenates the prefix, a comment line carrying the task text, and the
/// generation cue. Byte-stable for a fixed prefix.
pub fn build_prompt(task_prompt: &str, prefix: &PromptPrefix) -> Result<String, GatewayError> {
    for skill in SkillKind::ALL {
        let needle = format!("def {}(", skill.fn_name());
        if !prefix.skill_docs.contains(&needle) {
            return Err(GatewayError::PromptBuild(format!(
                "prefix is missing the {} skill signature",
                skill.fn_name()
            )));
        }
    }
    if prefix.examples.is_empty() {
        return Err(GatewayError::PromptBuild(
            "prefix must include at least one example program".to_string(),
        ));
    }
    let mut out = prefix.assembled();
    out.push('\n');
    out.push_str("# Task: ");
    out.push_str(task_prompt.trim());
    out.push('\n');
    Ok(out)
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Returns up to `n` extracted programs for a prompt, tagged with
/// `(prompt id, sample index, backend id)` provenance.
pub fn generate(
    prompt: &PromptRef,
    config: &GenerationConfig,
    n: u32,
) -> Result<Vec<SourceProgram>, GatewayError> {
    config.validate()?;
    match config.mode {
        BackendMode::Corpus => generate_from_corpus(prompt, config, n),
        BackendMode::Http => generate_from_http(prompt, config, n),
        BackendMode::Scripted => Err(GatewayError::InvalidConfig(
            "scripted mode is a resampling backend; use corpus or http here".to_string(),
        )),
    }
}

fn stamp(
    completion: &str,
    prompt: &PromptRef,
    index: usize,
    backend: &str,
    stops: &[String],
) -> SourceProgram {
    let origin = format!("{}#{}@{}", prompt.id, index, backend);
    match extract_program(completion, stops) {
        Ok(mut program) => {
            program.origin = origin;
            program
        }
        // Nothing extractable: keep the raw completion so the sample still
        // counts and classifies as a syntax failure downstream.
        Err(_) => {
            let text = if completion.trim().is_empty() {
                "?empty completion".to_string()
            } else {
                completion.to_string()
            };
            SourceProgram::new(text, origin)
        }
    }
}

fn generate_from_corpus(
    prompt: &PromptRef,
    config: &GenerationConfig,
    n: u32,
) -> Result<Vec<SourceProgram>, GatewayError> {
    let dir = PathBuf::from(&config.endpoint).join(&prompt.id);
    let entries = std::fs::read_dir(&dir).map_err(|e| GatewayError::GenerationUnavailable {
        attempts: 1,
        message: format!("{}: {e}", dir.display()),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "lmp").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(GatewayError::GenerationUnavailable {
            attempts: 1,
            message: format!("{}: no .lmp files", dir.display()),
        });
    }
    files.truncate(n as usize);
    let mut programs = Vec::with_capacity(files.len());
    for (index, file) in files.iter().enumerate() {
        let text =
            std::fs::read_to_string(file).map_err(|e| GatewayError::GenerationUnavailable {
                attempts: 1,
                message: format!("{}: {e}", file.display()),
            })?;
        programs.push(stamp(&text, prompt, index, "corpus", &config.stop_sequences));
    }
    Ok(programs)
}

/// Completions-style response body: `{"choices": [{"text": "..."}, ...]}`.
pub fn parse_completion_response(body: &str) -> Result<Vec<String>, String> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    let choices = value
        .get("choices")
        .and_then(|c| c.as_array())
        .ok_or_else(|| "response has no choices array".to_string())?;
    let mut texts = Vec::with_capacity(choices.len());
    for (index, choice) in choices.iter().enumerate() {
        let text = choice
            .get("text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| format!("choice {index} has no text field"))?;
        texts.push(text.to_string());
    }
    Ok(texts)
}

/// Process-wide count of in-flight HTTP requests; each call enforces its
/// own configured bound against it.
static IN_FLIGHT: std::sync::Mutex<u32> = std::sync::Mutex::new(0);
static IN_FLIGHT_CHANGED: std::sync::Condvar = std::sync::Condvar::new();

struct InFlightSlot;

impl InFlightSlot {
    fn acquire(limit: u32) -> InFlightSlot {
        let mut count = IN_FLIGHT.lock().expect("in-flight lock");
        while *count >= limit {
            count = IN_FLIGHT_CHANGED.wait(count).expect("in-flight wait");
        }
        *count += 1;
        InFlightSlot
    }
}

impl Drop for InFlightSlot {
    fn drop(&mut self) {
        let mut count = IN_FLIGHT.lock().expect("in-flight lock");
        *count -= 1;
        IN_FLIGHT_CHANGED.notify_all();
    }
}

fn generate_from_http(
    prompt: &PromptRef,
    config: &GenerationConfig,
    n: u32,
) -> Result<Vec<SourceProgram>, GatewayError> {
    let _slot = InFlightSlot::acquire(config.max_in_flight.max(1));
    let body = serde_json::json!({
        "prompt": prompt.text,
        "n": n,
        "temperature": config.temperature,
        "top_p": config.top_p,
        "max_tokens": config.max_tokens,
        "stop": config.stop_sequences,
    });
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_millis(config.timeout_ms))
        .build();
    let mut attempts = 0u32;
    let mut last_error = String::new();
    while attempts <= config.retry.count {
        attempts += 1;
        let mut request = agent.post(&config.endpoint);
        if let Ok(key) = std::env::var("GATEWAY_API_KEY") {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        match request.send_json(body.clone()) {
            Ok(response) => {
                let text = response.into_string().map_err(|e| GatewayError::ProtocolError {
                    attempts,
                    message: format!("failed to read response body: {e}"),
                })?;
                let choices =
                    parse_completion_response(&text).map_err(|message| {
                        GatewayError::ProtocolError { attempts, message }
                    })?;
                return Ok(choices
                    .iter()
                    .enumerate()
                    .map(|(index, choice)| {
                        stamp(choice, prompt, index, "http", &config.stop_sequences)
                    })
                    .collect());
            }
            Err(ureq::Error::Status(code, _)) if code >= 500 => {
                last_error = format!("server returned {code}");
            }
            Err(ureq::Error::Status(code, _)) => {
                return Err(GatewayError::ProtocolError {
                    attempts,
                    message: format!("server returned {code}"),
                });
            }
            Err(ureq::Error::Transport(transport)) => {
                last_error = transport.to_string();
            }
        }
        if attempts <= config.retry.count {
            std::thread::sleep(Duration::from_millis(
                config.retry.backoff_ms * attempts as u64,
            ));
        }
    }
    Err(GatewayError::GenerationUnavailable {
        attempts,
        message: last_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_prefix_builds_a_stable_prompt() {
        let prefix = PromptPrefix::default_prefix();
        let a = build_prompt("Say good day in every office", &prefix).unwrap();
        let b = build_prompt("Say good day in every office", &prefix).unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with("# Task: Say good day in every office\n"));
        assert!(a.contains("def go_to("));
        assert!(a.contains("def task():"));
    }

    #[test]
    fn empty_example_list_is_a_build_error() {
        let prefix = PromptPrefix {
            examples: Vec::new(),
            ..PromptPrefix::default_prefix()
        };
        let err = build_prompt("x", &prefix).unwrap_err();
        assert!(matches!(err, GatewayError::PromptBuild(_)));
    }

    #[test]
    fn missing_skill_signature_is_a_build_error() {
        let prefix = PromptPrefix {
            skill_docs: "def go_to(location):\n    \"\"\"move\"\"\"\n".to_string(),
            ..PromptPrefix::default_prefix()
        };
        let err = build_prompt("x", &prefix).unwrap_err();
        assert!(err.to_string().contains("skill signature"));
    }

    #[test]
    fn prefix_hash_tracks_content_and_version() {
        let base = PromptPrefix::default_prefix();
        let mut other = base.clone();
        other.version = "prefix-v2".to_string();
        assert_ne!(base.hash(), other.hash());
        assert_eq!(base.hash(), PromptPrefix::default_prefix().hash());
    }

    #[test]
    fn cassette_response_parses_to_golden_program() {
        let body = r#"{"choices": [{"text": "```python\ndef task():\n    go_to('lobby')\n```"}]}"#;
        let choices = parse_completion_response(body).unwrap();
        assert_eq!(choices.len(), 1);
        let program = stamp(
            &choices[0],
            &PromptRef {
                id: "p".to_string(),
                text: String::new(),
            },
            0,
            "http",
            &[],
        );
        assert_eq!(program.text, "def task():\n    go_to('lobby')\n");
        assert_eq!(program.origin, "p#0@http");
    }

    #[test]
    fn malformed_responses_are_protocol_errors() {
        assert!(parse_completion_response("not json").is_err());
        assert!(parse_completion_response("{}").is_err());
        assert!(parse_completion_response("{\"choices\": [{}]}").is_err());
    }

    #[test]
    fn corpus_mode_reads_files_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        let prompt_dir = dir.path().join("t-p0");
        std::fs::create_dir_all(&prompt_dir).unwrap();
        for (name, text) in [("0.lmp", "say('a')\n"), ("1.lmp", "say('b')\n"), ("2.lmp", "say('c')\n")] {
            std::fs::write(prompt_dir.join(name), text).unwrap();
        }
        let config = GenerationConfig {
            mode: BackendMode::Corpus,
            endpoint: dir.path().display().to_string(),
            temperature: 0.2,
            top_p: 0.95,
            max_tokens: 512,
            stop_sequences: Vec::new(),
            samples_per_prompt: 3,
            timeout_ms: 1000,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            scripts: Vec::new(),
        };
        let prompt = PromptRef {
            id: "t-p0".to_string(),
            text: "say".to_string(),
        };
        let programs = generate(&prompt, &config, 3).unwrap();
        assert_eq!(programs.len(), 3);
        assert_eq!(programs[0].text, "say('a')\n");
        assert_eq!(programs[2].text, "say('c')\n");
        assert_eq!(programs[1].origin, "t-p0#1@corpus");
        // Deterministic across calls.
        let again = generate(&prompt, &config, 3).unwrap();
        assert_eq!(programs, again);
    }

    #[test]
    fn missing_corpus_dir_is_unavailable() {
        let config = GenerationConfig {
            mode: BackendMode::Corpus,
            endpoint: "/nonexistent".to_string(),
            temperature: 0.2,
            top_p: 0.95,
            max_tokens: 512,
            stop_sequences: Vec::new(),
            samples_per_prompt: 1,
            timeout_ms: 1000,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            scripts: Vec::new(),
        };
        let prompt = PromptRef {
            id: "x".to_string(),
            text: String::new(),
        };
        assert!(matches!(
            generate(&prompt, &config, 1),
            Err(GatewayError::GenerationUnavailable { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut config = GenerationConfig {
            mode: BackendMode::Corpus,
            endpoint: ".".to_string(),
            temperature: 0.2,
            top_p: 0.95,
            max_tokens: 512,
            stop_sequences: Vec::new(),
            samples_per_prompt: 1,
            timeout_ms: 1000,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            scripts: Vec::new(),
        };
        assert!(config.validate().is_ok());
        config.top_p = 0.0;
        assert!(config.validate().is_err());
        config.top_p = 0.5;
        config.temperature = -1.0;
        assert!(config.validate().is_err());
    }
}
