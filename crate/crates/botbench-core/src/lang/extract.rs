//! Program extraction from raw generator completions: peel code fences,
//! drop leading prose, cut at stop sequences.

use thiserror::Error;

use super::SourceProgram;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractionError {
    #[error("completion contains no program text")]
    ExtractionEmpty,
}

/// Extracts the program text from a completion.
///
/// If the completion carries a fenced code block, the first block's content
/// is taken (the opening fence's language tag is dropped). Otherwise leading
/// lines are skipped until the first line that starts like a statement of
/// the language. The text is then cut at the first occurrence of any stop
/// sequence and returned verbatim.
pub fn extract_program(
    completion: &str,
    stop_sequences: &[String],
) -> Result<SourceProgram, ExtractionError> {
    let mut text = match fenced_block(completion) {
        Some(block) => block,
        None => strip_leading_prose(completion),
    };
    for stop in stop_sequences {
        if stop.is_empty() {
            continue;
        }
        if let Some(at) = text.find(stop.as_str()) {
            text.truncate(at);
        }
    }
    if text.trim().is_empty() {
        return Err(ExtractionError::ExtractionEmpty);
    }
    Ok(SourceProgram::new(text, ""))
}

/// Content of the first ``` fenced block, if any. An unclosed fence runs to
/// the end of the completion.
fn fenced_block(completion: &str) -> Option<String> {
    let mut lines = completion.lines();
    let mut found = false;
    let mut block = String::new();
    for line in lines.by_ref() {
        if line.trim_start().starts_with("```") {
            found = true;
            break;
        }
    }
    if !found {
        return None;
    }
    for line in lines {
        if line.trim_start().starts_with("```") {
            return Some(block);
        }
        block.push_str(line);
        block.push('\n');
    }
    Some(block)
}

/// Drops whole leading lines until one plausibly starts a statement:
/// a keyword of the language, or an identifier followed by `= ( . [`.
fn strip_leading_prose(completion: &str) -> String {
    let mut offset = 0;
    for line in completion.split_inclusive('\n') {
        if looks_like_code(line) {
            return completion[offset..].to_string();
        }
        offset += line.len();
    }
    String::new()
}

fn looks_like_code(line: &str) -> bool {
    let trimmed = line.trim_start();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return false;
    }
    // Reserved constructs (imports, classes, try blocks) are code, not
    // prose: they stay in the program and classify as Unsupported, which
    // reporting folds into the interpreter-error bucket.
    const KEYWORDS: &[&str] = &[
        "def", "if", "elif", "else", "for", "while", "return", "pass", "break", "continue",
        "import", "from", "class", "try", "except", "finally", "with", "lambda", "global",
        "nonlocal", "del", "raise", "assert", "async", "await", "yield",
    ];
    let mut chars = trimmed.chars();
    let first = chars.next().unwrap();
    if !(first.is_alphabetic() || first == '_') {
        return false;
    }
    let word: String = std::iter::once(first)
        .chain(chars.take_while(|c| c.is_alphanumeric() || *c == '_'))
        .collect();
    if KEYWORDS.contains(&word.as_str()) {
        return true;
    }
    // `name = ...`, `name(...)`, `name.method(...)`, `name[...] = ...`,
    // `name, other = ...`
    let rest = trimmed[word.len()..].trim_start();
    matches!(rest.chars().next(), Some('=' | '(' | '.' | '[' | ','))
        && !rest.starts_with("==")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_stops() -> Vec<String> {
        Vec::new()
    }

    #[test]
    fn strips_code_fences() {
        let program = extract_program(
            "```python\ndef task():\n    go_to('lobby')\n```",
            &no_stops(),
        )
        .unwrap();
        assert_eq!(program.text, "def task():\n    go_to('lobby')\n");
    }

    #[test]
    fn raw_program_passes_through_verbatim() {
        let source = "def task():\n    say('hi')\n";
        let program = extract_program(source, &no_stops()).unwrap();
        assert_eq!(program.text, source);
    }

    #[test]
    fn pure_prose_is_empty() {
        let err = extract_program(
            "Sure! Here is what I would do, in plain words.\nNothing else.\n",
            &no_stops(),
        )
        .unwrap_err();
        assert_eq!(err, ExtractionError::ExtractionEmpty);
    }

    #[test]
    fn leading_prose_is_dropped() {
        let program = extract_program(
            "Here is the program you asked for:\n\ndef task():\n    pass\n",
            &no_stops(),
        )
        .unwrap();
        assert_eq!(program.text, "def task():\n    pass\n");
    }

    #[test]
    fn stop_sequences_cut() {
        let program = extract_program(
            "go_to('lab')\n# END\ngo_to('office')\n",
            &["# END".to_string()],
        )
        .unwrap();
        assert_eq!(program.text, "go_to('lab')\n");
    }

    #[test]
    fn unclosed_fence_runs_to_end() {
        let program = extract_program("```python\nsay('hi')\n", &no_stops()).unwrap();
        assert_eq!(program.text, "say('hi')\n");
    }
}
