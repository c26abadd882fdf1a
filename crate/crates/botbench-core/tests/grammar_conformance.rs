//! The shipped grammar document is executable documentation: every fenced
//! `rtl` block must parse as a check, every `rtl-formula` block as a
//! formula.

use std::path::PathBuf;

use botbench_core::rtl::{parse_formula, parse_rtl};

fn grammar_doc() -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/rtl_grammar.md");
    std::fs::read_to_string(path).expect("grammar doc exists")
}

fn fenced_blocks(doc: &str, language: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in doc.lines() {
        match &mut current {
            None => {
                if line.trim() == format!("```{language}") {
                    current = Some(String::new());
                }
            }
            Some(block) => {
                if line.trim() == "```" {
                    blocks.push(current.take().unwrap());
                } else {
                    block.push_str(line);
                    block.push('\n');
                }
            }
        }
    }
    blocks
}

#[test]
fn every_check_example_in_the_doc_parses() {
    let doc = grammar_doc();
    let blocks = fenced_blocks(&doc, "rtl");
    assert!(blocks.len() >= 3, "expected several rtl examples");
    for block in &blocks {
        parse_rtl(block).unwrap_or_else(|e| panic!("doc example failed to parse: {e}\n{block}"));
    }
}

#[test]
fn every_formula_example_in_the_doc_parses() {
    let doc = grammar_doc();
    let blocks = fenced_blocks(&doc, "rtl-formula");
    assert!(blocks.len() >= 2, "expected formula examples");
    for block in &blocks {
        parse_formula(block.trim())
            .unwrap_or_else(|e| panic!("doc formula failed to parse: {e}\n{block}"));
    }
}

#[test]
fn doc_lowering_table_matches_the_engine() {
    use botbench_core::rtl::lower_rtl;
    let rooms = vec!["confA".to_string(), "confB".to_string()];
    // The table rows in the doc, spot-checked against the engine.
    let rows = [
        ("seq(say(/a/), say(/b/))", "F (say(a0~/a/) & N F say(a0~/b/))"),
        ("never(say(/a/))", "G ! say(a0~/a/)"),
        ("at_start(say(/a/))", "(say(a0~/a/) & first)"),
        ("at_end(say(/a/))", "F (say(a0~/a/) & last)"),
        (
            "implies_then(say(/a/), say(/b/))",
            "G (! say(a0~/a/) || say(a0~/b/))",
        ),
        ("visit_all(/conf.*/)", "(F loc(/confA/) & F loc(/confB/))"),
    ];
    for (source, want) in rows {
        let lowered = lower_rtl(&parse_formula(source).unwrap(), &rooms);
        assert_eq!(lowered.to_string(), want, "{source}");
    }
}
