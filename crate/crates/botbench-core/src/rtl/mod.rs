//! Finite-trace temporal checks: atoms match trace elements through field
//! regexes, a small derived layer lowers to core operators, and checks are
//! conjunctions of labeled clauses evaluated at the start of the trace.

#[cfg(test)]
mod differential;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sim::{SkillKind, Trace, TraceElement};
use crate::world::Pattern;

pub use parser::{parse_formula, parse_rtl, RtlParseError};

/// Which failure bucket a clause reports when it does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompletionCategory {
    SayAtLocation,
    AskAtLocation,
    ManipulationAtLocation,
    CheckEntityAtLocation,
    InitialTerminal,
    EventOrdering,
    Location,
    ExhaustiveSearch,
}

impl CompletionCategory {
    pub const ALL: [CompletionCategory; 8] = [
        CompletionCategory::SayAtLocation,
        CompletionCategory::AskAtLocation,
        CompletionCategory::ManipulationAtLocation,
        CompletionCategory::CheckEntityAtLocation,
        CompletionCategory::InitialTerminal,
        CompletionCategory::EventOrdering,
        CompletionCategory::Location,
        CompletionCategory::ExhaustiveSearch,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CompletionCategory::SayAtLocation => "SayAtLocation",
            CompletionCategory::AskAtLocation => "AskAtLocation",
            CompletionCategory::ManipulationAtLocation => "ManipulationAtLocation",
            CompletionCategory::CheckEntityAtLocation => "CheckEntityAtLocation",
            CompletionCategory::InitialTerminal => "InitialTerminal",
            CompletionCategory::EventOrdering => "EventOrdering",
            CompletionCategory::Location => "Location",
            CompletionCategory::ExhaustiveSearch => "ExhaustiveSearch",
        }
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.label() == label)
    }
}

impl fmt::Display for CompletionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkillSelector {
    Any,
    Skill(SkillKind),
}

/// Predicate over one trace element: the skill must match and every
/// supplied pattern must fully match its field rendered as text.
/// `first`/`last` restrict the match to the trace ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomPredicate {
    pub skill: SkillSelector,
    /// (argument position, pattern) pairs.
    pub args: Vec<(usize, Pattern)>,
    pub result: Option<Pattern>,
    pub location: Option<Pattern>,
    pub first: bool,
    pub last: bool,
}

impl AtomPredicate {
    pub fn any() -> Self {
        AtomPredicate {
            skill: SkillSelector::Any,
            args: Vec::new(),
            result: None,
            location: None,
            first: false,
            last: false,
        }
    }

    pub fn for_skill(skill: SkillKind) -> Self {
        AtomPredicate {
            skill: SkillSelector::Skill(skill),
            ..AtomPredicate::any()
        }
    }

    /// Location-only predicate over any skill; the building block of
    /// visit/avoid checks.
    pub fn at_location(pattern: Pattern) -> Self {
        AtomPredicate {
            location: Some(pattern),
            ..AtomPredicate::any()
        }
    }

    pub fn holds(&self, element: &TraceElement, index: usize, trace_len: usize) -> bool {
        if self.first && index != 0 {
            return false;
        }
        if self.last && index + 1 != trace_len {
            return false;
        }
        if let SkillSelector::Skill(skill) = self.skill {
            if element.skill != skill {
                return false;
            }
        }
        for (position, pattern) in &self.args {
            match element.args.get(*position) {
                Some(value) => {
                    if !pattern.matches(&value.render()) {
                        return false;
                    }
                }
                None => return false,
            }
        }
        if let Some(pattern) = &self.result {
            if !pattern.matches(&element.result.render()) {
                return false;
            }
        }
        if let Some(pattern) = &self.location {
            if !pattern.matches(&element.location) {
                return false;
            }
        }
        true
    }
}

/// Core finite-trace temporal formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LtlFormula {
    Atom(AtomPredicate),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    /// Strong next: false at the final position.
    Next(Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
    Always(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
}

impl LtlFormula {
    pub fn and(a: LtlFormula, b: LtlFormula) -> LtlFormula {
        LtlFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlFormula, b: LtlFormula) -> LtlFormula {
        LtlFormula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: LtlFormula) -> LtlFormula {
        LtlFormula::Not(Box::new(a))
    }

    pub fn next(a: LtlFormula) -> LtlFormula {
        LtlFormula::Next(Box::new(a))
    }

    pub fn eventually(a: LtlFormula) -> LtlFormula {
        LtlFormula::Eventually(Box::new(a))
    }

    pub fn always(a: LtlFormula) -> LtlFormula {
        LtlFormula::Always(Box::new(a))
    }

    pub fn until(a: LtlFormula, b: LtlFormula) -> LtlFormula {
        LtlFormula::Until(Box::new(a), Box::new(b))
    }
}

/// Check-layer formula: core operators plus the derived forms that make
/// robot-task checks short to write. Every derived form has a defined
/// lowering to [`LtlFormula`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RtlFormula {
    Atom(AtomPredicate),
    Not(Box<RtlFormula>),
    And(Box<RtlFormula>, Box<RtlFormula>),
    Or(Box<RtlFormula>, Box<RtlFormula>),
    Next(Box<RtlFormula>),
    Eventually(Box<RtlFormula>),
    Always(Box<RtlFormula>),
    Until(Box<RtlFormula>, Box<RtlFormula>),
    /// Ordered eventualities at strictly increasing indices.
    Seq(Vec<RtlFormula>),
    Never(Box<RtlFormula>),
    AtStart(Box<RtlFormula>),
    AtEnd(Box<RtlFormula>),
    /// Branch-conditional sequencing: wherever `cond` holds, `then` must
    /// hold from that point.
    ImpliesThen(Box<RtlFormula>, Box<RtlFormula>),
    /// Exhaustive search: every room matching the pattern must be visited.
    VisitAll(Pattern),
}

/// One labeled clause: a disjunction of formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtlClause {
    pub label: CompletionCategory,
    pub disjuncts: Vec<RtlFormula>,
    /// Set from the task schema for clauses that encode open-world
    /// knowledge; used by the check-subset ablation.
    pub open_world: bool,
}

/// Conjunctive-normal-form bundle: satisfied iff every clause has at least
/// one satisfied disjunct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtlCheck {
    pub clauses: Vec<RtlClause>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Sat,
    Unsat,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub verdict: Verdict,
    /// Labels of failing clauses, duplicates removed, order preserved.
    pub failed_labels: Vec<CompletionCategory>,
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

fn first_atom() -> LtlFormula {
    LtlFormula::Atom(AtomPredicate {
        first: true,
        ..AtomPredicate::any()
    })
}

fn last_atom() -> LtlFormula {
    LtlFormula::Atom(AtomPredicate {
        last: true,
        ..AtomPredicate::any()
    })
}

/// Desugars a check formula to core operators. `rooms` feeds `visit_all`,
/// which expands over every room matching its pattern.
pub fn lower_rtl(formula: &RtlFormula, rooms: &[String]) -> LtlFormula {
    match formula {
        RtlFormula::Atom(atom) => LtlFormula::Atom(atom.clone()),
        RtlFormula::Not(f) => LtlFormula::not(lower_rtl(f, rooms)),
        RtlFormula::And(a, b) => LtlFormula::and(lower_rtl(a, rooms), lower_rtl(b, rooms)),
        RtlFormula::Or(a, b) => LtlFormula::or(lower_rtl(a, rooms), lower_rtl(b, rooms)),
        RtlFormula::Next(f) => LtlFormula::next(lower_rtl(f, rooms)),
        RtlFormula::Eventually(f) => LtlFormula::eventually(lower_rtl(f, rooms)),
        RtlFormula::Always(f) => LtlFormula::always(lower_rtl(f, rooms)),
        RtlFormula::Until(a, b) => LtlFormula::until(lower_rtl(a, rooms), lower_rtl(b, rooms)),
        // seq(a1, ..., ak) = F (a1 & N F (a2 & ... N F ak)); the strong
        // next forces strictly increasing match indices.
        RtlFormula::Seq(items) => {
            let mut iter = items.iter().rev();
            let mut acc = LtlFormula::eventually(lower_rtl(
                iter.next().expect("seq arity checked at parse"),
                rooms,
            ));
            for item in iter {
                acc = LtlFormula::eventually(LtlFormula::and(
                    lower_rtl(item, rooms),
                    LtlFormula::next(acc),
                ));
            }
            acc
        }
        RtlFormula::Never(f) => LtlFormula::always(LtlFormula::not(lower_rtl(f, rooms))),
        RtlFormula::AtStart(f) => LtlFormula::and(lower_rtl(f, rooms), first_atom()),
        RtlFormula::AtEnd(f) => {
            LtlFormula::eventually(LtlFormula::and(lower_rtl(f, rooms), last_atom()))
        }
        RtlFormula::ImpliesThen(cond, then) => LtlFormula::always(LtlFormula::or(
            LtlFormula::not(lower_rtl(cond, rooms)),
            lower_rtl(then, rooms),
        )),
        RtlFormula::VisitAll(pattern) => {
            let mut conjuncts = rooms
                .iter()
                .filter(|room| pattern.matches(room))
                .map(|room| {
                    LtlFormula::eventually(LtlFormula::Atom(AtomPredicate::at_location(
                        Pattern::new(&regex::escape(room)).expect("escaped room name compiles"),
                    )))
                });
            match conjuncts.next() {
                // No matching room: nothing to visit. The any-element atom
                // holds at every position, so G of it is identically true.
                None => LtlFormula::always(LtlFormula::Atom(AtomPredicate::any())),
                Some(first) => conjuncts.fold(first, LtlFormula::and),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Satisfaction vector over positions `0..=len`; position `len` is the
/// empty suffix. Computed bottom-up, one pass per subformula.
fn eval_vector(formula: &LtlFormula, trace: &Trace) -> Vec<bool> {
    let len = trace.elements.len();
    match formula {
        LtlFormula::Atom(atom) => {
            let mut v: Vec<bool> = trace
                .elements
                .iter()
                .enumerate()
                .map(|(i, element)| atom.holds(element, i, len))
                .collect();
            v.push(false);
            v
        }
        LtlFormula::Not(f) => eval_vector(f, trace).into_iter().map(|b| !b).collect(),
        LtlFormula::And(a, b) => {
            let a = eval_vector(a, trace);
            let b = eval_vector(b, trace);
            a.into_iter().zip(b).map(|(x, y)| x && y).collect()
        }
        LtlFormula::Or(a, b) => {
            let a = eval_vector(a, trace);
            let b = eval_vector(b, trace);
            a.into_iter().zip(b).map(|(x, y)| x || y).collect()
        }
        LtlFormula::Next(f) => {
            let child = eval_vector(f, trace);
            let mut v = vec![false; len + 1];
            for i in 0..len {
                // Strong next: requires a successor element.
                v[i] = i + 1 < len && child[i + 1];
            }
            v
        }
        LtlFormula::Eventually(f) => {
            let child = eval_vector(f, trace);
            let mut v = vec![false; len + 1];
            for i in (0..len).rev() {
                v[i] = child[i] || v[i + 1];
            }
            v
        }
        LtlFormula::Always(f) => {
            let child = eval_vector(f, trace);
            let mut v = vec![false; len + 1];
            v[len] = true;
            for i in (0..len).rev() {
                v[i] = child[i] && v[i + 1];
            }
            v
        }
        LtlFormula::Until(a, b) => {
            let hold = eval_vector(a, trace);
            let until = eval_vector(b, trace);
            let mut v = vec![false; len + 1];
            for i in (0..len).rev() {
                v[i] = until[i] || (hold[i] && v[i + 1]);
            }
            v
        }
    }
}

/// Finite-trace satisfaction of `formula` at position `index` (0 ≤ index ≤
/// trace length; the trace length position is the empty suffix).
pub fn eval_ltl(formula: &LtlFormula, trace: &Trace, index: usize) -> bool {
    assert!(
        index <= trace.elements.len(),
        "index {} out of range for trace of length {}",
        index,
        trace.elements.len()
    );
    eval_vector(formula, trace)[index]
}

/// Evaluates every clause at the start of the trace. SAT iff all clauses
/// have a satisfied disjunct.
pub fn check(trace: &Trace, rtl_check: &RtlCheck) -> CheckResult {
    let rooms = &trace.world.rooms;
    let mut failed_labels = Vec::new();
    for clause in &rtl_check.clauses {
        let passed = clause
            .disjuncts
            .iter()
            .any(|formula| eval_ltl(&lower_rtl(formula, rooms), trace, 0));
        if !passed && !failed_labels.contains(&clause.label) {
            failed_labels.push(clause.label);
        }
    }
    CheckResult {
        verdict: if failed_labels.is_empty() {
            Verdict::Sat
        } else {
            Verdict::Unsat
        },
        failed_labels,
    }
}

// ---------------------------------------------------------------------------
// Display (canonical form pinned by the lowering goldens)
// ---------------------------------------------------------------------------

impl fmt::Display for AtomPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.skill == SkillSelector::Any && self.args.is_empty() && self.result.is_none() {
            match (self.first, self.last, &self.location) {
                (true, false, None) => return f.write_str("first"),
                (false, true, None) => return f.write_str("last"),
                (false, false, Some(location)) => return write!(f, "loc(/{location}/)"),
                _ => {}
            }
        }
        let name = match self.skill {
            SkillSelector::Any => "any",
            SkillSelector::Skill(skill) => skill.fn_name(),
        };
        let mut parts = Vec::new();
        for (position, pattern) in &self.args {
            parts.push(format!("a{position}~/{pattern}/"));
        }
        if let Some(result) = &self.result {
            parts.push(format!("res~/{result}/"));
        }
        if let Some(location) = &self.location {
            parts.push(format!("loc~/{location}/"));
        }
        if self.first {
            parts.push("first".to_string());
        }
        if self.last {
            parts.push("last".to_string());
        }
        write!(f, "{name}({})", parts.join(", "))
    }
}

impl fmt::Display for LtlFormula {
    /// Binary forms always parenthesize themselves, so unary operands never
    /// need extra grouping.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtlFormula::Atom(atom) => write!(f, "{atom}"),
            LtlFormula::Not(inner) => write!(f, "! {inner}"),
            LtlFormula::Next(inner) => write!(f, "N {inner}"),
            LtlFormula::Eventually(inner) => write!(f, "F {inner}"),
            LtlFormula::Always(inner) => write!(f, "G {inner}"),
            LtlFormula::And(a, b) => write!(f, "({a} & {b})"),
            LtlFormula::Or(a, b) => write!(f, "({a} || {b})"),
            LtlFormula::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}
