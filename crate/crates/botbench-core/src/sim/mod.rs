//! Symbolic simulator: executes a program against a world, implements the
//! eight skill semantics, records the trace, and classifies terminal
//! outcomes. A simulation works on its own mutable copy of the movable
//! world parts; the initial `WorldState` is shared read-only.

mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{
    execute, extract_program, parse, ExecutionOutcome, InterpreterError, InterpreterErrorKind,
    SkillHost, SourceProgram, Span,
};
use crate::seed::SeedStream;
use crate::world::{RobotState, WorldState};

pub use trace::{
    parse_trace, replay_terminal, serialize_trace, SkillKind, Trace, TraceElement,
    TraceParseError, TraceValue,
};

/// The six infeasible-action categories the simulator detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RobotErrorKind {
    GoToInvalidLocation,
    PlaceNoObject,
    PickWhileHolding,
    AskNoPerson,
    PickInvalidObject,
    AskInvalidOptions,
}

impl RobotErrorKind {
    pub const ALL: [RobotErrorKind; 6] = [
        RobotErrorKind::GoToInvalidLocation,
        RobotErrorKind::PlaceNoObject,
        RobotErrorKind::PickWhileHolding,
        RobotErrorKind::AskNoPerson,
        RobotErrorKind::PickInvalidObject,
        RobotErrorKind::AskInvalidOptions,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RobotErrorKind::GoToInvalidLocation => "GoToInvalidLocation",
            RobotErrorKind::PlaceNoObject => "PlaceNoObject",
            RobotErrorKind::PickWhileHolding => "PickWhileHolding",
            RobotErrorKind::AskNoPerson => "AskNoPerson",
            RobotErrorKind::PickInvalidObject => "PickInvalidObject",
            RobotErrorKind::AskInvalidOptions => "AskInvalidOptions",
        }
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.label() == label)
    }
}

impl fmt::Display for RobotErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An infeasible action. The trace is truncated at the failing call: the
/// failing call itself is never appended.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{kind}: {detail} (trace index {index})")]
pub struct RobotExecutionError {
    pub kind: RobotErrorKind,
    /// Offending argument (hallucinated room or object), or the robot's
    /// location for AskNoPerson, or the question for AskInvalidOptions.
    pub detail: String,
    /// Trace position where the failure was raised.
    pub index: usize,
}

/// Terminal state of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationOutcome {
    Success,
    PythonError(InterpreterError),
    RobotError(RobotExecutionError),
}

impl SimulationOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, SimulationOutcome::Success)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trace: Trace,
    pub outcome: SimulationOutcome,
}

/// Permanent knowledge for pre-deployment filtering: the map, nothing else.
/// Object presence and human responses are sampled at run time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StochasticWorldSpec {
    pub rooms: Vec<String>,
    pub robot_start: String,
}

impl StochasticWorldSpec {
    pub fn from_world(world: &WorldState) -> Self {
        StochasticWorldSpec {
            rooms: world.rooms.clone(),
            robot_start: world.robot_start.clone(),
        }
    }

    fn to_world(&self) -> WorldState {
        WorldState {
            rooms: self.rooms.clone(),
            object_locations: BTreeMap::new(),
            pickable: BTreeSet::new(),
            persons: Vec::new(),
            robot_start: self.robot_start.clone(),
        }
    }
}

enum Mode {
    /// Scripted world: perception and responses come from the world state.
    Deterministic,
    /// Randomized perception and responses from a seeded stream; existence
    /// checks that depend on unknowable state (persons nearby, pickable
    /// objects) are suppressed, robot-internal-state checks stay on.
    Stochastic(SeedStream),
}

enum HostFault {
    Robot(RobotExecutionError),
    Interp(InterpreterErrorKind, String),
}

struct SimHost<'w> {
    world: &'w WorldState,
    object_locations: BTreeMap<String, BTreeSet<String>>,
    pickable: BTreeSet<(String, String)>,
    robot: RobotState,
    elements: Vec<TraceElement>,
    mode: Mode,
}

impl<'w> SimHost<'w> {
    fn new(world: &'w WorldState, mode: Mode) -> Self {
        SimHost {
            world,
            object_locations: world.object_locations.clone(),
            pickable: world.pickable.clone(),
            robot: RobotState::at_start_of(world),
            elements: Vec::new(),
            mode,
        }
    }

    fn record(&mut self, skill: SkillKind, args: Vec<TraceValue>, result: TraceValue) {
        self.elements.push(TraceElement {
            index: self.elements.len(),
            skill,
            args,
            result,
            location: self.robot.location.clone(),
        });
    }

    fn robot_error(&self, kind: RobotErrorKind, detail: impl Into<String>) -> HostFault {
        HostFault::Robot(RobotExecutionError {
            kind,
            detail: detail.into(),
            index: self.elements.len(),
        })
    }
}

impl SkillHost for SimHost<'_> {
    type Fault = HostFault;

    fn go_to(&mut self, location: &str) -> Result<(), HostFault> {
        let destination = location.trim();
        if !self.world.has_room(destination) {
            return Err(self.robot_error(RobotErrorKind::GoToInvalidLocation, location));
        }
        self.robot.location = destination.to_string();
        self.record(
            SkillKind::GoTo,
            vec![TraceValue::Str(location.to_string())],
            TraceValue::Null,
        );
        Ok(())
    }

    fn get_current_location(&mut self) -> Result<String, HostFault> {
        let room = self.robot.location.clone();
        self.record(
            SkillKind::GetCurrentLocation,
            Vec::new(),
            TraceValue::Str(room.clone()),
        );
        Ok(room)
    }

    fn get_all_rooms(&mut self) -> Result<Vec<String>, HostFault> {
        let rooms = self.world.rooms.clone();
        self.record(
            SkillKind::GetAllRooms,
            Vec::new(),
            TraceValue::StrList(rooms.clone()),
        );
        Ok(rooms)
    }

    fn is_in_room(&mut self, object: &str) -> Result<bool, HostFault> {
        let present = match &mut self.mode {
            Mode::Deterministic => self
                .object_locations
                .get(object.trim())
                .map(|rooms| rooms.contains(&self.robot.location))
                .unwrap_or(false),
            Mode::Stochastic(stream) => stream.next_bool(),
        };
        self.record(
            SkillKind::IsInRoom,
            vec![TraceValue::Str(object.to_string())],
            TraceValue::Bool(present),
        );
        Ok(present)
    }

    fn say(&mut self, message: &str) -> Result<(), HostFault> {
        self.record(
            SkillKind::Say,
            vec![TraceValue::Str(message.to_string())],
            TraceValue::Null,
        );
        Ok(())
    }

    fn ask(
        &mut self,
        person: &str,
        question: &str,
        options: &[String],
    ) -> Result<String, HostFault> {
        // Presence is decided by the robot's location, not the addressed
        // name; the person argument is advisory.
        let answer = match &mut self.mode {
            Mode::Deterministic => {
                let spec = match self.world.person_at(&self.robot.location) {
                    Some((_, spec)) => spec,
                    None => {
                        return Err(self.robot_error(
                            RobotErrorKind::AskNoPerson,
                            self.robot.location.clone(),
                        ))
                    }
                };
                if options.is_empty() {
                    return Err(self.robot_error(RobotErrorKind::AskInvalidOptions, question));
                }
                spec.respond(question, options)
            }
            Mode::Stochastic(stream) => {
                // Any room may contain a person.
                if options.is_empty() {
                    return Err(self.robot_error(RobotErrorKind::AskInvalidOptions, question));
                }
                options[stream.next_index(options.len())].clone()
            }
        };
        self.record(
            SkillKind::Ask,
            vec![
                TraceValue::Str(person.to_string()),
                TraceValue::Str(question.to_string()),
                TraceValue::StrList(options.to_vec()),
            ],
            TraceValue::Str(answer.clone()),
        );
        Ok(answer)
    }

    fn pick(&mut self, object: &str) -> Result<(), HostFault> {
        if let Some(held) = &self.robot.held {
            let held = held.clone();
            return Err(self.robot_error(
                RobotErrorKind::PickWhileHolding,
                format!("{object} (already holding {held})"),
            ));
        }
        let name = object.trim().to_string();
        let key = (name.clone(), self.robot.location.clone());
        match self.mode {
            Mode::Deterministic => {
                if !self.pickable.contains(&key) {
                    return Err(self.robot_error(RobotErrorKind::PickInvalidObject, object));
                }
                self.pickable.remove(&key);
                if let Some(rooms) = self.object_locations.get_mut(&name) {
                    rooms.remove(&self.robot.location);
                    if rooms.is_empty() {
                        self.object_locations.remove(&name);
                    }
                }
            }
            // Object presence is unknowable before deployment: any object
            // may be pickable, only the hand state is checked.
            Mode::Stochastic(_) => {
                self.pickable.remove(&key);
                if let Some(rooms) = self.object_locations.get_mut(&name) {
                    rooms.remove(&self.robot.location);
                }
            }
        }
        self.robot.held = Some(name);
        self.record(
            SkillKind::Pick,
            vec![TraceValue::Str(object.to_string())],
            TraceValue::Null,
        );
        Ok(())
    }

    fn place(&mut self, object: &str) -> Result<(), HostFault> {
        let held = match &self.robot.held {
            Some(held) => held.clone(),
            None => {
                return Err(self.robot_error(RobotErrorKind::PlaceNoObject, object));
            }
        };
        if held != object.trim() {
            return Err(HostFault::Interp(
                InterpreterErrorKind::Value,
                format!("cannot place '{object}': holding '{held}'"),
            ));
        }
        self.robot.held = None;
        self.object_locations
            .entry(held.clone())
            .or_default()
            .insert(self.robot.location.clone());
        self.pickable.insert((held, self.robot.location.clone()));
        self.record(
            SkillKind::Place,
            vec![TraceValue::Str(object.to_string())],
            TraceValue::Null,
        );
        Ok(())
    }
}

/// Runs a program against a world. All failures are expressed through the
/// outcome; the trace prefix up to the failure is always returned.
pub fn simulate(program: &SourceProgram, world: &WorldState, budget: u64) -> SimulationResult {
    run(program, world, Mode::Deterministic, budget)
}

/// Like [`simulate`], but perception (`is_in_room`) and responses (`ask`)
/// are drawn from a deterministic pseudorandom stream keyed by the seed and
/// the draw index. Identical `(program, spec, seed)` yields identical
/// results.
pub fn simulate_stochastic(
    program: &SourceProgram,
    spec: &StochasticWorldSpec,
    seed: u64,
    budget: u64,
) -> SimulationResult {
    let world = spec.to_world();
    run(program, &world, Mode::Stochastic(SeedStream::new(seed)), budget)
}

fn run(program: &SourceProgram, world: &WorldState, mode: Mode, budget: u64) -> SimulationResult {
    // Interpreter recursion depth is bounded, but bounded-deep programs can
    // still outgrow a small test-runner stack; a dedicated stack makes the
    // worst case safe.
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .name("simulation".to_string())
            .stack_size(32 * 1024 * 1024)
            .spawn_scoped(scope, || run_inner(program, world, mode, budget))
            .expect("spawn simulation thread")
            .join()
            .expect("simulation thread panicked")
    })
}

fn run_inner(
    program: &SourceProgram,
    world: &WorldState,
    mode: Mode,
    budget: u64,
) -> SimulationResult {
    let mut host = SimHost::new(world, mode);
    let outcome = match extract_program(&program.text, &[]) {
        Err(_) => SimulationOutcome::PythonError(InterpreterError {
            kind: InterpreterErrorKind::Syntax,
            message: "no program text".to_string(),
            span: Span::new(1, 1),
        }),
        Ok(extracted) => match parse(&extracted) {
            Err(e) => SimulationOutcome::PythonError(e),
            Ok(ast) => match execute(&ast, &mut host, budget) {
                ExecutionOutcome::Completed => SimulationOutcome::Success,
                ExecutionOutcome::Interpreter(e) => SimulationOutcome::PythonError(e),
                ExecutionOutcome::Skill { fault, span } => match fault {
                    HostFault::Robot(e) => SimulationOutcome::RobotError(e),
                    HostFault::Interp(kind, message) => {
                        SimulationOutcome::PythonError(InterpreterError {
                            kind,
                            message,
                            span,
                        })
                    }
                },
            },
        },
    };
    SimulationResult {
        trace: Trace {
            world: world.clone(),
            elements: host.elements,
            terminal_robot: host.robot,
        },
        outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::load_world;

    const TWO_ROOM_WORLD: &str = "schema = 1
rooms = [\"office\", \"lobby\"]
robot_start = \"office\"

[[objects]]
name = \"marker\"
rooms = [\"office\"]
pickable = [\"office\"]

[[persons]]
name = \"alice\"
location = \"office\"
[[persons.rules]]
question = \".*lunch.*\"
choice = \"yes\"
";

    fn world() -> WorldState {
        load_world(TWO_ROOM_WORLD).unwrap()
    }

    fn prog(text: &str) -> SourceProgram {
        SourceProgram::new(text, "test")
    }

    fn sim(text: &str) -> SimulationResult {
        simulate(&prog(text), &world(), 100_000)
    }

    #[test]
    fn single_go_to_records_one_element() {
        let result = sim("go_to('lobby')\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements.len(), 1);
        assert_eq!(result.trace.elements[0].skill, SkillKind::GoTo);
        assert_eq!(result.trace.terminal_robot.location, "lobby");
    }

    #[test]
    fn hallucinated_room_is_a_robot_error() {
        let result = sim("go_to('kitchen')\n");
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::GoToInvalidLocation);
                assert_eq!(e.detail, "kitchen");
                assert_eq!(e.index, 0);
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
        assert!(result.trace.elements.is_empty());
    }

    #[test]
    fn go_to_current_room_is_recorded_noop() {
        let result = sim("go_to('office')\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements.len(), 1);
        assert_eq!(result.trace.terminal_robot.location, "office");
    }

    #[test]
    fn undefined_name_is_a_python_error() {
        let result = sim("say(undefined_var)\n");
        match &result.outcome {
            SimulationOutcome::PythonError(e) => {
                assert_eq!(e.kind, InterpreterErrorKind::Name)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn infinite_loop_times_out() {
        let result = simulate(&prog("while True:\n    pass\n"), &world(), 10_000);
        match &result.outcome {
            SimulationOutcome::PythonError(e) => {
                assert_eq!(e.kind, InterpreterErrorKind::Timeout)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn ask_uses_location_not_name() {
        // Nobody is in the lobby, whatever name the program addresses.
        let result = sim("go_to('lobby')\nask('alice', 'lunch?', ['yes', 'no'])\n");
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::AskNoPerson);
                assert_eq!(e.detail, "lobby");
                assert_eq!(e.index, 1);
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
        assert_eq!(result.trace.elements.len(), 1);
    }

    #[test]
    fn ask_with_empty_options_fails() {
        let result = sim("ask('alice', 'lunch?', [])\n");
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::AskInvalidOptions)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn ask_answers_through_response_rules() {
        let result = sim("answer = ask('alice', 'lunch today?', ['yes', 'no'])\nsay(answer)\n");
        assert!(result.outcome.is_success());
        assert_eq!(
            result.trace.elements[0].result,
            TraceValue::Str("yes".into())
        );
        assert_eq!(
            result.trace.elements[1].args[0],
            TraceValue::Str("yes".into())
        );
    }

    #[test]
    fn pick_moves_object_to_hand() {
        let result = sim("pick('marker')\nsay(str(is_in_room('marker')))\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.terminal_robot.held.as_deref(), Some("marker"));
        assert_eq!(result.trace.elements[1].result, TraceValue::Bool(false));
    }

    #[test]
    fn pick_while_holding_fails() {
        let result = sim("pick('marker')\npick('marker')\n");
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::PickWhileHolding);
                assert_eq!(e.index, 1);
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn pick_at_wrong_room_is_invalid_object() {
        let result = sim("go_to('lobby')\npick('marker')\n");
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::PickInvalidObject)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn place_without_holding_fails() {
        let result = sim("place('marker')\n");
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::PlaceNoObject)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn place_wrong_name_is_a_value_error() {
        let result = sim("pick('marker')\nplace('wrong')\n");
        match &result.outcome {
            SimulationOutcome::PythonError(e) => {
                assert_eq!(e.kind, InterpreterErrorKind::Value);
                assert_eq!(e.span.line, 2);
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn place_reinserts_object_as_pickable() {
        let result = sim(
            "pick('marker')\ngo_to('lobby')\nplace('marker')\npick('marker')\n",
        );
        assert!(result.outcome.is_success(), "{:?}", result.outcome);
        assert_eq!(result.trace.terminal_robot.held.as_deref(), Some("marker"));
    }

    #[test]
    fn say_non_text_is_a_type_error() {
        let result = sim("say(3)\n");
        match &result.outcome {
            SimulationOutcome::PythonError(e) => {
                assert_eq!(e.kind, InterpreterErrorKind::Type)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn entry_point_function_is_auto_invoked() {
        let result = sim("def task():\n    go_to('lobby')\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements.len(), 1);
    }

    #[test]
    fn no_auto_invoke_when_module_body_called_skills() {
        let result = sim("def task():\n    go_to('lobby')\nsay('already did it')\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements.len(), 1);
        assert_eq!(result.trace.elements[0].skill, SkillKind::Say);
    }

    #[test]
    fn no_auto_invoke_with_two_zero_arg_functions() {
        let result = sim("def a():\n    go_to('lobby')\ndef b():\n    go_to('lobby')\n");
        assert!(result.outcome.is_success());
        assert!(result.trace.elements.is_empty());
    }

    #[test]
    fn aliased_entry_point_still_auto_invokes() {
        let result = sim("def task():\n    go_to('lobby')\nrunner = task\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements.len(), 1);
    }

    #[test]
    fn module_level_invocation_is_not_doubled() {
        let result = sim("def task():\n    go_to('lobby')\n\ntask()\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements.len(), 1);
    }

    #[test]
    fn get_all_rooms_returns_schema_order() {
        let result = sim("for room in get_all_rooms():\n    say(room)\n");
        assert!(result.outcome.is_success());
        let said: Vec<&TraceValue> = result
            .trace
            .elements
            .iter()
            .filter(|e| e.skill == SkillKind::Say)
            .map(|e| &e.args[0])
            .collect();
        assert_eq!(
            said,
            vec![
                &TraceValue::Str("office".into()),
                &TraceValue::Str("lobby".into())
            ]
        );
    }

    #[test]
    fn unknown_object_is_absent_not_an_error() {
        let result = sim("say(str(is_in_room('unicorn')))\n");
        assert!(result.outcome.is_success());
        assert_eq!(result.trace.elements[0].result, TraceValue::Bool(false));
    }

    #[test]
    fn failing_trace_is_a_prefix_of_itself() {
        let full = sim("go_to('lobby')\nsay('hi')\ngo_to('nowhere')\nsay('unreached')\n");
        let prefix = sim("go_to('lobby')\nsay('hi')\n");
        assert_eq!(full.trace.elements, prefix.trace.elements);
    }

    #[test]
    fn terminal_robot_matches_replay() {
        let result = sim("pick('marker')\ngo_to('lobby')\nplace('marker')\nsay('done')\n");
        assert!(result.outcome.is_success());
        assert_eq!(
            replay_terminal(&result.trace.world, &result.trace.elements),
            result.trace.terminal_robot
        );
    }

    #[test]
    fn stochastic_same_seed_same_result() {
        let spec = StochasticWorldSpec::from_world(&world());
        let program = prog(
            "if is_in_room('marker'):\n    say('found')\nelse:\n    say('missing')\n",
        );
        let a = simulate_stochastic(&program, &spec, 7, 100_000);
        let b = simulate_stochastic(&program, &spec, 7, 100_000);
        assert_eq!(a, b);
    }

    #[test]
    fn stochastic_seeds_reach_both_branches() {
        let spec = StochasticWorldSpec::from_world(&world());
        let program = prog(
            "if is_in_room('marker'):\n    say('found')\nelse:\n    say('missing')\n",
        );
        let mut saw_found = false;
        let mut saw_missing = false;
        for seed in 0..64 {
            let result = simulate_stochastic(&program, &spec, seed, 100_000);
            let said = result.trace.elements.last().unwrap().args[0].render();
            match said.as_str() {
                "found" => saw_found = true,
                "missing" => saw_missing = true,
                other => panic!("unexpected message {other:?}"),
            }
            if saw_found && saw_missing {
                break;
            }
        }
        assert!(saw_found && saw_missing);
    }

    #[test]
    fn stochastic_still_detects_hallucinated_rooms() {
        let spec = StochasticWorldSpec::from_world(&world());
        let result = simulate_stochastic(&prog("go_to('kitchen')\n"), &spec, 0, 100_000);
        match &result.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::GoToInvalidLocation)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn stochastic_ask_needs_no_person_but_rejects_empty_options() {
        let spec = StochasticWorldSpec::from_world(&world());
        let ok = simulate_stochastic(
            &prog("go_to('lobby')\nask('bob', 'q?', ['a', 'b'])\n"),
            &spec,
            3,
            100_000,
        );
        assert!(ok.outcome.is_success());
        let bad = simulate_stochastic(&prog("ask('bob', 'q?', [])\n"), &spec, 3, 100_000);
        match &bad.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::AskInvalidOptions)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn stochastic_pick_checks_hand_only() {
        let spec = StochasticWorldSpec::from_world(&world());
        let ok = simulate_stochastic(&prog("pick('anything')\n"), &spec, 0, 100_000);
        assert!(ok.outcome.is_success());
        let bad = simulate_stochastic(&prog("pick('a')\npick('b')\n"), &spec, 0, 100_000);
        match &bad.outcome {
            SimulationOutcome::RobotError(e) => {
                assert_eq!(e.kind, RobotErrorKind::PickWhileHolding)
            }
            other => panic!("unexpected outcome: {other:?}"),
        }
    }

    #[test]
    fn conservation_of_object_names() {
        // Pick and place move objects between hand and rooms without
        // duplicating or destroying names.
        let result = sim("pick('marker')\ngo_to('lobby')\nplace('marker')\n");
        assert!(result.outcome.is_success());
        let replayed = replay_terminal(&result.trace.world, &result.trace.elements);
        assert_eq!(replayed.held, None);
    }
}
