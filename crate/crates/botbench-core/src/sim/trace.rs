//! Trace records and their line-oriented wire format.
//!
//! One element per line: `index skill json-args json-result location`,
//! preceded by header lines naming the world case and carrying enough of
//! the world (rooms, start room) to re-check the trace later. The format is
//! byte-stable across runs; golden tests pin it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{RobotState, WorldState};

/// Which of the eight skills an element records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SkillKind {
    GoTo,
    GetCurrentLocation,
    GetAllRooms,
    IsInRoom,
    Say,
    Ask,
    Pick,
    Place,
}

impl SkillKind {
    pub const ALL: [SkillKind; 8] = [
        SkillKind::GoTo,
        SkillKind::GetCurrentLocation,
        SkillKind::GetAllRooms,
        SkillKind::IsInRoom,
        SkillKind::Say,
        SkillKind::Ask,
        SkillKind::Pick,
        SkillKind::Place,
    ];

    /// PascalCase label used in trace files.
    pub fn label(self) -> &'static str {
        match self {
            SkillKind::GoTo => "GoTo",
            SkillKind::GetCurrentLocation => "GetCurrentLocation",
            SkillKind::GetAllRooms => "GetAllRooms",
            SkillKind::IsInRoom => "IsInRoom",
            SkillKind::Say => "Say",
            SkillKind::Ask => "Ask",
            SkillKind::Pick => "Pick",
            SkillKind::Place => "Place",
        }
    }

    /// snake_case name used in program source and check atoms.
    pub fn fn_name(self) -> &'static str {
        match self {
            SkillKind::GoTo => "go_to",
            SkillKind::GetCurrentLocation => "get_current_location",
            SkillKind::GetAllRooms => "get_all_rooms",
            SkillKind::IsInRoom => "is_in_room",
            SkillKind::Say => "say",
            SkillKind::Ask => "ask",
            SkillKind::Pick => "pick",
            SkillKind::Place => "place",
        }
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.label() == label)
    }

    pub fn parse_fn_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.fn_name() == name)
    }
}

impl fmt::Display for SkillKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Argument or result value as it crossed the skill boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceValue {
    Null,
    Bool(bool),
    Str(String),
    StrList(Vec<String>),
}

impl TraceValue {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            TraceValue::Null => serde_json::Value::Null,
            TraceValue::Bool(b) => serde_json::Value::Bool(*b),
            TraceValue::Str(s) => serde_json::Value::String(s.clone()),
            TraceValue::StrList(items) => {
                serde_json::Value::Array(items.iter().cloned().map(serde_json::Value::String).collect())
            }
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Option<TraceValue> {
        match value {
            serde_json::Value::Null => Some(TraceValue::Null),
            serde_json::Value::Bool(b) => Some(TraceValue::Bool(*b)),
            serde_json::Value::String(s) => Some(TraceValue::Str(s.clone())),
            serde_json::Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        serde_json::Value::String(s) => out.push(s.clone()),
                        _ => return None,
                    }
                }
                Some(TraceValue::StrList(out))
            }
            _ => None,
        }
    }

    /// Text the check atoms match their field patterns against. Lists are
    /// comma-joined so option-set patterns like `.*bread.*` can be written
    /// against the whole argument.
    pub fn render(&self) -> String {
        match self {
            TraceValue::Null => "none".to_string(),
            TraceValue::Bool(b) => b.to_string(),
            TraceValue::Str(s) => s.clone(),
            TraceValue::StrList(items) => items.join(","),
        }
    }
}

/// One executed skill invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceElement {
    pub index: usize,
    pub skill: SkillKind,
    pub args: Vec<TraceValue>,
    pub result: TraceValue,
    /// Robot location when the skill executed; for GoTo, the destination.
    pub location: String,
}

/// Ordered record of one simulation: initial world, executed elements, and
/// the robot state at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub world: WorldState,
    pub elements: Vec<TraceElement>,
    pub terminal_robot: RobotState,
}

/// Folds the skill semantics over recorded elements: GoTo moves, Pick
/// fills the hand, Place empties it. `Trace::terminal_robot` must equal
/// this replay from the initial world.
pub fn replay_terminal(world: &WorldState, elements: &[TraceElement]) -> RobotState {
    let mut robot = RobotState::at_start_of(world);
    for element in elements {
        match element.skill {
            SkillKind::GoTo => {
                if let Some(TraceValue::Str(dest)) = element.args.first() {
                    robot.location = dest.trim().to_string();
                }
            }
            SkillKind::Pick => {
                if let Some(TraceValue::Str(object)) = element.args.first() {
                    robot.held = Some(object.trim().to_string());
                }
            }
            SkillKind::Place => {
                robot.held = None;
            }
            _ => {}
        }
    }
    robot
}

#[derive(Debug, Error)]
pub enum TraceParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing header line {0:?}")]
    MissingHeader(&'static str),
}

fn malformed(line: usize, message: impl Into<String>) -> TraceParseError {
    TraceParseError::Malformed {
        line,
        message: message.into(),
    }
}

/// Renders a trace in the wire format under a case label.
pub fn serialize_trace(trace: &Trace, case: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("#trace schema=1 case={case}\n"));
    out.push_str(&format!(
        "#rooms {}\n",
        serde_json::to_string(&trace.world.rooms).expect("room list serializes")
    ));
    out.push_str(&format!(
        "#start {}\n",
        serde_json::to_string(&trace.world.robot_start).expect("room name serializes")
    ));
    for element in &trace.elements {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            element.index,
            element.skill.label(),
            element.args_json(),
            serde_json::to_string(&element.result.to_json()).expect("result serializes"),
            element.location,
        ));
    }
    out
}

impl TraceElement {
    fn args_json(&self) -> String {
        let args: Vec<serde_json::Value> = self.args.iter().map(TraceValue::to_json).collect();
        serde_json::to_string(&args).expect("args serialize")
    }
}

/// Parses the wire format back into a trace (with a world carrying only
/// rooms and the start location) plus the case label.
pub fn parse_trace(text: &str) -> Result<(Trace, String), TraceParseError> {
    let mut case = None;
    let mut rooms: Option<Vec<String>> = None;
    let mut start: Option<String> = None;
    let mut elements = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#trace ") {
            for field in rest.split_whitespace() {
                if let Some(value) = field.strip_prefix("case=") {
                    case = Some(value.to_string());
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("#rooms ") {
            rooms = Some(
                serde_json::from_str(rest)
                    .map_err(|e| malformed(lineno, format!("bad room list: {e}")))?,
            );
            continue;
        }
        if let Some(rest) = line.strip_prefix("#start ") {
            start = Some(
                serde_json::from_str(rest)
                    .map_err(|e| malformed(lineno, format!("bad start room: {e}")))?,
            );
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let element = parse_element(line, lineno)?;
        if element.index != elements.len() {
            return Err(malformed(
                lineno,
                format!(
                    "index {} out of order (expected {})",
                    element.index,
                    elements.len()
                ),
            ));
        }
        elements.push(element);
    }
    let rooms = rooms.ok_or(TraceParseError::MissingHeader("#rooms"))?;
    let start = start.ok_or(TraceParseError::MissingHeader("#start"))?;
    let world = WorldState {
        rooms,
        object_locations: Default::default(),
        pickable: Default::default(),
        persons: Vec::new(),
        robot_start: start,
    };
    let terminal_robot = replay_terminal(&world, &elements);
    Ok((
        Trace {
            world,
            elements,
            terminal_robot,
        },
        case.unwrap_or_default(),
    ))
}

fn parse_element(line: &str, lineno: usize) -> Result<TraceElement, TraceParseError> {
    let (index_text, rest) = line
        .split_once(' ')
        .ok_or_else(|| malformed(lineno, "expected index"))?;
    let index: usize = index_text
        .parse()
        .map_err(|_| malformed(lineno, "bad index"))?;
    let (skill_text, rest) = rest
        .split_once(' ')
        .ok_or_else(|| malformed(lineno, "expected skill"))?;
    let skill = SkillKind::parse_label(skill_text)
        .ok_or_else(|| malformed(lineno, format!("unknown skill {skill_text:?}")))?;
    // Args and result are consecutive JSON values; string contents may hold
    // spaces, so track consumed bytes instead of splitting on whitespace.
    let (args_value, consumed) = next_json(rest, lineno)?;
    let rest = rest[consumed..].trim_start();
    let (result_value, consumed) = next_json(rest, lineno)?;
    let location = rest[consumed..].trim_start().to_string();
    let args = match &args_value {
        serde_json::Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                out.push(
                    TraceValue::from_json(item)
                        .ok_or_else(|| malformed(lineno, "unsupported arg value"))?,
                );
            }
            out
        }
        _ => return Err(malformed(lineno, "args must be a JSON array")),
    };
    let result = TraceValue::from_json(&result_value)
        .ok_or_else(|| malformed(lineno, "unsupported result value"))?;
    if location.is_empty() {
        return Err(malformed(lineno, "missing location"));
    }
    Ok(TraceElement {
        index,
        skill,
        args,
        result,
        location,
    })
}

fn next_json(text: &str, lineno: usize) -> Result<(serde_json::Value, usize), TraceParseError> {
    let mut stream = serde_json::Deserializer::from_str(text).into_iter::<serde_json::Value>();
    match stream.next() {
        Some(Ok(value)) => Ok((value, stream.byte_offset())),
        Some(Err(e)) => Err(malformed(lineno, format!("bad JSON field: {e}"))),
        None => Err(malformed(lineno, "missing JSON field")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::load_world;

    fn world() -> WorldState {
        load_world("schema = 1\nrooms = [\"main office\", \"lobby\"]\nrobot_start = \"lobby\"\n")
            .unwrap()
    }

    fn sample_trace() -> Trace {
        let world = world();
        let elements = vec![
            TraceElement {
                index: 0,
                skill: SkillKind::GoTo,
                args: vec![TraceValue::Str("main office".into())],
                result: TraceValue::Null,
                location: "main office".into(),
            },
            TraceElement {
                index: 1,
                skill: SkillKind::Ask,
                args: vec![
                    TraceValue::Str("alice".into()),
                    TraceValue::Str("lunch at noon?".into()),
                    TraceValue::StrList(vec!["yes, please".into(), "no".into()]),
                ],
                result: TraceValue::Str("yes, please".into()),
                location: "main office".into(),
            },
        ];
        let terminal_robot = replay_terminal(&world, &elements);
        Trace {
            world,
            elements,
            terminal_robot,
        }
    }

    #[test]
    fn round_trips_through_wire_format() {
        let trace = sample_trace();
        let text = serialize_trace(&trace, "case_a");
        let (parsed, case) = parse_trace(&text).unwrap();
        assert_eq!(case, "case_a");
        assert_eq!(parsed.elements, trace.elements);
        assert_eq!(parsed.world.rooms, trace.world.rooms);
        assert_eq!(parsed.terminal_robot, trace.terminal_robot);
    }

    #[test]
    fn serialization_is_byte_stable() {
        let trace = sample_trace();
        assert_eq!(
            serialize_trace(&trace, "x"),
            serialize_trace(&trace, "x"),
        );
    }

    #[test]
    fn spaces_in_strings_and_locations_survive() {
        let trace = sample_trace();
        let text = serialize_trace(&trace, "case_a");
        let (parsed, _) = parse_trace(&text).unwrap();
        assert_eq!(parsed.elements[1].args[1], TraceValue::Str("lunch at noon?".into()));
        assert_eq!(parsed.elements[0].location, "main office");
    }

    #[test]
    fn replay_tracks_movement_and_hand() {
        let world = world();
        let elements = vec![
            TraceElement {
                index: 0,
                skill: SkillKind::Pick,
                args: vec![TraceValue::Str("marker".into())],
                result: TraceValue::Null,
                location: "lobby".into(),
            },
            TraceElement {
                index: 1,
                skill: SkillKind::GoTo,
                args: vec![TraceValue::Str("main office".into())],
                result: TraceValue::Null,
                location: "main office".into(),
            },
        ];
        let robot = replay_terminal(&world, &elements);
        assert_eq!(robot.location, "main office");
        assert_eq!(robot.held.as_deref(), Some("marker"));
    }

    #[test]
    fn out_of_order_indices_are_rejected() {
        let trace = sample_trace();
        let text = serialize_trace(&trace, "x").replace("\n1 Ask", "\n7 Ask");
        let err = parse_trace(&text).unwrap_err();
        assert!(err.to_string().contains("out of order"), "{err}");
    }

    #[test]
    fn comma_join_renders_option_lists() {
        let value = TraceValue::StrList(vec!["bread".into(), "cheese".into()]);
        assert_eq!(value.render(), "bread,cheese");
    }

    #[test]
    fn empty_trace_round_trips() {
        let world = world();
        let trace = Trace {
            terminal_robot: crate::world::RobotState::at_start_of(&world),
            world,
            elements: Vec::new(),
        };
        let (parsed, case) = parse_trace(&serialize_trace(&trace, "empty")).unwrap();
        assert_eq!(case, "empty");
        assert!(parsed.elements.is_empty());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_value() -> impl Strategy<Value = TraceValue> {
            // Newlines cannot appear (the format is line-oriented and skill
            // strings come from single-line program text), anything else can.
            let text = "[^\n\r]{0,12}";
            prop_oneof![
                Just(TraceValue::Null),
                any::<bool>().prop_map(TraceValue::Bool),
                text.prop_map(TraceValue::Str),
                prop::collection::vec(text, 0..3).prop_map(TraceValue::StrList),
            ]
        }

        fn arb_element(index: usize) -> impl Strategy<Value = TraceElement> {
            (
                prop::sample::select(SkillKind::ALL.to_vec()),
                prop::collection::vec(arb_value(), 0..3),
                arb_value(),
                "[a-z][a-z ]{0,10}",
            )
                .prop_map(move |(skill, args, result, location)| TraceElement {
                    index,
                    skill,
                    args,
                    result,
                    location: location.trim().to_string() + "x",
                })
        }

        proptest! {
            #[test]
            fn wire_format_round_trips(
                proto in prop::collection::vec(arb_element(0), 0..6)
            ) {
                let elements: Vec<TraceElement> = proto
                    .into_iter()
                    .enumerate()
                    .map(|(index, mut element)| {
                        element.index = index;
                        element
                    })
                    .collect();
                let world = world();
                let trace = Trace {
                    terminal_robot: replay_terminal(&world, &elements),
                    world,
                    elements,
                };
                let (parsed, _) = parse_trace(&serialize_trace(&trace, "prop")).unwrap();
                prop_assert_eq!(parsed.elements, trace.elements);
            }
        }
    }
}
