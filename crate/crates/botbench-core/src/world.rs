//! Declarative world model: rooms, located objects, pickable objects, and
//! responsive persons. The simulator reads a [`WorldState`] and mutates a
//! per-simulation copy of the movable parts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::CORPUS_SCHEMA_VERSION;

/// A regular expression that must match its subject in full.
///
/// Anchoring is applied once here so that "office" never matches
/// "post office annex" by accident; authors opt in to substring matching
/// with an explicit `.*`.
#[derive(Debug, Clone)]
pub struct Pattern {
    raw: String,
    regex: Regex,
}

impl Pattern {
    pub fn new(raw: &str) -> Result<Self, regex::Error> {
        let regex = Regex::new(&format!("^(?:{raw})$"))?;
        Ok(Pattern {
            raw: raw.to_string(),
            regex,
        })
    }

    pub fn matches(&self, subject: &str) -> bool {
        self.regex.is_match(subject)
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl Eq for Pattern {}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// How a person answers multiple-choice questions: the first rule whose
/// question pattern matches selects the rule, and within it the first
/// offered option matching the choice pattern is returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseRule {
    pub question: Pattern,
    pub choice: Pattern,
}

/// A responsive person: where they stand and how they answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonSpec {
    pub location: String,
    pub response_rules: Vec<ResponseRule>,
}

impl PersonSpec {
    /// Picks an option for a question. Falls back to the first option when
    /// no rule matches the question or no option matches the chosen rule,
    /// which keeps benchmark traces deterministic.
    pub fn respond(&self, question: &str, options: &[String]) -> String {
        assert!(!options.is_empty(), "respond requires non-empty options");
        for rule in &self.response_rules {
            if rule.question.matches(question) {
                for option in options {
                    if rule.choice.matches(option) {
                        return option.clone();
                    }
                }
                break;
            }
        }
        options[0].clone()
    }
}

/// Immutable snapshot of the environment a simulation starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    /// Room names in schema order; `get_all_rooms` returns exactly this.
    pub rooms: Vec<String>,
    /// Object name -> rooms where perception reports it present.
    pub object_locations: BTreeMap<String, BTreeSet<String>>,
    /// (object, room) pairs the robot may pick up.
    pub pickable: BTreeSet<(String, String)>,
    /// Persons in schema order; the first person in the robot's room answers.
    pub persons: Vec<(String, PersonSpec)>,
    pub robot_start: String,
}

impl WorldState {
    pub fn has_room(&self, name: &str) -> bool {
        self.rooms.iter().any(|room| room == name)
    }

    /// First person (schema order) standing in `room`.
    pub fn person_at(&self, room: &str) -> Option<(&str, &PersonSpec)> {
        self.persons
            .iter()
            .find(|(_, spec)| spec.location == room)
            .map(|(name, spec)| (name.as_str(), spec))
    }
}

/// Mutable robot state confined to one simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotState {
    pub location: String,
    pub held: Option<String>,
}

impl RobotState {
    pub fn at_start_of(world: &WorldState) -> Self {
        RobotState {
            location: world.robot_start.clone(),
            held: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("world document is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("schema: expected version {expected}, found {found}")]
    SchemaVersion { expected: u32, found: u32 },
    #[error("rooms: must list at least one room")]
    NoRooms,
    #[error("rooms: blank room name at position {0}")]
    BlankRoom(usize),
    #[error("rooms: room name {0:?} contains a line break")]
    RoomNameLineBreak(String),
    #[error("rooms: duplicate room name {0:?}")]
    DuplicateRoom(String),
    #[error("robot_start not in rooms: {0:?}")]
    StartNotInRooms(String),
    #[error("objects[{object:?}].rooms: unknown room {room:?}")]
    ObjectRoomUnknown { object: String, room: String },
    #[error("objects: duplicate object name {0:?}")]
    DuplicateObject(String),
    #[error("objects[{object:?}].pickable: {room:?} is not a room the object is located in")]
    PickableNotLocated { object: String, room: String },
    #[error("objects[{object:?}].name: blank object name")]
    BlankObject { object: String },
    #[error("persons[{person:?}].location: unknown room {room:?}")]
    PersonRoomUnknown { person: String, room: String },
    #[error("persons: duplicate person name {0:?}")]
    DuplicatePerson(String),
    #[error("persons[{person:?}].rules: must list at least one rule")]
    NoRules { person: String },
    #[error("persons[{person:?}].rules[{index}].{field}: invalid pattern: {source}")]
    BadPattern {
        person: String,
        index: usize,
        field: &'static str,
        source: regex::Error,
    },
}

/// Serde image of the world document. `pickable` accepts either a list of
/// rooms or a per-room boolean table.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct WorldDoc {
    schema: u32,
    rooms: Vec<String>,
    robot_start: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    persons: Vec<PersonDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ObjectDoc {
    name: String,
    rooms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pickable: Option<PickableDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum PickableDoc {
    Rooms(Vec<String>),
    PerRoom(BTreeMap<String, bool>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PersonDoc {
    name: String,
    location: String,
    rules: Vec<RuleDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuleDoc {
    question: String,
    choice: String,
}

/// Parses and validates a world document (TOML, `schema = 1`).
pub fn load_world(document: &str) -> Result<WorldState, WorldError> {
    let doc: WorldDoc = toml::from_str(document)?;
    world_from_doc(doc)
}

fn world_from_doc(doc: WorldDoc) -> Result<WorldState, WorldError> {
    if doc.schema != CORPUS_SCHEMA_VERSION {
        return Err(WorldError::SchemaVersion {
            expected: CORPUS_SCHEMA_VERSION,
            found: doc.schema,
        });
    }

    // Names are compared case-sensitively after trimming surrounding
    // whitespace, everywhere.
    let mut rooms = Vec::new();
    for (i, room) in doc.rooms.iter().enumerate() {
        let room = room.trim();
        if room.is_empty() {
            return Err(WorldError::BlankRoom(i));
        }
        // Room names become the location column of the line-oriented trace
        // format; a line break would corrupt it.
        if room.contains(['\n', '\r']) {
            return Err(WorldError::RoomNameLineBreak(room.to_string()));
        }
        if rooms.iter().any(|existing| existing == room) {
            return Err(WorldError::DuplicateRoom(room.to_string()));
        }
        rooms.push(room.to_string());
    }
    if rooms.is_empty() {
        return Err(WorldError::NoRooms);
    }

    let robot_start = doc.robot_start.trim().to_string();
    if !rooms.contains(&robot_start) {
        return Err(WorldError::StartNotInRooms(robot_start));
    }

    let mut object_locations: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut pickable = BTreeSet::new();
    for object in &doc.objects {
        let name = object.name.trim().to_string();
        if name.is_empty() {
            return Err(WorldError::BlankObject {
                object: object.name.clone(),
            });
        }
        if object_locations.contains_key(&name) {
            return Err(WorldError::DuplicateObject(name));
        }
        let mut located = BTreeSet::new();
        for room in &object.rooms {
            let room = room.trim().to_string();
            if !rooms.contains(&room) {
                return Err(WorldError::ObjectRoomUnknown { object: name, room });
            }
            located.insert(room);
        }
        let pick_rooms: Vec<String> = match &object.pickable {
            None => Vec::new(),
            Some(PickableDoc::Rooms(list)) => list.iter().map(|r| r.trim().to_string()).collect(),
            Some(PickableDoc::PerRoom(map)) => map
                .iter()
                .filter(|(_, enabled)| **enabled)
                .map(|(room, _)| room.trim().to_string())
                .collect(),
        };
        for room in pick_rooms {
            if !located.contains(&room) {
                return Err(WorldError::PickableNotLocated { object: name, room });
            }
            pickable.insert((name.clone(), room));
        }
        object_locations.insert(name, located);
    }

    let mut persons: Vec<(String, PersonSpec)> = Vec::new();
    for person in &doc.persons {
        let name = person.name.trim().to_string();
        if persons.iter().any(|(n, _)| *n == name) {
            return Err(WorldError::DuplicatePerson(name));
        }
        let location = person.location.trim().to_string();
        if !rooms.contains(&location) {
            return Err(WorldError::PersonRoomUnknown {
                person: name,
                room: location,
            });
        }
        if person.rules.is_empty() {
            return Err(WorldError::NoRules { person: name });
        }
        let mut response_rules = Vec::new();
        for (index, rule) in person.rules.iter().enumerate() {
            let question =
                Pattern::new(&rule.question).map_err(|source| WorldError::BadPattern {
                    person: name.clone(),
                    index,
                    field: "question",
                    source,
                })?;
            let choice = Pattern::new(&rule.choice).map_err(|source| WorldError::BadPattern {
                person: name.clone(),
                index,
                field: "choice",
                source,
            })?;
            response_rules.push(ResponseRule { question, choice });
        }
        persons.push((
            name,
            PersonSpec {
                location,
                response_rules,
            },
        ));
    }

    Ok(WorldState {
        rooms,
        object_locations,
        pickable,
        persons,
        robot_start,
    })
}

/// Renders a world back to its document form. `load_world(serialize_world(w))`
/// reproduces `w` for every valid world.
pub fn serialize_world(world: &WorldState) -> String {
    let objects = world
        .object_locations
        .iter()
        .map(|(name, located)| {
            let pick_rooms: Vec<String> = located
                .iter()
                .filter(|room| world.pickable.contains(&(name.clone(), (*room).clone())))
                .cloned()
                .collect();
            ObjectDoc {
                name: name.clone(),
                rooms: located.iter().cloned().collect(),
                pickable: if pick_rooms.is_empty() {
                    None
                } else {
                    Some(PickableDoc::Rooms(pick_rooms))
                },
            }
        })
        .collect();
    let persons = world
        .persons
        .iter()
        .map(|(name, spec)| PersonDoc {
            name: name.clone(),
            location: spec.location.clone(),
            rules: spec
                .response_rules
                .iter()
                .map(|rule| RuleDoc {
                    question: rule.question.as_str().to_string(),
                    choice: rule.choice.as_str().to_string(),
                })
                .collect(),
        })
        .collect();
    let doc = WorldDoc {
        schema: CORPUS_SCHEMA_VERSION,
        rooms: world.rooms.clone(),
        robot_start: world.robot_start.clone(),
        objects,
        persons,
    };
    toml::to_string_pretty(&doc).expect("world documents always serialize")
}
