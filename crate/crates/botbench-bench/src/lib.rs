//! Shared inputs for the engine benchmarks: a mid-sized world, a looping
//! program that touches every skill, and a representative check.

use botbench_core::{load_world, SourceProgram, WorldState};

pub fn bench_world() -> WorldState {
    load_world(
        "schema = 1\n\
         rooms = [\"main office\", \"conference room A\", \"conference room B\", \"conference room C\", \"lobby\"]\n\
         robot_start = \"main office\"\n\n\
         [[objects]]\n\
         name = \"marker\"\n\
         rooms = [\"conference room A\", \"conference room C\"]\n\
         pickable = [\"conference room A\", \"conference room C\"]\n\n\
         [[persons]]\n\
         name = \"alice\"\n\
         location = \"lobby\"\n\
         [[persons.rules]]\n\
         question = \".*\"\n\
         choice = \"yes\"\n",
    )
    .expect("bench world is valid")
}

pub fn counting_program() -> SourceProgram {
    SourceProgram::new(
        "def task():\n\
         \x20   start = get_current_location()\n\
         \x20   count = 0\n\
         \x20   for room in get_all_rooms():\n\
         \x20       if room.startswith(\"conference room\"):\n\
         \x20           go_to(room)\n\
         \x20           if is_in_room(\"marker\"):\n\
         \x20               count = count + 1\n\
         \x20   go_to(start)\n\
         \x20   say(f\"{count} rooms have a marker\")\n\
         \n\
         task()\n",
        "bench",
    )
}

pub const BENCH_CHECK: &str = "\
ExhaustiveSearch: visit_all(/conference room .*/);\n\
SayAtLocation: F say(msg~/.*2.*/, loc~/main office/);\n\
InitialTerminal: at_end(loc(/main office/));\n\
EventOrdering: seq(go_to(/conference room A/), say(/.*/))\n";
