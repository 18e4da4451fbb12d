//! Cases shipped with the crate.

use crate::case::{load_case_with, CaseError, PlanningCase};

const GARVER: &str = include_str!("../data/garver.toml");
const GARVER_DAYS: &str = include_str!("../data/garver_days.csv");
const TOY2: &str = include_str!("../data/toy2.toml");
const TOY3: &str = include_str!("../data/toy3.toml");
const RELAXED_DEMO: &str = include_str!("../data/relaxed_demo.toml");
const SINGLE_BUS: &str = include_str!("../data/single_bus.toml");

/// Days and hours kept by [`garver_reduced`].
pub const REDUCED_DAYS: [usize; 2] = [0, 1];
pub const REDUCED_HOURS: [usize; 4] = [3, 9, 14, 19];

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 6] = ["garver", "garver-reduced", "toy2", "toy3", "relaxed-demo", "single-bus"];

fn resolve(path: &str) -> Result<String, CaseError> {
    match path {
        "garver_days.csv" => Ok(GARVER_DAYS.to_owned()),
        other => Err(CaseError::Parse(format!("no bundled file `{other}`"))),
    }
}

fn load(doc: &str) -> PlanningCase {
    load_case_with(doc, &resolve).expect("bundled case is valid")
}

/// Six-bus Garver system with ten representative days.
pub fn garver() -> PlanningCase {
    load(GARVER)
}

/// Garver with two representative days of four hours each.
pub fn garver_reduced() -> PlanningCase {
    let mut case = garver().reduced(&REDUCED_DAYS, &REDUCED_HOURS).expect("reduction is valid");
    case.name = "garver-reduced".into();
    case
}

/// Two buses, one candidate circuit, one candidate storage unit, four hours.
pub fn toy2() -> PlanningCase {
    load(TOY2)
}

/// Three-bus ring with wind and existing plus candidate storage, four hours.
pub fn toy3() -> PlanningCase {
    load(TOY3)
}

/// Instance whose relaxed dispatch charges and discharges in the same hour.
pub fn relaxed_demo() -> PlanningCase {
    load(RELAXED_DEMO)
}

/// One bus, one unit, one demand.
pub fn single_bus() -> PlanningCase {
    load(SINGLE_BUS)
}

pub fn by_name(name: &str) -> Option<PlanningCase> {
    Some(match name {
        "garver" => garver(),
        "garver-reduced" => garver_reduced(),
        "toy2" => toy2(),
        "toy3" => toy3(),
        "relaxed-demo" => relaxed_demo(),
        "single-bus" => single_bus(),
        _ => return None,
    })
}
