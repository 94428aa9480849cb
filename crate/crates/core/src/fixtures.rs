//! Scenario and partition files shipped with the binary.
//!
//! Setting `SDR_PLANNER_FIXTURES` to a directory makes lookups read from
//! there instead of the embedded copies.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const FIXTURES_ENV: &str = "SDR_PLANNER_FIXTURES";

const BUNDLED: &[(&str, &str)] = &[
    ("manhattan_lunch.json", include_str!("../fixtures/manhattan_lunch.json")),
    ("table1.json", include_str!("../fixtures/table1.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

fn override_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from)
}

/// Reads a fixture by name from the override directory or the embedded set.
pub fn read_fixture(name: &str) -> Result<String> {
    match override_dir() {
        Some(dir) => Ok(std::fs::read_to_string(dir.join(name))?),
        None => bundled(name)
            .map(str::to_string)
            .ok_or_else(|| Error::Config(format!("no bundled fixture named '{name}'"))),
    }
}

/// Reads `path` if it exists on disk, otherwise treats it as a fixture name.
pub fn read_input(path: &Path) -> Result<String> {
    if path.exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .filter(|_| path.parent().is_none_or(|p| p.as_os_str().is_empty()));
    match name {
        Some(name) => read_fixture(name).map_err(|_| {
            Error::Config(format!("'{}' is neither a file nor a bundled fixture", path.display()))
        }),
        None => Err(Error::Config(format!("file '{}' not found", path.display()))),
    }
}
