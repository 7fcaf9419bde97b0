//! JSON file helpers for instances and schedules.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes pretty-printed JSON followed by a newline, creating parent directories.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let inst: Instance = read_json(path)?;
    inst.validate()?;
    Ok(inst)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    write_json(path, instance)
}

pub fn read_schedule(path: impl AsRef<Path>) -> Result<Schedule> {
    read_json(path)
}

/// Schedules are written compactly, one row per line.
pub fn write_schedule(path: impl AsRef<Path>, schedule: &Schedule) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let rows: Vec<String> = schedule
        .to_rows()
        .iter()
        .map(serde_json::to_string)
        .collect::<std::result::Result<_, _>>()?;
    let text = format!("[\n  {}\n]\n", rows.join(",\n  "));
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
