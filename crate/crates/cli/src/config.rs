//! TOML configuration with dotted-key overrides from the command line.

use std::path::Path;

use serde::de::DeserializeOwned;
use toml::{Table, Value};

use crate::CliError;

/// Parses `raw` as a TOML value, falling back to a plain string so that
/// `--set output=runs/a` works without quoting.
pub fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

/// Sets `key` (dot separated; numeric segments index arrays) in `root`,
/// creating intermediate tables as needed.
pub fn set_path(root: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key '{key}'")));
    }
    let mut slot: &mut Value = root
        .entry(parts[0])
        .or_insert_with(|| Value::Table(Table::new()));
    for (depth, part) in parts.iter().enumerate().skip(1) {
        let here = parts[..depth].join(".");
        slot = match slot {
            Value::Table(t) => t.entry(*part).or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| CliError::Config(format!("'{here}' is an array; '{part}' is not an index")))?;
                if i > a.len() {
                    return Err(CliError::Config(format!("index {i} is past the end of '{here}' (length {})", a.len())));
                }
                if i == a.len() {
                    a.push(Value::Table(Table::new()));
                }
                &mut a[i]
            }
            _ => return Err(CliError::Config(format!("'{here}' is not a table"))),
        };
    }
    *slot = value;
    Ok(())
}

/// Applies `key=value` overrides in order.
pub fn apply_overrides(root: &mut Table, sets: &[String]) -> Result<(), CliError> {
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{s}' is not of the form key=value")))?;
        set_path(root, k.trim(), parse_value(v.trim()))?;
    }
    Ok(())
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.parse::<Table>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Reads `path` if given, then applies the overrides.
pub fn load_table(path: Option<&Path>, sets: &[String]) -> Result<Table, CliError> {
    let mut t = match path {
        Some(p) => read_table(p)?,
        None => Table::new(),
    };
    apply_overrides(&mut t, sets)?;
    Ok(t)
}

pub fn decode<T: DeserializeOwned>(t: Table) -> Result<T, CliError> {
    T::deserialize(Value::Table(t)).map_err(|e| CliError::Config(e.to_string()))
}
