use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dkg_core::BoxDomain;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{self, set_path};
use crate::{CliError, Common};

/// Loads the subcommand's configuration: file, then `--set`, then `--out`.
pub fn load<T: DeserializeOwned>(common: &Common, extra: &[(&str, Option<&Path>)]) -> Result<T, CliError> {
    let mut t = config::load_table(common.config.as_deref(), &common.set)?;
    for (key, path) in extra {
        if let Some(p) = path {
            set_path(&mut t, key, toml::Value::String(p.display().to_string()))?;
        }
    }
    if let Some(out) = &common.out {
        set_path(&mut t, "output", toml::Value::String(out.display().to_string()))?;
    }
    config::decode(t)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))
}

/// Writes pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let text = json_string(value)?;
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(dir)?;
            }
            fs::write(p, text + "\n")?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

/// CSV writer on `path`, or on stdout when `path` is `None`.
pub fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                ensure_dir(dir)?;
            }
            Box::new(fs::File::create(p)?)
        }
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Site coordinates joined by `;`, e.g. `-2;0;5`.
pub fn site_label(domain: &BoxDomain, idx: usize) -> String {
    domain
        .coords(idx)
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn float(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn default_dir(name: &str) -> PathBuf {
    PathBuf::from(name)
}
