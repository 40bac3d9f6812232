use std::path::{Path, PathBuf};

use dkg_core::titchmarsh::{
    check_powers_theorem, check_two_interval_theorem, classify_point_support, min_arc_mod_pi, supp_mod_pi_hull,
    CircleMeasure,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output;
use crate::{CliError, Common};

fn default_powers() -> Vec<u32> {
    vec![2, 3, 4]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TitchmarshConfig {
    /// JSON list of atoms `{"angle": θ | {"pi": [num, den]}, "weight": [re, im]}`.
    atoms: PathBuf,
    /// Optional second measure `g` for the two-interval check.
    #[serde(default)]
    second: Option<PathBuf>,
    #[serde(default = "default_powers")]
    powers: Vec<u32>,
    /// JSON path; stdout when absent.
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report {
    f: CircleMeasure,
    hull: Value,
    min_arc: Option<(f64, f64)>,
    /// `f ∗ f^♯`
    autocorrelation: CircleMeasure,
    classification: Value,
    powers: Vec<Value>,
    g: Option<CircleMeasure>,
    two_interval: Option<Value>,
}

/// `{"ok": …}` or `{"error": "…"}`; failed hypotheses are results, not failures.
fn outcome<T: Serialize>(r: dkg_core::Result<T>) -> Value {
    match r {
        Ok(v) => json!({ "ok": v }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn read_measure(path: &Path) -> Result<CircleMeasure, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn run(common: &Common, atoms: Option<PathBuf>) -> Result<(), CliError> {
    let cfg: TitchmarshConfig = output::load(common, &[("atoms", atoms.as_deref())])?;
    let f = read_measure(&cfg.atoms)?;
    let g = cfg.second.as_deref().map(read_measure).transpose()?;
    let report = Report {
        hull: outcome(supp_mod_pi_hull(&f)),
        min_arc: min_arc_mod_pi(&f),
        autocorrelation: f.convolve(&f.sharp()),
        classification: outcome(classify_point_support(&f)),
        powers: cfg
            .powers
            .iter()
            .map(|&p| json!({ "p": p, "result": outcome(check_powers_theorem(&f, p)) }))
            .collect(),
        two_interval: g.as_ref().map(|g| outcome(check_two_interval_theorem(&f, g))),
        g,
        f,
    };
    output::emit_json(&report, cfg.output.as_deref())
}
