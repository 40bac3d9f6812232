use std::path::PathBuf;

use dkg_core::harness::{self, ExperimentConfig, SweepEntry};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::config::{self, set_path};
use crate::output;
use crate::{CliError, Common};

/// One sweep axis: every value of `values` is substituted at `key`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Axis {
    key: String,
    values: Vec<Value>,
}

#[derive(Debug, Serialize)]
struct Summary {
    windows: usize,
    first_gap_mass_fraction: Option<f64>,
    final_gap_mass_fraction: Option<f64>,
    first_distance: Option<f64>,
    final_distance: Option<f64>,
    omega_m_ok: bool,
    above_tau2: bool,
    multi_root_warnings: usize,
}

#[derive(Debug, Serialize)]
struct RunRecord {
    index: usize,
    config_hash: String,
    settings: Vec<(String, Value)>,
    config: ExperimentConfig,
    error: Option<String>,
    summary: Option<Summary>,
}

#[derive(Debug, Serialize)]
struct Manifest {
    axes: Vec<Axis>,
    runs: Vec<RunRecord>,
    failed: usize,
}

/// Every combination of axis values, the last axis varying fastest.
fn combinations(axes: &[Axis]) -> Vec<Vec<(String, Value)>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((axis.key.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    out
}

fn summarize(e: &SweepEntry) -> Option<Summary> {
    let r = e.report.as_ref()?;
    Some(Summary {
        windows: r.windows.len(),
        first_gap_mass_fraction: r.windows.first().map(|w| w.gap_mass_fraction),
        final_gap_mass_fraction: r.windows.last().map(|w| w.gap_mass_fraction),
        first_distance: r.windows.first().map(|w| w.distance),
        final_distance: r.windows.last().map(|w| w.distance),
        omega_m_ok: r.omega_m_ok,
        above_tau2: r.above_tau2,
        multi_root_warnings: r.multi_root_warnings,
    })
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let mut base = config::load_table(common.config.as_deref(), &common.set)?;
    let axes: Vec<Axis> = match base.remove("vary") {
        Some(v) => Vec::<Axis>::deserialize(v).map_err(|e| CliError::Config(format!("vary: {e}")))?,
        None => Vec::new(),
    };
    let dir = match (&common.out, base.remove("output")) {
        (Some(p), _) => p.clone(),
        (None, Some(Value::String(s))) => PathBuf::from(s),
        (None, Some(_)) => return Err(CliError::Config("output must be a path".into())),
        (None, None) => output::default_dir("dkg-sweep"),
    };
    let mut configs = Vec::new();
    let mut settings = Vec::new();
    for combo in combinations(&axes) {
        let mut t: Table = base.clone();
        for (k, v) in &combo {
            set_path(&mut t, k, v.clone())?;
        }
        let cfg: ExperimentConfig = config::decode(t)?;
        cfg.validate().map_err(|e| {
            let at: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
            CliError::Config(format!("run [{}]: {e}", at.join(", ")))
        })?;
        configs.push(cfg);
        settings.push(combo);
    }

    let entries = harness::sweep(&configs);
    output::ensure_dir(&dir)?;
    let mut f = std::fs::File::create(dir.join("sweep.csv"))?;
    harness::write_sweep_csv(&mut f, &entries)?;
    let runs: Vec<RunRecord> = entries
        .iter()
        .zip(configs)
        .zip(settings)
        .map(|((e, config), settings)| RunRecord {
            index: e.index,
            config_hash: e.config_hash.clone(),
            settings,
            config,
            error: e.error.clone(),
            summary: summarize(e),
        })
        .collect();
    let failed = runs.iter().filter(|r| r.error.is_some()).count();
    for r in runs.iter().filter(|r| r.error.is_some()) {
        eprintln!("dkg: run {} failed: {}", r.index, r.error.as_deref().unwrap_or_default());
    }
    let total = runs.len();
    output::emit_json(&Manifest { axes, runs, failed }, Some(&dir.join("manifest.json")))?;
    if failed == total {
        return Err(CliError::Numerical(format!("all {total} runs failed")));
    }
    Ok(())
}
