use std::path::PathBuf;

use dkg_core::harness::{windowed_spectrum, GridSection, SpectrumReport};
use dkg_core::spectral::SpectralParams;
use dkg_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::output;
use crate::{CliError, Common};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumConfig {
    grid: GridSection,
    /// CSV with columns `t,re,im`, as written by `simulate`.
    series: PathBuf,
    window: usize,
    /// Start of a single window, as a time `t`. Defaults to the last full window.
    #[serde(default)]
    t0: Option<i64>,
    /// When set, every window `t_first + k·hop` is analysed instead.
    #[serde(default)]
    hop: Option<usize>,
    /// JSON path; stdout when absent.
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report {
    t_first: i64,
    window: usize,
    omega_m: f64,
    windows: Vec<SpectrumReport>,
}

#[derive(Debug, Deserialize)]
struct Sample {
    t: i64,
    re: f64,
    im: f64,
}

fn read_series(path: &std::path::Path) -> Result<(i64, Vec<Complex64>), CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut first = None;
    let mut values = Vec::new();
    for rec in rd.deserialize::<Sample>() {
        let s = rec.map_err(|e| bad(e.to_string()))?;
        let t0 = *first.get_or_insert(s.t);
        if s.t != t0 + values.len() as i64 {
            return Err(bad(format!("times must be consecutive; found t = {} after {} samples", s.t, values.len())));
        }
        values.push(Complex64::new(s.re, s.im));
    }
    Ok((first.ok_or_else(|| bad("empty series".into()))?, values))
}

pub fn run(common: &Common, series: Option<PathBuf>) -> Result<(), CliError> {
    let cfg: SpectrumConfig = output::load(common, &[("series", series.as_deref())])?;
    let grid = cfg.grid.params()?;
    let sp = SpectralParams::new(&grid);
    let (t_first, values) = read_series(&cfg.series)?;
    let len = values.len();
    if cfg.window < 2 || cfg.window > len {
        return Err(CliError::Config(format!("window {} does not fit a series of {len} samples", cfg.window)));
    }
    let starts: Vec<usize> = match (cfg.hop, cfg.t0) {
        (Some(0), _) => return Err(CliError::Config("hop must be positive".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("give t0 or hop, not both".into())),
        (Some(hop), None) => (0..=len - cfg.window).step_by(hop).collect(),
        (None, Some(t0)) => {
            let k = t0 - t_first;
            if k < 0 || k as usize + cfg.window > len {
                return Err(CliError::Config(format!("window at t0 = {t0} is outside the series")));
            }
            vec![k as usize]
        }
        (None, None) => vec![len - cfg.window],
    };
    let windows = starts
        .into_iter()
        .map(|k| windowed_spectrum(&values, k, cfg.window, &sp))
        .collect::<Result<Vec<_>, _>>()?;
    let report = Report { t_first, window: cfg.window, omega_m: sp.omega_m, windows };
    output::emit_json(&report, cfg.output.as_deref())
}
