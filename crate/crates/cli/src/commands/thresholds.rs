use std::f64::consts::PI;
use std::path::PathBuf;

use dkg_core::harness::GridSection;
use dkg_core::thresholds::{default_search_bound, tau_thresholds, TauThresholds, DEFAULT_GRID_POINTS};
use dkg_core::{spectral, PolynomialPotential};
use serde::{Deserialize, Serialize};

use crate::output;
use crate::{CliError, Common};

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdsConfig {
    potential: Vec<f64>,
    /// Side of the `[0, L]²` box searched for `k₂`.
    #[serde(default)]
    search_bound: Option<f64>,
    #[serde(default = "default_points")]
    grid_points: usize,
    /// When given, the grid's `τ` is checked against each threshold.
    #[serde(default)]
    grid: Option<GridSection>,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct GridCheck {
    tau: f64,
    below_tau1: bool,
    below_tau2: bool,
    below_tau3: bool,
    omega_m: f64,
    /// `π/(4(p+1))`
    omega_m_limit: f64,
    omega_m_ok: bool,
}

#[derive(Debug, Serialize)]
struct Report {
    potential: Vec<f64>,
    inf_w: Option<f64>,
    thresholds: TauThresholds,
    grid: Option<GridCheck>,
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let cfg: ThresholdsConfig = output::load(common, &[])?;
    let w = PolynomialPotential::confining(cfg.potential.clone())?;
    let bound = cfg.search_bound.unwrap_or_else(|| default_search_bound(&w));
    let th = tau_thresholds(&w, bound, cfg.grid_points)?;
    let grid = match &cfg.grid {
        Some(g) => {
            let g = g.params()?;
            let omega_m = spectral::omega_m(&g);
            let p = w.order().unwrap_or(0);
            let limit = PI / (4.0 * (p as f64 + 1.0));
            Some(GridCheck {
                tau: g.tau,
                below_tau1: th.tau1.admits(g.tau),
                below_tau2: th.tau2.admits(g.tau),
                below_tau3: th.tau3.admits(g.tau),
                omega_m,
                omega_m_limit: limit,
                omega_m_ok: omega_m < limit,
            })
        }
        None => None,
    };
    let report = Report { potential: cfg.potential, inf_w: w.inf(), thresholds: th, grid };
    output::emit_json(&report, cfg.output.as_deref())
}
