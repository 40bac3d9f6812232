use std::path::{Path, PathBuf};

use dkg_core::conservation::{self, apriori_check, DiagnosticsContext};
use dkg_core::harness::{GridSection, InitialData};
use dkg_core::thresholds::{self, TauThresholds};
use dkg_core::{snapshot, FieldState, GridParams, ModelKind, PolynomialPotential, Stepper};
use serde::{Deserialize, Serialize};

use crate::output::{self, float};
use crate::{CliError, Common};

fn default_model() -> ModelKind {
    ModelKind::OscillatorAtOrigin
}

fn default_output() -> PathBuf {
    output::default_dir("dkg-simulate")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Required unless the run starts from a snapshot, whose grid is used.
    #[serde(default)]
    pub grid: Option<GridSection>,
    /// `C₀, …, C_p`; empty means `W = 0`.
    #[serde(default)]
    pub potential: Vec<f64>,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    /// Defaults to the data support plus `steps + 2`.
    #[serde(default)]
    pub radius: Option<usize>,
    pub steps: usize,
    /// Snapshot cadence in steps; 0 keeps only the final state.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub initial_snapshot: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a SimulateConfig,
    grid: GridParams,
    radius: usize,
    t_start: i64,
    t_end: i64,
    above_tau2: bool,
    multi_root_warnings: usize,
    /// `max_t |E^t − E⁰| / max(1, |E⁰|)`
    energy_drift: f64,
    /// `max_t |Q^t − Q⁰|`; absent unless `τ/ε = 1/√n`.
    charge_drift: Option<f64>,
    apriori_ok: bool,
    thresholds: TauThresholds,
    snapshots: Vec<String>,
}

fn initial_state(cfg: &SimulateConfig) -> Result<(FieldState, GridParams), CliError> {
    match (&cfg.initial, &cfg.initial_snapshot) {
        (Some(data), None) => {
            let grid = cfg
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Config("missing [grid] section".into()))?
                .params()?;
            let need = data.support_radius() + cfg.steps;
            let r = cfg.radius.unwrap_or(need + 2);
            if r < need {
                eprintln!("dkg: warning: radius {r} is below data support + steps = {need}; the frozen boundary is inside the light cone");
            }
            let domain = dkg_core::BoxDomain::new(r, grid.n)?;
            Ok((data.build(domain)?, grid))
        }
        (None, Some(path)) => {
            let (state, grid) = snapshot::read(path)?;
            if let Some(g) = &cfg.grid {
                let given = g.params()?;
                if given != grid {
                    return Err(CliError::Config(format!(
                        "[grid] {given:?} differs from the snapshot grid {grid:?}"
                    )));
                }
            }
            let state = match cfg.radius {
                Some(r) if r != state.domain.radius => state.resized(r)?,
                _ => state,
            };
            Ok((state, grid))
        }
        (Some(_), Some(_)) => Err(CliError::Config("give either [initial] or initial_snapshot, not both".into())),
        (None, None) => Err(CliError::Config("missing [initial] section or initial_snapshot".into())),
    }
}

fn write_snapshot(dir: &Path, name: &str, state: &FieldState, grid: &GridParams) -> Result<String, CliError> {
    snapshot::write(&dir.join(name), state, grid)?;
    Ok(name.to_string())
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let cfg: SimulateConfig = output::load(common, &[])?;
    if cfg.steps == 0 {
        return Err(CliError::Config("steps must be ≥ 1".into()));
    }
    let w = if cfg.potential.is_empty() {
        PolynomialPotential::zero()
    } else {
        PolynomialPotential::new(cfg.potential.clone())?
    };
    let (mut state, grid) = initial_state(&cfg)?;
    let mut stepper = Stepper::new(&grid, &w, cfg.model, state.domain)?;
    stepper.attach(&state)?;
    let ctx = DiagnosticsContext::new(&grid, &w, cfg.model, &state);
    let dir = cfg.output.clone();
    output::ensure_dir(&dir)?;

    let o = state.domain.origin();
    let t_start = state.t;
    let mut series = csv::Writer::from_path(dir.join("origin.csv"))?;
    series.write_record(["t", "re", "im"])?;
    series.write_record([t_start.to_string(), float(state.psi_prev[o].re), float(state.psi_prev[o].im)])?;
    series.write_record([(t_start + 1).to_string(), float(state.psi_curr[o].re), float(state.psi_curr[o].im)])?;

    let mut diags = vec![ctx.measure(&state)];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push(write_snapshot(&dir, &format!("snap_{t_start}.bin"), &state, &grid)?);
    }
    for k in 1..=cfg.steps {
        stepper.advance(&mut state)?;
        if !state.is_finite() {
            return Err(CliError::Numerical(format!("field became non-finite at t = {}", state.t + 1)));
        }
        let z = state.psi_curr[o];
        series.write_record([(state.t + 1).to_string(), float(z.re), float(z.im)])?;
        diags.push(ctx.measure(&state));
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            snapshots.push(write_snapshot(&dir, &format!("snap_{}.bin", state.t), &state, &grid)?);
        }
    }
    series.flush()?;
    snapshots.push(write_snapshot(&dir, "final.bin", &state, &grid)?);
    let mut f = std::fs::File::create(dir.join("diagnostics.csv"))?;
    conservation::write_csv(&mut f, &diags)?;

    let e0 = diags[0].energy;
    let energy_drift = diags
        .iter()
        .map(|d| (d.energy - e0).abs() / e0.abs().max(1.0))
        .fold(0.0, f64::max);
    let charge_drift = diags[0].charge.map(|q0| {
        diags
            .iter()
            .filter_map(|d| d.charge)
            .map(|q| (q - q0).abs())
            .fold(0.0, f64::max)
    });
    let manifest = Manifest {
        config: &cfg,
        grid,
        radius: state.domain.radius,
        t_start,
        t_end: state.t + 1,
        above_tau2: stepper.above_tau2(),
        multi_root_warnings: stepper.multi_root_warnings,
        energy_drift,
        charge_drift,
        apriori_ok: diags.iter().all(apriori_check),
        thresholds: thresholds::thresholds_any(&w, thresholds::default_search_bound(&w), thresholds::DEFAULT_GRID_POINTS),
        snapshots,
    };
    output::emit_json(&manifest, Some(&dir.join("manifest.json")))?;
    if manifest.above_tau2 {
        eprintln!("dkg: warning: tau = {} is not below tau2; on-site roots may not be unique", grid.tau);
    }
    Ok(())
}
