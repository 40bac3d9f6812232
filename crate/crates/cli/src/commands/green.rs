use std::path::PathBuf;

use dkg_core::harness::GridSection;
use dkg_core::spectral::{greens_table, greens_table_from};
use dkg_core::{BoxDomain, Complex64};
use serde::Deserialize;

use crate::output::{self, float, site_label};
use crate::{CliError, Common};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GreenConfig {
    grid: GridSection,
    omega: f64,
    /// Imaginary part of the frequency, for limiting absorption.
    #[serde(default)]
    omega_im: f64,
    radius: usize,
    /// Starting nodes per axis; refined by doubling.
    #[serde(default)]
    quad_points: Option<usize>,
    /// CSV path; stdout when absent.
    #[serde(default)]
    output: Option<PathBuf>,
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let cfg: GreenConfig = output::load(common, &[])?;
    let grid = cfg.grid.params()?;
    let domain = BoxDomain::new(cfg.radius, grid.n)?;
    let omega = Complex64::new(cfg.omega, cfg.omega_im);
    let table = match cfg.quad_points {
        Some(q) => greens_table_from(&domain, omega, &grid, q)?,
        None => greens_table(&domain, omega, &grid)?,
    };
    if table.degraded {
        eprintln!("dkg: warning: singular quadrature nodes were dropped; est_error is degraded");
    }
    let mut out = output::csv_writer(cfg.output.as_deref())?;
    out.write_record(["X", "re", "im", "est_error"])?;
    let err = float(table.est_error);
    for (i, g) in table.values.iter().enumerate() {
        out.write_record([site_label(&domain, i), float(g.re), float(g.im), err.clone()])?;
    }
    out.flush()?;
    Ok(())
}
