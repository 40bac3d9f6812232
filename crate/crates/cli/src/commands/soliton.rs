use std::path::PathBuf;

use dkg_core::harness::GridSection;
use dkg_core::solitary::{self, FourFreqParams, RootSelect, TwoFreqInput};
use dkg_core::{BoxDomain, Complex64, GridParams, ModelKind, PolynomialPotential, WaveKind};
use serde::{Deserialize, Serialize};

use crate::output::{self, float, site_label};
use crate::{CliError, Common};

fn default_sigma() -> i8 {
    1
}

fn default_root() -> RootSelect {
    RootSelect::Smallest
}

fn default_steps() -> usize {
    64
}

fn default_output() -> PathBuf {
    output::default_dir("dkg-soliton")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolitonConfig {
    grid: GridSection,
    kind: WaveKind,
    radius: usize,
    /// `[ω]` for one frequency, `[ω]` or `[]` for two, `[ω₁, ω₂]` for four.
    #[serde(default)]
    frequencies: Vec<f64>,
    /// `p₀` as `[re, im]` (two and four frequencies).
    #[serde(default)]
    amplitude: Option<Complex64>,
    /// `r₀` as `[re, im]` (four frequencies).
    #[serde(default)]
    second_amplitude: Option<Complex64>,
    #[serde(default = "default_sigma")]
    sigma: i8,
    #[serde(default = "default_root")]
    root: RootSelect,
    /// Required for one and two frequencies; four-frequency waves get a
    /// designed potential.
    #[serde(default)]
    potential: Option<Vec<f64>>,
    #[serde(default = "default_steps")]
    residual_steps: usize,
    #[serde(default = "default_output")]
    output: PathBuf,
}

#[derive(Debug, Serialize)]
struct Manifest {
    kind: WaveKind,
    frequencies: Vec<f64>,
    /// `C` (one frequency) or `p₀`.
    #[serde(rename = "C")]
    amplitude: Complex64,
    second_amplitude: Option<Complex64>,
    sigma: Option<i8>,
    potential: Vec<f64>,
    potential_designed: bool,
    four_frequency: Option<FourFreqParams>,
    amplitude_roots: Vec<f64>,
    degenerate: bool,
    /// Largest scheme residual over interior sites and `residual_steps` steps.
    residual: f64,
    residual_steps: usize,
    greens_est_error: f64,
    grid: GridParams,
    radius: usize,
}

fn need<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {what}")))
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let cfg: SolitonConfig = output::load(common, &[])?;
    let grid = cfg.grid.params()?;
    let domain = BoxDomain::new(cfg.radius, grid.n)?;
    let given_w = cfg
        .potential
        .clone()
        .map(PolynomialPotential::new)
        .transpose()?;
    let freqs = cfg.frequencies.as_slice();
    let (wave, w, four) = match cfg.kind {
        WaveKind::One => {
            let [omega] = freqs else {
                return Err(CliError::Config("a one-frequency wave needs frequencies = [omega]".into()));
            };
            let w = need(given_w, "potential")?;
            (solitary::construct_one_freq(*omega, &grid, &w, cfg.root, &domain)?, w, None)
        }
        WaveKind::Two => {
            let input = match (freqs, cfg.amplitude) {
                ([omega], Some(amplitude)) => TwoFreqInput::Verify { omega: *omega, amplitude },
                ([omega], None) => TwoFreqInput::SolveAmplitude { omega: *omega, root_select: cfg.root },
                ([], Some(amplitude)) => TwoFreqInput::SolveFrequency { amplitude },
                _ => {
                    return Err(CliError::Config(
                        "a two-frequency wave needs frequencies = [omega], an amplitude, or both".into(),
                    ))
                }
            };
            let w = need(given_w, "potential")?;
            (solitary::construct_two_freq(input, cfg.sigma, &grid, &w, &domain)?, w, None)
        }
        WaveKind::Four => {
            if given_w.is_some() {
                return Err(CliError::Config("four-frequency waves use a designed potential; remove `potential`".into()));
            }
            let [w1, w2] = freqs else {
                return Err(CliError::Config("a four-frequency wave needs frequencies = [omega1, omega2]".into()));
            };
            let p0 = need(cfg.amplitude, "amplitude (p0)")?;
            let r0 = need(cfg.second_amplitude, "second_amplitude (r0)")?;
            let (wave, w, params) = solitary::construct_four_freq(*w1, *w2, p0, r0, &grid, &domain)?;
            (wave, w, Some(params))
        }
    };
    let residual = solitary::residual(&wave, cfg.residual_steps, &grid, &w, ModelKind::OscillatorAtOrigin);

    output::ensure_dir(&cfg.output)?;
    let mut out = output::csv_writer(Some(&cfg.output.join("profile.csv")))?;
    match wave.kind {
        WaveKind::Four => out.write_record(["X", "p_re", "p_im", "r_re", "r_im"])?,
        _ => out.write_record(["X", "re", "im"])?,
    }
    for i in 0..domain.len() {
        let mut row = vec![site_label(&domain, i)];
        for p in &wave.profiles {
            row.push(float(p[i].re));
            row.push(float(p[i].im));
        }
        out.write_record(&row)?;
    }
    out.flush()?;

    let manifest = Manifest {
        kind: wave.kind,
        frequencies: wave.frequencies.clone(),
        amplitude: wave.amplitude,
        second_amplitude: wave.second_amplitude,
        sigma: wave.sigma,
        potential: w.coeffs().to_vec(),
        potential_designed: four.is_some(),
        four_frequency: four,
        amplitude_roots: wave.amplitude_roots.clone(),
        degenerate: wave.degenerate,
        residual,
        residual_steps: cfg.residual_steps,
        greens_est_error: wave.greens_est_error,
        grid,
        radius: cfg.radius,
    };
    output::emit_json(&manifest, Some(&cfg.output.join("manifest.json")))
}
