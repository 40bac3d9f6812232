//! Experiment orchestration: seeded initial data, windowed spectra of the
//! origin series, solitary-wave fits, attractor runs and parameter sweeps.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::conservation::weighted_norm;
use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::{BoxDomain, GridParams};
use crate::model::ModelKind;
use crate::potential::PolynomialPotential;
use crate::solitary::{SolitaryWave, WaveKind};
use crate::spectral::{self, SpectralParams};
use crate::stepper::Stepper;

pub const MIN_WINDOW: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub tau: f64,
    pub m: f64,
    /// Defaults to `τ√n`.
    #[serde(default)]
    pub eps: Option<f64>,
}

impl GridSection {
    pub fn params(&self) -> Result<GridParams> {
        match self.eps {
            Some(eps) => GridParams::new(self.n, eps, self.tau, self.m),
            None => GridParams::exact_ratio(self.n, self.tau, self.m),
        }
    }
}

/// `ψ^0_X, ψ^1_X = A·exp(−|X|²/(2w²))·ρ e^{iθ}` with `ρ ∈ [0.5, 1.5)` and
/// `θ` drawn per site and level, cut off at `|X|_∞ ≤ ⌈4w⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub amplitude: f64,
    pub width: f64,
    pub seed: u64,
}

impl InitialData {
    pub fn support_radius(&self) -> usize {
        (4.0 * self.width).ceil() as usize
    }

    pub fn build(&self, domain: BoxDomain) -> Result<FieldState> {
        if !(self.width > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("initial data needs width > 0 and a finite amplitude".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut s = FieldState::zeros(domain);
        let cut = self.support_radius();
        for i in 0..domain.len() {
            if domain.sup_norm(i) > cut || domain.on_boundary(i) {
                continue;
            }
            let g = self.amplitude * (-domain.norm_sq(i) / (2.0 * self.width * self.width)).exp();
            for level in [&mut s.psi_prev, &mut s.psi_curr] {
                let rho = rng.random_range(0.5..1.5);
                let theta = rng.random_range(0.0..2.0 * PI);
                level[i] = Complex64::from_polar(g * rho, theta);
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    /// `C₀, …, C_p` of `W(λ) = Σ C_q λ^{q+1}`.
    pub potential: Vec<f64>,
    pub model: ModelKind,
    /// Defaults to the support of the data plus `steps + 2`.
    #[serde(default)]
    pub radius: Option<usize>,
    pub steps: usize,
    #[serde(default)]
    pub snapshot_every: usize,
    pub window: usize,
    pub hop: usize,
    /// Exponent of the weights `(1+|X|²)^{−s}`.
    pub s: f64,
    pub initial: InitialData,
    #[serde(default)]
    pub output: Option<std::path::PathBuf>,
}

impl ExperimentConfig {
    pub fn box_radius(&self) -> usize {
        self.radius.unwrap_or(self.initial.support_radius() + self.steps + 2)
    }

    pub fn potential(&self) -> Result<PolynomialPotential> {
        PolynomialPotential::confining(self.potential.clone())
    }

    /// Checks every invariant; all failures are `InvalidParameter`.
    pub fn validate(&self) -> Result<(GridParams, PolynomialPotential, BoxDomain)> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let grid = self.grid.params()?;
        let w = self.potential()?;
        if self.window < MIN_WINDOW {
            return bad(format!("window {} is below {MIN_WINDOW}", self.window));
        }
        if self.window % 2 == 1 {
            return bad("window must be even".into());
        }
        if self.hop == 0 {
            return bad("hop must be positive".into());
        }
        if !(self.s > 0.0) {
            return bad(format!("weight exponent s = {} must be positive", self.s));
        }
        let need = self.initial.support_radius() + self.steps;
        let r = self.box_radius();
        if r < need {
            return bad(format!("radius {r} is below data support + steps = {need}"));
        }
        let domain = BoxDomain::new(r, grid.n)?;
        Ok((grid, w, domain))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: f64,
    /// Estimated amplitude of `A e^{−iωt}`.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub t0: usize,
    /// Bin frequencies in `(−π, π]`, ascending.
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub gap_mass_fraction: f64,
    /// Local maxima, strongest first.
    pub peaks: Vec<Peak>,
}

const MAX_PEAKS: usize = 8;

fn hann(k: usize, len: usize) -> f64 {
    0.5 - 0.5 * (2.0 * PI * k as f64 / len as f64).cos()
}

/// Hann-tapered spectrum `Σ_t w_t f^t e^{iωt}` of `series[t0..t0+len]`.
/// A tone `e^{−iωt}` shows at `+ω`. Zero series have gap fraction 1.
pub fn windowed_spectrum(
    series: &[Complex64],
    t0: usize,
    len: usize,
    spectral: &SpectralParams,
) -> Result<SpectrumReport> {
    if len < 2 || t0 + len > series.len() {
        return Err(Error::WindowTooShort { needed: t0 + len.max(2), available: series.len() });
    }
    let mut buf: Vec<Complex64> = (0..len).map(|k| series[t0 + k] * hann(k, len)).collect();
    FftPlanner::new().plan_fft(len, FftDirection::Inverse).process(&mut buf);
    let bin = 2.0 * PI / len as f64;
    let mut bins: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, z)| (spectral::wrap(k as f64 * bin), z.norm_sqr()))
        .collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (frequencies, power): (Vec<f64>, Vec<f64>) = bins.into_iter().unzip();
    let total: f64 = power.iter().sum();
    let gap_mass_fraction = if total == 0.0 {
        1.0
    } else {
        let inside: f64 = frequencies
            .iter()
            .zip(&power)
            .filter(|(w, _)| spectral.in_gaps_widened(**w, bin))
            .map(|(_, p)| p)
            .sum();
        (inside / total).clamp(0.0, 1.0)
    };
    let norm = 0.5 * len as f64;
    let mut peaks: Vec<Peak> = (0..len)
        .filter(|&k| {
            let p = power[k];
            p > 0.0 && p >= power[(k + len - 1) % len] && p > power[(k + 1) % len]
        })
        .map(|k| Peak { frequency: frequencies[k], amplitude: power[k].sqrt() / norm })
        .collect();
    peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    peaks.truncate(MAX_PEAKS);
    Ok(SpectrumReport { t0, frequencies, power, gap_mass_fraction, peaks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitaryFit {
    pub kind: WaveKind,
    pub omega: f64,
    /// `ψ₀` amplitude: `φ₀` for one frequency, `p₀` for two.
    pub amplitude: Complex64,
    pub candidate: SolitaryWave,
    /// Weighted distance between the state and the candidate.
    pub distance: f64,
    /// Relative rms misfit of the origin series over the window.
    pub series_residual: f64,
}

/// `A(ω) = mean_t f^t e^{iω(t0+t)}`, the least-squares amplitude of `e^{−iωt}`.
fn tone_amplitude(window: &[Complex64], t_start: i64, omega: f64) -> Complex64 {
    let s: Complex64 = window
        .iter()
        .enumerate()
        .map(|(k, z)| z * Complex64::from_polar(1.0, omega * (t_start + k as i64) as f64))
        .sum();
    s / window.len() as f64
}

/// Newton steps on `d/dω Σ_s |Σ_t f^t e^{i(ω+s)t}|²` from `omega`, staying
/// within `bin` of the start. Time is centred in the window.
fn newton_peak(window: &[Complex64], omega: f64, shifts: &[f64], bin: f64) -> f64 {
    let mid = 0.5 * (window.len() as f64 - 1.0);
    let derivs = |w: f64| {
        let (mut d1, mut d2) = (0.0, 0.0);
        for &sh in shifts {
            let (mut s0, mut s1, mut s2) = (Complex64::default(), Complex64::default(), Complex64::default());
            for (k, z) in window.iter().enumerate() {
                let t = k as f64 - mid;
                let v = z * Complex64::from_polar(1.0, (w + sh) * t);
                s0 += v;
                s1 += v * Complex64::new(0.0, t);
                s2 -= v * (t * t);
            }
            d1 += 2.0 * (s0.conj() * s1).re;
            d2 += 2.0 * ((s1.conj() * s1).re + (s0.conj() * s2).re);
        }
        (d1, d2)
    };
    let mut w = omega;
    for _ in 0..8 {
        let (d1, d2) = derivs(w);
        if d2 >= 0.0 {
            break;
        }
        let next = w - d1 / d2;
        if (next - omega).abs() > bin {
            break;
        }
        let done = (next - w).abs() <= 1e-15;
        w = next;
        if done {
            break;
        }
    }
    w
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fits `ψ₀^t` over the last `window` samples of `series` (which holds
/// `ψ₀^{t_start}, ψ₀^{t_start+1}, …` and ends at `ψ₀^{T+1}` for the state
/// at level `T`) by a one- or two-frequency wave and measures the weighted
/// distance from `state` to the candidate `(φ₀/G₀(ω))·G(ω)`.
pub fn fit_solitary(
    state: &FieldState,
    series: &[Complex64],
    t_start: i64,
    window: usize,
    grid: &GridParams,
    kind: WaveKind,
    s: f64,
) -> Result<SolitaryFit> {
    let end = (state.t + 2 - t_start) as usize;
    if window < 2 || end > series.len() || end < window {
        return Err(Error::WindowTooShort { needed: window, available: end.min(series.len()) });
    }
    let win = &series[end - window..end];
    let w_start = t_start + (end - window) as i64;
    let parts = if kind == WaveKind::Four { 2 } else { 1 };
    let zero_wave = |omega: f64| SolitaryWave {
        kind,
        frequencies: vec![omega; parts],
        domain: state.domain,
        profiles: vec![vec![Complex64::new(0.0, 0.0); state.domain.len()]; parts],
        amplitude: Complex64::new(0.0, 0.0),
        second_amplitude: (kind == WaveKind::Four).then_some(Complex64::new(0.0, 0.0)),
        sigma: (kind == WaveKind::Two).then_some(1),
        amplitude_roots: Vec::new(),
        degenerate: false,
        greens_est_error: 0.0,
    };
    let energy: f64 = win.iter().map(|z| z.norm_sqr()).sum();
    if energy == 0.0 && !state.psi_prev.iter().chain(&state.psi_curr).any(|z| z.norm_sqr() > 0.0) {
        return Ok(SolitaryFit {
            kind,
            omega: 0.0,
            amplitude: Complex64::new(0.0, 0.0),
            candidate: zero_wave(0.0),
            distance: 0.0,
            series_residual: 0.0,
        });
    }
    if kind == WaveKind::Four {
        return fit_four(state, win, w_start, energy, grid, s);
    }
    let sp = SpectralParams::new(grid);
    let spectrum = windowed_spectrum(win, 0, window, &sp)?;
    let top = *spectrum.peaks.first().ok_or(Error::NoPeak)?;
    let mean_power = spectrum.power.iter().sum::<f64>() / window as f64;
    if top.amplitude.powi(2) * (0.5 * window as f64).powi(2) <= 4.0 * mean_power {
        return Err(Error::NoPeak);
    }
    let bin = 2.0 * PI / window as f64;
    let objective = |w: f64| match kind {
        WaveKind::Two => tone_amplitude(win, w_start, w).norm_sqr() + tone_amplitude(win, w_start, w + PI).norm_sqr(),
        _ => tone_amplitude(win, w_start, w).norm_sqr(),
    };
    let shifts: &[f64] = if kind == WaveKind::Two { &[0.0, PI] } else { &[0.0] };
    let mut omega = golden_max(objective, top.frequency - bin, top.frequency + bin);
    omega = newton_peak(win, omega, shifts, bin);
    let (amplitude, sigma) = if kind == WaveKind::Two {
        // represent the pair by its member in the zero gap
        if omega.cos() < 0.0 {
            omega = spectral::wrap(omega + PI);
        }
        let a = tone_amplitude(win, w_start, omega);
        let b = tone_amplitude(win, w_start, omega + PI);
        let sigma: i8 = if (b * a.conj()).re >= 0.0 { 1 } else { -1 };
        ((a + b * sigma as f64) * 0.5, Some(sigma))
    } else {
        (tone_amplitude(win, w_start, omega), None)
    };
    omega = spectral::wrap(omega);
    let model_at = |t: i64| -> Complex64 {
        let ph = Complex64::from_polar(1.0, -omega * t as f64);
        match sigma {
            Some(sg) => amplitude * ph * (1.0 + sg as f64 * if t.rem_euclid(2) == 0 { 1.0 } else { -1.0 }),
            None => amplitude * ph,
        }
    };
    let misfit: f64 = win
        .iter()
        .enumerate()
        .map(|(k, z)| (z - model_at(w_start + k as i64)).norm_sqr())
        .sum();
    let series_residual = (misfit / energy).sqrt();

    let candidate = if spectral::in_continuous_spectrum(omega, grid) {
        zero_wave(omega)
    } else {
        let table = spectral::greens_table(&state.domain, Complex64::new(omega, 0.0), grid)?;
        let c = amplitude / table.at_origin().re;
        SolitaryWave {
            kind,
            frequencies: vec![omega],
            domain: state.domain,
            profiles: vec![table.values.iter().map(|g| c * g.re).collect()],
            amplitude: if kind == WaveKind::One { c } else { amplitude },
            second_amplitude: None,
            sigma,
            amplitude_roots: Vec::new(),
            degenerate: false,
            greens_est_error: table.est_error,
        }
    };
    let cand = candidate.state_at(state.t);
    let diff = FieldState {
        domain: state.domain,
        psi_prev: state.psi_prev.iter().zip(&cand.psi_prev).map(|(a, b)| a - b).collect(),
        psi_curr: state.psi_curr.iter().zip(&cand.psi_curr).map(|(a, b)| a - b).collect(),
        t: state.t,
    };
    Ok(SolitaryFit {
        kind,
        omega,
        amplitude,
        candidate,
        distance: weighted_norm(&diff, s),
        series_residual,
    })
}

/// Fits `ψ^t_0 = 2p₀e^{−iω₁t}` on even `t` and `2r₀e^{−iω₂t}` on odd `t`.
/// Each half only fixes its frequency modulo `π`; the representative in
/// `(−π/2, π/2]` is kept.
fn fit_four(
    state: &FieldState,
    win: &[Complex64],
    w_start: i64,
    energy: f64,
    grid: &GridParams,
    s: f64,
) -> Result<SolitaryFit> {
    let sp = SpectralParams::new(grid);
    let mut halves = [(None, Complex64::new(0.0, 0.0)); 2];
    for (parity, half) in halves.iter_mut().enumerate() {
        let first = (parity as i64 - w_start).rem_euclid(2) as usize;
        let d: Vec<Complex64> = win.iter().skip(first).step_by(2).copied().collect();
        let t_e = w_start + first as i64;
        let e: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        if d.len() < 4 || e <= 1e-24 * energy {
            continue;
        }
        let spectrum = windowed_spectrum(&d, 0, d.len(), &sp)?;
        let Some(top) = spectrum.peaks.first() else { continue };
        let bin = 2.0 * PI / d.len() as f64;
        let nu = golden_max(|v| tone_amplitude(&d, 0, v).norm_sqr(), top.frequency - bin, top.frequency + bin);
        let nu = newton_peak(&d, nu, &[0.0], bin);
        let mut omega = 0.5 * spectral::wrap(nu);
        if omega <= -0.5 * PI {
            omega += PI;
        }
        let a = tone_amplitude(&d, 0, 2.0 * omega);
        *half = (Some(omega), 0.5 * a * Complex64::from_polar(1.0, omega * t_e as f64));
    }
    let [(w1, p0), (w2, r0)] = halves;
    let (omega1, omega2) = match (w1, w2) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, a),
        (None, Some(b)) => (b, b),
        (None, None) => return Err(Error::NoPeak),
    };
    let model_at = |t: i64| -> Complex64 {
        if t.rem_euclid(2) == 0 {
            2.0 * p0 * Complex64::from_polar(1.0, -omega1 * t as f64)
        } else {
            2.0 * r0 * Complex64::from_polar(1.0, -omega2 * t as f64)
        }
    };
    let misfit: f64 = win
        .iter()
        .enumerate()
        .map(|(k, z)| (z - model_at(w_start + k as i64)).norm_sqr())
        .sum();
    let mut profiles = Vec::with_capacity(2);
    let mut est: f64 = 0.0;
    for (omega, amp) in [(omega1, p0), (omega2, r0)] {
        if amp.norm() == 0.0 || spectral::in_continuous_spectrum(omega, grid) {
            profiles.push(vec![Complex64::new(0.0, 0.0); state.domain.len()]);
        } else {
            let table = spectral::greens_table(&state.domain, Complex64::new(omega, 0.0), grid)?;
            let c = amp / table.at_origin().re;
            profiles.push(table.values.iter().map(|g| c * g.re).collect());
            est = est.max(table.est_error);
        }
    }
    let candidate = SolitaryWave {
        kind: WaveKind::Four,
        frequencies: vec![omega1, omega2],
        domain: state.domain,
        profiles,
        amplitude: p0,
        second_amplitude: Some(r0),
        sigma: None,
        amplitude_roots: Vec::new(),
        degenerate: false,
        greens_est_error: est,
    };
    let cand = candidate.state_at(state.t);
    let diff = FieldState {
        domain: state.domain,
        psi_prev: state.psi_prev.iter().zip(&cand.psi_prev).map(|(a, b)| a - b).collect(),
        psi_curr: state.psi_curr.iter().zip(&cand.psi_curr).map(|(a, b)| a - b).collect(),
        t: state.t,
    };
    Ok(SolitaryFit {
        kind: WaveKind::Four,
        omega: omega1,
        amplitude: p0,
        candidate,
        distance: weighted_norm(&diff, s),
        series_residual: (misfit / energy).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub t0: i64,
    pub gap_mass_fraction: f64,
    /// Smallest distance from the state to a fitted one-, two- or four-frequency
    /// candidate or to the zero field, which is also a solitary wave.
    pub distance: f64,
    pub fit_omega: Option<f64>,
    /// `None` when the zero field is closest.
    pub fit_kind: Option<WaveKind>,
    pub peak: Option<Peak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub omega_m: f64,
    /// `π/(4(p+1))` for `W` of degree `p + 1`.
    pub omega_m_limit: f64,
    pub omega_m_ok: bool,
    pub above_tau2: bool,
    pub multi_root_warnings: usize,
    pub windows: Vec<WindowReport>,
    pub origin_series: Vec<Complex64>,
}

/// Runs the configured simulation from seeded data and reports, for each
/// analysis window, the gap mass fraction and the distance to the fitted
/// solitary wave at the window's end.
pub fn attractor_experiment(cfg: &ExperimentConfig) -> Result<AttractorReport> {
    let (grid, w, domain) = cfg.validate()?;
    let omega_m = spectral::omega_m(&grid);
    let p = w.order().unwrap_or(0);
    let omega_m_limit = PI / (4.0 * (p as f64 + 1.0));
    let mut state = cfg.initial.build(domain)?;
    let mut stepper = Stepper::new(&grid, &w, cfg.model, domain)?;
    stepper.attach(&state)?;
    let sp = SpectralParams::new(&grid);
    let o = domain.origin();
    let t_start = state.t;
    let mut series = vec![state.psi_prev[o], state.psi_curr[o]];
    series.reserve(cfg.steps);
    let mut windows = Vec::new();
    let analyse = |series: &[Complex64], state: &FieldState| -> Result<WindowReport> {
        let t0 = series.len() - cfg.window;
        let spectrum = windowed_spectrum(series, t0, cfg.window, &sp)?;
        let mut distance = weighted_norm(state, cfg.s);
        let (mut fit_omega, mut fit_kind) = (None, None);
        for kind in [WaveKind::One, WaveKind::Two, WaveKind::Four] {
            match fit_solitary(state, series, t_start, cfg.window, &grid, kind, cfg.s) {
                Ok(f) if f.distance < distance => {
                    distance = f.distance;
                    fit_omega = Some(f.omega);
                    fit_kind = Some(kind);
                }
                Ok(_) | Err(Error::NoPeak) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(WindowReport {
            t0: t_start + t0 as i64,
            gap_mass_fraction: spectrum.gap_mass_fraction,
            distance,
            fit_omega,
            fit_kind,
            peak: spectrum.peaks.first().copied(),
        })
    };
    // window k covers samples [k·hop, k·hop + window) and is analysed
    // when its last sample arrives
    let due = |len: usize| len >= cfg.window && (len - cfg.window) % cfg.hop == 0;
    if due(series.len()) {
        windows.push(analyse(&series, &state)?);
    }
    for _ in 0..cfg.steps {
        stepper.advance(&mut state)?;
        series.push(state.psi_curr[o]);
        if due(series.len()) {
            windows.push(analyse(&series, &state)?);
        }
    }
    Ok(AttractorReport {
        omega_m,
        omega_m_limit,
        omega_m_ok: omega_m < omega_m_limit,
        above_tau2: stepper.above_tau2(),
        multi_root_warnings: stepper.multi_root_warnings,
        windows,
        origin_series: series,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub config_hash: String,
    pub report: Option<AttractorReport>,
    pub error: Option<String>,
}

/// Runs every configuration in parallel; failures stay with their entry.
pub fn sweep(configs: &[ExperimentConfig]) -> Vec<SweepEntry> {
    configs
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let (report, error) = match attractor_experiment(cfg) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepEntry { index, config_hash: cfg.hash(), report, error }
        })
        .collect()
}

/// One row per analysis window of every successful run.
pub fn write_sweep_csv<W: std::io::Write>(out: &mut W, entries: &[SweepEntry]) -> std::io::Result<()> {
    writeln!(out, "run,config_hash,t0,gap_mass_fraction,distance")?;
    for e in entries {
        if let Some(r) = &e.report {
            for w in &r.windows {
                writeln!(out, "{},{},{},{:.17e},{:.17e}", e.index, e.config_hash, w.t0, w.gap_mass_fraction, w.distance)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitary::{construct_four_freq, construct_one_freq, construct_two_freq, RootSelect, TwoFreqInput};

    fn sp() -> SpectralParams {
        SpectralParams::new(&GridParams::exact_ratio(1, 1.0, 1.0).unwrap())
    }

    #[test]
    fn pure_tone_in_gap() {
        let om = 0.3;
        let s: Vec<Complex64> = (0..1024).map(|t| Complex64::from_polar(1.0, -om * t as f64)).collect();
        let r = windowed_spectrum(&s, 0, 1024, &sp()).unwrap();
        assert!(r.gap_mass_fraction >= 0.99);
        assert!((r.peaks[0].frequency - om).abs() < 2.0 * PI / 1024.0);
        assert!((r.peaks[0].amplitude - 1.0).abs() < 0.5);
    }

    #[test]
    fn pure_tone_mid_spectrum() {
        let s: Vec<Complex64> = (0..1024).map(|t| Complex64::from_polar(1.0, -PI / 2.0 * t as f64)).collect();
        let r = windowed_spectrum(&s, 0, 1024, &sp()).unwrap();
        assert!(r.gap_mass_fraction <= 0.05);
        assert!((r.peaks[0].frequency - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_series_and_short_window() {
        let s = vec![Complex64::new(0.0, 0.0); 300];
        let r = windowed_spectrum(&s, 0, 256, &sp()).unwrap();
        assert_eq!(r.gap_mass_fraction, 1.0);
        assert!(r.peaks.is_empty());
        assert!(matches!(windowed_spectrum(&s, 100, 256, &sp()), Err(Error::WindowTooShort { .. })));
    }

    fn series_of(w: &SolitaryWave, t_start: i64, len: usize) -> Vec<Complex64> {
        let o = w.domain.origin();
        (0..len as i64).map(|k| w.value(o, t_start + k)).collect()
    }

    #[test]
    fn one_frequency_roundtrip() {
        let g = GridParams::exact_ratio(1, 1.0, 1.0).unwrap();
        let d = BoxDomain::new(30, 1).unwrap();
        let wv = PolynomialPotential::new(vec![-3.0, 1.0]).unwrap();
        let wave = construct_one_freq(0.2371, &g, &wv, RootSelect::Smallest, &d).unwrap();
        let series = series_of(&wave, 5, 1026);
        let state = wave.state_at(5 + 1024);
        let fit = fit_solitary(&state, &series, 5, 1024, &g, WaveKind::One, 1.0).unwrap();
        assert!((fit.omega - 0.2371).abs() < 1e-8, "{}", fit.omega);
        assert!(fit.distance < 1e-8, "{}", fit.distance);
        assert!(fit.series_residual < 1e-8);
    }

    #[test]
    fn zero_field_fits_exactly() {
        let g = GridParams::exact_ratio(1, 1.0, 1.0).unwrap();
        let d = BoxDomain::new(10, 1).unwrap();
        let state = FieldState::zeros(d);
        let series = vec![Complex64::new(0.0, 0.0); 300];
        let fit = fit_solitary(&state, &series, -298, 256, &g, WaveKind::One, 1.0).unwrap();
        assert_eq!(fit.distance, 0.0);
    }

    #[test]
    fn two_frequency_needs_two_frequency_fit() {
        let g = GridParams::exact_ratio(1, 1.0, 1.0).unwrap();
        let d = BoxDomain::new(30, 1).unwrap();
        let wv = PolynomialPotential::new(vec![-3.0, 1.0]).unwrap();
        let wave = construct_two_freq(
            TwoFreqInput::SolveAmplitude { omega: 0.2, root_select: RootSelect::Smallest },
            -1,
            &g,
            &wv,
            &d,
        )
        .unwrap();
        let series = series_of(&wave, 0, 1026);
        let state = wave.state_at(1024);
        let one = fit_solitary(&state, &series, 0, 1024, &g, WaveKind::One, 1.0).unwrap();
        assert!(one.series_residual > 0.5);
        let two = fit_solitary(&state, &series, 0, 1024, &g, WaveKind::Two, 1.0).unwrap();
        assert!(two.series_residual < 1e-8 && two.distance < 1e-8, "{two:?}");
        assert_eq!(two.candidate.sigma, Some(-1));
    }

    #[test]
    fn four_frequency_roundtrip() {
        let g = GridParams::exact_ratio(1, 1.0, 1.0).unwrap();
        let d = BoxDomain::new(30, 1).unwrap();
        let (p0, r0) = (Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25));
        let (wave, _, _) = construct_four_freq(0.21, -0.37, p0, r0, &g, &d).unwrap();
        let series = series_of(&wave, 3, 1026);
        let state = wave.state_at(3 + 1024);
        let two = fit_solitary(&state, &series, 3, 1024, &g, WaveKind::Two, 1.0).unwrap();
        assert!(two.series_residual > 0.1);
        let four = fit_solitary(&state, &series, 3, 1024, &g, WaveKind::Four, 1.0).unwrap();
        assert!((four.candidate.frequencies[0] - 0.21).abs() < 1e-8);
        assert!((four.candidate.frequencies[1] + 0.37).abs() < 1e-8);
        assert!(four.series_residual < 1e-8 && four.distance < 1e-7, "{four:?}");

        // a two-frequency wave is the four-frequency form with one part zero
        let wv = PolynomialPotential::new(vec![-3.0, 1.0]).unwrap();
        let input = TwoFreqInput::SolveAmplitude { omega: 0.2, root_select: RootSelect::Smallest };
        let wave = construct_two_freq(input, 1, &g, &wv, &d).unwrap();
        let series = series_of(&wave, 0, 1026);
        let four = fit_solitary(&wave.state_at(1024), &series, 0, 1024, &g, WaveKind::Four, 1.0).unwrap();
        assert!(four.distance < 1e-8, "{four:?}");
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            grid: GridSection { n: 1, tau: 0.4, m: 0.5, eps: None },
            potential: vec![-2.0, 0.5, 1.0],
            model: ModelKind::OscillatorAtOrigin,
            radius: None,
            steps: 1200,
            snapshot_every: 0,
            window: 512,
            hop: 256,
            s: 1.0,
            initial: InitialData { amplitude: 1.0, width: 3.0, seed: 9 },
            output: None,
        }
    }

    #[test]
    fn attractor_is_deterministic() {
        let cfg = small_config();
        let a = attractor_experiment(&cfg).unwrap();
        let b = attractor_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.omega_m_ok);
        assert_eq!(a.windows.len(), (1202 - 512) / 256 + 1);
        assert!(a.windows.iter().all(|w| (0.0..=1.0).contains(&w.gap_mass_fraction)));
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        cfg.window = 100;
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter(_))));
        let mut cfg = small_config();
        cfg.radius = Some(10);
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter(_))));
        let mut cfg = small_config();
        cfg.s = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.potential = vec![1.0, -1.0];
        assert!(matches!(cfg.validate(), Err(Error::NonConfining(_)) | Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sweep_isolates_failures() {
        let mut bad = small_config();
        bad.window = 10;
        let good = ExperimentConfig { steps: 600, ..small_config() };
        let out = sweep(&[good.clone(), bad]);
        assert!(out[0].report.is_some() && out[0].error.is_none());
        assert!(out[1].report.is_none() && out[1].error.is_some());
        assert_ne!(out[0].config_hash, out[1].config_hash);
        assert_eq!(out[0].config_hash, good.hash());
        let mut csv = Vec::new();
        write_sweep_csv(&mut csv, &out).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + out[0].report.as_ref().unwrap().windows.len());
    }
}
