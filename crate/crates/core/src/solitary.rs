//! One-, two- and four-frequency solitary waves of the oscillator model.
//!
//! Profiles are multiples of the lattice Green's function. With
//! `κ(ω) = −1/(τ²G₀(ω)cos ω)` the amplitude conditions read
//!
//! * one frequency, `ψ = C·G_X e^{−iωt}`: `W'(|C G₀|²) = κ(ω)`;
//! * two frequencies, `ψ = (1+σ(−1)^{t+Λ·X}) p_X e^{−iωt}`: `W'(4|p₀|²) = κ(ω)`;
//! * four frequencies, `ψ = (1+(−1)^{t+Λ·X}) p_X e^{−iω₁t} + (1−(−1)^{t+Λ·X}) r_X e^{−iω₂t}`:
//!   `W'(4|p₀|²) = κ(ω₁)` and `W'(4|r₀|²) = κ(ω₂)`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::{BoxDomain, GridParams};
use crate::model::{ModelKind, SitePotentials};
use crate::poly;
use crate::potential::PolynomialPotential;
use crate::spectral::{self, greens_closed_form_1d, GreensTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    One,
    Two,
    Four,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootSelect {
    Smallest,
    Largest,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitaryWave {
    pub kind: WaveKind,
    /// `[ω]` for one and two frequencies, `[ω₁, ω₂]` for four.
    pub frequencies: Vec<f64>,
    pub domain: BoxDomain,
    /// `φ` (one), `p` (two), or `[p, r]` (four), in site order.
    pub profiles: Vec<Vec<Complex64>>,
    /// `C` (one) or `p₀` (two, four).
    pub amplitude: Complex64,
    /// `r₀` for four-frequency waves.
    pub second_amplitude: Option<Complex64>,
    pub sigma: Option<i8>,
    /// All admissible values of `|C G₀|²` (one) or `4|p₀|²` (two).
    pub amplitude_roots: Vec<f64>,
    /// Set when `W` is linear and every amplitude solves the condition.
    pub degenerate: bool,
    pub greens_est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourFreqParams {
    pub m: f64,
    pub n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p0: Complex64,
    pub r0: Complex64,
}

impl SolitaryWave {
    fn parity(&self, idx: usize, t: i64) -> f64 {
        if (t + self.domain.coord_sum(idx)).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `ψ_X^t` at site index `idx`.
    pub fn value(&self, idx: usize, t: i64) -> Complex64 {
        let ph = |w: f64| Complex64::from_polar(1.0, -w * t as f64);
        match self.kind {
            WaveKind::One => self.profiles[0][idx] * ph(self.frequencies[0]),
            WaveKind::Two => {
                let s = self.sigma.unwrap_or(1) as f64 * self.parity(idx, t);
                (1.0 + s) * self.profiles[0][idx] * ph(self.frequencies[0])
            }
            WaveKind::Four => {
                let s = self.parity(idx, t);
                (1.0 + s) * self.profiles[0][idx] * ph(self.frequencies[0])
                    + (1.0 - s) * self.profiles[1][idx] * ph(self.frequencies[1])
            }
        }
    }

    pub fn level(&self, t: i64) -> Vec<Complex64> {
        (0..self.domain.len()).map(|i| self.value(i, t)).collect()
    }

    /// The pair `(ψ^t, ψ^{t+1})`.
    pub fn state_at(&self, t: i64) -> FieldState {
        FieldState {
            domain: self.domain,
            psi_prev: self.level(t),
            psi_curr: self.level(t + 1),
            t,
        }
    }

    /// The same wave multiplied by `e^{iθ}`.
    pub fn rotated(&self, theta: f64) -> Self {
        let c = Complex64::from_polar(1.0, theta);
        let mut w = self.clone();
        for p in &mut w.profiles {
            p.iter_mut().for_each(|z| *z *= c);
        }
        w.amplitude *= c;
        w.second_amplitude = w.second_amplitude.map(|r| r * c);
        w
    }
}

fn real_omega(omega: f64) -> Complex64 {
    Complex64::new(omega, 0.0)
}

/// `κ(ω) = −1/(τ²G₀(ω)cos ω)`, with `G₀` taken from `table`.
fn kappa_from(g0: f64, omega: f64, grid: &GridParams) -> f64 {
    -1.0 / (grid.tau * grid.tau * g0 * omega.cos())
}

/// `κ(ω) = −1/(τ²G₀(ω)cos ω)`, the value `W'` must take at the oscillator.
pub fn kappa(omega: f64, grid: &GridParams) -> Result<f64> {
    let g0 = spectral::greens(&vec![0; grid.n], real_omega(omega), grid, 16)?.value.re;
    Ok(kappa_from(g0, omega, grid))
}

/// Closure of `{W'(λ) : λ > 0}` as `(lo, hi)`; infinite ends allowed.
pub fn deriv_range(w: &PolynomialPotential) -> (f64, f64) {
    let c = w.deriv_poly();
    let neg: Vec<f64> = c.iter().map(|x| -x).collect();
    let lo_of = |p: &[f64]| match poly::degree(p) {
        None => 0.0,
        Some(0) => p[0],
        Some(d) if p[d] < 0.0 => f64::NEG_INFINITY,
        Some(_) => poly::min_on(p, 0.0, f64::INFINITY).1,
    };
    (lo_of(&c), -lo_of(&neg))
}

fn in_range(v: f64, (lo, hi): (f64, f64)) -> bool {
    let tol = 1e-12 * v.abs().max(1.0);
    v >= lo - tol && v <= hi + tol
}

fn require_gap(omega: f64, grid: &GridParams) -> Result<()> {
    if spectral::in_continuous_spectrum(omega, grid) {
        Err(Error::OnSpectrum(omega))
    } else {
        Ok(())
    }
}

/// True iff `1/(G₀(ω)cos ω)` lies in the closure of `−τ²W'((0,∞))`.
pub fn one_freq_criterion(omega: f64, grid: &GridParams, w: &PolynomialPotential) -> Result<bool> {
    require_gap(omega, grid)?;
    Ok(in_range(kappa(omega, grid)?, deriv_range(w)))
}

/// `(0, 2√((1+τ²m²/2)²−1)]`, the values of `1/(G₀(ω)cos ω)` over the gaps
/// when `n = 1`. Returned as its endpoints; the left one is excluded.
pub fn one_freq_range_1d(grid: &GridParams) -> Result<(f64, f64)> {
    if grid.n != 1 {
        return Err(Error::DimensionError(grid.n));
    }
    let k = grid.mass_factor();
    Ok((0.0, 2.0 * (k * k - 1.0).sqrt()))
}

/// The same test as [`one_freq_criterion`] for `n = 1`, built from the
/// closed form of `G₀` and the interval of [`one_freq_range_1d`].
pub fn one_freq_interval_test(omega: f64, grid: &GridParams, w: &PolynomialPotential) -> Result<bool> {
    let (lo, hi) = one_freq_range_1d(grid)?;
    let g0 = greens_closed_form_1d(&[0], omega, grid)?;
    let v = 1.0 / (g0 * omega.cos());
    if !(v > lo && v <= hi * (1.0 + 1e-12)) {
        return Ok(false);
    }
    Ok(in_range(-v / (grid.tau * grid.tau), deriv_range(w)))
}

/// Positive roots of `W'(λ) = target`.
fn amplitude_roots(w: &PolynomialPotential, target: f64) -> Vec<f64> {
    let mut c = w.deriv_poly();
    if c.is_empty() {
        c.push(0.0);
    }
    c[0] -= target;
    poly::real_roots(&c).into_iter().filter(|&r| r > 0.0).collect()
}

fn select(roots: &[f64], sel: RootSelect) -> Option<f64> {
    match sel {
        RootSelect::Smallest => roots.first().copied(),
        RootSelect::Largest => roots.last().copied(),
        RootSelect::Index(i) => roots.get(i).copied(),
    }
}

fn linear_degenerate(w: &PolynomialPotential, target: f64) -> bool {
    w.is_linear() && {
        let c0 = w.coeffs().first().copied().unwrap_or(0.0);
        (c0 - target).abs() <= 1e-10 * target.abs().max(1.0)
    }
}

fn table(domain: &BoxDomain, omega: f64, grid: &GridParams) -> Result<GreensTable> {
    grid.require_exact_ratio()?;
    require_gap(omega, grid)?;
    spectral::greens_table(domain, real_omega(omega), grid)
}

fn scaled_profile(t: &GreensTable, c: Complex64) -> Vec<Complex64> {
    t.values.iter().map(|g| c * g.re).collect()
}

/// `φ_X = C·G_X(ω)` with `C > 0` solving `W'(|C G₀|²) = κ(ω)`.
pub fn construct_one_freq(
    omega: f64,
    grid: &GridParams,
    w: &PolynomialPotential,
    root_select: RootSelect,
    domain: &BoxDomain,
) -> Result<SolitaryWave> {
    let t = table(domain, omega, grid)?;
    let g0 = t.at_origin().re;
    let target = kappa_from(g0, omega, grid);
    let (c, roots, degenerate) = if w.is_linear() {
        if !linear_degenerate(w, target) {
            return Err(Error::NoRoot(format!(
                "linear W: W' = const never equals {target}"
            )));
        }
        (1.0, Vec::new(), true)
    } else {
        let roots = amplitude_roots(w, target);
        let a2 = select(&roots, root_select).ok_or_else(|| {
            Error::NoRoot(format!("W'(λ) = {target} has no admissible root λ > 0"))
        })?;
        (a2.sqrt() / g0.abs(), roots, false)
    };
    Ok(SolitaryWave {
        kind: WaveKind::One,
        frequencies: vec![omega],
        domain: *domain,
        profiles: vec![scaled_profile(&t, Complex64::new(c, 0.0))],
        amplitude: Complex64::new(c, 0.0),
        second_amplitude: None,
        sigma: None,
        amplitude_roots: roots,
        degenerate,
        greens_est_error: t.est_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TwoFreqInput {
    /// Both `ω` and `p₀` given; the amplitude condition is checked.
    Verify { omega: f64, amplitude: Complex64 },
    /// `ω` given; `|p₀|` solved with phase zero.
    SolveAmplitude { omega: f64, root_select: RootSelect },
    /// `p₀` given; `ω ∈ Ω₀` solved.
    SolveFrequency { amplitude: Complex64 },
}

/// Solves `κ(ω) = target` for `ω ∈ [0, ω_m)`.
fn solve_frequency(target: f64, grid: &GridParams) -> Result<f64> {
    if target >= 0.0 {
        return Err(Error::NoSolution(format!(
            "W'(4|p0|^2) = {target} ≥ 0, but κ(ω) < 0 throughout the gaps"
        )));
    }
    let wm = spectral::omega_m(grid);
    let top = wm * (1.0 - 1e-9);
    let k = |w: f64| kappa(w, grid).map(|v| v - target);
    let samples = 64;
    let mut prev = (0.0, k(0.0)?);
    for i in 1..=samples {
        let w = top * i as f64 / samples as f64;
        let cur = (w, k(w)?);
        if prev.1 == 0.0 {
            return Ok(prev.0);
        }
        if (prev.1 < 0.0) != (cur.1 < 0.0) {
            let (mut a, mut b) = (prev.0, cur.0);
            let fa_neg = prev.1 < 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = k(mid)?;
                if (fm < 0.0) == fa_neg {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = cur;
    }
    Err(Error::NoSolution(format!(
        "κ(ω) = {target} has no solution in [0, ω_m)"
    )))
}

/// `ψ_X^t = (1+σ(−1)^{t+Λ·X}) p_X e^{−iωt}` with `p_X = (p₀/G₀)G_X(ω)`.
pub fn construct_two_freq(
    input: TwoFreqInput,
    sigma: i8,
    grid: &GridParams,
    w: &PolynomialPotential,
    domain: &BoxDomain,
) -> Result<SolitaryWave> {
    if sigma != 1 && sigma != -1 {
        return Err(Error::InvalidParameter("sigma must be ±1".into()));
    }
    grid.require_exact_ratio()?;
    let (omega, p0, roots, degenerate) = match input {
        TwoFreqInput::Verify { omega, amplitude } => {
            let target = kappa(omega, grid)?;
            let lam = 4.0 * amplitude.norm_sqr();
            let got = w.deriv(lam);
            if (got - target).abs() > 1e-10 * target.abs().max(1.0) {
                return Err(Error::NoSolution(format!(
                    "W'(4|p0|^2) = {got} differs from κ(ω) = {target}"
                )));
            }
            (omega, amplitude, vec![lam], w.is_linear())
        }
        TwoFreqInput::SolveAmplitude { omega, root_select } => {
            let target = kappa(omega, grid)?;
            if w.is_linear() {
                if !linear_degenerate(w, target) {
                    return Err(Error::NoRoot(format!("linear W never reaches {target}")));
                }
                (omega, Complex64::new(0.5, 0.0), Vec::new(), true)
            } else {
                let roots = amplitude_roots(w, target);
                let lam = select(&roots, root_select)
                    .ok_or_else(|| Error::NoRoot(format!("W'(λ) = {target} has no root λ > 0")))?;
                (omega, Complex64::new(0.5 * lam.sqrt(), 0.0), roots, false)
            }
        }
        TwoFreqInput::SolveFrequency { amplitude } => {
            let target = w.deriv(4.0 * amplitude.norm_sqr());
            (solve_frequency(target, grid)?, amplitude, vec![4.0 * amplitude.norm_sqr()], false)
        }
    };
    let t = table(domain, omega, grid)?;
    let g0 = t.at_origin().re;
    Ok(SolitaryWave {
        kind: WaveKind::Two,
        frequencies: vec![omega],
        domain: *domain,
        profiles: vec![scaled_profile(&t, p0 / g0)],
        amplitude: p0,
        second_amplitude: None,
        sigma: Some(sigma),
        amplitude_roots: roots,
        degenerate,
        greens_est_error: t.est_error,
    })
}

/// Lowest-degree confining `W` with `W'(λ_i) = κ_i` for each pair.
pub fn design_potential(conds: &[(f64, f64)]) -> Result<PolynomialPotential> {
    let fail = |m: String| Error::PotentialDesignFailure(m);
    match conds {
        [] => Err(fail("no amplitude condition to match".into())),
        [(lam, k)] => PolynomialPotential::new(vec![k - 2.0 * lam, 1.0]),
        [(l1, k1), (l2, k2)] => {
            let scale = k1.abs().max(k2.abs()).max(1.0);
            if (l1 - l2).abs() <= 1e-14 * l1.max(*l2).max(1.0) {
                if (k1 - k2).abs() <= 1e-12 * scale {
                    return design_potential(&conds[..1]);
                }
                return Err(fail(format!(
                    "equal amplitudes 4|p0|^2 = 4|r0|^2 = {l1} need W' to take two values {k1} and {k2}"
                )));
            }
            let c1 = (k1 - k2) / (2.0 * (l1 - l2));
            if c1 > 0.0 {
                return PolynomialPotential::new(vec![k1 - 2.0 * c1 * l1, c1]);
            }
            // quadratic W': minimum-norm coefficients, or leading one fixed at 1
            let a = Matrix2x3::new(1.0, 2.0 * l1, 3.0 * l1 * l1, 1.0, 2.0 * l2, 3.0 * l2 * l2);
            let b = Vector2::new(*k1, *k2);
            let gram: Matrix2<f64> = a * a.transpose();
            let y = gram
                .lu()
                .solve(&b)
                .ok_or_else(|| fail("singular design system".into()))?;
            let c: Vector3<f64> = a.transpose() * y;
            if c[2] > 0.0 {
                return PolynomialPotential::new(vec![c[0], c[1], c[2]]);
            }
            let m = Matrix2::new(1.0, 2.0 * l1, 1.0, 2.0 * l2);
            let rhs = Vector2::new(k1 - 3.0 * l1 * l1, k2 - 3.0 * l2 * l2);
            let x = m
                .lu()
                .solve(&rhs)
                .ok_or_else(|| fail("singular design system".into()))?;
            PolynomialPotential::new(vec![x[0], x[1], 1.0])
        }
        _ => Err(fail("at most two conditions are supported".into())),
    }
}

type Matrix2x3 = nalgebra::Matrix2x3<f64>;

/// Four-frequency wave with a potential designed to carry it.
pub fn construct_four_freq(
    omega1: f64,
    omega2: f64,
    p0: Complex64,
    r0: Complex64,
    grid: &GridParams,
    domain: &BoxDomain,
) -> Result<(SolitaryWave, PolynomialPotential, FourFreqParams)> {
    let turns = (omega1 - omega2) / PI;
    if (turns - turns.round()).abs() <= 1e-12 {
        return Err(Error::DegenerateFrequencies(format!(
            "ω1 = {omega1} and ω2 = {omega2} coincide modulo π"
        )));
    }
    let t1 = table(domain, omega1, grid)?;
    let t2 = table(domain, omega2, grid)?;
    let (g1, g2) = (t1.at_origin().re, t2.at_origin().re);
    let (k1, k2) = (kappa_from(g1, omega1, grid), kappa_from(g2, omega2, grid));
    let (l1, l2) = (4.0 * p0.norm_sqr(), 4.0 * r0.norm_sqr());
    let mut conds = Vec::new();
    if p0.norm() > 0.0 {
        conds.push((l1, k1));
    }
    if r0.norm() > 0.0 {
        conds.push((l2, k2));
    }
    let w = design_potential(&conds)?;
    let params = FourFreqParams {
        m: 0.5 * (w.deriv(l1) + w.deriv(l2)),
        n: 0.5 * (w.deriv(l1) - w.deriv(l2)),
        alpha: 2.0 * (p0.norm_sqr() + r0.norm_sqr()),
        beta: 2.0 * (p0.norm_sqr() - r0.norm_sqr()),
        p0,
        r0,
    };
    let wave = SolitaryWave {
        kind: WaveKind::Four,
        frequencies: vec![omega1, omega2],
        domain: *domain,
        profiles: vec![scaled_profile(&t1, p0 / g1), scaled_profile(&t2, r0 / g2)],
        amplitude: p0,
        second_amplitude: Some(r0),
        sigma: None,
        amplitude_roots: vec![l1, l2],
        degenerate: false,
        greens_est_error: t1.est_error.max(t2.est_error),
    };
    Ok((wave, w, params))
}

/// Largest `|LHS − RHS|` of the scheme over interior sites and steps
/// `t = 1..=steps`, with the wave evaluated exactly at every level.
pub fn residual(
    wave: &SolitaryWave,
    steps: usize,
    grid: &GridParams,
    w: &PolynomialPotential,
    model: ModelKind,
) -> f64 {
    let d = &wave.domain;
    let v = SitePotentials::new(grid, w, model);
    let tau2 = grid.tau * grid.tau;
    let r2 = grid.r2();
    let mut levels = [wave.level(0), wave.level(1), wave.level(2)];
    let mut worst: f64 = 0.0;
    for t in 1..=steps as i64 {
        if t > 1 {
            levels.rotate_left(1);
            levels[2] = wave.level(t + 1);
        }
        let [before, now, after] = &levels;
        for i in 0..d.len() {
            if d.on_boundary(i) {
                continue;
            }
            let mut lap = Complex64::new(0.0, 0.0);
            for j in 0..d.n {
                let s = d.stride(j);
                lap += now[i + s] + now[i - s] - 2.0 * now[i];
            }
            let xi = lap * r2 + 2.0 * now[i];
            let b = v.at(d, i).divided_difference(after[i].norm_sqr(), before[i].norm_sqr());
            let lhs = (after[i] + before[i]) * (1.0 + tau2 * b);
            worst = worst.max((lhs - xi).norm());
        }
    }
    worst
}
