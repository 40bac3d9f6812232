//! Lattice symbol, spectral gaps and the lattice Green's function.
//!
//! Formulas assume the charge-conserving ratio `τ/ε = 1/√n`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{dual_angle, fft_nd};
use crate::grid::{BoxDomain, GridParams};

/// Convergence target for successive node doublings.
pub const QUAD_TOL: f64 = 1e-10;
/// Cap on the total number of quadrature nodes.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gap {
    /// `(−ω_m, ω_m)`
    Zero,
    /// `(π−ω_m, π+ω_m)`
    Pi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub omega_m: f64,
    /// Points of the singular set in `(−π, π]`, sorted.
    pub sigma_set: Vec<f64>,
    pub mass_factor: f64,
}

impl SpectralParams {
    pub fn new(grid: &GridParams) -> Self {
        let k = grid.mass_factor();
        let n = grid.n;
        let mut sigma_set = Vec::with_capacity(2 * (n + 1));
        for l in 0..=n {
            let w = ((1.0 - 2.0 * l as f64 / n as f64) / k).acos();
            sigma_set.push(w);
            sigma_set.push(-w);
        }
        sigma_set.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            omega_m: omega_m(grid),
            sigma_set,
            mass_factor: k,
        }
    }

    pub fn gap_of(&self, omega: f64) -> Option<Gap> {
        let w = wrap(omega);
        if w.abs() < self.omega_m {
            Some(Gap::Zero)
        } else if (PI - w.abs()) < self.omega_m {
            Some(Gap::Pi)
        } else {
            None
        }
    }

    /// True for `ω` in `Ω₀ ∪ Ω_π`, widened by `margin` on each side.
    pub fn in_gaps_widened(&self, omega: f64, margin: f64) -> bool {
        let w = wrap(omega).abs();
        w < self.omega_m + margin || PI - w < self.omega_m + margin
    }
}

/// Folds an angle into `(−π, π]`.
pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `ω_m = arccos(1/(1+τ²m²/2))`.
pub fn omega_m(grid: &GridParams) -> f64 {
    (1.0 / grid.mass_factor()).acos()
}

/// `a(ξ,ω) = (2+τ²m²)cos ω − (2/n)Σ cos ξ_j`.
pub fn symbol(xi: &[f64], omega: f64, grid: &GridParams) -> f64 {
    2.0 * grid.mass_factor() * omega.cos() - 2.0 / grid.n as f64 * xi.iter().map(|x| x.cos()).sum::<f64>()
}

fn symbol_c(mean_cos: f64, cos_omega: Complex64, k: f64) -> Complex64 {
    2.0 * k * cos_omega - 2.0 * mean_cos
}

pub fn in_continuous_spectrum(omega: f64, grid: &GridParams) -> bool {
    omega.cos().abs() <= 1.0 / grid.mass_factor()
}

/// The root `ω(ξ) ∈ [ω_m, π−ω_m]` of `a(ξ,·) = 0`.
pub fn dispersion_omega(xi: &[f64], grid: &GridParams) -> f64 {
    let mean = xi.iter().map(|x| x.cos()).sum::<f64>() / grid.n as f64;
    (mean / grid.mass_factor()).clamp(-1.0, 1.0).acos()
}

/// `G₀(ω) = ½ sign(cos ω)/√((1+τ²m²/2)²cos²ω − 1)` for `n = 1`.
pub fn greens_closed_form_1d(x: &[i64], omega: f64, grid: &GridParams) -> Result<f64> {
    if grid.n != 1 {
        return Err(Error::DimensionError(grid.n));
    }
    if x != [0] {
        return Err(Error::InvalidParameter(
            "closed form is available at X = 0 only".into(),
        ));
    }
    let c = omega.cos();
    let q = (grid.mass_factor() * c).powi(2) - 1.0;
    if !(q > 0.0) {
        return Err(Error::DomainError(omega));
    }
    Ok(0.5 * c.signum() / q.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensTable {
    pub omega: Complex64,
    pub domain: BoxDomain,
    /// `G_X` for every site of `domain`, in its index order.
    pub values: Vec<Complex64>,
    pub quadrature_points_per_dim: usize,
    pub est_error: f64,
    /// Set when singular nodes had to be dropped.
    pub degraded: bool,
}

impl GreensTable {
    pub fn get(&self, x: &[i64]) -> Result<Complex64> {
        Ok(self.values[self.domain.index(x)?])
    }

    pub fn at_origin(&self) -> Complex64 {
        self.values[self.domain.origin()]
    }

    /// Real parts, for frequencies in the gaps.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

fn check_frequency(omega: Complex64, grid: &GridParams) -> Result<bool> {
    if omega.im < 0.0 {
        return Err(Error::InvalidParameter(
            "complex frequency needs a nonnegative imaginary part".into(),
        ));
    }
    if omega.im == 0.0 {
        let c = omega.re.cos().abs() * grid.mass_factor();
        // endpoints of the gaps are admissible for n ≥ 3 only
        let edge = (c - 1.0).abs() <= 1e-14;
        if c < 1.0 || (edge && grid.n < 3) {
            return Err(Error::OnSpectrum(omega.re));
        }
        return Ok(edge);
    }
    Ok(false)
}

/// Trapezoid rule with `nq` nodes per axis, evaluated at every site of
/// `domain` through one inverse FFT. Returns `(values, dropped_nodes)`.
fn trapezoid(
    domain: &BoxDomain,
    omega: Complex64,
    grid: &GridParams,
    nq: usize,
    power: i32,
) -> (Vec<Complex64>, bool) {
    let n = grid.n;
    let k = grid.mass_factor();
    let cos_w = omega.cos();
    let total = nq.pow(n as u32);
    let cos_tab: Vec<f64> = (0..nq).map(|i| dual_angle(i, nq).cos()).collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    let mut dropped = false;
    for (idx, v) in buf.iter_mut().enumerate() {
        let mut rem = idx;
        let mut s = 0.0;
        for _ in 0..n {
            s += cos_tab[rem % nq];
            rem /= nq;
        }
        let a = symbol_c(s / n as f64, cos_w, k);
        if a.norm() == 0.0 || a.norm() < 1e-300 {
            dropped = true;
            continue;
        }
        *v = if power == 1 {
            1.0 / a
        } else {
            Complex64::new(1.0 / a.norm_sqr(), 0.0)
        };
    }
    if power == 2 {
        let mean = buf.iter().sum::<Complex64>() / total as f64;
        return (vec![mean], dropped);
    }
    fft_nd(&mut buf, nq, n, FftDirection::Inverse);
    let scale = 1.0 / total as f64;
    let values = (0..domain.len())
        .map(|i| {
            let mut p = 0usize;
            for j in 0..n {
                let c = domain.coord(i, j).rem_euclid(nq as i64) as usize;
                p = p * nq + c;
            }
            buf[p] * scale
        })
        .collect();
    (values, dropped)
}

fn start_nodes(domain: &BoxDomain) -> usize {
    (2 * domain.radius + 1).max(16).next_power_of_two()
}

fn rel_change(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Green's function on every site of `domain`, refined by node doubling.
pub fn greens_table(domain: &BoxDomain, omega: Complex64, grid: &GridParams) -> Result<GreensTable> {
    greens_table_from(domain, omega, grid, start_nodes(domain))
}

/// As [`greens_table`], starting from `quad_points` nodes per axis.
pub fn greens_table_from(
    domain: &BoxDomain,
    omega: Complex64,
    grid: &GridParams,
    quad_points: usize,
) -> Result<GreensTable> {
    if domain.n != grid.n {
        return Err(Error::DimensionError(domain.n));
    }
    let edge = check_frequency(omega, grid)?;
    let mut nq = quad_points.max(start_nodes(domain));
    let (mut prev, _) = trapezoid(domain, omega, grid, nq, 1);
    loop {
        let next_nq = nq * 2;
        let total = next_nq.checked_pow(grid.n as u32).unwrap_or(usize::MAX);
        if total > MAX_NODES {
            return Err(Error::NoConvergence {
                change: f64::NAN,
                nodes: nq.pow(grid.n as u32),
            });
        }
        let (cur, dropped) = trapezoid(domain, omega, grid, next_nq, 1);
        let change = rel_change(&prev, &cur);
        nq = next_nq;
        if change <= QUAD_TOL || (edge && change <= 1e-3) {
            let degraded = dropped || edge;
            return Ok(GreensTable {
                omega,
                domain: *domain,
                values: cur,
                quadrature_points_per_dim: nq,
                est_error: change,
                degraded,
            });
        }
        let next_total = (nq * 2).checked_pow(grid.n as u32).unwrap_or(usize::MAX);
        if next_total > MAX_NODES {
            return Err(Error::NoConvergence {
                change,
                nodes: nq.pow(grid.n as u32),
            });
        }
        prev = cur;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensValue {
    pub value: Complex64,
    pub est_error: f64,
    pub quadrature_points_per_dim: usize,
}

/// `G_X(ω)` at a single site.
pub fn greens(x: &[i64], omega: Complex64, grid: &GridParams, quad_points: usize) -> Result<GreensValue> {
    let r = x.iter().map(|c| c.unsigned_abs() as usize).max().unwrap_or(0).max(1);
    let dom = BoxDomain::new(r, grid.n)?;
    let t = greens_table_from(&dom, omega, grid, quad_points)?;
    Ok(GreensValue {
        value: t.get(x)?,
        est_error: t.est_error,
        quadrature_points_per_dim: t.quadrature_points_per_dim,
    })
}

/// `∫ |a(ξ, ω+iε)|^{−2} dξ/(2π)^n`, equal to `Σ_X |G_X(ω+iε)|²`.
pub fn greens_l2_norm_sq(omega: f64, eps_im: f64, grid: &GridParams, quad_points: usize) -> Result<f64> {
    if !(eps_im > 0.0 && eps_im < 1.0) {
        return Err(Error::InvalidParameter("eps_im must lie in (0, 1)".into()));
    }
    let w = Complex64::new(omega, eps_im);
    let dom = BoxDomain::new(1, grid.n)?;
    let mut nq = quad_points.max(16).next_power_of_two();
    let mut prev = trapezoid(&dom, w, grid, nq, 2).0[0].re;
    loop {
        if (nq * 2).checked_pow(grid.n as u32).map_or(true, |t| t > MAX_NODES) {
            return Err(Error::NoConvergence {
                change: f64::NAN,
                nodes: nq.pow(grid.n as u32),
            });
        }
        nq *= 2;
        let cur = trapezoid(&dom, w, grid, nq, 2).0[0].re;
        let change = (cur - prev).abs() / cur.abs();
        if change <= QUAD_TOL {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Applies `(2+τ²m²)cos ω·G_X − (1/n)Σ_j(G_{X+e_j}+G_{X−e_j})` at interior sites.
pub fn apply_operator(table: &GreensTable, grid: &GridParams) -> Vec<(usize, Complex64)> {
    let d = &table.domain;
    let c = 2.0 * grid.mass_factor() * table.omega.cos();
    (0..d.len())
        .filter(|&i| !d.on_boundary(i))
        .map(|i| {
            let mut nb = Complex64::new(0.0, 0.0);
            for j in 0..d.n {
                let s = d.stride(j);
                nb += table.values[i + s] + table.values[i - s];
            }
            (i, c * table.values[i] - nb / grid.n as f64)
        })
        .collect()
}

/// Tables cached by the exact bit patterns of `(ω, grid, box)`.
#[derive(Debug, Default)]
pub struct GreensCache {
    map: Mutex<HashMap<[u64; 8], Arc<GreensTable>>>,
}

impl GreensCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(
        &self,
        domain: &BoxDomain,
        omega: Complex64,
        grid: &GridParams,
    ) -> Result<Arc<GreensTable>> {
        let key = [
            omega.re.to_bits(),
            omega.im.to_bits(),
            grid.n as u64,
            grid.eps.to_bits(),
            grid.tau.to_bits(),
            grid.m.to_bits(),
            domain.radius as u64,
            domain.n as u64,
        ];
        if let Some(t) = self.map.lock().unwrap().get(&key) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(greens_table(domain, omega, grid)?);
        self.map.lock().unwrap().insert(key, Arc::clone(&t));
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
