//! Time-step thresholds `k₁, k₂, k₃` and the derived `τ₁, τ₂, τ₃`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::potential::PolynomialPotential;

/// A lower bound `k_j`, kept as a tagged value rather than a float infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Bound {
    Finite(f64),
    NegInfinite,
    Inapplicable,
}

/// A time-step limit `τ_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TauLimit {
    Finite(f64),
    Unbounded,
    Inapplicable,
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `τ = √(−1/k)` for `k < 0`, unbounded otherwise.
    pub fn tau(self) -> TauLimit {
        match self {
            Bound::Finite(k) if k < 0.0 => TauLimit::Finite((-1.0 / k).sqrt()),
            Bound::Finite(_) => TauLimit::Unbounded,
            Bound::NegInfinite => TauLimit::Finite(0.0),
            Bound::Inapplicable => TauLimit::Inapplicable,
        }
    }
}

impl TauLimit {
    /// True when `tau` lies strictly below this limit.
    pub fn admits(self, tau: f64) -> bool {
        match self {
            TauLimit::Finite(t) => tau < t,
            TauLimit::Unbounded => true,
            TauLimit::Inapplicable => false,
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        match self {
            TauLimit::Finite(t) => Some(t),
            TauLimit::Unbounded => Some(f64::INFINITY),
            TauLimit::Inapplicable => None,
        }
    }

    pub fn min(self, other: TauLimit) -> TauLimit {
        match (self.as_f64(), other.as_f64()) {
            (Some(a), Some(b)) if a.min(b).is_finite() => TauLimit::Finite(a.min(b)),
            (Some(_), Some(_)) => TauLimit::Unbounded,
            (Some(_), None) => self,
            _ => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauThresholds {
    pub k1: Bound,
    pub k2: Bound,
    pub k3: Bound,
    pub tau1: TauLimit,
    pub tau2: TauLimit,
    pub tau3: TauLimit,
    /// `k₂` comes from a grid search and is not exact.
    pub k2_estimate: bool,
    pub search_bound: f64,
    pub grid_points: usize,
}

pub const DEFAULT_GRID_POINTS: usize = 256;

/// A box `[0, L]²` large enough that the leading monomial dominates `K±`.
pub fn default_search_bound(w: &PolynomialPotential) -> f64 {
    let c = w.coeffs();
    match w.order() {
        Some(p) if p >= 1 => {
            let lead = c[p].abs();
            let worst = c[..p].iter().map(|x| x.abs()).fold(0.0, f64::max);
            4.0 * (1.0 + worst / lead)
        }
        _ => 1.0,
    }
}

/// Thresholds of a confining potential.
pub fn tau_thresholds(
    w: &PolynomialPotential,
    search_bound: f64,
    grid_points: usize,
) -> Result<TauThresholds> {
    w.check_confining()?;
    if !(search_bound > 0.0) || grid_points < 3 {
        return Err(Error::InvalidParameter(
            "search_bound must be positive and grid_points ≥ 3".into(),
        ));
    }
    Ok(thresholds_any(w, search_bound, grid_points))
}

/// Thresholds for any potential, including the linear ones that arise as
/// site potentials away from the oscillator.
pub fn thresholds_any(
    w: &PolynomialPotential,
    search_bound: f64,
    grid_points: usize,
) -> TauThresholds {
    let k1 = match w.inf_deriv() {
        Some(v) => Bound::Finite(v),
        None => Bound::NegInfinite,
    };
    let k2 = match (w.order(), k1) {
        (None, _) => Bound::Finite(0.0),
        (Some(0), _) => Bound::Finite(w.coeffs()[0]),
        (_, Bound::NegInfinite) => Bound::NegInfinite,
        (Some(_), _) => {
            let est = k2_grid(w, search_bound, grid_points.max(3));
            // K⁻(λ,λ) = W'(λ), so k₂ ≤ k₁ holds exactly.
            Bound::Finite(k1.value().map_or(est, |v| est.min(v)))
        }
    };
    let c = w.coeffs();
    let k3 = if w.order().map_or(true, |p| p <= 4) && c.iter().skip(1).all(|&x| x >= 0.0) {
        Bound::Finite(c.first().copied().unwrap_or(0.0))
    } else {
        Bound::Inapplicable
    };
    TauThresholds {
        k1,
        k2,
        k3,
        tau1: k1.tau(),
        tau2: k2.tau(),
        tau3: k3.tau(),
        k2_estimate: w.order().map_or(false, |p| p >= 1),
        search_bound,
        grid_points,
    }
}

/// `[K_q^+(θ), K_q^−(θ)]` on the unit ray `(cos θ, sin θ)`, for `q = 0..=p`.
fn ray_terms(p: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let (lam, mu) = (theta.cos().max(0.0), theta.sin().max(0.0));
    let root = (lam * mu).sqrt();
    let (mut b, mut db, mut mu_q) = (1.0, 0.0, 1.0);
    let mut kp = Vec::with_capacity(p + 1);
    let mut km = Vec::with_capacity(p + 1);
    for q in 0..=p {
        if q > 0 {
            mu_q *= mu;
            db = b + lam * db;
            b = lam * b + mu_q;
        }
        kp.push(b + 2.0 * db * (lam + root));
        km.push(b + 2.0 * db * (lam - root));
    }
    (kp, km)
}

/// Exact minimum over `r ∈ [0, r_max]` of `Σ C_q K_q r^q` on one ray.
fn ray_min(c: &[f64], theta: f64, bound: f64) -> f64 {
    let p = c.len() - 1;
    let (kp, km) = ray_terms(p, theta);
    let r_max = bound / theta.cos().max(theta.sin());
    [kp, km]
        .iter()
        .map(|k| {
            let coeffs: Vec<f64> = c.iter().zip(k).map(|(a, b)| a * b).collect();
            poly::min_on(&coeffs, 0.0, r_max).1
        })
        .fold(f64::INFINITY, f64::min)
}

fn k2_grid(w: &PolynomialPotential, bound: f64, points: usize) -> f64 {
    let c = &w.coeffs()[..=w.order().unwrap()];
    let half_pi = std::f64::consts::FRAC_PI_2;
    // include θ = π/4 exactly, where K⁻ reduces to W'
    let points = points + (points % 2 == 0) as usize;
    let thetas: Vec<f64> = (0..points)
        .map(|i| half_pi * i as f64 / (points - 1) as f64)
        .collect();
    let vals: Vec<f64> = thetas.iter().map(|&t| ray_min(c, t, bound)).collect();
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 1..points - 1 {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            best = best.min(refine(c, bound, thetas[i - 1], thetas[i + 1]));
        }
    }
    best
}

/// Golden-section refinement of a local minimum in `θ`.
fn refine(c: &[f64], bound: f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |t: f64| ray_min(c, t, bound);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}
