//! Direct checks of the circle convolution theorems on atomic measures.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{circular_distance, min_arc_mod_pi, supp_mod_pi_hull, Angle, Atom, CircleMeasure, ModPiHull, ANGLE_TOL};
use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

/// Lengths and positions below this count as zero.
const THEOREM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoIntervalReport {
    pub i: [f64; 2],
    pub j: [f64; 2],
    /// Smallest `K ⊂ I + J` with `supp f∗g ⊂ K ∪ (π + K)`; `None` when `f∗g = 0`.
    pub k: Option<[f64; 2]>,
    /// `inf K − inf I − inf J`; infinite when `f∗g = 0`.
    pub lambda: f64,
    /// `sup I + sup J − sup K`; infinite when `f∗g = 0`.
    pub rho: f64,
    /// Largest `λ'` for which some `σ` makes `f + σS_πf` vanish on
    /// `(sup I − π, inf I + λ')` and `g − σS_πg` on `(sup J − π, inf J + λ')`.
    pub lambda_symmetry: f64,
    pub lambda_sigma: i8,
    /// Largest `ρ'` with the mirrored vanishing on `(sup I − ρ', inf I + π)`
    /// and `(sup J − ρ', inf J + π)`.
    pub rho_symmetry: f64,
    pub rho_sigma: i8,
    pub lambda_equivalence: bool,
    pub rho_equivalence: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowersReport {
    pub p: u32,
    pub hull: [f64; 2],
    /// Hull of `f^{∗p}` lifted next to `p·inf I`; `None` if `f^{∗p} = 0`.
    pub power_hull: Option<[f64; 2]>,
    pub expected: [f64; 2],
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub hull: ModPiHull,
    /// `supp f ⊂ {inf I, sup I, π + inf I, π + sup I}`.
    pub support_ok: bool,
    pub mu: CircleMeasure,
    pub nu: CircleMeasure,
    pub point_supported: bool,
    /// `μ + S_πμ + ν − S_πν = f`.
    pub reconstructs: bool,
    pub consistent: bool,
}

fn violation(msg: impl Into<String>) -> Error {
    Error::HypothesisViolation(msg.into())
}

fn arc_of(f: &CircleMeasure, name: &str) -> Result<(f64, f64)> {
    min_arc_mod_pi(f).ok_or_else(|| violation(format!("{name} is the zero measure")))
}

/// Lift of `θ` modulo `π` into `[base − slack, base + π − slack)`.
fn lift_mod_pi(theta: f64, base: f64, slack: f64) -> f64 {
    let d = (theta - base + slack).rem_euclid(PI) - slack;
    base + d
}

/// Largest `x ≥ 0` with `h = 0` on the open arc `(start, start + x)`.
fn clear_forward(h: &CircleMeasure, start: f64) -> f64 {
    h.atoms()
        .iter()
        .map(|a| {
            let q = (a.angle.value() - start).rem_euclid(TAU);
            if q <= ANGLE_TOL || TAU - q <= ANGLE_TOL {
                TAU
            } else {
                q
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest `x ≥ 0` with `h = 0` on the open arc `(end − x, end)`.
fn clear_backward(h: &CircleMeasure, end: f64) -> f64 {
    h.atoms()
        .iter()
        .map(|a| {
            let q = (end - a.angle.value()).rem_euclid(TAU);
            if q <= ANGLE_TOL || TAU - q <= ANGLE_TOL {
                TAU
            } else {
                q
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn plus_sigma(f: &CircleMeasure, sigma: f64) -> CircleMeasure {
    f.add(&f.shift_pi().scale(Complex64::new(sigma, 0.0)))
}

fn verdict(theorem_value: f64, symmetry_value: f64) -> bool {
    let positive = theorem_value > THEOREM_TOL;
    let symmetric = symmetry_value > THEOREM_TOL;
    positive == symmetric && (!positive || symmetry_value >= theorem_value - THEOREM_TOL)
}

/// Evaluates both sides of the two-interval theorem for `f` and `g`.
pub fn check_two_interval_theorem(f: &CircleMeasure, g: &CircleMeasure) -> Result<TwoIntervalReport> {
    let (i0, i1) = arc_of(f, "f")?;
    let (j0, j1) = arc_of(g, "g")?;
    let width = (i1 - i0) + (j1 - j0);
    if width >= PI {
        return Err(violation(format!("|I| + |J| = {width} is not below π")));
    }
    let fg = f.convolve(g);
    let base = i0 + j0;
    let slack = 0.5 * (PI - width);
    let (k, lambda, rho) = if fg.is_empty() {
        (None, f64::INFINITY, f64::INFINITY)
    } else {
        let lifts: Vec<f64> = fg.atoms().iter().map(|a| lift_mod_pi(a.angle.value(), base, slack)).collect();
        let lo = lifts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (Some([lo, hi]), lo - base, i1 + j1 - hi)
    };

    let mut best_lambda = (f64::NEG_INFINITY, 1i8);
    let mut best_rho = (f64::NEG_INFINITY, 1i8);
    for sigma in [1i8, -1] {
        let s = sigma as f64;
        let fs = plus_sigma(f, s);
        let gs = plus_sigma(g, -s);
        let lam = (clear_forward(&fs, i1 - PI) - (i0 - i1 + PI)).min(clear_forward(&gs, j1 - PI) - (j0 - j1 + PI));
        if lam > best_lambda.0 {
            best_lambda = (lam, sigma);
        }
        let r = (clear_backward(&fs, i0 + PI) - (i0 + PI - i1)).min(clear_backward(&gs, j0 + PI) - (j0 + PI - j1));
        if r > best_rho.0 {
            best_rho = (r, sigma);
        }
    }
    let lambda_equivalence = verdict(lambda, best_lambda.0);
    let rho_equivalence = verdict(rho, best_rho.0);
    Ok(TwoIntervalReport {
        i: [i0, i1],
        j: [j0, j1],
        k,
        lambda,
        rho,
        lambda_symmetry: best_lambda.0,
        lambda_sigma: best_lambda.1,
        rho_symmetry: best_rho.0,
        rho_sigma: best_rho.1,
        lambda_equivalence,
        rho_equivalence,
        consistent: lambda_equivalence && rho_equivalence,
    })
}

/// Compares the hull of `f^{∗p}` with `p·I`.
pub fn check_powers_theorem(f: &CircleMeasure, p: u32) -> Result<PowersReport> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be positive".into()));
    }
    let (lo, hi) = arc_of(f, "f")?;
    let len = hi - lo;
    if len * p as f64 >= PI {
        return Err(violation(format!("|I| = {len} is not below π/{p}")));
    }
    let pf = f.power(p);
    let expected = [p as f64 * lo, p as f64 * hi];
    let slack = 0.5 * (PI - p as f64 * len);
    let power_hull = if pf.is_empty() {
        None
    } else {
        let lifts: Vec<f64> = pf.atoms().iter().map(|a| lift_mod_pi(a.angle.value(), expected[0], slack)).collect();
        Some([
            lifts.iter().copied().fold(f64::INFINITY, f64::min),
            lifts.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ])
    };
    let equal = power_hull.is_some_and(|h| (h[0] - expected[0]).abs() <= 1e-10 && (h[1] - expected[1]).abs() <= 1e-10);
    Ok(PowersReport { p, hull: [lo, hi], power_hull, expected, equal })
}

/// Checks that `f` with `supp f∗f^♯ ⊂ {0, π}` has the four-point support
/// and splits as `μ + S_πμ + ν − S_πν` with `μ`, `ν` point masses.
pub fn classify_point_support(f: &CircleMeasure) -> Result<ClassifyReport> {
    let hull = supp_mod_pi_hull(f)?;
    let (lo, hi) = match hull {
        ModPiHull::Empty => {
            return Ok(ClassifyReport {
                hull,
                support_ok: true,
                mu: CircleMeasure::zero(),
                nu: CircleMeasure::zero(),
                point_supported: true,
                reconstructs: true,
                consistent: true,
            })
        }
        ModPiHull::Interval { lo, hi } => (lo, hi),
    };
    if hi - lo >= FRAC_PI_2 {
        return Err(violation(format!("|I| = {} is not below π/2", hi - lo)));
    }
    let auto = f.convolve(&f.sharp());
    if let Some(a) = auto
        .atoms()
        .iter()
        .find(|a| circular_distance(a.angle.value(), 0.0) > ANGLE_TOL && circular_distance(a.angle.value(), PI) > ANGLE_TOL)
    {
        return Err(violation(format!("f∗f♯ has an atom at {} outside {{0, π}}", a.angle.value())));
    }

    let mut support_ok = true;
    // endpoint → (angle on the I copy, weight there, weight on the π copy)
    let mut ends: Vec<(f64, Option<Angle>, Complex64, Complex64)> = vec![(lo, None, Complex64::default(), Complex64::default())];
    if hi - lo > ANGLE_TOL {
        ends.push((hi, None, Complex64::default(), Complex64::default()));
    }
    for a in f.atoms() {
        let p = a.angle.mod_pi()?;
        let Some(e) = ends.iter_mut().find(|e| (e.0 - p).abs() <= ANGLE_TOL) else {
            support_ok = false;
            continue;
        };
        if circular_distance(a.angle.value(), p) <= ANGLE_TOL {
            e.1 = Some(a.angle);
            e.2 += a.weight;
        } else {
            e.1 = e.1.or(Some(a.angle.sub(Angle::pi())));
            e.3 += a.weight;
        }
    }
    let mut mu = Vec::new();
    let mut nu = Vec::new();
    for (_, angle, c, d) in &ends {
        if let Some(angle) = angle {
            mu.push(Atom::new(*angle, (c + d) * 0.5));
            nu.push(Atom::new(*angle, (c - d) * 0.5));
        }
    }
    let (mu, nu) = (CircleMeasure::new(mu), CircleMeasure::new(nu));
    let point_supported = mu.len() <= 1 && nu.len() <= 1;
    let rebuilt = mu.add(&mu.shift_pi()).add(&nu.sub(&nu.shift_pi()));
    let scale = f.atoms().iter().map(|a| a.weight.norm()).fold(1.0, f64::max);
    let reconstructs = rebuilt.approx_eq(f, 1e-12 * scale);
    Ok(ClassifyReport {
        hull,
        support_ok,
        mu,
        nu,
        point_supported,
        reconstructs,
        consistent: support_ok && point_supported && reconstructs,
    })
}
