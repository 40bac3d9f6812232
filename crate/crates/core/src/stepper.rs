//! Time stepping of the conservative scheme.
//!
//! Every site obeys `(ψ^{t+1}+ψ^{t−1})(1+τ²B_V(|ψ^{t+1}|²,|ψ^{t−1}|²)) = ξ`
//! with `ξ = (τ²/ε²)Σ_j(ψ_{X+e_j}−2ψ_X+ψ_{X−e_j})^t + 2ψ_X^t`, where `V` is
//! the site potential of [`SitePotentials`]. The outer ring of the box is
//! held at zero.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conservation::{self, Diagnostics};
use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::grid::{BoxDomain, GridParams};
use crate::model::{ModelKind, SitePotentials};
use crate::potential::PolynomialPotential;
use crate::thresholds::{self, TauLimit};

pub const ONSITE_TOL: f64 = 1e-14;
pub const MAX_ITERATIONS: usize = 200;
const MAX_DOUBLINGS: usize = 200;
const SCAN_INTERVALS: usize = 64;
const PARALLEL_MIN_SITES: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub multi_root_warning: bool,
    /// The root `s` of `f(s) = 1`.
    pub s: f64,
}

/// Solver for one site: `(1+τ²B(|sξ−ψ_p|², |ψ_p|²))·s = 1`.
#[derive(Debug, Clone)]
pub struct OnsiteSolver {
    w: PolynomialPotential,
    tau2: f64,
    constant_b: Option<f64>,
    scan: bool,
}

impl OnsiteSolver {
    /// Scans for extra roots only when `τ ≥ τ₂`.
    pub fn new(w: &PolynomialPotential, tau: f64) -> Self {
        let th = thresholds::thresholds_any(
            w,
            thresholds::default_search_bound(w),
            thresholds::DEFAULT_GRID_POINTS,
        );
        Self::with_scan(w, tau, !th.tau2.admits(tau))
    }

    pub fn with_scan(w: &PolynomialPotential, tau: f64, scan: bool) -> Self {
        let constant_b = if w.is_linear() {
            Some(w.coeffs().first().copied().unwrap_or(0.0))
        } else {
            None
        };
        Self {
            w: w.clone(),
            tau2: tau * tau,
            constant_b,
            scan,
        }
    }

    pub fn scans(&self) -> bool {
        self.scan
    }

    /// `f(s) − 1` and its derivative.
    fn g(&self, s: f64, xi: Complex64, pp: Complex64, mu: f64, cross: f64, xi2: f64) -> (f64, f64) {
        let lam = (xi * s - pp).norm_sqr();
        let (b, db) = self.w.dd_with_grad(lam, mu);
        let fac = 1.0 + self.tau2 * b;
        let dlam = 2.0 * s * xi2 - 2.0 * cross;
        (fac * s - 1.0, fac + self.tau2 * db * dlam * s)
    }

    pub fn solve(&self, xi: Complex64, psi_prev: Complex64) -> Result<(Complex64, SolveReport)> {
        if xi == Complex64::new(0.0, 0.0) {
            let report = SolveReport {
                iterations: 0,
                residual: 0.0,
                multi_root_warning: false,
                s: 0.0,
            };
            return Ok((-psi_prev, report));
        }
        if let Some(b) = self.constant_b {
            let fac = 1.0 + self.tau2 * b;
            if !(fac > 0.0) {
                return Err(Error::NoBracket { s_hi: f64::INFINITY });
            }
            let s = 1.0 / fac;
            let report = SolveReport {
                iterations: 0,
                residual: (fac * s - 1.0).abs(),
                multi_root_warning: false,
                s,
            };
            return Ok((xi * s - psi_prev, report));
        }
        let s = self.solve_s(xi, psi_prev)?;
        Ok((xi * s.s - psi_prev, s))
    }

    fn solve_s(&self, xi: Complex64, pp: Complex64) -> Result<SolveReport> {
        let mu = pp.norm_sqr();
        let xi2 = xi.norm_sqr();
        let cross = (pp.conj() * xi).re;
        let g = |s: f64| self.g(s, xi, pp, mu, cross, xi2);

        let mut hi = 1.0;
        let mut doublings = 0;
        while g(hi).0 <= 0.0 {
            doublings += 1;
            hi *= 2.0;
            if doublings > MAX_DOUBLINGS || !hi.is_finite() {
                return Err(Error::NoBracket { s_hi: hi });
            }
        }
        let mut lo = 0.0;
        let mut warning = false;
        if self.scan {
            let h = hi / SCAN_INTERVALS as f64;
            let vals: Vec<f64> = (0..=SCAN_INTERVALS).map(|k| g(k as f64 * h).0).collect();
            let changes = vals.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
            warning = changes > 1;
            if let Some(k) = vals.windows(2).position(|w| w[0] <= 0.0 && w[1] > 0.0) {
                lo = k as f64 * h;
                hi = if k + 1 == SCAN_INTERVALS { hi } else { (k + 1) as f64 * h };
            }
        }

        let guess = 1.0 / (1.0 + self.tau2 * self.w.divided_difference((xi - pp).norm_sqr(), mu));
        let mut s = if guess > lo && guess < hi {
            guess
        } else {
            0.5 * (lo + hi)
        };
        for it in 1..=MAX_ITERATIONS {
            let (gv, dg) = g(s);
            if gv.abs() <= ONSITE_TOL {
                return Ok(SolveReport {
                    iterations: it,
                    residual: gv.abs(),
                    multi_root_warning: warning,
                    s,
                });
            }
            if gv < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(SolveReport {
                    iterations: it,
                    residual: gv.abs(),
                    multi_root_warning: warning,
                    s,
                });
            }
            let newton = s - gv / dg;
            s = if dg > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        let (gv, _) = g(s);
        Err(Error::Divergence {
            iterations: MAX_ITERATIONS,
            residual: gv.abs(),
        })
    }
}

/// Solves the on-site equation for `ψ^{t+1}` given `ξ` and `ψ^{t−1}`.
pub fn solve_onsite(
    xi: Complex64,
    psi_prev: Complex64,
    w: &PolynomialPotential,
    tau: f64,
) -> Result<(Complex64, SolveReport)> {
    OnsiteSolver::new(w, tau).solve(xi, psi_prev)
}

/// `ξ_X` computed from the latest level `ψ^{t+1}` of `state`.
pub fn xi_value(state: &FieldState, x: &[i64], grid: &GridParams) -> Result<Complex64> {
    let d = &state.domain;
    let idx = d.index(x)?;
    if d.on_boundary(idx) {
        let mut nb = x.to_vec();
        let j = x.iter().position(|c| c.unsigned_abs() as usize == d.radius).unwrap_or(0);
        nb[j] += x[j].signum();
        return Err(Error::OutOfBox(nb));
    }
    Ok(xi_at(&state.psi_curr, d, idx, grid.r2()))
}

#[inline]
fn xi_at(u: &[Complex64], d: &BoxDomain, idx: usize, r2: f64) -> Complex64 {
    let c = u[idx];
    let mut lap = Complex64::new(0.0, 0.0);
    for j in 0..d.n {
        let s = d.stride(j);
        lap += u[idx + s] + u[idx - s] - 2.0 * c;
    }
    lap * r2 + 2.0 * c
}

/// Reusable stepping context for one `(grid, W, model)` and box.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub grid: GridParams,
    pub model: ModelKind,
    pub domain: BoxDomain,
    pub potentials: SitePotentials,
    origin: OnsiteSolver,
    bulk: OnsiteSolver,
    strides: Vec<usize>,
    scratch: Vec<Complex64>,
    /// Sup-norm radius outside which both stored levels vanish.
    reach: usize,
    pub tau2: TauLimit,
    pub multi_root_warnings: usize,
}

impl Stepper {
    pub fn new(
        grid: &GridParams,
        w: &PolynomialPotential,
        model: ModelKind,
        domain: BoxDomain,
    ) -> Result<Self> {
        if grid.n != domain.n {
            return Err(Error::DimensionError(domain.n));
        }
        let potentials = SitePotentials::new(grid, w, model);
        let th = |v: &PolynomialPotential| {
            thresholds::thresholds_any(
                v,
                thresholds::default_search_bound(v),
                thresholds::DEFAULT_GRID_POINTS,
            )
            .tau2
        };
        let (t_origin, t_bulk) = (th(&potentials.origin), th(&potentials.bulk));
        let origin = OnsiteSolver::with_scan(&potentials.origin, grid.tau, !t_origin.admits(grid.tau));
        let bulk = OnsiteSolver::with_scan(&potentials.bulk, grid.tau, !t_bulk.admits(grid.tau));
        Ok(Self {
            grid: *grid,
            model,
            domain,
            potentials,
            origin,
            bulk,
            strides: (0..domain.n).map(|j| domain.stride(j)).collect(),
            scratch: vec![Complex64::new(0.0, 0.0); domain.len()],
            reach: domain.radius,
            tau2: t_origin.min(t_bulk),
            multi_root_warnings: 0,
        })
    }

    /// True when the uniqueness threshold `τ < τ₂` fails for some site.
    pub fn above_tau2(&self) -> bool {
        !self.tau2.admits(self.grid.tau)
    }

    fn support_radius(state: &FieldState) -> usize {
        let d = &state.domain;
        let zero = Complex64::new(0.0, 0.0);
        (0..d.len())
            .filter(|&i| state.psi_prev[i] != zero || state.psi_curr[i] != zero)
            .map(|i| d.sup_norm(i))
            .max()
            .unwrap_or(0)
    }

    /// Prepares stepping of `state`, restricting work to its support cone.
    pub fn attach(&mut self, state: &FieldState) -> Result<()> {
        if state.domain != self.domain {
            return Err(Error::InvalidParameter("state box does not match stepper".into()));
        }
        self.reach = Self::support_radius(state);
        Ok(())
    }

    /// Advances `state` by one level in place. Call [`Self::attach`] first
    /// when `state` did not come from this stepper.
    pub fn advance(&mut self, state: &mut FieldState) -> Result<()> {
        let d = self.domain;
        let side = d.side();
        let r = d.radius;
        let a = (self.reach + 1).min(r);
        let r2 = self.grid.r2();
        let origin_idx = d.origin();
        let t = state.t;
        let lo = r - a;
        let hi = r + a;

        let cur = &state.psi_curr;
        let prev = &state.psi_prev;
        let strides = &self.strides;
        let (origin_solver, bulk_solver) = (&self.origin, &self.bulk);
        let n = d.n;

        let row = |(ri, out): (usize, &mut [Complex64])| -> Result<usize> {
            // coordinates of the row along the leading n−1 axes
            let mut rem = ri;
            let mut interior_row = true;
            for _ in 0..n - 1 {
                let c = rem % side;
                rem /= side;
                if c < lo || c > hi {
                    return Ok(0);
                }
                interior_row &= c > 0 && c < side - 1;
            }
            let mut warns = 0;
            for col in lo..=hi {
                let idx = ri * side + col;
                if !interior_row || col == 0 || col == side - 1 {
                    out[col] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let c = cur[idx];
                let mut lap = Complex64::new(0.0, 0.0);
                for &s in strides {
                    lap += cur[idx + s] + cur[idx - s] - 2.0 * c;
                }
                let xi = lap * r2 + 2.0 * c;
                let solver = if idx == origin_idx { origin_solver } else { bulk_solver };
                let (v, rep) = solver
                    .solve(xi, prev[idx])
                    .map_err(|e| e.at_site(d.coords(idx), t + 2))?;
                warns += rep.multi_root_warning as usize;
                out[col] = v;
            }
            Ok(warns)
        };

        let active = (2 * a + 1).pow(n as u32);
        let warns: usize = if active >= PARALLEL_MIN_SITES && n > 1 {
            self.scratch
                .par_chunks_mut(side)
                .enumerate()
                .map(row)
                .try_reduce(|| 0, |x, y| Ok(x + y))?
        } else {
            self.scratch
                .chunks_mut(side)
                .enumerate()
                .map(row)
                .sum::<Result<usize>>()?
        };
        self.multi_root_warnings += warns;

        // rotate levels: (prev, curr, scratch) <- (curr, scratch, prev)
        std::mem::swap(&mut state.psi_prev, &mut state.psi_curr);
        std::mem::swap(&mut state.psi_curr, &mut self.scratch);
        // scratch now holds the old ψ^{t−1}, which vanishes outside the cube
        self.reach = a;
        state.t += 1;
        Ok(())
    }
}

/// One step of the scheme.
pub fn step(
    state: &FieldState,
    grid: &GridParams,
    w: &PolynomialPotential,
    model: ModelKind,
) -> Result<FieldState> {
    let mut st = Stepper::new(grid, w, model, state.domain)?;
    let mut s = state.clone();
    st.attach(&s)?;
    st.advance(&mut s)?;
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<FieldState>,
    /// One record per stored state, starting with the initial one.
    pub diagnostics: Vec<Diagnostics>,
    /// `ψ₀^t` for every level `t` visited, starting at `initial.t`.
    pub origin_series: Vec<Complex64>,
    pub multi_root_warnings: usize,
    pub above_tau2: bool,
    pub final_state: FieldState,
}

/// Runs `steps` steps, storing a snapshot every `snapshot_every` steps
/// (0 disables snapshots) and diagnostics after every step.
pub fn run(
    initial: &FieldState,
    steps: usize,
    grid: &GridParams,
    w: &PolynomialPotential,
    model: ModelKind,
    snapshot_every: usize,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be ≥ 1".into()));
    }
    let mut st = Stepper::new(grid, w, model, initial.domain)?;
    let mut s = initial.clone();
    st.attach(&s)?;
    let ctx = conservation::DiagnosticsContext::new(grid, w, model, &s);
    let o = s.domain.origin();
    let mut origin_series = vec![s.psi_prev[o], s.psi_curr[o]];
    let mut diagnostics = vec![ctx.measure(&s)];
    let mut snapshots = Vec::new();
    if snapshot_every > 0 {
        snapshots.push(s.clone());
    }
    for k in 1..=steps {
        st.advance(&mut s)?;
        origin_series.push(s.psi_curr[o]);
        diagnostics.push(ctx.measure(&s));
        if snapshot_every > 0 && k % snapshot_every == 0 {
            snapshots.push(s.clone());
        }
    }
    Ok(Trajectory {
        snapshots,
        diagnostics,
        origin_series,
        multi_root_warnings: st.multi_root_warnings,
        above_tau2: st.above_tau2(),
        final_state: s,
    })
}
