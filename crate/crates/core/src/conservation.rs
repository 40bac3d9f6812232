//! Discrete energy and charge, norms, and the a priori `l²` bound.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::FieldState;
use crate::grid::{BoxDomain, GridParams};
use crate::model::{ModelKind, SitePotentials};
use crate::potential::PolynomialPotential;

pub const APRIORI_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: i64,
    pub energy: f64,
    /// Only defined when `τ/ε = 1/√n`.
    pub charge: Option<f64>,
    /// `ε^n Σ|ψ^t|²`
    pub l2_sq: f64,
    /// `None` when no bound applies (ratio too large or `W` too negative).
    pub apriori_rhs: Option<f64>,
}

const CHUNK: usize = 8192;

/// `Σ_rows f(base, X')` where a row fixes every coordinate but the last,
/// `base` is the index of its first site and `X'` its leading coordinates.
/// Rows are grouped into fixed chunks and summed in order.
fn row_sum(d: &BoxDomain, f: impl Fn(usize, &[i64]) -> f64 + Sync) -> f64 {
    let side = d.side();
    let rows = d.len() / side;
    let per = (CHUNK / side).max(1);
    let chunk = |c: usize| {
        (c * per..((c + 1) * per).min(rows))
            .map(|row| {
                let base = row * side;
                let x = d.coords(base);
                f(base, &x[..d.n - 1])
            })
            .sum::<f64>()
    };
    let chunks = rows.div_ceil(per);
    if chunks < 4 {
        return (0..chunks).map(chunk).sum();
    }
    let parts: Vec<f64> = (0..chunks).into_par_iter().map(chunk).collect();
    parts.iter().sum()
}

fn energy_with(state: &FieldState, grid: &GridParams, v: &SitePotentials) -> f64 {
    let d = &state.domain;
    let (a, b) = (&state.psi_curr, &state.psi_prev);
    let kin = 1.0 / (grid.tau * grid.tau) - d.n as f64 / (grid.eps * grid.eps);
    let grad = 0.25 / (grid.eps * grid.eps);
    let r = d.radius as i64;
    let side = d.side();
    let origin = d.origin();
    let sum = row_sum(d, |base, lead| {
        let (ar, br) = (&a[base..base + side], &b[base..base + side]);
        let mut local = 0.0;
        let mut g = 0.0;
        for (x, y) in ar.iter().zip(br) {
            let (p, q) = (x.norm_sqr(), y.norm_sqr());
            local += 0.5 * kin * (x - y).norm_sqr() + 0.5 * (v.bulk.eval(p) + v.bulk.eval(q));
        }
        // last axis inside the row, then the edges where ψ^{t+1}_X pairs
        // with an outside zero and ψ^t_X with the outside site's neighbour
        for k in 0..side - 1 {
            g += (ar[k] - br[k + 1]).norm_sqr() + (ar[k + 1] - br[k]).norm_sqr();
        }
        let edge = |k: usize| ar[k].norm_sqr() + br[k].norm_sqr();
        g += edge(0) + edge(side - 1);
        for (j, &c) in lead.iter().enumerate() {
            let s = d.stride(j);
            for (plus, ok) in [(true, c < r), (false, c > -r)] {
                if ok {
                    let nb = if plus { &b[base + s..base + s + side] } else { &b[base - s..base - s + side] };
                    g += ar.iter().zip(nb).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
                } else {
                    g += (0..side).map(edge).sum::<f64>();
                }
            }
        }
        if (base..base + side).contains(&origin) {
            let k = origin - base;
            let (p, q) = (ar[k].norm_sqr(), br[k].norm_sqr());
            local += 0.5 * (v.origin.eval(p) + v.origin.eval(q) - v.bulk.eval(p) - v.bulk.eval(q));
        }
        local + grad * g
    });
    grid.cell() * sum
}

/// Discrete energy of the pair `(ψ^t, ψ^{t+1})`.
pub fn energy(
    state: &FieldState,
    grid: &GridParams,
    w: &PolynomialPotential,
    model: ModelKind,
) -> f64 {
    energy_with(state, grid, &SitePotentials::new(grid, w, model))
}

/// Discrete charge; requires `τ/ε = 1/√n`.
pub fn charge(state: &FieldState, grid: &GridParams) -> Result<f64> {
    grid.require_exact_ratio()?;
    Ok(charge_unchecked(state, grid))
}

fn charge_unchecked(state: &FieldState, grid: &GridParams) -> f64 {
    let d = &state.domain;
    let (a, b) = (&state.psi_curr, &state.psi_prev);
    let r = d.radius as i64;
    let side = d.side();
    let im = row_sum(d, |base, lead| {
        let ar = &a[base..base + side];
        let mut nb: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); side];
        for k in 0..side - 1 {
            nb[k] += b[base + k + 1];
            nb[k + 1] += b[base + k];
        }
        for (j, &c) in lead.iter().enumerate() {
            let s = d.stride(j);
            if c < r {
                nb.iter_mut().zip(&b[base + s..base + s + side]).for_each(|(n, y)| *n += y);
            }
            if c > -r {
                nb.iter_mut().zip(&b[base - s..base - s + side]).for_each(|(n, y)| *n += y);
            }
        }
        ar.iter().zip(&nb).map(|(x, n)| (n.conj() * x).im).sum::<f64>()
    });
    -grid.cell() * im / (2.0 * grid.tau)
}

/// `ε^n Σ|u_X|²`.
pub fn l2_sq(u: &[Complex64], grid: &GridParams) -> f64 {
    grid.cell() * u.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `(‖ψ^t‖² + ‖ψ^{t+1}‖²)^{1/2}` in `l²` with weights `(1+|X|²)^{−s}`.
pub fn weighted_norm(state: &FieldState, s: f64) -> f64 {
    let d = &state.domain;
    let (mut p, mut c) = (0.0, 0.0);
    for i in 0..d.len() {
        let wgt = (1.0 + d.norm_sq(i)).powf(-s);
        p += wgt * state.psi_prev[i].norm_sqr();
        c += wgt * state.psi_curr[i].norm_sqr();
    }
    (p + c).sqrt()
}

/// Right side of `ε^n‖ψ^t‖² ≤ rhs` given the initial energy `e0`.
///
/// With the oscillator at the origin the bound is `(4/m²)(E⁰ − ε^n inf W)`.
/// With `W` at every site, `W(λ) ≥ −κλ` gives `4E⁰/(m² − 2κ)` when `m² > 2κ`.
pub fn apriori_rhs(
    e0: f64,
    grid: &GridParams,
    w: &PolynomialPotential,
    model: ModelKind,
) -> Option<f64> {
    if !grid.ratio_ok() {
        return None;
    }
    let m2 = grid.m * grid.m;
    match model {
        ModelKind::OscillatorAtOrigin => w.inf().map(|inf| 4.0 / m2 * (e0 - grid.cell() * inf)),
        ModelKind::UniformOnSite => {
            let k = w.kappa()?;
            (m2 > 2.0 * k).then(|| 4.0 * e0 / (m2 - 2.0 * k))
        }
    }
}

/// True iff `l2_sq ≤ rhs·(1+1e−9)`; vacuously true without a bound.
pub fn apriori_check(diag: &Diagnostics) -> bool {
    match diag.apriori_rhs {
        Some(rhs) => diag.l2_sq <= rhs.max(0.0) * (1.0 + APRIORI_SLACK) + f64::MIN_POSITIVE,
        None => true,
    }
}

/// Per-run constants for producing [`Diagnostics`].
#[derive(Debug, Clone)]
pub struct DiagnosticsContext {
    grid: GridParams,
    potentials: SitePotentials,
    rhs: Option<f64>,
}

impl DiagnosticsContext {
    pub fn new(
        grid: &GridParams,
        w: &PolynomialPotential,
        model: ModelKind,
        initial: &FieldState,
    ) -> Self {
        let potentials = SitePotentials::new(grid, w, model);
        let e0 = energy_with(initial, grid, &potentials);
        Self {
            grid: *grid,
            potentials,
            rhs: apriori_rhs(e0, grid, w, model),
        }
    }

    pub fn measure(&self, state: &FieldState) -> Diagnostics {
        Diagnostics {
            t: state.t,
            energy: energy_with(state, &self.grid, &self.potentials),
            charge: self
                .grid
                .ratio_exact()
                .then(|| charge_unchecked(state, &self.grid)),
            l2_sq: l2_sq(&state.psi_prev, &self.grid),
            apriori_rhs: self.rhs,
        }
    }
}

/// Writes diagnostics as CSV with columns `t, energy, charge, l2_sq, apriori_ok`.
pub fn write_csv<W: std::io::Write>(out: &mut W, diags: &[Diagnostics]) -> std::io::Result<()> {
    writeln!(out, "t,energy,charge,l2_sq,apriori_ok")?;
    for d in diags {
        let q = d.charge.map_or(String::new(), |q| format!("{q:.17e}"));
        writeln!(
            out,
            "{},{:.17e},{},{:.17e},{}",
            d.t,
            d.energy,
            q,
            d.l2_sq,
            apriori_check(d)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::stepper::run;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(v: &[f64]) -> PolynomialPotential {
        PolynomialPotential::new(v.to_vec()).unwrap()
    }

    fn random_state(d: BoxDomain, seed: u64, support: usize) -> FieldState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = FieldState::zeros(d);
        for i in 0..d.len() {
            if d.sup_norm(i) <= support {
                s.psi_prev[i] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                s.psi_curr[i] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        s
    }

    #[test]
    fn zero_field() {
        let d = BoxDomain::new(3, 2).unwrap();
        let g = GridParams::exact_ratio(2, 0.5, 1.0).unwrap();
        let s = FieldState::zeros(d);
        assert_eq!(energy(&s, &g, &w(&[-1.0, 1.0]), ModelKind::UniformOnSite), 0.0);
        assert_eq!(charge(&s, &g).unwrap(), 0.0);
        assert_eq!(weighted_norm(&s, 1.0), 0.0);
    }

    #[test]
    fn constant_field_has_only_potential_terms() {
        // interior sites see no differences; the edges see the zero exterior
        let d = BoxDomain::new(4, 1).unwrap();
        let g = GridParams::exact_ratio(1, 1.0, 1.0).unwrap();
        let c = Complex64::new(0.5, 0.0);
        let s = FieldState::from_fn(d, 0, |_, _| c);
        let wv = w(&[0.0, 1.0]);
        let e = energy(&s, &g, &wv, ModelKind::UniformOnSite);
        let v = wv.site(0.5, 1.0);
        let pot = 9.0 * v.eval(0.25);
        // each edge site meets the zero exterior once
        let edges = 2.0 * 0.25 * (0.25 + 0.25);
        assert!((e - pot - edges).abs() < 1e-14, "{e}");
    }

    #[test]
    fn charge_requires_exact_ratio() {
        let d = BoxDomain::new(3, 1).unwrap();
        let g = GridParams::new(1, 1.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            charge(&FieldState::zeros(d), &g),
            Err(Error::RatioMismatch { .. })
        ));
    }

    #[test]
    fn real_field_has_no_charge() {
        let d = BoxDomain::new(5, 2).unwrap();
        let g = GridParams::exact_ratio(2, 0.5, 1.0).unwrap();
        let mut s = random_state(d, 4, 3);
        s.psi_prev.iter_mut().for_each(|z| z.im = 0.0);
        s.psi_curr.iter_mut().for_each(|z| z.im = 0.0);
        assert_eq!(charge(&s, &g).unwrap(), 0.0);
    }

    #[test]
    fn weighted_norm_examples() {
        let d = BoxDomain::new(2, 2).unwrap();
        let mut s = FieldState::zeros(d);
        s.psi_prev[d.origin()] = Complex64::new(1.0, 0.0);
        s.psi_curr[d.origin()] = Complex64::new(1.0, 0.0);
        assert!((weighted_norm(&s, 0.7) - 2f64.sqrt()).abs() < 1e-15);
        let r = random_state(d, 8, 2);
        assert!(weighted_norm(&r, 0.5) >= weighted_norm(&r, 1.5));
    }

    #[test]
    fn apriori_negative_case() {
        let diag = Diagnostics {
            t: 0,
            energy: 1.0,
            charge: None,
            l2_sq: 5.0,
            apriori_rhs: Some(4.0),
        };
        assert!(!apriori_check(&diag));
        assert!(apriori_check(&Diagnostics { l2_sq: 0.0, apriori_rhs: Some(0.0), ..diag }));
    }

    #[test]
    fn conserved_on_short_runs() {
        for (n, model) in [
            (1, ModelKind::UniformOnSite),
            (2, ModelKind::UniformOnSite),
            (1, ModelKind::OscillatorAtOrigin),
            (2, ModelKind::OscillatorAtOrigin),
        ] {
            let d = BoxDomain::new(8, n).unwrap();
            let g = GridParams::exact_ratio(n, 0.4, 1.0).unwrap();
            let s = random_state(d, 11, 3);
            let tr = run(&s, 200, &g, &w(&[-1.0, 1.0]), model, 0).unwrap();
            let e0 = tr.diagnostics[0].energy;
            let q0 = tr.diagnostics[0].charge.unwrap();
            for diag in &tr.diagnostics {
                assert!((diag.energy - e0).abs() <= 1e-11 * e0.abs().max(1.0), "{n} {model:?}");
                assert!((diag.charge.unwrap() - q0).abs() <= 1e-11 * (1.0 + q0.abs()));
                assert!(apriori_check(diag));
            }
        }
    }

    #[test]
    fn energy_conserved_below_exact_ratio() {
        let d = BoxDomain::new(10, 2).unwrap();
        let g = GridParams::new(2, 1.0, 0.5, 1.0).unwrap();
        let s = random_state(d, 12, 4);
        let tr = run(&s, 100, &g, &w(&[0.5, 1.0]), ModelKind::UniformOnSite, 0).unwrap();
        let e0 = tr.diagnostics[0].energy;
        assert!(tr.diagnostics.iter().all(|x| (x.energy - e0).abs() <= 1e-11 * e0));
        assert!(tr.diagnostics.iter().all(|x| x.charge.is_none()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn energy_terms_nonnegative(seed in any::<u64>(), tau in 0.1f64..0.7) {
            // W ≥ 0 and τ/ε ≤ 1/√n make every term nonnegative
            let d = BoxDomain::new(4, 2).unwrap();
            let g = GridParams::new(2, 1.0, tau, 0.8).unwrap();
            let s = random_state(d, seed, 3);
            let e = energy(&s, &g, &w(&[0.3, 0.2]), ModelKind::UniformOnSite);
            prop_assert!(e >= 0.0);
        }
    }
}
