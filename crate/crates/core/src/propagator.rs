//! Exact evolution of the linear (`W = 0`) scheme on a periodic box.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::{dual_angle, fft_nd};
use crate::field::FieldState;
use crate::grid::GridParams;

/// `cos ω(ξ) = (1 − (τ/ε)² Σ_j (1 − cos ξ_j)) / (1 + τ²m²/2)`.
pub fn dispersion_cos(xi: &[f64], grid: &GridParams) -> f64 {
    let s: f64 = xi.iter().map(|x| 1.0 - x.cos()).sum();
    (1.0 - grid.r2() * s) / grid.mass_factor()
}

/// Evolves `initial` to time `t` with the linear scheme, treating the box
/// as periodic. Each Fourier mode is split as `û = 𝒫₊ + 𝒫₋` with
/// `𝒫₊ = (û¹ − e^{−iω}û⁰)/(2i sin ω)` and evolved as
/// `e^{iωt}𝒫₊ + e^{−iωt}𝒫₋`.
pub fn linear_free_propagator(initial: &FieldState, t: i64, grid: &GridParams) -> Result<FieldState> {
    if t == initial.t {
        return Ok(initial.clone());
    }
    let d = initial.domain;
    if grid.n != d.n {
        return Err(Error::DimensionError(d.n));
    }
    let (side, n) = (d.side(), d.n);
    let mut u0 = initial.psi_prev.clone();
    let mut u1 = initial.psi_curr.clone();
    fft_nd(&mut u0, side, n, FftDirection::Forward);
    fft_nd(&mut u1, side, n, FftDirection::Forward);
    let dt = (t - initial.t) as f64;
    let mut next0 = vec![Complex64::new(0.0, 0.0); d.len()];
    let mut next1 = vec![Complex64::new(0.0, 0.0); d.len()];
    let mut xi = vec![0.0; n];
    let i = Complex64::new(0.0, 1.0);
    for k in 0..d.len() {
        let mut rem = k;
        for x in xi.iter_mut().rev() {
            *x = dual_angle(rem % side, side);
            rem /= side;
        }
        let c = dispersion_cos(&xi, grid);
        if c.abs() > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "complex frequency at ξ = {xi:?}; the grid ratio is too large"
            )));
        }
        let omega = c.acos();
        let sin = omega.sin();
        if sin.abs() < 1e-14 {
            return Err(Error::SingularSplit(sin));
        }
        let e = |s: f64| Complex64::from_polar(1.0, s * omega);
        let p_plus = (u1[k] - e(-1.0) * u0[k]) / (2.0 * i * sin);
        let p_minus = u0[k] - p_plus;
        next0[k] = e(dt) * p_plus + e(-dt) * p_minus;
        next1[k] = e(dt + 1.0) * p_plus + e(-dt - 1.0) * p_minus;
    }
    fft_nd(&mut next0, side, n, FftDirection::Inverse);
    fft_nd(&mut next1, side, n, FftDirection::Inverse);
    let scale = 1.0 / d.len() as f64;
    next0.iter_mut().for_each(|z| *z *= scale);
    next1.iter_mut().for_each(|z| *z *= scale);
    FieldState::new(d, next0, next1, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;
    use crate::model::ModelKind;
    use crate::potential::PolynomialPotential;
    use crate::stepper::run;

    fn bump(d: BoxDomain) -> FieldState {
        FieldState::from_fn(d, 0, |x, t| {
            let r2: f64 = x.iter().map(|&c| (c * c) as f64).sum();
            Complex64::from_polar((-r2 / 8.0).exp(), 0.3 * t as f64 + 0.1 * x[0] as f64)
        })
    }

    #[test]
    fn identity_at_start() {
        let d = BoxDomain::new(5, 1).unwrap();
        let g = GridParams::exact_ratio(1, 0.5, 1.0).unwrap();
        let s = bump(d);
        assert_eq!(linear_free_propagator(&s, 0, &g).unwrap(), s);
    }

    #[test]
    fn single_mode_is_pure_phase() {
        let d = BoxDomain::new(6, 1).unwrap();
        let g = GridParams::exact_ratio(1, 0.5, 1.0).unwrap();
        let k = 3.0 * 2.0 * std::f64::consts::PI / d.side() as f64;
        let omega = dispersion_cos(&[k], &g).acos();
        let s = FieldState::from_fn(d, 0, |x, t| Complex64::from_polar(1.0, k * x[0] as f64 + omega * t as f64));
        let out = linear_free_propagator(&s, 17, &g).unwrap();
        for (i, z) in out.psi_prev.iter().enumerate() {
            let expect = s.psi_prev[i] * Complex64::from_polar(1.0, 17.0 * omega);
            assert!((z - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_stepper_in_cone() {
        for n in [1usize, 2] {
            let r = if n == 1 { 60 } else { 30 };
            let d = BoxDomain::new(r, n).unwrap();
            let g = GridParams::exact_ratio(n, 0.6, 1.0).unwrap();
            let s = bump(d);
            let steps = 20;
            let stepped = run(&s, steps, &g, &PolynomialPotential::zero(), ModelKind::UniformOnSite, 0)
                .unwrap()
                .final_state;
            let free = linear_free_propagator(&s, steps as i64, &g).unwrap();
            for i in 0..d.len() {
                if d.sup_norm(i) + steps + 2 < r - 12 {
                    assert!((stepped.psi_prev[i] - free.psi_prev[i]).norm() < 1e-10);
                }
            }
        }
    }
}
