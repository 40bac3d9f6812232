//! Fixtures shared by the benchmarks.

use dkg_core::harness::InitialData;
use dkg_core::{BoxDomain, FieldState, GridParams, PolynomialPotential};

/// Exact-ratio grid with `τ = 0.25`, `m = 2`.
pub fn grid(n: usize) -> GridParams {
    GridParams::exact_ratio(n, 0.25, 2.0).expect("valid grid")
}

/// `W(λ) = −λ + λ²`.
pub fn potential() -> PolynomialPotential {
    PolynomialPotential::confining(vec![-1.0, 1.0]).expect("confining")
}

/// Seeded Gaussian bump of width 4 filling the box `[−R, R]^n`.
pub fn state(n: usize, radius: usize) -> FieldState {
    let domain = BoxDomain::new(radius, n).expect("valid box");
    InitialData { amplitude: 1.0, width: radius as f64 / 4.0, seed: 7 }
        .build(domain)
        .expect("initial data")
}
