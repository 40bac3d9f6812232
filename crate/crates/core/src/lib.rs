//! Discrete nonlinear Klein–Gordon equation on a space-time lattice:
//! a conservative stepper, conservation diagnostics, lattice Green's
//! functions, multifrequency solitary waves, Titchmarsh-type support
//! arithmetic for point measures on the circle, and experiment tooling.

pub mod conservation;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod harness;
pub mod model;
pub mod poly;
pub mod potential;
pub mod propagator;
pub mod snapshot;
pub mod solitary;
pub mod spectral;
pub mod stepper;
pub mod thresholds;
pub mod titchmarsh;

pub use conservation::Diagnostics;
pub use error::{Error, Result};
pub use field::FieldState;
pub use grid::{BoxDomain, GridParams};
pub use model::ModelKind;
pub use num_complex::Complex64;
pub use potential::PolynomialPotential;
pub use solitary::{SolitaryWave, WaveKind};
pub use stepper::{SolveReport, Stepper, Trajectory};
pub use thresholds::{Bound, TauLimit, TauThresholds};
