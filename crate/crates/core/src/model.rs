//! The two supported placements of the nonlinearity.

use serde::{Deserialize, Serialize};

use crate::grid::{BoxDomain, GridParams};
use crate::potential::PolynomialPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Linear Klein–Gordon lattice with the nonlinear oscillator at `X = 0`.
    OscillatorAtOrigin,
    /// The same nonlinearity `W` at every site.
    UniformOnSite,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oscillator" | "oscillator_at_origin" => Ok(Self::OscillatorAtOrigin),
            "uniform" | "uniform_on_site" => Ok(Self::UniformOnSite),
            _ => Err(format!("unknown model '{s}'")),
        }
    }
}

/// Site potentials `V_X(λ)` with the mass term folded in, so that every
/// site obeys `(ψ^{t+1}+ψ^{t−1})(1+τ²B_V) = ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SitePotentials {
    pub origin: PolynomialPotential,
    pub bulk: PolynomialPotential,
}

impl SitePotentials {
    pub fn new(grid: &GridParams, w: &PolynomialPotential, model: ModelKind) -> Self {
        let half_m2 = 0.5 * grid.m * grid.m;
        match model {
            ModelKind::OscillatorAtOrigin => Self {
                origin: w.site(half_m2, 0.5),
                bulk: PolynomialPotential::zero().site(half_m2, 1.0),
            },
            ModelKind::UniformOnSite => {
                let v = w.site(half_m2, 1.0);
                Self {
                    origin: v.clone(),
                    bulk: v,
                }
            }
        }
    }

    pub fn at(&self, domain: &BoxDomain, idx: usize) -> &PolynomialPotential {
        if idx == domain.origin() {
            &self.origin
        } else {
            &self.bulk
        }
    }
}
