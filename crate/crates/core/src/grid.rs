//! Lattice parameters and the finite box `[−R, R]^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub n: usize,
    pub eps: f64,
    pub tau: f64,
    pub m: f64,
}

impl GridParams {
    pub fn new(n: usize, eps: f64, tau: f64, m: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension n must be ≥ 1".into()));
        }
        for (name, v) in [("eps", eps), ("tau", tau), ("m", m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { n, eps, tau, m })
    }

    /// Grid with `ε = τ√n`, the charge-conserving ratio.
    pub fn exact_ratio(n: usize, tau: f64, m: f64) -> Result<Self> {
        Self::new(n, tau * (n as f64).sqrt(), tau, m)
    }

    pub fn ratio(&self) -> f64 {
        self.tau / self.eps
    }

    pub fn ratio_limit(&self) -> f64 {
        1.0 / (self.n as f64).sqrt()
    }

    pub fn ratio_ok(&self) -> bool {
        self.ratio() <= self.ratio_limit() + RATIO_TOL
    }

    pub fn ratio_exact(&self) -> bool {
        (self.ratio() - self.ratio_limit()).abs() <= RATIO_TOL
    }

    /// `τ²/ε²`.
    pub fn r2(&self) -> f64 {
        let r = self.ratio();
        r * r
    }

    /// `1 + τ²m²/2`.
    pub fn mass_factor(&self) -> f64 {
        1.0 + 0.5 * self.tau * self.tau * self.m * self.m
    }

    /// `ε^n`, the cell volume.
    pub fn cell(&self) -> f64 {
        self.eps.powi(self.n as i32)
    }

    pub fn require_exact_ratio(&self) -> Result<()> {
        if self.ratio_exact() {
            Ok(())
        } else {
            Err(Error::RatioMismatch {
                ratio: self.ratio(),
                expected: self.ratio_limit(),
            })
        }
    }
}

/// The sites `X ∈ [−R, R]^n`, indexed row-major with the first axis slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub radius: usize,
    pub n: usize,
}

impl BoxDomain {
    pub fn new(radius: usize, n: usize) -> Result<Self> {
        if n == 0 || radius == 0 {
            return Err(Error::InvalidParameter(
                "box needs n ≥ 1 and radius ≥ 1".into(),
            ));
        }
        let side = 2 * radius as u128 + 1;
        if n > 64 || side.checked_pow(n as u32).map_or(true, |s| s > (1u128 << 40)) {
            return Err(Error::InvalidParameter("box too large".into()));
        }
        Ok(Self { radius, n })
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index stride of axis `j`.
    pub fn stride(&self, j: usize) -> usize {
        self.side().pow((self.n - 1 - j) as u32)
    }

    pub fn origin(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let r = self.radius as i64;
        x.len() == self.n && x.iter().all(|&c| (-r..=r).contains(&c))
    }

    pub fn index(&self, x: &[i64]) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::OutOfBox(x.to_vec()));
        }
        let side = self.side() as i64;
        let r = self.radius as i64;
        Ok(x.iter().fold(0i64, |acc, &c| acc * side + (c + r)) as usize)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut x = vec![0i64; self.n];
        for c in x.iter_mut().rev() {
            *c = (idx % side) as i64 - self.radius as i64;
            idx /= side;
        }
        x
    }

    /// Coordinate of site `idx` along axis `j`.
    pub fn coord(&self, idx: usize, j: usize) -> i64 {
        ((idx / self.stride(j)) % self.side()) as i64 - self.radius as i64
    }

    /// `max_j |X_j|`.
    pub fn sup_norm(&self, idx: usize) -> usize {
        (0..self.n)
            .map(|j| self.coord(idx, j).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `Σ_j |X_j|`, the graph distance to the origin.
    pub fn l1_norm(&self, idx: usize) -> usize {
        (0..self.n)
            .map(|j| self.coord(idx, j).unsigned_abs() as usize)
            .sum()
    }

    /// `Σ_j X_j²`.
    pub fn norm_sq(&self, idx: usize) -> f64 {
        (0..self.n)
            .map(|j| {
                let c = self.coord(idx, j) as f64;
                c * c
            })
            .sum()
    }

    /// `Σ_j X_j`, whose parity is `(−1)^{Λ·X}`.
    pub fn coord_sum(&self, idx: usize) -> i64 {
        (0..self.n).map(|j| self.coord(idx, j)).sum()
    }

    pub fn on_boundary(&self, idx: usize) -> bool {
        self.sup_norm(idx) == self.radius
    }
}
