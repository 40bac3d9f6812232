//! Polynomial potentials `W(λ) = Σ C_q λ^{q+1}` and their divided differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolynomialPotential {
    coeffs: Vec<f64>,
}

impl PolynomialPotential {
    /// Builds a potential from `C₀..C_p`. Any finite coefficients are
    /// accepted; use [`Self::confining`] when `C_p > 0, p ≥ 1` is required.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "potential coefficients must be finite".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// Like [`Self::new`] but rejects potentials that are not confining.
    pub fn confining(coeffs: Vec<f64>) -> Result<Self> {
        let w = Self::new(coeffs)?;
        w.check_confining()?;
        Ok(w)
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index `p` of the last nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        poly::degree(&self.coeffs)
    }

    pub fn is_confining(&self) -> bool {
        matches!(self.order(), Some(p) if p >= 1 && self.coeffs[p] > 0.0)
    }

    pub fn check_confining(&self) -> Result<()> {
        if self.is_confining() {
            Ok(())
        } else {
            let lead = self.order().map_or(0.0, |p| self.coeffs[p]);
            Err(Error::NonConfining(lead))
        }
    }

    /// True when `W` is at most linear in `λ`, so that `B` is constant.
    pub fn is_linear(&self) -> bool {
        self.order().map_or(true, |p| p == 0)
    }

    /// `a·λ + s·W(λ)`: the potential felt by one lattice site.
    pub fn site(&self, a: f64, s: f64) -> Self {
        let mut c: Vec<f64> = self.coeffs.iter().map(|x| s * x).collect();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] += a;
        Self { coeffs: c }
    }

    pub fn eval(&self, lam: f64) -> f64 {
        lam * poly::eval(&self.coeffs, lam)
    }

    pub fn deriv(&self, lam: f64) -> f64 {
        let mut acc = 0.0;
        for (q, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * lam + (q + 1) as f64 * c;
        }
        acc
    }

    pub fn second_deriv(&self, lam: f64) -> f64 {
        let mut acc = 0.0;
        for (q, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * lam + ((q + 1) * q) as f64 * c;
        }
        acc
    }

    /// Coefficients of `W'` in ascending powers of `λ`.
    pub fn deriv_poly(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(q, c)| (q + 1) as f64 * c)
            .collect()
    }

    /// `B(λ,μ) = Σ C_q Σ_k λ^{q−k} μ^k`, built from `b_q = λ b_{q−1} + μ^q`.
    pub fn divided_difference(&self, lam: f64, mu: f64) -> f64 {
        self.dd_with_grad(lam, mu).0
    }

    /// `(B, ∂_λ B)` at `(λ, μ)`.
    pub fn dd_with_grad(&self, lam: f64, mu: f64) -> (f64, f64) {
        let (mut b, mut db, mut mu_q) = (1.0, 0.0, 1.0);
        let (mut sum, mut dsum) = (0.0, 0.0);
        for (q, c) in self.coeffs.iter().enumerate() {
            if q > 0 {
                mu_q *= mu;
                db = b + lam * db;
                b = lam * b + mu_q;
            }
            sum += c * b;
            dsum += c * db;
        }
        (sum, dsum)
    }

    /// `min_{λ≥0} W(λ)`; `None` when `W` is unbounded below on `[0,∞)`.
    pub fn inf(&self) -> Option<f64> {
        let c = self.poly_in_lambda();
        match poly::degree(&c) {
            None => Some(0.0),
            Some(d) if c[d] < 0.0 => None,
            Some(_) => Some(poly::min_on(&c, 0.0, f64::INFINITY).1),
        }
    }

    /// `min_{λ≥0} W'(λ)`; `None` when unbounded below.
    pub fn inf_deriv(&self) -> Option<f64> {
        let c = self.deriv_poly();
        match poly::degree(&c) {
            None => Some(0.0),
            Some(0) => Some(c[0]),
            Some(d) if c[d] < 0.0 => None,
            Some(_) => Some(poly::min_on(&c, 0.0, f64::INFINITY).1),
        }
    }

    /// `max(0, −min_{λ≥0} W(λ)/λ)`, the worst negative slope of `W`
    /// relative to the origin. `None` when unbounded.
    pub fn kappa(&self) -> Option<f64> {
        let c = &self.coeffs;
        let m = match poly::degree(c) {
            None => 0.0,
            Some(0) => c[0],
            Some(d) if c[d] < 0.0 => return None,
            Some(_) => poly::min_on(c, 0.0, f64::INFINITY).1,
        };
        Some((-m).max(0.0))
    }

    /// `W` as ascending coefficients in `λ` (constant term zero).
    pub fn poly_in_lambda(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.coeffs);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(c: &[f64]) -> PolynomialPotential {
        PolynomialPotential::new(c.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(w(&[1.0]).eval(0.0), 0.0);
        assert_eq!(w(&[0.0, 1.0]).eval(2.0), 4.0);
        assert_eq!(w(&[-1.0, 1.0]).eval(1.0), 0.0);
    }

    #[test]
    fn deriv_examples() {
        assert_eq!(w(&[1.0]).deriv(7.3), 1.0);
        assert_eq!(w(&[0.0, 1.0]).deriv(3.0), 6.0);
        assert_eq!(w(&[-2.0, 0.0, 1.0]).deriv(1.0), 1.0);
        assert_eq!(w(&[-2.0, 0.0, 1.0]).second_deriv(2.0), 12.0);
    }

    #[test]
    fn divided_difference_examples() {
        assert_eq!(w(&[0.0, 1.0]).divided_difference(1.0, 1.0), 2.0);
        assert_eq!(w(&[0.0, 1.0]).divided_difference(1.0, 3.0), 4.0);
        assert_eq!(w(&[5.0]).divided_difference(0.3, 9.0), 5.0);
    }

    #[test]
    fn gradient_of_divided_difference() {
        let p = w(&[0.3, -1.0, 0.5, 2.0]);
        let (l, m, h) = (0.7, 1.3, 1e-6);
        let fd = (p.divided_difference(l + h, m) - p.divided_difference(l - h, m)) / (2.0 * h);
        assert!((p.dd_with_grad(l, m).1 - fd).abs() < 1e-7);
    }

    #[test]
    fn confinement() {
        assert!(w(&[-1.0, 1.0]).is_confining());
        assert!(!w(&[1.0]).is_confining());
        assert!(!w(&[1.0, -1.0]).is_confining());
        assert!(!w(&[1.0, 1.0, 0.0]).site(0.0, -1.0).is_confining());
        assert!(matches!(
            PolynomialPotential::confining(vec![1.0, -2.0]),
            Err(Error::NonConfining(_))
        ));
    }

    #[test]
    fn infima() {
        // -λ + λ² has minimum -1/4 at λ = 1/2
        assert!((w(&[-1.0, 1.0]).inf().unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(w(&[1.0, 1.0]).inf(), Some(0.0));
        assert_eq!(w(&[-1.0, 1.0]).inf_deriv(), Some(-1.0));
        // W/λ = -2 + 0.5λ + λ², minimum at λ=0
        assert_eq!(w(&[-2.0, 0.5, 1.0]).kappa(), Some(2.0));
        assert_eq!(w(&[1.0, -1.0]).inf(), None);
    }

    #[test]
    fn site_potential_adds_mass() {
        let v = w(&[-1.0, 1.0]).site(0.5, 0.5);
        assert_eq!(v.coeffs(), &[0.0, 0.5]);
        assert_eq!(PolynomialPotential::zero().site(2.0, 1.0).coeffs(), &[2.0]);
    }

    proptest! {
        #[test]
        fn diagonal_is_derivative(
            c in prop::collection::vec(-3.0f64..3.0, 1..6),
            lam in 0.0f64..10.0,
        ) {
            let p = w(&c);
            let b = p.divided_difference(lam, lam);
            let d = p.deriv(lam);
            let scale: f64 = c.iter().enumerate()
                .map(|(q, x)| (q + 1) as f64 * x.abs() * lam.powi(q as i32)).sum();
            prop_assert!((b - d).abs() <= 1e-13 * scale.max(1.0));
        }

        #[test]
        fn divided_difference_symmetric(
            c in prop::collection::vec(-3.0f64..3.0, 1..6),
            lam in 0.0f64..5.0,
            mu in 0.0f64..5.0,
        ) {
            let p = w(&c);
            let (a, b) = (p.divided_difference(lam, mu), p.divided_difference(mu, lam));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn divided_difference_matches_quotient(
            c in prop::collection::vec(-3.0f64..3.0, 1..6),
            lam in 0.0f64..3.0,
            gap in 0.1f64..2.0,
        ) {
            let p = w(&c);
            let mu = lam + gap;
            let q = (p.eval(lam) - p.eval(mu)) / (lam - mu);
            prop_assert!((p.divided_difference(lam, mu) - q).abs() <= 1e-9 * q.abs().max(1.0));
        }

        #[test]
        fn monomial_inequality(p in 1usize..6, theta in 0.0f64..std::f64::consts::FRAC_PI_2) {
            let mut c = vec![0.0; p + 1];
            c[p] = 1.0;
            let w = w(&c);
            let (lam, mu) = (theta.cos(), theta.sin());
            let (b, db) = w.dd_with_grad(lam, mu);
            let r = (lam * mu).sqrt();
            prop_assert!(b + 2.0 * db * (lam + r) > 0.0);
            prop_assert!(b + 2.0 * db * (lam - r) > 0.0);
        }

        #[test]
        fn low_order_b_dominates(q in 1usize..5, lam in 0.0f64..10.0, mu in 0.0f64..10.0) {
            let mut c = vec![0.0; q + 1];
            c[q] = 1.0;
            let (b, db) = w(&c).dd_with_grad(lam, mu);
            prop_assert!(b >= db * mu / 2.0 - 1e-12 * b.abs());
        }
    }
}
