//! Two consecutive time levels of a complex field on a box.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::BoxDomain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub domain: BoxDomain,
    /// `ψ^t`
    pub psi_prev: Vec<Complex64>,
    /// `ψ^{t+1}`
    pub psi_curr: Vec<Complex64>,
    pub t: i64,
}

impl FieldState {
    pub fn new(
        domain: BoxDomain,
        psi_prev: Vec<Complex64>,
        psi_curr: Vec<Complex64>,
        t: i64,
    ) -> Result<Self> {
        let len = domain.len();
        if psi_prev.len() != len || psi_curr.len() != len {
            return Err(Error::InvalidParameter(format!(
                "field arrays must have length {len}"
            )));
        }
        let s = Self {
            domain,
            psi_prev,
            psi_curr,
            t,
        };
        if !s.is_finite() {
            return Err(Error::InvalidParameter("field entries must be finite".into()));
        }
        Ok(s)
    }

    pub fn zeros(domain: BoxDomain) -> Self {
        let len = domain.len();
        Self {
            domain,
            psi_prev: vec![Complex64::new(0.0, 0.0); len],
            psi_curr: vec![Complex64::new(0.0, 0.0); len],
            t: 0,
        }
    }

    /// Builds both levels from a function of `(X, t)`.
    pub fn from_fn(domain: BoxDomain, t: i64, f: impl Fn(&[i64], i64) -> Complex64) -> Self {
        let mut s = Self::zeros(domain);
        s.t = t;
        for i in 0..domain.len() {
            let x = domain.coords(i);
            s.psi_prev[i] = f(&x, t);
            s.psi_curr[i] = f(&x, t + 1);
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.psi_prev
            .iter()
            .chain(&self.psi_curr)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Multiplies both levels by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        s.psi_prev.iter_mut().for_each(|z| *z *= c);
        s.psi_curr.iter_mut().for_each(|z| *z *= c);
        s
    }

    /// The reversed pair `(ψ^{t+1}, ψ^t)`, for stepping backwards in time.
    pub fn time_reversed(&self) -> Self {
        Self {
            domain: self.domain,
            psi_prev: self.psi_curr.clone(),
            psi_curr: self.psi_prev.clone(),
            t: -(self.t + 1),
        }
    }

    /// Zeroes the outermost ring of both levels.
    pub fn clear_boundary(&mut self) {
        for i in 0..self.domain.len() {
            if self.domain.on_boundary(i) {
                self.psi_prev[i] = Complex64::new(0.0, 0.0);
                self.psi_curr[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Re-embeds the field into a box of a different radius, padding with
    /// zeros or cropping.
    pub fn resized(&self, radius: usize) -> Result<Self> {
        let dom = BoxDomain::new(radius, self.domain.n)?;
        let mut s = Self::zeros(dom);
        s.t = self.t;
        for i in 0..self.domain.len() {
            let x = self.domain.coords(i);
            if let Ok(j) = dom.index(&x) {
                s.psi_prev[j] = self.psi_prev[i];
                s.psi_curr[j] = self.psi_curr[i];
            }
        }
        Ok(s)
    }
}
