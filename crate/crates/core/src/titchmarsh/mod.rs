//! Finitely supported complex measures on the circle `ℝ/2πℤ` and the
//! convolution theorems they satisfy.
//!
//! Angles are either radians or exact rational multiples of `π`. Sums of
//! exact angles stay exact, so identities such as
//! `(f + S_π f) ∗ (g − S_π g) = 0` hold without rounding.

mod theorems;

pub use theorems::{
    check_powers_theorem, check_two_interval_theorem, classify_point_support, ClassifyReport,
    PowersReport, TwoIntervalReport,
};

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two radian angles closer than this are the same point.
pub const ANGLE_TOL: f64 = 1e-12;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    /// `pi · π`, reduced into `[0, 2)`.
    Pi { pi: Rational64 },
    Radians(f64),
}

fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn wrap_two(r: Rational64) -> Rational64 {
    let two = Rational64::from_integer(2);
    r - (r / two).floor() * two
}

impl Angle {
    pub fn radians(x: f64) -> Self {
        Angle::Radians(wrap_tau(x))
    }

    /// `num/den · π`.
    pub fn pi_frac(num: i64, den: i64) -> Self {
        Angle::Pi { pi: wrap_two(Rational64::new(num, den)) }
    }

    pub fn zero() -> Self {
        Self::pi_frac(0, 1)
    }

    pub fn pi() -> Self {
        Self::pi_frac(1, 1)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Pi { .. })
    }

    fn normalized(self) -> Self {
        match self {
            Angle::Pi { pi } => Angle::Pi { pi: wrap_two(pi) },
            Angle::Radians(x) => Self::radians(x),
        }
    }

    /// Radians in `[0, 2π)`.
    pub fn value(&self) -> f64 {
        match self {
            Angle::Pi { pi } => wrap_tau(*pi.numer() as f64 / *pi.denom() as f64 * PI),
            Angle::Radians(x) => wrap_tau(*x),
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Angle::Pi { pi: a }, Angle::Pi { pi: b }) => Angle::Pi { pi: wrap_two(a + b) },
            _ => Self::radians(self.value() + other.value()),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Angle::Pi { pi } => Angle::Pi { pi: wrap_two(-pi) },
            Angle::Radians(x) => Self::radians(-x),
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// Same point of the circle: exact comparison for rational angles,
    /// [`ANGLE_TOL`] otherwise.
    pub fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (Angle::Pi { pi: a }, Angle::Pi { pi: b }) => a == b,
            _ => circular_distance(self.value(), other.value()) <= ANGLE_TOL,
        }
    }

    /// Representative in `(−π/2, π/2)` of the angle modulo `π`.
    pub fn mod_pi(&self) -> Result<f64> {
        match self {
            Angle::Pi { pi } => {
                let r = *pi - pi.floor();
                let half = Rational64::new(1, 2);
                match r.cmp(&half) {
                    Ordering::Equal => Err(Error::OnExcludedPoints(self.value())),
                    Ordering::Greater => Ok((*(r - 1).numer() as f64 / *r.denom() as f64) * PI),
                    Ordering::Less => Ok(*r.numer() as f64 / *r.denom() as f64 * PI),
                }
            }
            Angle::Radians(_) => {
                let r = self.value().rem_euclid(PI);
                if (r - FRAC_PI_2).abs() <= ANGLE_TOL {
                    return Err(Error::OnExcludedPoints(self.value()));
                }
                Ok(if r > FRAC_PI_2 { r - PI } else { r })
            }
        }
    }

    /// Position modulo `π` in `[0, π)`, exact for rational angles.
    pub(crate) fn mod_pi_nonneg(&self) -> f64 {
        match self {
            Angle::Pi { pi } => {
                let r = *pi - pi.floor();
                *r.numer() as f64 / *r.denom() as f64 * PI
            }
            Angle::Radians(_) => {
                let r = self.value().rem_euclid(PI);
                if PI - r <= ANGLE_TOL {
                    0.0
                } else {
                    r
                }
            }
        }
    }
}

pub(crate) fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Sum of `xs` with a single rounding (Shewchuk's partials).
fn exact_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in xs {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let mut hi = match partials.pop() {
        Some(v) => v,
        None => return 0.0,
    };
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: Angle,
    pub weight: Complex64,
}

impl Atom {
    pub fn new(angle: Angle, weight: Complex64) -> Self {
        Atom { angle: angle.normalized(), weight }
    }
}

/// `Σ w_k δ_{θ_k}` in canonical form: angles sorted in `[0, 2π)`, equal
/// angles merged, zero weights dropped.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct CircleMeasure {
    atoms: Vec<Atom>,
}

impl From<Vec<Atom>> for CircleMeasure {
    fn from(atoms: Vec<Atom>) -> Self {
        CircleMeasure::new(atoms)
    }
}

impl From<CircleMeasure> for Vec<Atom> {
    fn from(m: CircleMeasure) -> Self {
        m.atoms
    }
}

impl CircleMeasure {
    pub fn new(atoms: Vec<Atom>) -> Self {
        let mut atoms: Vec<Atom> = atoms.into_iter().map(|a| Atom::new(a.angle, a.weight)).collect();
        atoms.sort_by(|a, b| a.angle.value().total_cmp(&b.angle.value()));
        let mut groups: Vec<(Angle, Vec<Complex64>)> = Vec::new();
        for a in atoms {
            match groups.last_mut() {
                Some((g, ws)) if g.same(&a.angle) => ws.push(a.weight),
                _ => groups.push((a.angle, vec![a.weight])),
            }
        }
        if groups.len() > 1 && groups[0].0.same(&groups[groups.len() - 1].0) {
            let (_, ws) = groups.pop().unwrap();
            groups[0].1.extend(ws);
        }
        let atoms = groups
            .into_iter()
            .map(|(angle, ws)| Atom {
                angle,
                weight: Complex64::new(exact_sum(ws.iter().map(|w| w.re)), exact_sum(ws.iter().map(|w| w.im))),
            })
            .filter(|a| a.weight.re != 0.0 || a.weight.im != 0.0)
            .collect();
        CircleMeasure { atoms }
    }

    pub fn zero() -> Self {
        CircleMeasure::default()
    }

    /// `c · δ_θ`.
    pub fn delta(angle: Angle, c: Complex64) -> Self {
        CircleMeasure::new(vec![Atom::new(angle, c)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Weight at `angle`, zero if there is no atom there.
    pub fn weight_at(&self, angle: &Angle) -> Complex64 {
        self.atoms
            .iter()
            .find(|a| a.angle.same(angle))
            .map_or(Complex64::new(0.0, 0.0), |a| a.weight)
    }

    pub fn add(&self, other: &Self) -> Self {
        CircleMeasure::new(self.atoms.iter().chain(&other.atoms).copied().collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        CircleMeasure::new(self.atoms.iter().map(|a| Atom::new(a.angle, a.weight * c)).collect())
    }

    /// `Σ w_f w_g δ_{a+b}`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                out.push(Atom::new(a.angle.add(b.angle), a.weight * b.weight));
            }
        }
        CircleMeasure::new(out)
    }

    /// `f^{∗p}`; `p = 0` gives `δ₀`.
    pub fn power(&self, p: u32) -> Self {
        let mut acc = CircleMeasure::delta(Angle::zero(), Complex64::new(1.0, 0.0));
        for _ in 0..p {
            acc = acc.convolve(self);
        }
        acc
    }

    /// Pushforward by `θ ↦ θ + y`, so `shift(δ_a, y) = δ_{a+y}`.
    pub fn shift(&self, y: Angle) -> Self {
        CircleMeasure::new(self.atoms.iter().map(|a| Atom::new(a.angle.add(y), a.weight)).collect())
    }

    /// `S_π f`.
    pub fn shift_pi(&self) -> Self {
        self.shift(Angle::pi())
    }

    /// `f^♯`: angles negated, weights conjugated.
    pub fn sharp(&self) -> Self {
        CircleMeasure::new(self.atoms.iter().map(|a| Atom::new(a.angle.neg(), a.weight.conj())).collect())
    }

    /// Same atoms up to [`ANGLE_TOL`] in angle and `tol` in weight.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self.atoms.iter().all(|a| (other.weight_at(&a.angle) - a.weight).norm() <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModPiHull {
    Empty,
    Interval { lo: f64, hi: f64 },
}

impl ModPiHull {
    pub fn length(&self) -> f64 {
        match self {
            ModPiHull::Empty => 0.0,
            ModPiHull::Interval { lo, hi } => hi - lo,
        }
    }
}

/// Smallest `I ⊂ (−π/2, π/2)` with `supp f ⊂ I ∪ (π + I)`.
pub fn supp_mod_pi_hull(f: &CircleMeasure) -> Result<ModPiHull> {
    let mut hull = ModPiHull::Empty;
    for a in f.atoms() {
        let p = a.angle.mod_pi()?;
        hull = match hull {
            ModPiHull::Empty => ModPiHull::Interval { lo: p, hi: p },
            ModPiHull::Interval { lo, hi } => ModPiHull::Interval { lo: lo.min(p), hi: hi.max(p) },
        };
    }
    Ok(hull)
}

/// Shortest arc `[lo, hi]` of `ℝ/πℤ` containing the support modulo `π`,
/// lifted so that `lo ∈ (−π/2, π/2]`. No excluded points.
pub fn min_arc_mod_pi(f: &CircleMeasure) -> Option<(f64, f64)> {
    let mut pos: Vec<f64> = f.atoms().iter().map(|a| a.angle.mod_pi_nonneg()).collect();
    pos.sort_by(f64::total_cmp);
    pos.dedup_by(|a, b| (*a - *b).abs() <= ANGLE_TOL);
    let first = *pos.first()?;
    let last = *pos.last().unwrap();
    // the wrap-around gap is the default choice
    let (mut lo, mut hi, mut gap) = (first, last, first + PI - last);
    for w in pos.windows(2) {
        if w[1] - w[0] > gap + ANGLE_TOL {
            gap = w[1] - w[0];
            lo = w[1];
            hi = w[0] + PI;
        }
    }
    if lo > FRAC_PI_2 {
        lo -= PI;
        hi -= PI;
    }
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn d(angle: Angle, w: f64) -> CircleMeasure {
        CircleMeasure::delta(angle, c(w))
    }

    #[test]
    fn point_masses() {
        let a = Angle::radians(1.0);
        let b = Angle::radians(5.9);
        let ab = d(a, 1.0).convolve(&d(b, 1.0));
        assert_eq!(ab.len(), 1);
        assert!((ab.atoms()[0].angle.value() - (6.9 - TAU)).abs() < 1e-14);
        let f = d(Angle::radians(0.3), 2.0).add(&d(Angle::pi_frac(2, 3), -1.0));
        assert_eq!(d(Angle::zero(), 1.0).convolve(&f), f);
    }

    #[test]
    fn zero_divisor_pair() {
        let f = d(Angle::zero(), 1.0).add(&d(Angle::pi(), 1.0));
        let g = d(Angle::zero(), 1.0).sub(&d(Angle::pi(), 1.0));
        assert!(f.convolve(&g).is_empty());
        let f = d(Angle::radians(0.0), 1.0).add(&d(Angle::radians(PI), 1.0));
        let g = d(Angle::radians(0.0), 1.0).sub(&d(Angle::radians(PI), 1.0));
        assert!(f.convolve(&g).is_empty());
    }

    #[test]
    fn shift_and_sharp() {
        let a = Angle::pi_frac(1, 5);
        let y = Angle::pi_frac(9, 5);
        assert_eq!(d(a, 1.0).shift(y), d(Angle::zero(), 1.0));
        let f = CircleMeasure::delta(a, Complex64::new(1.0, 2.0));
        assert_eq!(f.sharp(), CircleMeasure::delta(Angle::pi_frac(-1, 5), Complex64::new(1.0, -2.0)));
        assert_eq!(f.sharp().sharp(), f);
    }

    #[test]
    fn merging_and_wrap() {
        let m = CircleMeasure::new(vec![
            Atom::new(Angle::radians(TAU - 1e-14), c(1.0)),
            Atom::new(Angle::radians(0.0), c(2.0)),
            Atom::new(Angle::radians(1.0), c(0.5)),
            Atom::new(Angle::radians(1.0 + 1e-13), c(-0.5)),
        ]);
        assert_eq!(m.len(), 1);
        assert_eq!(m.atoms()[0].weight, c(3.0));
    }

    #[test]
    fn cancellation_is_exact() {
        let big = 1e16;
        let m = CircleMeasure::new(vec![
            Atom::new(Angle::zero(), c(big)),
            Atom::new(Angle::zero(), c(1.0)),
            Atom::new(Angle::zero(), c(-big)),
            Atom::new(Angle::zero(), c(-1.0)),
        ]);
        assert!(m.is_empty());
        assert_eq!(exact_sum([0.1, 0.2, -0.3]), 2f64.powi(-55));
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
    }

    #[test]
    fn hull_examples() {
        let f = d(Angle::radians(0.1), 1.0).add(&d(Angle::radians(PI + 0.3), 1.0));
        let h = supp_mod_pi_hull(&f).unwrap();
        match h {
            ModPiHull::Interval { lo, hi } => {
                assert!((lo - 0.1).abs() < 1e-15 && (hi - 0.3).abs() < 1e-14)
            }
            _ => panic!(),
        }
        match supp_mod_pi_hull(&d(Angle::radians(-0.4), 1.0)).unwrap() {
            ModPiHull::Interval { lo, hi } => assert!(lo == hi && (lo + 0.4).abs() < 1e-15),
            _ => panic!(),
        }
        assert_eq!(supp_mod_pi_hull(&CircleMeasure::zero()).unwrap(), ModPiHull::Empty);
        assert!(matches!(
            supp_mod_pi_hull(&d(Angle::pi_frac(3, 2), 1.0)),
            Err(Error::OnExcludedPoints(_))
        ));
        assert!(matches!(
            supp_mod_pi_hull(&d(Angle::radians(FRAC_PI_2 + 1e-13), 1.0)),
            Err(Error::OnExcludedPoints(_))
        ));
    }

    #[test]
    fn min_arc_crosses_the_excluded_points() {
        let f = d(Angle::radians(1.5), 1.0).add(&d(Angle::radians(-1.5), 1.0));
        let (lo, hi) = min_arc_mod_pi(&f).unwrap();
        assert!((lo - 1.5).abs() < 1e-14 && (hi - (PI - 1.5)).abs() < 1e-14);
        let f = d(Angle::radians(0.1), 1.0).add(&d(Angle::radians(PI + 0.3), 1.0));
        let (lo, hi) = min_arc_mod_pi(&f).unwrap();
        assert!((lo - 0.1).abs() < 1e-14 && (hi - 0.3).abs() < 1e-14);
    }

    #[test]
    fn json_roundtrip() {
        let f = CircleMeasure::new(vec![
            Atom::new(Angle::pi_frac(1, 3), Complex64::new(1.0, -1.0)),
            Atom::new(Angle::radians(0.25), c(2.0)),
        ]);
        let s = serde_json::to_string(&f).unwrap();
        let back: CircleMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let parsed: CircleMeasure =
            serde_json::from_str(r#"[{"angle": {"pi": [7, 3]}, "weight": [1, 0]}, {"angle": 0.5, "weight": [0, 0]}]"#)
                .unwrap();
        assert_eq!(parsed, d(Angle::pi_frac(1, 3), 1.0));
    }

    fn exact_measure(max_atoms: usize) -> impl Strategy<Value = CircleMeasure> {
        prop::collection::vec((0i64..72, -3.0f64..3.0, -3.0f64..3.0), 0..=max_atoms).prop_map(|v| {
            CircleMeasure::new(
                v.into_iter()
                    .map(|(k, re, im)| Atom::new(Angle::pi_frac(k, 36), Complex64::new(re, im)))
                    .collect(),
            )
        })
    }

    fn float_measure(max_atoms: usize) -> impl Strategy<Value = CircleMeasure> {
        prop::collection::vec((0.0f64..TAU, -3.0f64..3.0, -3.0f64..3.0), 0..=max_atoms).prop_map(|v| {
            CircleMeasure::new(
                v.into_iter()
                    .map(|(a, re, im)| Atom::new(Angle::radians(a), Complex64::new(re, im)))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn algebra(f in float_measure(8), g in float_measure(8), h in float_measure(8), s in -2.0f64..2.0) {
            prop_assert!(f.convolve(&g).approx_eq(&g.convolve(&f), 1e-12));
            let l = f.convolve(&g).convolve(&h);
            let r = f.convolve(&g.convolve(&h));
            let scale = 1.0 + l.atoms().iter().map(|a| a.weight.norm()).fold(0.0, f64::max);
            prop_assert!(l.approx_eq(&r, 1e-12 * scale * 10.0));
            let lin = f.scale(Complex64::new(s, 0.0)).add(&g).convolve(&h);
            let sep = f.convolve(&h).scale(Complex64::new(s, 0.0)).add(&g.convolve(&h));
            prop_assert!(lin.approx_eq(&sep, 1e-12 * scale * 10.0));
        }

        #[test]
        fn zero_divisors_exact(f in exact_measure(8), g in exact_measure(8)) {
            let lhs = f.add(&f.shift_pi()).convolve(&g.sub(&g.shift_pi()));
            prop_assert!(lhs.is_empty());
        }

        #[test]
        fn zero_divisors_float(f in float_measure(8), g in float_measure(8)) {
            let lhs = f.add(&f.shift_pi()).convolve(&g.sub(&g.shift_pi()));
            prop_assert!(lhs.is_empty());
        }

        #[test]
        fn sharp_is_involution(f in float_measure(8)) {
            prop_assert!(f.sharp().sharp().approx_eq(&f, 0.0));
        }

        #[test]
        fn canonical_form_unique(f in exact_measure(8), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut atoms: Vec<Atom> = f.atoms().to_vec();
            atoms.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(CircleMeasure::new(atoms), f);
        }

        #[test]
        fn line_titchmarsh_on_short_arcs(
            fa in prop::collection::vec((0.0f64..0.7, 0.5f64..2.0), 1..6),
            ga in prop::collection::vec((0.0f64..0.7, 0.5f64..2.0), 1..6),
        ) {
            let mk = |v: &[(f64, f64)]| CircleMeasure::new(v.iter().map(|&(a, w)| Atom::new(Angle::radians(a), c(w))).collect());
            let (f, g) = (mk(&fa), mk(&ga));
            let fg = f.convolve(&g);
            let lo = |m: &CircleMeasure| m.atoms().first().unwrap().angle.value();
            let hi = |m: &CircleMeasure| m.atoms().last().unwrap().angle.value();
            prop_assert!((lo(&fg) - lo(&f) - lo(&g)).abs() < 1e-14);
            prop_assert!((hi(&fg) - hi(&f) - hi(&g)).abs() < 1e-14);
        }
    }
}
