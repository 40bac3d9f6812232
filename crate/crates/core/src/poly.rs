//! Dense real polynomials in one variable, coefficients in ascending order.

use nalgebra::DMatrix;

/// Evaluates `sum c[k] x^k` by Horner's rule.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

fn trimmed(c: &[f64]) -> &[f64] {
    let mut end = c.len();
    while end > 0 && c[end - 1] == 0.0 {
        end -= 1;
    }
    &c[..end]
}

/// Degree after dropping exact trailing zeros; `None` for the zero polynomial.
pub fn degree(c: &[f64]) -> Option<usize> {
    let t = trimmed(c);
    if t.is_empty() {
        None
    } else {
        Some(t.len() - 1)
    }
}

/// Real roots of `c`, found as eigenvalues of the companion matrix and
/// polished with Newton steps. Returned sorted and deduplicated.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let c = trimmed(c);
    if c.len() < 2 {
        return Vec::new();
    }
    // Factor out roots at zero so the companion matrix stays well scaled.
    let zeros = c.iter().take_while(|&&x| x == 0.0).count();
    let c_nz = &c[zeros..];
    let mut roots: Vec<f64> = if zeros > 0 { vec![0.0] } else { Vec::new() };
    let d = c_nz.len() - 1;
    if d == 1 {
        roots.push(-c_nz[0] / c_nz[1]);
    } else if d >= 2 {
        let lead = c_nz[d];
        let mut m = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            m[(i, d - 1)] = -c_nz[i] / lead;
        }
        let scale = c_nz.iter().map(|x| x.abs()).fold(0.0, f64::max) / lead.abs();
        for z in m.complex_eigenvalues().iter() {
            let tol = 1e-6 * (1.0 + z.norm()).max(scale.sqrt());
            if z.im.abs() <= tol {
                roots.push(polish(c, z.re));
            }
        }
    }
    roots.retain(|r| r.is_finite() && eval(c, *r).abs() <= residual_tol(c, *r));
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    roots
}

/// Round-off scale of evaluating `c` at `x`.
fn residual_tol(c: &[f64], x: f64) -> f64 {
    let mag = c
        .iter()
        .enumerate()
        .map(|(k, ck)| ck.abs() * x.abs().powi(k as i32))
        .sum::<f64>();
    1e-6 * mag.max(f64::MIN_POSITIVE)
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    let dc = derivative(c);
    for _ in 0..60 {
        let f = eval(c, x);
        let df = eval(&dc, x);
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        // stop once the step no longer improves the residual
        if eval(c, next).abs() >= f.abs() && step.abs() <= 1e-12 * (1.0 + x.abs()) {
            break;
        }
        x = next;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Real roots lying in the closed interval `[lo, hi]`.
pub fn real_roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    real_roots(c)
        .into_iter()
        .filter(|&r| r >= lo && r <= hi)
        .collect()
}

/// Minimum of `c` on `[lo, hi]` (`hi` may be `+inf` when the leading
/// coefficient is positive). Returns `(argmin, min)`.
pub fn min_on(c: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let mut best = (lo, eval(c, lo));
    let mut consider = |x: f64| {
        let v = eval(c, x);
        if v < best.1 {
            best = (x, v);
        }
    };
    if hi.is_finite() {
        consider(hi);
    }
    for r in real_roots_in(&derivative(c), lo, hi) {
        consider(r);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct_sum() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let x = 1.7f64;
        let direct = 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3);
        assert!((eval(&c, x) - direct).abs() < 1e-13);
    }

    #[test]
    fn roots_of_cubic() {
        // (x-1)(x+2)(x-3) = x^3 - 2x^2 - 5x + 6
        let r = real_roots(&[6.0, -5.0, -2.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn complex_pair_is_dropped() {
        // x^2 + 1
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
        // s^3 + s - 1 has exactly one real root
        let r = real_roots(&[-1.0, 1.0, 0.0, 1.0]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.682_327_803_828_019_3).abs() < 1e-14);
    }

    #[test]
    fn root_at_zero() {
        let r = real_roots(&[0.0, 0.0, -1.0, 1.0]);
        assert_eq!(r, vec![0.0, 1.0]);
    }

    #[test]
    fn minimum_on_half_line() {
        // (x-2)^2 - 1
        let (x, v) = min_on(&[3.0, -4.0, 1.0], 0.0, f64::INFINITY);
        assert!((x - 2.0).abs() < 1e-12 && (v + 1.0).abs() < 1e-12);
        // increasing on [0, inf): minimum at the left end
        let (x, v) = min_on(&[1.0, 2.0], 0.0, f64::INFINITY);
        assert_eq!((x, v), (0.0, 1.0));
    }
}
