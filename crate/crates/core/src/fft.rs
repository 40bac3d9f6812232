//! Multidimensional FFTs on cubic grids, applied axis by axis.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place unnormalized transform of a row-major `side^n` array.
/// `Forward` uses `e^{−i2πkp/N}`, `Inverse` uses `e^{+i2πkp/N}`.
pub fn fft_nd(data: &mut [Complex64], side: usize, n: usize, dir: FftDirection) {
    debug_assert_eq!(data.len(), side.pow(n as u32));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(side, dir);
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = side.pow((n - 1 - axis) as u32);
        if stride == 1 {
            for chunk in data.chunks_mut(side) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * side;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
}

/// Angular frequency `2πk/N` of index `k`, folded into `(−π, π]`.
pub fn dual_angle(k: usize, side: usize) -> f64 {
    let k = if 2 * k > side { k as f64 - side as f64 } else { k as f64 };
    2.0 * std::f64::consts::PI * k / side as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft_2d() {
        let side = 5;
        let data: Vec<Complex64> = (0..25)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut out = data.clone();
        fft_nd(&mut out, side, 2, FftDirection::Forward);
        for k0 in 0..side {
            for k1 in 0..side {
                let mut acc = Complex64::new(0.0, 0.0);
                for p0 in 0..side {
                    for p1 in 0..side {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * p0 + k1 * p1) as f64) / side as f64;
                        acc += data[p0 * side + p1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - out[k0 * side + k1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn roundtrip_3d() {
        let side = 4;
        let data: Vec<Complex64> = (0..64).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let mut out = data.clone();
        fft_nd(&mut out, side, 3, FftDirection::Forward);
        fft_nd(&mut out, side, 3, FftDirection::Inverse);
        for (a, b) in out.iter().zip(&data) {
            assert!((a / 64.0 - b).norm() < 1e-12);
        }
    }
}
