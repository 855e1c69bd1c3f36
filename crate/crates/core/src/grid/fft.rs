//! Axis-wise FFTs over row-major N-dimensional amplitude arrays.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Transforms `data` (shape `m^n`, axis 0 slowest) along each axis in
/// `axes`. The inverse transform includes the 1/m factor, so forward
/// followed by inverse is the identity.
pub(crate) fn fft_axes(data: &mut [Complex64], m: usize, n: usize, axes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    let mut lane = vec![Complex64::default(); m];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let total = data.len();
    for &axis in axes {
        let stride = m.pow((n - 1 - axis) as u32);
        for base in 0..total {
            // Each lane is visited once, from the element whose index along
            // `axis` is zero.
            if !(base / stride).is_multiple_of(m) {
                continue;
            }
            for (k, slot) in lane.iter_mut().enumerate() {
                *slot = data[base + k * stride];
            }
            fft.process_with_scratch(&mut lane, &mut scratch);
            for (k, v) in lane.iter().enumerate() {
                data[base + k * stride] = if inverse { v / m as f64 } else { *v };
            }
        }
    }
}

/// Signed DFT frequency index in [−m/2, m/2) for FFT output slot `k`.
pub(crate) fn signed_index(k: usize, m: usize) -> i64 {
    if k < m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_is_identity() {
        let (m, n) = (16, 2);
        let orig: Vec<Complex64> = (0..m * m)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        fft_axes(&mut data, m, n, &[0, 1], false);
        fft_axes(&mut data, m, n, &[0, 1], true);
        let err = orig.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn frequency_ordering() {
        let idx: Vec<i64> = (0..8).map(|k| signed_index(k, 8)).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }
}
