//! Closed-form wavefunctions used as grid test states. All are unnormalized;
//! [`GridState::from_function`](super::GridState::from_function) normalizes.

use num_complex::Complex64;

/// Product of single-mode vacua, exp(−Σx_i²/(2ℏ)).
pub fn vacuum(hbar: f64) -> impl Fn(&[f64]) -> Complex64 {
    move |x: &[f64]| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * hbar)).exp(), 0.0)
}

/// Two-mode squeezed vacuum with x± = (x_1 ± x_2)/√2:
/// exp(−e^{−2r}x₊²/(2ℏ) − e^{2r}x₋²/(2ℏ)).
pub fn two_mode_squeezed(r: f64, hbar: f64) -> impl Fn(&[f64]) -> Complex64 {
    let (shrink, grow) = ((-2.0 * r).exp(), (2.0 * r).exp());
    move |x: &[f64]| {
        let plus = (x[0] + x[1]) * std::f64::consts::FRAC_1_SQRT_2;
        let minus = (x[0] - x[1]) * std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new((-(shrink * plus * plus + grow * minus * minus) / (2.0 * hbar)).exp(), 0.0)
    }
}

/// exp(−[a(x_1² + x_2²)/2 + b·x_1x_2]/ℏ); normalizable for |b| < a.
pub fn correlated_gaussian(a: f64, b: f64, hbar: f64) -> impl Fn(&[f64]) -> Complex64 {
    move |x: &[f64]| {
        let e = a * (x[0] * x[0] + x[1] * x[1]) / 2.0 + b * x[0] * x[1];
        Complex64::new((-e / hbar).exp(), 0.0)
    }
}
