use std::ops::{Add, Mul};

use num_complex::Complex64;

use super::fft::{fft_axes, signed_index};
use super::GridSpec;

/// Linear combination Σ_i (α_i Q_i + β_i P_i) of extended single-particle
/// observables. Q_i acts by multiplication, P_i spectrally as ℏk_i.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl GridOperator {
    pub fn zero(n: usize) -> Self {
        Self { q: vec![0.0; n], p: vec![0.0; n] }
    }

    /// Q_i for zero-based particle `i`.
    pub fn position(n: usize, i: usize) -> Self {
        let mut op = Self::zero(n);
        op.q[i] = 1.0;
        op
    }

    pub fn momentum(n: usize, i: usize) -> Self {
        let mut op = Self::zero(n);
        op.p[i] = 1.0;
        op
    }

    /// Q = Q_1 + … + Q_N.
    pub fn collective_position(n: usize) -> Self {
        Self { q: vec![1.0; n], p: vec![0.0; n] }
    }

    /// P = P_1 + … + P_N.
    pub fn collective_momentum(n: usize) -> Self {
        Self { q: vec![0.0; n], p: vec![1.0; n] }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// [A, B] for two such operators is the c-number iℏ Σ_i (α_i β'_i − β_i α'_i).
    pub fn canonical_commutator(&self, other: &Self, hbar: f64) -> Complex64 {
        let c: f64 = (0..self.n())
            .map(|i| self.q[i] * other.p[i] - self.p[i] * other.q[i])
            .sum();
        Complex64::new(0.0, hbar * c)
    }

    /// Applies the operator to an arbitrary amplitude vector on `spec`.
    pub fn clone_apply(&self, amps: &[Complex64], spec: &GridSpec, hbar: f64) -> Vec<Complex64> {
        self.apply(amps, spec, hbar)
    }

    pub(crate) fn apply(&self, amps: &[Complex64], spec: &GridSpec, hbar: f64) -> Vec<Complex64> {
        let n = spec.n_particles();
        let m = spec.points_per_axis();
        let mut out = vec![Complex64::default(); amps.len()];
        if self.q.iter().any(|&c| c != 0.0) {
            let xs = spec.coordinates();
            for (idx, (o, a)) in out.iter_mut().zip(amps).enumerate() {
                let mut factor = 0.0;
                for axis in 0..n {
                    let c = self.q[axis];
                    if c != 0.0 {
                        factor += c * xs[spec.axis_index(idx, axis)];
                    }
                }
                *o = a * factor;
            }
        }
        if self.p.iter().any(|&c| c != 0.0) {
            let axes: Vec<usize> = (0..n).filter(|&i| self.p[i] != 0.0).collect();
            let mut spectral = amps.to_vec();
            fft_axes(&mut spectral, m, n, &axes, false);
            let dp = spec.momentum_step(hbar);
            for (idx, v) in spectral.iter_mut().enumerate() {
                let mut factor = 0.0;
                for &axis in &axes {
                    factor += self.p[axis] * dp * signed_index(spec.axis_index(idx, axis), m) as f64;
                }
                *v *= factor;
            }
            fft_axes(&mut spectral, m, n, &axes, true);
            for (o, s) in out.iter_mut().zip(spectral) {
                *o += s;
            }
        }
        out
    }
}

impl Add for GridOperator {
    type Output = GridOperator;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.n(), rhs.n(), "operators act on different particle counts");
        Self {
            q: self.q.iter().zip(&rhs.q).map(|(a, b)| a + b).collect(),
            p: self.p.iter().zip(&rhs.p).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Mul<GridOperator> for f64 {
    type Output = GridOperator;

    fn mul(self, op: GridOperator) -> GridOperator {
        GridOperator {
            q: op.q.iter().map(|c| self * c).collect(),
            p: op.p.iter().map(|c| self * c).collect(),
        }
    }
}
