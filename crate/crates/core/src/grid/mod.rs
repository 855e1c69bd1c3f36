//! Discretized N-particle (N ≤ 3) wavefunction engine.
//!
//! Amplitudes live on a uniform grid of `M` cell midpoints per axis,
//! `x_j = x_min + (j + ½)Δx` with `Δx = (x_max − x_min)/M`, stored row-major
//! with particle 1 on the slowest axis. Momenta come from the DFT with the
//! angular convention `p = ℏ·2πm/(M·Δx)`, `m ∈ [−M/2, M/2)`.

mod fft;
mod io;
mod operator;
pub mod wavefunctions;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::permutations;
use crate::moments::MomentTable;

pub use io::{HEADER_LEN, MAGIC, VERSION};
pub use operator::GridOperator;

use fft::{fft_axes, signed_index};

/// Default cap on the number of complex amplitudes (2²⁴).
pub const DEFAULT_MEMORY_CAP: usize = 1 << 24;

const NORM_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
const BOUNDARY_RATIO: f64 = 1e-6;
const DEGENERATE_NORM: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_particles: usize,
    points_per_axis: usize,
    x_min: f64,
    x_max: f64,
}

impl GridSpec {
    pub fn new(n_particles: usize, points_per_axis: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::with_memory_cap(n_particles, points_per_axis, x_min, x_max, DEFAULT_MEMORY_CAP)
    }

    pub fn with_memory_cap(
        n_particles: usize,
        points_per_axis: usize,
        x_min: f64,
        x_max: f64,
        cap: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&n_particles) {
            return Err(Error::invalid(format!("grid supports 1 to 3 particles, got {n_particles}")));
        }
        if points_per_axis < 16 || !points_per_axis.is_power_of_two() {
            return Err(Error::invalid(format!(
                "points per axis must be a power of two >= 16, got {points_per_axis}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::invalid(format!("bad grid extent [{x_min}, {x_max}]")));
        }
        let total = (points_per_axis as u128).pow(n_particles as u32);
        if total > cap as u128 {
            return Err(Error::invalid(format!(
                "{points_per_axis}^{n_particles} amplitudes exceed the memory cap of {cap}"
            )));
        }
        Ok(Self { n_particles, points_per_axis, x_min, x_max })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.points_per_axis as f64
    }

    /// Quadrature weight Δx^N of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.n_particles as i32)
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.n_particles as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell-midpoint coordinates along one axis.
    pub fn coordinates(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.points_per_axis).map(|j| self.x_min + (j as f64 + 0.5) * dx).collect()
    }

    /// Momentum spacing ℏ·2π/(M·Δx).
    pub fn momentum_step(&self, hbar: f64) -> f64 {
        hbar * 2.0 * std::f64::consts::PI / (self.points_per_axis as f64 * self.dx())
    }

    /// Momenta in FFT output order.
    pub fn momenta(&self, hbar: f64) -> Vec<f64> {
        let dp = self.momentum_step(hbar);
        (0..self.points_per_axis)
            .map(|k| dp * signed_index(k, self.points_per_axis) as f64)
            .collect()
    }

    pub(crate) fn axis_index(&self, flat: usize, axis: usize) -> usize {
        let stride = self.points_per_axis.pow((self.n_particles - 1 - axis) as u32);
        (flat / stride) % self.points_per_axis
    }

    fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.n_particles).rev() {
            out[axis] = flat % self.points_per_axis;
            flat /= self.points_per_axis;
        }
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    None,
    Bosonic,
    Fermionic,
}

impl Symmetry {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Symmetry::None => 0,
            Symmetry::Bosonic => 1,
            Symmetry::Fermionic => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Symmetry::None),
            1 => Ok(Symmetry::Bosonic),
            2 => Ok(Symmetry::Fermionic),
            t => Err(Error::Format(format!("unknown symmetry tag {t}"))),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Symmetry::None => "unsymmetrized",
            Symmetry::Bosonic => "bosonic",
            Symmetry::Fermionic => "fermionic",
        }
    }
}

/// Normalized N-particle wavefunction sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    spec: GridSpec,
    amps: Vec<Complex64>,
    symmetry: Symmetry,
}

/// ‖(OT − TO)ψ‖ / ‖Oψ‖ for one transposition and observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationResidual {
    /// Zero-based particle pair being swapped.
    pub transposition: (usize, usize),
    /// `"Q"`, `"P"` for the collective sums, `"Q1"` for the control.
    pub observable: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationReport {
    pub residuals: Vec<PermutationResidual>,
}

impl PermutationReport {
    /// Largest residual among the collective (physical) observables.
    pub fn max_collective(&self) -> f64 {
        self.residuals
            .iter()
            .filter(|r| r.observable != "Q1")
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, observable: &str) -> f64 {
        self.residuals
            .iter()
            .filter(|r| r.observable == observable)
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }
}

impl GridState {
    /// Samples `psi` at the cell midpoints and normalizes.
    pub fn from_function<F>(spec: GridSpec, psi: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let xs = spec.coordinates();
        let mut idx = vec![0; spec.n_particles];
        let mut point = vec![0.0; spec.n_particles];
        let mut amps = Vec::with_capacity(spec.len());
        for flat in 0..spec.len() {
            spec.unflatten(flat, &mut idx);
            for (p, &i) in point.iter_mut().zip(&idx) {
                *p = xs[i];
            }
            let v = psi(&point);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::invalid(format!("wavefunction is not finite at {point:?}")));
            }
            amps.push(v);
        }
        let norm2 = squared_norm(&amps) * spec.cell_volume();
        if !(norm2.is_normal() && norm2 > 0.0) {
            return Err(Error::invalid("wavefunction sample has zero norm (normalization underflow)"));
        }
        let scale = norm2.sqrt().recip();
        for a in &mut amps {
            *a *= scale;
        }
        check_boundary_decay(&spec, &amps)?;
        Ok(Self { spec, amps, symmetry: Symmetry::None })
    }

    /// Wraps raw amplitudes, validating normalization, boundary decay and
    /// the exchange symmetry implied by `symmetry`.
    pub fn from_parts(spec: GridSpec, amps: Vec<Complex64>, symmetry: Symmetry) -> Result<Self> {
        if amps.len() != spec.len() {
            return Err(Error::invalid(format!(
                "expected {} amplitudes, got {}",
                spec.len(),
                amps.len()
            )));
        }
        if !amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::invalid("amplitudes contain non-finite values"));
        }
        let norm2 = squared_norm(&amps) * spec.cell_volume();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state is not normalized (norm² = {norm2})")));
        }
        check_boundary_decay(&spec, &amps)?;
        let state = Self { spec, amps, symmetry };
        if symmetry != Symmetry::None {
            let sign = if symmetry == Symmetry::Fermionic { -1.0 } else { 1.0 };
            for (i, j) in transpositions(spec.n_particles) {
                let swapped = state.transposed(i, j);
                let dev: f64 = state
                    .amps
                    .iter()
                    .zip(&swapped)
                    .map(|(a, b)| (a - b * sign).norm_sqr())
                    .sum::<f64>()
                    * spec.cell_volume();
                if dev.sqrt() > SYMMETRY_TOL {
                    return Err(Error::invalid(format!(
                        "amplitudes are not {} under swapping particles {} and {}",
                        symmetry.label(),
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(state)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Multiplies by exp(i·p₀·x_particle/ℏ), shifting ⟨P_particle⟩ by p₀.
    pub fn boosted(&self, particle: usize, p0: f64, hbar: f64) -> Result<Self> {
        if particle >= self.spec.n_particles {
            return Err(Error::invalid(format!("no particle {particle}")));
        }
        let xs = self.spec.coordinates();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(flat, a)| {
                let x = xs[self.spec.axis_index(flat, particle)];
                a * Complex64::from_polar(1.0, p0 * x / hbar)
            })
            .collect();
        // Boosting breaks exchange symmetry in general.
        Self::from_parts(self.spec, amps, Symmetry::None)
    }

    /// Projects onto the bosonic or fermionic subspace and renormalizes.
    pub fn symmetrize(&self, kind: Symmetry) -> Result<Self> {
        let n = self.spec.n_particles;
        let sign_flip = match kind {
            Symmetry::Bosonic => false,
            Symmetry::Fermionic => true,
            Symmetry::None => return Err(Error::invalid("symmetrize needs bosonic or fermionic")),
        };
        let perms = permutations(n);
        let mut out = vec![Complex64::default(); self.amps.len()];
        for perm in &perms {
            let sign = if sign_flip && parity_is_odd(perm) { -1.0 } else { 1.0 };
            let permuted = self.permuted(perm);
            for (o, p) in out.iter_mut().zip(&permuted) {
                *o += p * sign;
            }
        }
        let inv = (perms.len() as f64).recip();
        for o in &mut out {
            *o *= inv;
        }
        let norm2 = squared_norm(&out) * self.spec.cell_volume();
        if norm2.sqrt() < DEGENERATE_NORM {
            return Err(Error::DegenerateProjection(kind.label()));
        }
        let scale = norm2.sqrt().recip();
        for o in &mut out {
            *o *= scale;
        }
        check_boundary_decay(&self.spec, &out)?;
        Ok(Self { spec: self.spec, amps: out, symmetry: kind })
    }

    /// (T_π ψ)(x_1, …, x_N) = ψ(x_π(1), …, x_π(N)).
    fn permuted(&self, perm: &[usize]) -> Vec<Complex64> {
        let n = self.spec.n_particles;
        let mut idx = vec![0; n];
        let mut src = vec![0; n];
        (0..self.amps.len())
            .map(|flat| {
                self.spec.unflatten(flat, &mut idx);
                for k in 0..n {
                    src[k] = idx[perm[k]];
                }
                self.amps[self.spec.flatten(&src)]
            })
            .collect()
    }

    fn transposed(&self, i: usize, j: usize) -> Vec<Complex64> {
        transpose_amps(&self.spec, &self.amps, i, j)
    }

    /// Applies a linear grid operator to the state.
    pub fn apply(&self, op: &GridOperator, hbar: f64) -> Result<Vec<Complex64>> {
        if op.n() != self.spec.n_particles {
            return Err(Error::invalid(format!(
                "operator acts on {} particles, state has {}",
                op.n(),
                self.spec.n_particles
            )));
        }
        Ok(op.apply(&self.amps, &self.spec, hbar))
    }

    /// ⟨a|b⟩ with the grid quadrature weight.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * self.spec.cell_volume()
    }

    /// Rejects vectors with non-negligible support on the outermost layer.
    pub fn check_envelope(&self, v: &[Complex64]) -> Result<()> {
        check_boundary_decay(&self.spec, v)
    }

    /// Position moments by midpoint quadrature; momentum moments from the
    /// joint momentum density |FFT ψ|² over all axes.
    ///
    /// Transforming the axes not involved in a given ⟨P_iP_j⟩ leaves that
    /// moment unchanged (discrete Parseval), so one N-dimensional transform
    /// serves every entry.
    pub fn moments(&self, hbar: f64) -> Result<MomentTable> {
        check_boundary_decay(&self.spec, &self.amps)?;
        let xs = self.spec.coordinates();
        let (mean_q, cov_q) = weighted_moments(&self.spec, &self.amps, &xs);
        let mut spectral = self.amps.clone();
        let axes: Vec<usize> = (0..self.spec.n_particles).collect();
        fft_axes(&mut spectral, self.spec.points_per_axis, self.spec.n_particles, &axes, false);
        let ps = self.spec.momenta(hbar);
        let (mean_p, cov_p) = weighted_moments(&self.spec, &spectral, &ps);
        MomentTable::new(mean_q, mean_p, cov_q, cov_p)
    }

    /// Variance of Q = ΣQ_i or P = ΣP_i, from applying the collective
    /// operator to the amplitudes: ‖Oψ‖² − ⟨ψ|Oψ⟩².
    pub fn collective_operator_variance(&self, which: Quadrature, hbar: f64) -> Result<f64> {
        check_boundary_decay(&self.spec, &self.amps)?;
        let n = self.spec.n_particles;
        let op = match which {
            Quadrature::Q => GridOperator::collective_position(n),
            Quadrature::P => GridOperator::collective_momentum(n),
        };
        let o_psi = self.apply(&op, hbar)?;
        let mean = self.inner(&self.amps, &o_psi).re;
        let second = squared_norm(&o_psi) * self.spec.cell_volume();
        Ok(second - mean * mean)
    }

    /// Residuals ‖(OT − TO)ψ‖/‖Oψ‖ for every transposition T and
    /// O ∈ {ΣQ_i, ΣP_i}, plus the non-physical control O = Q_1.
    pub fn permutation_commutation_check(&self, hbar: f64) -> Result<PermutationReport> {
        let n = self.spec.n_particles;
        if n < 2 {
            return Err(Error::invalid("permutation check needs at least two particles"));
        }
        let observables = [
            ("Q", GridOperator::collective_position(n)),
            ("P", GridOperator::collective_momentum(n)),
            ("Q1", GridOperator::position(n, 0)),
        ];
        let mut residuals = Vec::new();
        for (i, j) in transpositions(n) {
            let t_psi = self.transposed(i, j);
            for (label, op) in &observables {
                let o_psi = op.apply(&self.amps, &self.spec, hbar);
                let o_t_psi = op.apply(&t_psi, &self.spec, hbar);
                let t_o_psi = transpose_amps(&self.spec, &o_psi, i, j);
                let diff: f64 = o_t_psi.iter().zip(&t_o_psi).map(|(a, b)| (a - b).norm_sqr()).sum();
                let base = squared_norm(&o_psi);
                let residual = if base > 0.0 { (diff / base).sqrt() } else { diff.sqrt() };
                residuals.push(PermutationResidual { transposition: (i, j), observable: label, residual });
            }
        }
        Ok(PermutationReport { residuals })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    Q,
    P,
}

fn squared_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn transpositions(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

fn parity_is_odd(perm: &[usize]) -> bool {
    let mut inversions = 0;
    for a in 0..perm.len() {
        for b in (a + 1)..perm.len() {
            if perm[a] > perm[b] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

fn transpose_amps(spec: &GridSpec, amps: &[Complex64], i: usize, j: usize) -> Vec<Complex64> {
    let mut idx = vec![0; spec.n_particles];
    (0..amps.len())
        .map(|flat| {
            spec.unflatten(flat, &mut idx);
            idx.swap(i, j);
            amps[spec.flatten(&idx)]
        })
        .collect()
}

/// Means and central second moments of the axis coordinates `values`
/// under the density |amps|², normalized by its own sum.
fn weighted_moments(
    spec: &GridSpec,
    amps: &[Complex64],
    values: &[f64],
) -> (Vec<f64>, nalgebra::DMatrix<f64>) {
    let n = spec.n_particles;
    let mut idx = vec![0; n];
    let mut total = 0.0;
    let mut mean = vec![0.0; n];
    for (flat, a) in amps.iter().enumerate() {
        let w = a.norm_sqr();
        total += w;
        spec.unflatten(flat, &mut idx);
        for k in 0..n {
            mean[k] += w * values[idx[k]];
        }
    }
    for m in &mut mean {
        *m /= total;
    }
    let mut cov = nalgebra::DMatrix::zeros(n, n);
    let mut d = vec![0.0; n];
    for (flat, a) in amps.iter().enumerate() {
        let w = a.norm_sqr();
        spec.unflatten(flat, &mut idx);
        for k in 0..n {
            d[k] = values[idx[k]] - mean[k];
        }
        for r in 0..n {
            for c in r..n {
                cov[(r, c)] += w * d[r] * d[c];
            }
        }
    }
    for r in 0..n {
        for c in r..n {
            cov[(r, c)] /= total;
            cov[(c, r)] = cov[(r, c)];
        }
    }
    (mean, cov)
}

fn check_boundary_decay(spec: &GridSpec, amps: &[Complex64]) -> Result<()> {
    let m = spec.points_per_axis;
    let mut idx = vec![0; spec.n_particles];
    let mut peak = 0.0f64;
    let mut edge = 0.0f64;
    for (flat, a) in amps.iter().enumerate() {
        let mag = a.norm();
        peak = peak.max(mag);
        spec.unflatten(flat, &mut idx);
        if idx.iter().any(|&i| i == 0 || i == m - 1) {
            edge = edge.max(mag);
        }
    }
    if peak == 0.0 {
        return Ok(());
    }
    let ratio = edge / peak;
    if ratio > BOUNDARY_RATIO {
        return Err(Error::BoundaryDecay { x_min: spec.x_min, x_max: spec.x_max, ratio, limit: BOUNDARY_RATIO });
    }
    Ok(())
}

#[cfg(test)]
mod tests;
