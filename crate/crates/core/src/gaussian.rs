//! Exact engine for N-mode Gaussian states.
//!
//! Phase-space vectors are ordered `R = (q_1, …, q_N, p_1, …, p_N)`, never
//! interleaved. With this ordering the symplectic form is
//! `Ω = [[0, I], [−I, 0]]`, `[R_a, R_b] = iℏΩ_ab`, and the position and
//! momentum covariance blocks are the contiguous top-left and bottom-right
//! N×N blocks of `sigma`.
//!
//! Random states use the ChaCha8 generator (`rand_chacha`) seeded with
//! `seed_from_u64`, so a given `(n, seed, squeeze_max)` yields the same state
//! on every platform.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::moments::MomentTable;

const SYMMETRY_RTOL: f64 = 1e-12;
const VALIDITY_RTOL: f64 = 1e-10;
const PURITY_RTOL: f64 = 1e-9;

/// First and second moments of an N-mode Gaussian state.
///
/// `sigma_ab = ½⟨{R_a, R_b}⟩ − ⟨R_a⟩⟨R_b⟩`. Every constructor checks that
/// `sigma + (iℏ/2)Ω` is positive semi-definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianStateJson", into = "GaussianStateJson")]
pub struct GaussianState {
    n: usize,
    hbar: f64,
    mean: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(hbar: f64, mean: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        Constants::new(hbar)?;
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::invalid(format!("mean vector length must be 2N > 0, got {dim}")));
        }
        if sigma.shape() != (dim, dim) {
            return Err(Error::invalid(format!(
                "sigma must be {dim}x{dim}, got {:?}",
                sigma.shape()
            )));
        }
        if !mean.iter().chain(sigma.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("state contains non-finite values"));
        }
        let scale = sigma.amax();
        for a in 0..dim {
            for b in (a + 1)..dim {
                if (sigma[(a, b)] - sigma[(b, a)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::invalid(format!("sigma is not symmetric at ({a},{b})")));
                }
            }
        }
        let state = Self { n: dim / 2, hbar, mean: DVector::from_vec(mean), sigma };
        let min_eig = state.uncertainty_min_eigenvalue();
        if min_eig < -VALIDITY_RTOL * scale.max(hbar) {
            return Err(Error::invalid(format!(
                "sigma violates the uncertainty principle: min eigenvalue of sigma + (i hbar/2) Omega is {min_eig:e}"
            )));
        }
        Ok(state)
    }

    /// `(ℏ/2) S Sᵀ` for a symplectic `S`: the pure state obtained by applying
    /// `S` to the vacuum.
    fn from_symplectic(hbar: f64, s: &DMatrix<f64>) -> Result<Self> {
        let sigma = s * s.transpose() * (hbar / 2.0);
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        Self::new(hbar, vec![0.0; s.nrows()], sigma)
    }

    /// Product of N single-mode vacua: zero mean, `sigma = (ℏ/2)·I`.
    pub fn product_vacuum(n: usize, constants: &Constants) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("product vacuum needs n >= 1"));
        }
        let hbar = constants.hbar();
        Self::new(hbar, vec![0.0; 2 * n], DMatrix::identity(2 * n, 2 * n) * (hbar / 2.0))
    }

    /// Two-mode squeezed vacuum: ⟨q_i²⟩ = ⟨p_i²⟩ = (ℏ/2)cosh 2r,
    /// ⟨q_1q_2⟩ = (ℏ/2)sinh 2r, ⟨p_1p_2⟩ = −(ℏ/2)sinh 2r.
    ///
    /// Built as a 50:50 rotation of the modes (q_1 ± q_2)/√2 squeezed by
    /// e^{∓2r} in position.
    pub fn two_mode_squeezed(r: f64, constants: &Constants) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::invalid(format!("squeezing must be finite, got {r}")));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let modes = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        Self::from_symplectic(constants.hbar(), &(passive(&modes.transpose()) * squeezer(&[-r, r])))
    }

    /// Permutation-symmetric three-particle state: the collective mode
    /// (q_1+q_2+q_3)/√3 has position variance (ℏ/2)e^{−2r} and momentum
    /// variance (ℏ/2)e^{2r}; the two orthogonal modes stay in vacuum.
    pub fn correlated_triple(r: f64, constants: &Constants) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::invalid(format!("squeezing must be finite, got {r}")));
        }
        let (s3, s2, s6) = (3f64.sqrt().recip(), 2f64.sqrt().recip(), 6f64.sqrt().recip());
        #[rustfmt::skip]
        let modes = DMatrix::from_row_slice(3, 3, &[
            s3, s3, s3,
            s2, -s2, 0.0,
            s6, s6, -2.0 * s6,
        ]);
        let s = passive(&modes.transpose()) * squeezer(&[r, 0.0, 0.0]);
        let state = Self::from_symplectic(constants.hbar(), &s)?;
        Ok(state.symmetrized_over_particles())
    }

    /// Random pure state: squeezings drawn uniformly from
    /// `[−squeeze_max, squeeze_max]`, then a Haar-random passive
    /// (orthogonal-symplectic) transformation. The unitary comes from the QR
    /// decomposition of a complex Ginibre matrix with the phases of `R`'s
    /// diagonal divided out.
    pub fn random(n: usize, seed: u64, squeeze_max: f64, constants: &Constants) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("random state needs n >= 1"));
        }
        if !(squeeze_max.is_finite() && squeeze_max >= 0.0) {
            return Err(Error::invalid(format!("squeeze_max must be finite and >= 0, got {squeeze_max}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ginibre = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let squeezes: Vec<f64> = (0..n).map(|_| rng.gen_range(-squeeze_max..=squeeze_max)).collect();
        let u = haar_unitary(ginibre);
        Self::from_symplectic(constants.hbar(), &(unitary_symplectic(&u) * squeezer(&squeezes)))
    }

    /// Pure state `S·Z·vacuum` with explicit squeezings and passive unitary.
    pub fn from_squeezing_and_unitary(
        squeezes: &[f64],
        unitary: &DMatrix<Complex64>,
        constants: &Constants,
    ) -> Result<Self> {
        let n = squeezes.len();
        if n == 0 || unitary.shape() != (n, n) {
            return Err(Error::invalid("unitary must be NxN with N = number of squeezings"));
        }
        if !squeezes.iter().all(|r| r.is_finite()) {
            return Err(Error::invalid("squeezings must be finite"));
        }
        let defect = (unitary.adjoint() * unitary - DMatrix::<Complex64>::identity(n, n)).norm();
        if defect > 1e-10 {
            return Err(Error::invalid(format!("matrix is not unitary (defect {defect:e})")));
        }
        Self::from_symplectic(constants.hbar(), &(unitary_symplectic(unitary) * squeezer(squeezes)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Adds `d` (length 2N) to the mean vector.
    pub fn displaced(&self, d: &[f64]) -> Result<Self> {
        if d.len() != 2 * self.n {
            return Err(Error::invalid(format!("displacement must have length {}", 2 * self.n)));
        }
        let mean: Vec<f64> = self.mean.iter().zip(d).map(|(m, x)| m + x).collect();
        Self::new(self.hbar, mean, self.sigma.clone())
    }

    /// Smallest eigenvalue of the Hermitian matrix `sigma + (iℏ/2)Ω`,
    /// computed through its real 4N×4N embedding `[[σ, −B], [B, σ]]` with
    /// `B = (ℏ/2)Ω` (every eigenvalue appears twice).
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let dim = 2 * self.n;
        let b = symplectic_form(self.n) * (self.hbar / 2.0);
        let mut m = DMatrix::zeros(2 * dim, 2 * dim);
        m.view_mut((0, 0), (dim, dim)).copy_from(&self.sigma);
        m.view_mut((dim, dim), (dim, dim)).copy_from(&self.sigma);
        m.view_mut((0, dim), (dim, dim)).copy_from(&(-&b));
        m.view_mut((dim, 0), (dim, dim)).copy_from(&b);
        SymmetricEigen::new(m).eigenvalues.min()
    }

    /// Exact moments: C_Q(i,j) and C_P(i,j) are the q-q and p-p blocks of
    /// `sigma` (distinct-particle operators commute).
    pub fn moments(&self) -> Result<MomentTable> {
        let n = self.n;
        MomentTable::new(
            self.mean.rows(0, n).iter().copied().collect(),
            self.mean.rows(n, n).iter().copied().collect(),
            self.sigma.view((0, 0), (n, n)).into_owned(),
            self.sigma.view((n, n), (n, n)).into_owned(),
        )
    }

    /// Position-representation wavefunction of a pure state, for sampling on
    /// a grid.
    pub fn wavefunction(&self) -> Result<GaussianWavefunction> {
        let n = self.n;
        let hbar = self.hbar;
        let sqq = self.sigma.view((0, 0), (n, n)).into_owned();
        let sqp = self.sigma.view((0, n), (n, n)).into_owned();
        let spp = self.sigma.view((n, n), (n, n)).into_owned();
        let sqq_inv = sqq
            .try_inverse()
            .ok_or_else(|| Error::invalid("position covariance is singular"))?;
        let a = &sqq_inv * (hbar / 2.0);
        let b = -(&sqq_inv * &sqp);
        let a = (&a + a.transpose()) * 0.5;
        let b = (&b + b.transpose()) * 0.5;
        let a_inv = a.clone().try_inverse().ok_or_else(|| Error::invalid("singular precision"))?;
        let expected_pp = (&a + &b * a_inv * &b) * (hbar / 2.0);
        let defect = (&expected_pp - &spp).amax();
        if defect > PURITY_RTOL * spp.amax().max(hbar) {
            return Err(Error::invalid(format!(
                "state is not pure (momentum block off by {defect:e}); no wavefunction"
            )));
        }
        Ok(GaussianWavefunction {
            hbar,
            mean_q: self.mean.rows(0, n).into_owned(),
            mean_p: self.mean.rows(n, n).into_owned(),
            a,
            b,
        })
    }

    /// Averages `sigma` over simultaneous permutations of particle labels.
    /// Exact for permutation-symmetric constructions; removes round-off
    /// asymmetry.
    fn symmetrized_over_particles(self) -> Self {
        let n = self.n;
        let perms = permutations(n);
        let mut sigma = DMatrix::zeros(2 * n, 2 * n);
        for perm in &perms {
            let idx = |a: usize| if a < n { perm[a] } else { n + perm[a - n] };
            for a in 0..2 * n {
                for b in 0..2 * n {
                    sigma[(a, b)] += self.sigma[(idx(a), idx(b))];
                }
            }
        }
        sigma /= perms.len() as f64;
        Self { sigma, ..self }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// ψ(x) ∝ exp(−(x−μ_q)ᵀ(A+iB)(x−μ_q)/(2ℏ) + iμ_p·x/ℏ), unnormalized.
#[derive(Debug, Clone)]
pub struct GaussianWavefunction {
    hbar: f64,
    mean_q: DVector<f64>,
    mean_p: DVector<f64>,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl GaussianWavefunction {
    pub fn n(&self) -> usize {
        self.mean_q.len()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let n = self.n();
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..n {
            let di = x[i] - self.mean_q[i];
            im += self.mean_p[i] * x[i];
            for j in 0..n {
                let dj = x[j] - self.mean_q[j];
                re -= 0.5 * self.a[(i, j)] * di * dj;
                im -= 0.5 * self.b[(i, j)] * di * dj;
            }
        }
        Complex64::from_polar((re / self.hbar).exp(), im / self.hbar)
    }
}

/// Standard symplectic form for the (q…, p…) ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

/// `diag(O, O)`: a real orthogonal map acting identically on q and p.
fn passive(o: &DMatrix<f64>) -> DMatrix<f64> {
    let n = o.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(o);
    s.view_mut((n, n), (n, n)).copy_from(o);
    s
}

/// Single-mode squeezers: q_k → e^{−r_k} q_k, p_k → e^{r_k} p_k.
fn squeezer(r: &[f64]) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(2 * n, 2 * n, |a, b| match (a == b, a < n) {
        (true, true) => (-r[a]).exp(),
        (true, false) => r[a - n].exp(),
        _ => 0.0,
    })
}

/// `[[Re U, −Im U], [Im U, Re U]]`, the orthogonal-symplectic image of a
/// passive unitary acting on a = (q + ip)/√(2ℏ).
fn unitary_symplectic(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |a, b| {
        let z = u[(a % n, b % n)];
        match (a < n, b < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

fn haar_unitary(g: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 0..n {
            if !prefix.contains(&k) {
                prefix.push(k);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), n, &mut out);
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianStateJson {
    n: usize,
    hbar: f64,
    mean: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

impl TryFrom<GaussianStateJson> for GaussianState {
    type Error = Error;

    fn try_from(j: GaussianStateJson) -> Result<Self> {
        let dim = 2 * j.n;
        if j.mean.len() != dim || j.sigma.len() != dim || j.sigma.iter().any(|row| row.len() != dim) {
            return Err(Error::Format(format!("state shapes do not match n = {}", j.n)));
        }
        let sigma = DMatrix::from_fn(dim, dim, |a, b| j.sigma[a][b]);
        GaussianState::new(j.hbar, j.mean, sigma)
    }
}

impl From<GaussianState> for GaussianStateJson {
    fn from(s: GaussianState) -> Self {
        let dim = 2 * s.n;
        Self {
            n: s.n,
            hbar: s.hbar,
            mean: s.mean.iter().copied().collect(),
            sigma: (0..dim).map(|a| (0..dim).map(|b| s.sigma[(a, b)]).collect()).collect(),
        }
    }
}
