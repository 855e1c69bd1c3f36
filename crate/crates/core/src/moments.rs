//! Moment bookkeeping shared by both engines.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_RTOL: f64 = 1e-12;
const PSD_RTOL: f64 = 1e-10;

/// First moments ⟨Q_i⟩, ⟨P_i⟩ and quantum covariance functions
/// C_Q(i,j) = ⟨Q_iQ_j⟩ − ⟨Q_i⟩⟨Q_j⟩, C_P(i,j) likewise, for N particles.
///
/// Every inequality evaluation reads from this table and nothing else.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    n: usize,
    mean_q: Vec<f64>,
    mean_p: Vec<f64>,
    cov_q: DMatrix<f64>,
    cov_p: DMatrix<f64>,
}

impl MomentTable {
    /// Builds a table, checking shape, symmetry, non-negative diagonals and
    /// positive semi-definiteness of both covariance blocks.
    pub fn new(
        mean_q: Vec<f64>,
        mean_p: Vec<f64>,
        cov_q: DMatrix<f64>,
        cov_p: DMatrix<f64>,
    ) -> Result<Self> {
        let n = mean_q.len();
        if n == 0 {
            return Err(Error::invalid("moment table needs at least one particle"));
        }
        if mean_p.len() != n || cov_q.shape() != (n, n) || cov_p.shape() != (n, n) {
            return Err(Error::invalid(format!(
                "inconsistent moment shapes: mean_q {}, mean_p {}, cov_q {:?}, cov_p {:?}",
                n,
                mean_p.len(),
                cov_q.shape(),
                cov_p.shape()
            )));
        }
        let all_finite = mean_q.iter().chain(&mean_p).all(|v| v.is_finite())
            && cov_q.iter().chain(cov_p.iter()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("moment table contains non-finite values"));
        }
        check_covariance("cov_q", &cov_q)?;
        check_covariance("cov_p", &cov_p)?;
        Ok(Self { n, mean_q, mean_p, cov_q, cov_p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean_q(&self) -> &[f64] {
        &self.mean_q
    }

    pub fn mean_p(&self) -> &[f64] {
        &self.mean_p
    }

    pub fn cov_q(&self) -> &DMatrix<f64> {
        &self.cov_q
    }

    pub fn cov_p(&self) -> &DMatrix<f64> {
        &self.cov_p
    }

    /// (ΔQ_i)², zero-based particle index.
    pub fn var_q(&self, i: usize) -> f64 {
        self.cov_q[(i, i)]
    }

    pub fn var_p(&self, i: usize) -> f64 {
        self.cov_p[(i, i)]
    }

    /// Σ_i (ΔQ_i)².
    pub fn sum_var_q(&self) -> f64 {
        self.cov_q.diagonal().sum()
    }

    pub fn sum_var_p(&self) -> f64 {
        self.cov_p.diagonal().sum()
    }

    /// Σ_{i≠j} C_Q(i,j) over ordered pairs.
    pub fn offdiag_sum_q(&self) -> f64 {
        offdiag_sum(&self.cov_q)
    }

    pub fn offdiag_sum_p(&self) -> f64 {
        offdiag_sum(&self.cov_p)
    }

    /// Canonical rescaling q → λq, p → p/λ.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("scale factor must be > 0, got {lambda}")));
        }
        Self::new(
            self.mean_q.iter().map(|v| v * lambda).collect(),
            self.mean_p.iter().map(|v| v / lambda).collect(),
            &self.cov_q * (lambda * lambda),
            &self.cov_p / (lambda * lambda),
        )
    }

    /// True when all single-particle dispersions agree within `rtol`
    /// (relative), separately for Q and for P.
    pub fn has_symmetric_dispersions(&self, rtol: f64) -> bool {
        self.asymmetric_pair(rtol).is_none()
    }

    /// First particle pair (and quadrature) whose dispersions differ by more
    /// than `rtol`.
    pub fn asymmetric_pair(&self, rtol: f64) -> Option<(char, usize, usize)> {
        for (label, cov) in [('Q', &self.cov_q), ('P', &self.cov_p)] {
            for j in 1..self.n {
                let (a, b) = (cov[(0, 0)], cov[(j, j)]);
                if (a - b).abs() > rtol * a.abs().max(b.abs()) {
                    return Some((label, 1, j + 1));
                }
            }
        }
        None
    }
}

/// Collective dispersions (ΔQ)² and (ΔP)² for Q = ΣQ_i, P = ΣP_i: the full
/// double sums of the covariance matrices.
pub fn collective_dispersions(m: &MomentTable) -> (f64, f64) {
    (m.cov_q.sum(), m.cov_p.sum())
}

fn offdiag_sum(c: &DMatrix<f64>) -> f64 {
    c.sum() - c.diagonal().sum()
}

fn check_covariance(label: &str, c: &DMatrix<f64>) -> Result<()> {
    let scale = c.amax();
    let n = c.nrows();
    for i in 0..n {
        if c[(i, i)] < 0.0 {
            return Err(Error::Invariant(format!(
                "{label}[{i},{i}] = {} is a negative variance",
                c[(i, i)]
            )));
        }
        for j in (i + 1)..n {
            if (c[(i, j)] - c[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                return Err(Error::Invariant(format!(
                    "{label} is not symmetric at ({i},{j}): {} vs {}",
                    c[(i, j)],
                    c[(j, i)]
                )));
            }
        }
    }
    let min_eig = min_eigenvalue(c);
    let trace = c.trace();
    if min_eig < -PSD_RTOL * trace {
        return Err(Error::Invariant(format!(
            "{label} is not positive semi-definite (min eigenvalue {min_eig:e}, trace {trace:e})"
        )));
    }
    Ok(())
}

pub(crate) fn min_eigenvalue(c: &DMatrix<f64>) -> f64 {
    let sym = (c + c.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// Serializable snapshot of a [`MomentTable`] for sweep exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub n: usize,
    pub mean_q: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub cov_q: Vec<Vec<f64>>,
    pub cov_p: Vec<Vec<f64>>,
}

impl From<&MomentTable> for MomentRecord {
    fn from(m: &MomentTable) -> Self {
        let rows = |c: &DMatrix<f64>| {
            (0..m.n).map(|i| (0..m.n).map(|j| c[(i, j)]).collect()).collect()
        };
        Self {
            n: m.n,
            mean_q: m.mean_q.clone(),
            mean_p: m.mean_p.clone(),
            cov_q: rows(&m.cov_q),
            cov_p: rows(&m.cov_p),
        }
    }
}
