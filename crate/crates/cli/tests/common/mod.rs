#![allow(dead_code)]

use gurlab::grid::GridState;
use gurlab::{GaussianState, MomentTable};
use gurlab_cli::battery::Engines;

/// Which engine a [`Mutant`] corrupts.
#[derive(Clone, Copy, Debug)]
pub enum Target {
    Gaussian,
    Grid,
}

/// Engine wrapper that flips the sign of the C_Q(1,2) covariance write:
/// both mirrored entries when `symmetric`, only the upper one otherwise.
pub struct Mutant {
    pub target: Target,
    pub symmetric: bool,
}

impl Mutant {
    fn corrupt(&self, m: MomentTable) -> gurlab::Result<MomentTable> {
        if m.n() < 2 {
            return Ok(m);
        }
        let mut cq = m.cov_q().clone();
        cq[(0, 1)] = -cq[(0, 1)];
        if self.symmetric {
            cq[(1, 0)] = -cq[(1, 0)];
        }
        MomentTable::new(m.mean_q().to_vec(), m.mean_p().to_vec(), cq, m.cov_p().clone())
    }
}

impl Engines for Mutant {
    fn gaussian_moments(&self, s: &GaussianState) -> gurlab::Result<MomentTable> {
        let m = s.moments()?;
        match self.target {
            Target::Gaussian => self.corrupt(m),
            Target::Grid => Ok(m),
        }
    }

    fn grid_moments(&self, s: &GridState, hbar: f64) -> gurlab::Result<MomentTable> {
        let m = s.moments(hbar)?;
        match self.target {
            Target::Grid => self.corrupt(m),
            Target::Gaussian => Ok(m),
        }
    }
}

pub fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = gurlab_cli::run(std::iter::once("gurlab").chain(args.iter().copied()), &mut out, &mut err);
    (code, out, String::from_utf8(err).unwrap())
}

pub fn run_mutant(args: &[&str], mutant: &Mutant) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code =
        gurlab_cli::run_with(std::iter::once("gurlab").chain(args.iter().copied()), mutant, &mut out, &mut err);
    (code, String::from_utf8(err).unwrap())
}

pub fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gurlab-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
