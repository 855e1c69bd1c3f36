//! The built-in verification battery.

use gurlab::grid::{wavefunctions, GridSpec, GridState};
use gurlab::inequalities::{evaluate_suite, GAUSSIAN_TOL, GRID_TOL};
use gurlab::{Engine, Family, GaussianState, InequalityReport, MomentTable, RelationOutcome, SuiteConfig};

use crate::config::RunConfig;

pub const RANDOM_SEEDS: u64 = 1000;
pub const TWO_MODE_AGREEMENT: f64 = 1e-6;
pub const TRIPLE_AGREEMENT: f64 = 1e-4;
pub const PERMUTATION_RESIDUAL: f64 = 1e-8;
pub const CONTROL_RESIDUAL: f64 = 0.1;

/// Where moments come from. Verification takes this as a parameter so a
/// deliberately broken engine can be substituted in tests.
pub trait Engines {
    fn gaussian_moments(&self, s: &GaussianState) -> gurlab::Result<MomentTable> {
        s.moments()
    }

    fn grid_moments(&self, s: &GridState, hbar: f64) -> gurlab::Result<MomentTable> {
        s.moments(hbar)
    }
}

/// The library engines, unmodified.
pub struct Reference;

impl Engines for Reference {}

/// A pass/fail check that is not itself an inequality (cross-engine
/// agreement, permutation residuals).
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub limit: f64,
    /// `value ≤ limit` when true, `value > limit` otherwise.
    pub upper: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, limit, upper: true }
    }

    fn above(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, limit, upper: false }
    }

    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.limit
        } else {
            self.value > self.limit
        }
    }

    pub fn line(&self) -> String {
        let op = if self.upper { "<=" } else { ">" };
        format!(
            "{} {}: {:.3e} (required {op} {:.3e})",
            if self.passed() { "ok  " } else { "FAIL" },
            self.label,
            self.value,
            self.limit
        )
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<InequalityReport>,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn extend(&mut self, outcomes: Vec<RelationOutcome>) {
        self.reports.extend(outcomes.into_iter().filter_map(|o| match o {
            RelationOutcome::Evaluated(r) => Some(r),
            RelationOutcome::NotApplicable { .. } => None,
        }));
    }

    pub fn first_failure(&self) -> Option<String> {
        if let Some(r) = self.reports.iter().find(|r| !r.holds) {
            return Some(format!(
                "{} on {} (slack {:e}, lhs {:e}, rhs {:e})",
                r.key(),
                r.state_descriptor,
                r.slack,
                r.lhs,
                r.rhs
            ));
        }
        self.checks.iter().find(|c| !c.passed()).map(|c| c.line())
    }
}

/// Largest entrywise difference in units of the state's natural scale:
/// means relative to √ℏ, covariances relative to ℏ.
fn scaled_diff(a: &MomentTable, b: &MomentTable, hbar: f64) -> f64 {
    let root = hbar.sqrt();
    let means = a.mean_q().iter().zip(b.mean_q()).chain(a.mean_p().iter().zip(b.mean_p()));
    let covs = a.cov_q().iter().zip(b.cov_q().iter()).chain(a.cov_p().iter().zip(b.cov_p().iter()));
    let dm = means.map(|(x, y)| (x - y).abs() / root).fold(0.0, f64::max);
    let dc = covs.map(|(x, y)| (x - y).abs() / hbar).fold(0.0, f64::max);
    dm.max(dc)
}

pub const DEFAULT_TMS_GRID: [f64; 9] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];
pub const DEFAULT_TRIPLE_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const GRID_TMS_POINTS: [f64; 3] = [0.0, 0.5, 1.0];
const GRID_TRIPLE_R: f64 = 0.3;

/// Runs the battery. Engine errors propagate; relation failures are
/// recorded in the outcome.
pub fn run(cfg: &RunConfig, engines: &dyn Engines) -> gurlab::Result<Outcome> {
    let mut out = Outcome::default();
    let hbar = cfg.hbar();
    let c = &cfg.constants;

    if cfg.engine.gaussian() {
        let suite = SuiteConfig::new(hbar, cfg.tol.unwrap_or(GAUSSIAN_TOL), Engine::Gaussian)?;
        for n in 1..=3 {
            let m = engines.gaussian_moments(&GaussianState::product_vacuum(n, c)?)?;
            out.extend(evaluate_suite(&m, None, &suite, &format!("product_vacuum n={n}"))?);
        }
        let tms_grid = cfg.r_grid.clone().unwrap_or_else(|| DEFAULT_TMS_GRID.to_vec());
        let triple_grid = cfg.r_grid.clone().unwrap_or_else(|| DEFAULT_TRIPLE_GRID.to_vec());
        for (family, grid) in [(Family::TwoModeSqueezed, tms_grid), (Family::CorrelatedTriple, triple_grid)] {
            for r in grid {
                let m = engines.gaussian_moments(&family.gaussian_state(&[r], c)?)?;
                out.extend(evaluate_suite(&m, None, &suite, &family.descriptor(&[r]))?);
            }
        }
        for n in [2, 3] {
            for seed in cfg.seed..cfg.seed + RANDOM_SEEDS {
                let s = GaussianState::random(n, seed, cfg.squeeze_max, c)?;
                let m = engines.gaussian_moments(&s)?;
                out.extend(evaluate_suite(&m, None, &suite, &format!("random_gaussian n={n} seed={seed}"))?);
            }
        }
    }

    if cfg.engine.grid() {
        let suite = SuiteConfig::new(hbar, cfg.tol.unwrap_or(GRID_TOL), Engine::Grid)?;
        let scale = hbar.sqrt();

        for r in GRID_TMS_POINTS {
            let spec = GridSpec::new(2, 256, -12.0 * scale, 12.0 * scale)?;
            let gs = GridState::from_function(spec, wavefunctions::two_mode_squeezed(r, hbar))?;
            let mg = engines.grid_moments(&gs, hbar)?;
            let ma = engines.gaussian_moments(&GaussianState::two_mode_squeezed(r, c)?)?;
            out.checks.push(Check::at_most(
                format!("grid vs gaussian moments, two_mode_squeezed r={r}, max scaled diff"),
                scaled_diff(&mg, &ma, hbar),
                cfg.tol.unwrap_or(TWO_MODE_AGREEMENT),
            ));
            out.extend(evaluate_suite(&mg, Some(&gs), &suite, &format!("grid_two_mode_squeezed r={r}"))?);
        }

        let spec = GridSpec::new(2, 128, -10.0 * scale, 10.0 * scale)?;
        let gs = GridState::from_function(spec, wavefunctions::correlated_gaussian(1.0, 0.5, hbar))?;
        let mg = engines.grid_moments(&gs, hbar)?;
        out.extend(evaluate_suite(&mg, Some(&gs), &suite, "grid_correlated_gaussian a=1 b=0.5")?);
        let perm = gs.permutation_commutation_check(hbar)?;
        out.checks.push(Check::at_most(
            "swap residual of collective Q and P, correlated_gaussian b=0.5",
            perm.max_collective(),
            cfg.tol.unwrap_or(PERMUTATION_RESIDUAL),
        ));
        out.checks.push(Check::above(
            "swap residual of single-particle Q1 (control), correlated_gaussian b=0.5",
            perm.residual("Q1"),
            CONTROL_RESIDUAL,
        ));

        let spec = GridSpec::new(1, 256, -10.0 * scale, 10.0 * scale)?;
        let gs = GridState::from_function(spec, wavefunctions::vacuum(hbar))?;
        let mg = engines.grid_moments(&gs, hbar)?;
        out.extend(evaluate_suite(&mg, Some(&gs), &suite, "grid_vacuum n=1")?);

        let triple = GaussianState::correlated_triple(GRID_TRIPLE_R, c)?;
        let wf = triple.wavefunction()?;
        let spec = GridSpec::new(3, 64, -8.0 * scale, 8.0 * scale)?;
        let gs = GridState::from_function(spec, |x| wf.eval(x))?;
        let mg = engines.grid_moments(&gs, hbar)?;
        let ma = engines.gaussian_moments(&triple)?;
        out.checks.push(Check::at_most(
            format!("grid vs gaussian moments, correlated_triple r={GRID_TRIPLE_R}, max scaled diff"),
            scaled_diff(&mg, &ma, hbar),
            cfg.tol.unwrap_or(TRIPLE_AGREEMENT),
        ));
        out.extend(evaluate_suite(&mg, Some(&gs), &suite, &format!("grid_correlated_triple r={GRID_TRIPLE_R}"))?);
    }

    out.reports.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(out)
}
