//! Minimization of uncertainty products over parameterized state families,
//! and full-suite sweeps over explicit parameter grids.

mod export;
mod simplex;

pub use export::{write_sweep_csv, SWEEP_FIXED_COLUMNS};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::grid::{wavefunctions, GridSpec, GridState};
use crate::inequalities::{evaluate_suite, SuiteConfig};
use crate::moments::{collective_dispersions, MomentRecord, MomentTable};
use crate::report::{Engine, RelationOutcome};

/// Relative per-coordinate simplex diameter at which a descent stops.
const XTOL: f64 = 1e-10;
/// An objective is reported flat when its finite trace values span less
/// than this fraction of the bound.
pub const FLAT_RTOL: f64 = 1e-9;
pub const MIN_BUDGET: usize = 10;
const MAX_STARTS: usize = 8;

const DEFAULT_GRID_POINTS: usize = 128;
const DEFAULT_GRID_EXTENT: f64 = 10.0;

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_grid_extent() -> f64 {
    DEFAULT_GRID_EXTENT
}

/// A parameterized state family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// Two-mode squeezed vacuum; parameter `r`.
    TwoModeSqueezed,
    /// Permutation-symmetric three-particle state; parameter `r`.
    CorrelatedTriple,
    /// Squeezed vacua followed by a passive mixer. Parameters are the
    /// squeezings then the mixing angles: `[r1, r2, theta, phi]` for two
    /// particles (complex beam splitter), `[r1, r2, r3, theta12, theta13,
    /// theta23]` for three (real rotations).
    RandomGaussian { n: usize, squeeze_max: f64 },
    /// Grid wavefunction ∝ exp(−[a(x₁²+x₂²)/2 + b·x₁x₂]/ℏ); parameters
    /// `[a, b]`. `extent` is the half-width of the box in units of √ℏ.
    GridCorrelatedGaussian {
        #[serde(default = "default_grid_points")]
        points: usize,
        #[serde(default = "default_grid_extent")]
        extent: f64,
    },
}

impl Family {
    pub fn grid_correlated_gaussian() -> Self {
        Family::GridCorrelatedGaussian { points: DEFAULT_GRID_POINTS, extent: DEFAULT_GRID_EXTENT }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::TwoModeSqueezed => "two_mode_squeezed",
            Family::CorrelatedTriple => "correlated_triple",
            Family::RandomGaussian { .. } => "random_gaussian",
            Family::GridCorrelatedGaussian { .. } => "grid_correlated_gaussian",
        }
    }

    pub fn n_particles(&self) -> usize {
        match self {
            Family::TwoModeSqueezed | Family::GridCorrelatedGaussian { .. } => 2,
            Family::CorrelatedTriple => 3,
            Family::RandomGaussian { n, .. } => *n,
        }
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        match self {
            Family::TwoModeSqueezed | Family::CorrelatedTriple => vec!["r"],
            Family::RandomGaussian { n: 2, .. } => vec!["r1", "r2", "theta", "phi"],
            Family::RandomGaussian { .. } => vec!["r1", "r2", "r3", "theta12", "theta13", "theta23"],
            Family::GridCorrelatedGaussian { .. } => vec!["a", "b"],
        }
    }

    /// True when every single-particle dispersion is equal by construction.
    pub fn is_permutation_symmetric(&self) -> bool {
        !matches!(self, Family::RandomGaussian { .. })
    }

    pub fn engine(&self) -> Engine {
        match self {
            Family::GridCorrelatedGaussian { .. } => Engine::Grid,
            _ => Engine::Gaussian,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::RandomGaussian { n, squeeze_max } => {
                if !(2..=3).contains(n) {
                    return Err(Error::invalid(format!("random_gaussian supports n = 2 or 3, got {n}")));
                }
                if !(squeeze_max.is_finite() && *squeeze_max >= 0.0) {
                    return Err(Error::invalid(format!("squeeze_max must be finite and >= 0, got {squeeze_max}")));
                }
            }
            Family::GridCorrelatedGaussian { points, extent } => {
                if !(extent.is_finite() && *extent > 0.0) {
                    return Err(Error::invalid(format!("grid extent must be > 0, got {extent}")));
                }
                GridSpec::new(2, *points, -extent, *extent)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Default search box.
    pub fn default_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Family::TwoModeSqueezed | Family::CorrelatedTriple => vec![(-2.0, 2.0)],
            Family::RandomGaussian { n: 2, squeeze_max } => {
                vec![(-squeeze_max, *squeeze_max), (-squeeze_max, *squeeze_max), (0.0, PI), (0.0, 2.0 * PI)]
            }
            Family::RandomGaussian { squeeze_max, .. } => {
                let mut b = vec![(-squeeze_max, *squeeze_max); 3];
                b.extend([(0.0, PI); 3]);
                b
            }
            Family::GridCorrelatedGaussian { .. } => vec![(0.5, 2.0), (-1.0, 1.0)],
        }
    }

    /// Checks a parameter vector against the family's physical domain.
    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        let names = self.param_names();
        if params.len() != names.len() {
            return Err(Error::invalid(format!(
                "{} takes {} parameters ({}), got {}",
                self.name(),
                names.len(),
                names.join(", "),
                params.len()
            )));
        }
        if !params.iter().all(|p| p.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        if let Family::GridCorrelatedGaussian { .. } = self {
            let (a, b) = (params[0], params[1]);
            if a <= b.abs() {
                return Err(Error::invalid(format!("correlated Gaussian needs a > |b|, got a={a}, b={b}")));
            }
        }
        Ok(())
    }

    pub fn descriptor(&self, params: &[f64]) -> String {
        let body: Vec<String> =
            self.param_names().iter().zip(params).map(|(k, v)| format!("{k}={v}")).collect();
        format!("{} {}", self.name(), body.join(" "))
    }

    /// Builds the Gaussian state for `params`; errors for grid families.
    pub fn gaussian_state(&self, params: &[f64], c: &Constants) -> Result<GaussianState> {
        self.check_params(params)?;
        match self {
            Family::TwoModeSqueezed => GaussianState::two_mode_squeezed(params[0], c),
            Family::CorrelatedTriple => GaussianState::correlated_triple(params[0], c),
            Family::RandomGaussian { n, .. } => {
                let u = mixer(*n, &params[*n..]);
                GaussianState::from_squeezing_and_unitary(&params[..*n], &u, c)
            }
            Family::GridCorrelatedGaussian { .. } => {
                Err(Error::invalid("grid_correlated_gaussian has no Gaussian-engine state"))
            }
        }
    }

    /// Samples the grid state for `params`; errors for Gaussian families.
    pub fn grid_state(&self, params: &[f64], hbar: f64) -> Result<GridState> {
        self.check_params(params)?;
        match self {
            Family::GridCorrelatedGaussian { points, extent } => {
                let half = extent * hbar.sqrt();
                let spec = GridSpec::new(2, *points, -half, half)?;
                GridState::from_function(spec, wavefunctions::correlated_gaussian(params[0], params[1], hbar))
            }
            _ => Err(Error::invalid(format!("{} is not a grid family", self.name()))),
        }
    }

    /// Moments of the state at `params`, plus the grid state when the family
    /// lives on a grid.
    pub fn evaluate(&self, params: &[f64], hbar: f64) -> Result<(MomentTable, Option<GridState>)> {
        match self {
            Family::GridCorrelatedGaussian { .. } => {
                let s = self.grid_state(params, hbar)?;
                Ok((s.moments(hbar)?, Some(s)))
            }
            _ => Ok((self.gaussian_state(params, &Constants::new(hbar)?)?.moments()?, None)),
        }
    }
}

/// Passive mixer for the random family: a complex beam splitter for two
/// particles, a product of three plane rotations for three.
fn mixer(n: usize, angles: &[f64]) -> DMatrix<Complex64> {
    if n == 2 {
        let (theta, phi) = (angles[0], angles[1]);
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        return DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(c, 0.0), -e.conj() * s, e * s, Complex64::new(c, 0.0)],
        );
    }
    let mut u = DMatrix::<f64>::identity(n, n);
    for (&(i, j), &t) in [(0, 1), (0, 2), (1, 2)].iter().zip(angles) {
        let mut g = DMatrix::<f64>::identity(n, n);
        let (s, c) = t.sin_cos();
        g[(i, i)] = c;
        g[(j, j)] = c;
        g[(i, j)] = -s;
        g[(j, i)] = s;
        u = g * u;
    }
    u.map(|x| Complex64::new(x, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// (ΔQ)²(ΔP)² of the collective pair.
    CollectiveProduct,
    /// (Σ(ΔQ_i)²)(Σ(ΔP_i)²) for two particles.
    SumProductTwo,
    /// (Σ(ΔQ_i)²)(Σ(ΔP_i)²) for three particles.
    SumProductThree,
    /// ΔQ₁ΔP₁ on a family with equal dispersions.
    IndividualProduct,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::CollectiveProduct,
        Objective::SumProductTwo,
        Objective::SumProductThree,
        Objective::IndividualProduct,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::CollectiveProduct => "collective_product",
            Objective::SumProductTwo => "sum_product_two",
            Objective::SumProductThree => "sum_product_three",
            Objective::IndividualProduct => "individual_product",
        }
    }

    /// Lower bound on the objective for `n` particles.
    pub fn bound(&self, n: usize, hbar: f64) -> f64 {
        let n = n as f64;
        match self {
            Objective::CollectiveProduct => n * n * hbar * hbar / 4.0,
            Objective::SumProductTwo => hbar * hbar / 4.0,
            Objective::SumProductThree => 9.0 * hbar * hbar / 64.0,
            Objective::IndividualProduct => hbar / 2f64.powf(n),
        }
    }

    /// The value the objective would be bounded by if every particle obeyed
    /// ΔQ_iΔP_i ≥ ℏ/2 on its own.
    pub fn hur_reference(&self, n: usize, hbar: f64) -> f64 {
        let n = n as f64;
        match self {
            Objective::IndividualProduct => hbar / 2.0,
            _ => n * n * hbar * hbar / 4.0,
        }
    }

    pub fn value(&self, m: &MomentTable) -> f64 {
        match self {
            Objective::CollectiveProduct => {
                let (q, p) = collective_dispersions(m);
                q * p
            }
            Objective::SumProductTwo | Objective::SumProductThree => m.sum_var_q() * m.sum_var_p(),
            Objective::IndividualProduct => (m.var_q(0) * m.var_p(0)).sqrt(),
        }
    }

    fn check_family(&self, family: &Family) -> Result<()> {
        let n = family.n_particles();
        let ok = match self {
            Objective::CollectiveProduct => true,
            Objective::SumProductTwo => n == 2,
            Objective::SumProductThree => n == 3,
            Objective::IndividualProduct => family.is_permutation_symmetric(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "objective {} is not defined on family {} ({n} particles)",
                self.as_str(),
                family.name()
            )))
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown objective '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchProblem {
    pub family: Family,
    pub objective: Objective,
    pub bounds: Vec<(f64, f64)>,
    pub hbar: f64,
    pub tol: f64,
}

impl SearchProblem {
    /// Problem over the family's default box, with the engine's default
    /// tolerance.
    pub fn new(family: Family, objective: Objective, hbar: f64) -> Result<Self> {
        let bounds = family.default_bounds();
        let tol = match family.engine() {
            Engine::Gaussian => SuiteConfig::gaussian(hbar).tol,
            Engine::Grid => SuiteConfig::grid(hbar).tol,
        };
        let p = Self { family, objective, bounds, hbar, tol };
        p.validate()?;
        Ok(p)
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        self.bounds = bounds;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.objective.check_family(&self.family)?;
        SuiteConfig::new(self.hbar, self.tol, self.family.engine())?;
        let dim = self.family.param_names().len();
        if self.bounds.len() != dim {
            return Err(Error::invalid(format!(
                "{} needs a {dim}-dimensional box, got {}",
                self.family.name(),
                self.bounds.len()
            )));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("invalid box interval [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn bound(&self) -> f64 {
        self.objective.bound(self.family.n_particles(), self.hbar)
    }

    pub fn hur_reference(&self) -> f64 {
        self.objective.hur_reference(self.family.n_particles(), self.hbar)
    }

    /// Objective at `params`. Engine rejections surface as errors.
    pub fn objective_at(&self, params: &[f64]) -> Result<f64> {
        let (m, _) = self.family.evaluate(params, self.hbar)?;
        let v = self.objective.value(&m);
        if v.is_nan() {
            return Err(Error::Invariant("objective evaluated to NaN".into()));
        }
        Ok(v)
    }
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub params: Vec<f64>,
    /// `+inf` (serialized as `null`) where the engine rejected the point.
    #[serde(with = "inf_as_null")]
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub problem: SearchProblem,
    pub seed: u64,
    pub budget: usize,
    pub best_params: Vec<f64>,
    #[serde(with = "inf_as_null")]
    pub best_value: f64,
    pub bound: f64,
    pub hur_reference: f64,
    pub evaluations: usize,
    /// Finite trace values span less than `FLAT_RTOL · bound`.
    pub flat: bool,
    /// `best_value` is finite and `≥ bound − tol`.
    pub holds: bool,
    pub trace: Vec<TraceEntry>,
}

impl SearchResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Running minimum of the trace values.
    pub fn running_minimum(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.trace
            .iter()
            .map(|e| {
                best = best.min(e.value);
                best
            })
            .collect()
    }
}

/// Seeded Latin-hypercube starts over the box. No start sits exactly at
/// the box center, so a symmetric optimum is found by descent rather than
/// by construction.
fn multistart(bounds: &[(f64, f64)], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut strata: Vec<Vec<usize>> = bounds
        .iter()
        .map(|_| {
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(rng);
            perm
        })
        .collect();
    let center: Vec<f64> = bounds.iter().map(|(l, h)| 0.5 * (l + h)).collect();
    (0..k)
        .map(|s| loop {
            let x: Vec<f64> = bounds
                .iter()
                .zip(strata.iter_mut())
                .map(|(&(lo, hi), perm)| lo + (perm[s] as f64 + rng.gen::<f64>()) / k as f64 * (hi - lo))
                .collect();
            if x != center || bounds.iter().all(|(l, h)| l == h) {
                break x;
            }
        })
        .collect()
}

/// Multistart Nelder–Mead over the problem's box with a hard cap of
/// `budget` objective evaluations. Points the engine rejects enter the trace
/// as `+inf` with the error text as diagnostic.
pub fn minimize(problem: &SearchProblem, budget: usize, seed: u64) -> Result<SearchResult> {
    problem.validate()?;
    if budget < MIN_BUDGET {
        return Err(Error::invalid(format!("budget must be >= {MIN_BUDGET}, got {budget}")));
    }
    let dim = problem.bounds.len();
    let lo: Vec<f64> = problem.bounds.iter().map(|b| b.0).collect();
    let hi: Vec<f64> = problem.bounds.iter().map(|b| b.1).collect();
    let starts_n = (budget / (25 * (dim + 1))).clamp(1, MAX_STARTS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = multistart(&problem.bounds, starts_n, &mut rng);

    let mut trace: Vec<TraceEntry> = Vec::new();
    for (i, start) in starts.iter().enumerate() {
        let remaining = budget - trace.len();
        if remaining == 0 {
            break;
        }
        let cap = trace.len() + remaining / (starts_n - i);
        let mut eval = |x: &[f64]| {
            if trace.len() >= cap {
                return None;
            }
            let entry = match problem.objective_at(x) {
                Ok(v) => TraceEntry { params: x.to_vec(), value: v, diagnostic: None },
                Err(e) => TraceEntry { params: x.to_vec(), value: f64::INFINITY, diagnostic: Some(e.to_string()) },
            };
            let v = entry.value;
            trace.push(entry);
            Some(v)
        };
        simplex::descend(&mut eval, start, &lo, &hi, XTOL);
    }

    let best = trace
        .iter()
        .min_by(|a, b| simplex::compare((&a.params, a.value), (&b.params, b.value)))
        .expect("budget >= 10 guarantees at least one evaluation");
    let bound = problem.bound();
    let finite: Vec<f64> = trace.iter().map(|e| e.value).filter(|v| v.is_finite()).collect();
    let range = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - finite.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SearchResult {
        problem: problem.clone(),
        seed,
        budget,
        best_params: best.params.clone(),
        best_value: best.value,
        bound,
        hur_reference: problem.hur_reference(),
        evaluations: trace.len(),
        flat: !finite.is_empty() && range < FLAT_RTOL * bound,
        holds: best.value.is_finite() && best.value >= bound - problem.tol,
        trace,
    })
}

/// One evaluated grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub descriptor: String,
    pub moments: MomentRecord,
    pub outcomes: Vec<RelationOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub family: Family,
    pub param_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Evaluates the full applicable suite at every grid point, in grid order.
pub fn sweep(family: &Family, grid: &[Vec<f64>], hbar: f64, tol: Option<f64>) -> Result<SweepTable> {
    family.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    for p in grid {
        family.check_params(p)?;
    }
    let engine = family.engine();
    let cfg = match tol {
        Some(t) => SuiteConfig::new(hbar, t, engine)?,
        None => match engine {
            Engine::Gaussian => SuiteConfig::new(hbar, SuiteConfig::gaussian(hbar).tol, engine)?,
            Engine::Grid => SuiteConfig::new(hbar, SuiteConfig::grid(hbar).tol, engine)?,
        },
    };
    let rows = grid
        .iter()
        .map(|params| {
            let (m, g) = family.evaluate(params, hbar)?;
            let descriptor = family.descriptor(params);
            let outcomes = evaluate_suite(&m, g.as_ref(), &cfg, &descriptor)?;
            Ok(SweepRow { params: params.clone(), descriptor, moments: MomentRecord::from(&m), outcomes })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        family: family.clone(),
        param_names: family.param_names().iter().map(|s| s.to_string()).collect(),
        rows,
    })
}
