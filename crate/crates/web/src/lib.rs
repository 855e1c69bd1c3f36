//! WebAssembly bindings behind `www/index.html`.
//!
//! Every export returns a JSON string so the page stays framework-free and
//! the same functions are testable natively.

use gurlab::inequalities::{evaluate_suite, SuiteConfig};
use gurlab::moments::{collective_dispersions, MomentRecord};
use gurlab::searcher::{minimize, Family, Objective, SearchProblem};
use gurlab::{MomentTable, RelationName, RelationOutcome};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_STEPS: usize = 2000;
const MAX_BUDGET: usize = 5000;

fn family(name: &str) -> Result<Family, String> {
    match name {
        "two_mode_squeezed" => Ok(Family::TwoModeSqueezed),
        "correlated_triple" => Ok(Family::CorrelatedTriple),
        other => Err(format!("unknown family '{other}'")),
    }
}

fn gaussian_moments(fam: &Family, r: f64, hbar: f64) -> Result<MomentTable, String> {
    fam.evaluate(&[r], hbar).map(|(m, _)| m).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    name: String,
    slack: Vec<f64>,
    holds: bool,
}

#[derive(Serialize)]
struct SlackCurves {
    family: String,
    r: Vec<f64>,
    curves: Vec<Curve>,
}

/// Slack of every applicable relation along `steps` evenly spaced values
/// of r in `[r_min, r_max]`. Relations with several variants contribute
/// their smallest slack.
pub fn slack_curves_json(name: &str, r_min: f64, r_max: f64, steps: usize, hbar: f64) -> Result<String, String> {
    let fam = family(name)?;
    if !(2..=MAX_STEPS).contains(&steps) || !r_min.is_finite() || !r_max.is_finite() || r_min >= r_max {
        return Err(format!("need 2..={MAX_STEPS} steps over a finite range with r_min < r_max"));
    }
    let cfg = SuiteConfig::gaussian(hbar);
    let r: Vec<f64> = (0..steps).map(|k| r_min + (r_max - r_min) * k as f64 / (steps - 1) as f64).collect();
    let mut curves: Vec<Curve> = Vec::new();
    for &x in &r {
        let m = gaussian_moments(&fam, x, hbar)?;
        let outcomes = evaluate_suite(&m, None, &cfg, "").map_err(|e| e.to_string())?;
        for name in RelationName::ALL {
            let reports: Vec<_> = outcomes
                .iter()
                .filter_map(RelationOutcome::report)
                .filter(|rep| rep.name == name)
                .collect();
            if reports.is_empty() {
                continue;
            }
            let slack = reports.iter().map(|rep| rep.slack).fold(f64::INFINITY, f64::min);
            let holds = reports.iter().all(|rep| rep.holds);
            match curves.iter_mut().find(|c| c.name == name.as_str()) {
                Some(c) => {
                    c.slack.push(slack);
                    c.holds &= holds;
                }
                None => curves.push(Curve { name: name.as_str().into(), slack: vec![slack], holds }),
            }
        }
    }
    serde_json::to_string(&SlackCurves { family: name.into(), r, curves }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct MomentView {
    descriptor: String,
    cov_q: Vec<Vec<f64>>,
    cov_p: Vec<Vec<f64>>,
    collective_q: f64,
    collective_p: f64,
    individual_product: f64,
    collective_bound: f64,
}

/// Covariance blocks and headline products of one family member.
pub fn moments_json(name: &str, r: f64, hbar: f64) -> Result<String, String> {
    let fam = family(name)?;
    let m = gaussian_moments(&fam, r, hbar)?;
    let rec = MomentRecord::from(&m);
    let (dq, dp) = collective_dispersions(&m);
    let n = m.n() as f64;
    serde_json::to_string(&MomentView {
        descriptor: fam.descriptor(&[r]),
        cov_q: rec.cov_q,
        cov_p: rec.cov_p,
        collective_q: dq,
        collective_p: dp,
        individual_product: (m.var_q(0) * m.var_p(0)).sqrt(),
        collective_bound: n * n * hbar * hbar / 4.0,
    })
    .map_err(|e| e.to_string())
}

/// Runs the searcher and returns its full result, trace included.
pub fn search_json(name: &str, objective: &str, budget: usize, seed: u64, hbar: f64) -> Result<String, String> {
    let fam = family(name)?;
    let objective: Objective = objective.parse().map_err(|e: gurlab::Error| e.to_string())?;
    let budget = budget.min(MAX_BUDGET);
    let problem = SearchProblem::new(fam, objective, hbar).map_err(|e| e.to_string())?;
    let result = minimize(&problem, budget, seed).map_err(|e| e.to_string())?;
    result.to_json().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn slack_curves(family: &str, r_min: f64, r_max: f64, steps: usize, hbar: f64) -> Result<String, JsError> {
    slack_curves_json(family, r_min, r_max, steps, hbar).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn moments(family: &str, r: f64, hbar: f64) -> Result<String, JsError> {
    moments_json(family, r, hbar).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn search(family: &str, objective: &str, budget: usize, seed: u32, hbar: f64) -> Result<String, JsError> {
    search_json(family, objective, budget, u64::from(seed), hbar).map_err(|e| JsError::new(&e))
}
