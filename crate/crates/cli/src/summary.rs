//! Fixed-format text summaries of verify, sweep and minimize outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use gurlab::report::CSV_HEADER;
use gurlab::{Engine, InequalityReport, Objective, RelationName, SearchResult};

/// Whether a report sits on its bound, to the engine's precision.
fn saturated(r: &InequalityReport) -> bool {
    let rel = match r.engine {
        Engine::Gaussian => 1e-9,
        Engine::Grid => 1e-6,
    };
    r.slack.abs() <= rel * r.lhs.abs().max(r.rhs.abs()).max(f64::MIN_POSITIVE)
}

fn family_of(descriptor: &str) -> &str {
    descriptor.split_whitespace().next().unwrap_or("")
}

/// Per-relation minimum slack (always all relation names, in fixed order)
/// followed by a per-family saturation table.
pub fn verify(reports: &[InequalityReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "relations");
    let _ = writeln!(s, "{:<18} {:>8} {:>8} {:>16}", "relation", "reports", "failing", "min slack");
    for name in RelationName::ALL {
        let rs: Vec<_> = reports.iter().filter(|r| r.name == name).collect();
        let failing = rs.iter().filter(|r| !r.holds).count();
        let min = rs.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        let min = if rs.is_empty() { "-".to_string() } else { format!("{min:.6e}") };
        let _ = writeln!(s, "{:<18} {:>8} {:>8} {:>16}", name.as_str(), rs.len(), failing, min);
    }
    let mut families: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for r in reports {
        let e = families.entry(family_of(&r.state_descriptor)).or_default();
        e.0 += 1;
        e.1 += usize::from(saturated(r));
        e.2 += usize::from(!r.holds);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "saturation by family");
    let _ = writeln!(s, "{:<26} {:>8} {:>10} {:>8}", "family", "reports", "saturated", "failing");
    for (fam, (n, sat, fail)) in families {
        let _ = writeln!(s, "{:<26} {:>8} {:>10} {:>8}", fam, n, sat, fail);
    }
    s
}

/// One sweep point reduced to what the summary shows.
pub struct SweepPoint {
    pub descriptor: String,
    pub cov_q_12: Option<f64>,
    /// (slack, holds, saturated-or-not is unknown from CSV) per report.
    pub slacks: Vec<(f64, bool)>,
}

pub fn sweep_points_from_table(t: &gurlab::searcher::SweepTable) -> Vec<SweepPoint> {
    t.rows
        .iter()
        .map(|row| SweepPoint {
            descriptor: row.descriptor.clone(),
            cov_q_12: row.moments.cov_q.first().and_then(|r| r.get(1)).copied(),
            slacks: row.outcomes.iter().filter_map(|o| o.report()).map(|r| (r.slack, r.holds)).collect(),
        })
        .collect()
}

pub fn sweep_points_from_csv(text: &str) -> Result<Vec<SweepPoint>, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    let cov = header.iter().position(|h| h == "cov_q_1_2");
    let mut points = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("column {}: {e}", &header[i]));
        let mut slacks = Vec::new();
        for (i, h) in header.iter().enumerate() {
            if let Some(key) = h.strip_suffix(".slack") {
                if rec[i].is_empty() {
                    continue;
                }
                let holds_col = header
                    .iter()
                    .position(|c| c == format!("{key}.holds"))
                    .ok_or_else(|| format!("missing {key}.holds column"))?;
                let holds = rec[holds_col].parse::<bool>().map_err(|e| format!("{key}.holds: {e}"))?;
                slacks.push((num(i)?, holds));
            }
        }
        points.push(SweepPoint {
            descriptor: rec[0].to_string(),
            cov_q_12: cov.map(num).transpose()?,
            slacks,
        });
    }
    Ok(points)
}

pub fn sweep(points: &[SweepPoint]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "sweep");
    let _ = writeln!(s, "{:<44} {:>16} {:>8} {:>8} {:>16}", "state", "C_Q(1,2)", "reports", "failing", "min slack");
    for p in points {
        let cov = p.cov_q_12.map_or("-".to_string(), |c| format!("{c:.6e}"));
        let failing = p.slacks.iter().filter(|(_, h)| !h).count();
        let min = p.slacks.iter().map(|(s, _)| *s).fold(f64::INFINITY, f64::min);
        let min = if p.slacks.is_empty() { "-".to_string() } else { format!("{min:.6e}") };
        let _ = writeln!(s, "{:<44} {:>16} {:>8} {:>8} {:>16}", p.descriptor, cov, p.slacks.len(), failing, min);
    }
    s
}

fn bound_form(objective: Objective, n: usize) -> &'static str {
    match (objective, n) {
        (Objective::IndividualProduct, 2) => "hbar/4",
        (Objective::IndividualProduct, 3) => "hbar/8",
        (Objective::SumProductTwo, _) => "hbar^2/4",
        (Objective::SumProductThree, _) => "9hbar^2/64",
        (Objective::CollectiveProduct, 1) => "hbar^2/4",
        (Objective::CollectiveProduct, 2) => "hbar^2",
        (Objective::CollectiveProduct, 3) => "9hbar^2/4",
        _ => "",
    }
}

fn hur_form(objective: Objective, n: usize) -> &'static str {
    match (objective, n) {
        (Objective::IndividualProduct, _) => "hbar/2",
        (_, 1) => "hbar^2/4",
        (_, 2) => "hbar^2",
        (_, 3) => "9hbar^2/4",
        _ => "",
    }
}

/// Flattened searcher result, as written to and read from CSV.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MinimizeRow {
    pub family: String,
    pub objective: Objective,
    pub n: usize,
    pub hbar: f64,
    pub seed: u64,
    pub budget: usize,
    pub evaluations: usize,
    pub best_value: f64,
    pub bound: f64,
    pub hur_reference: f64,
    pub flat: bool,
    pub holds: bool,
    /// Semicolon-separated.
    pub best_params: String,
}

pub const MINIMIZE_CSV_HEADER: [&str; 13] = [
    "family",
    "objective",
    "n",
    "hbar",
    "seed",
    "budget",
    "evaluations",
    "best_value",
    "bound",
    "hur_reference",
    "flat",
    "holds",
    "best_params",
];

impl From<&SearchResult> for MinimizeRow {
    fn from(r: &SearchResult) -> Self {
        Self {
            family: r.problem.family.name().to_string(),
            objective: r.problem.objective,
            n: r.problem.family.n_particles(),
            hbar: r.problem.hbar,
            seed: r.seed,
            budget: r.budget,
            evaluations: r.evaluations,
            best_value: r.best_value,
            bound: r.bound,
            hur_reference: r.hur_reference,
            flat: r.flat,
            holds: r.holds,
            best_params: r.best_params.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(";"),
        }
    }
}

pub fn minimize(rows: &[MinimizeRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "searcher minima");
    let _ = writeln!(
        s,
        "{:<26} {:<20} {:>2} {:>16} {:>16} {:>11} {:>16} {:>11} {:>10} {:>6} {:>6}",
        "family", "objective", "n", "best", "bound", "", "hur_reference", "", "best/bound", "flat", "holds"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<26} {:<20} {:>2} {:>16.9e} {:>16.9e} {:>11} {:>16.9e} {:>11} {:>10.6} {:>6} {:>6}",
            r.family,
            r.objective.as_str(),
            r.n,
            r.best_value,
            r.bound,
            bound_form(r.objective, r.n),
            r.hur_reference,
            hur_form(r.objective, r.n),
            r.best_value / r.bound,
            r.flat,
            r.holds
        );
        let _ = writeln!(s, "  best params: {}", r.best_params.replace(';', ", "));
    }
    s
}

/// What an input file contains.
pub enum Input {
    Verify(Vec<InequalityReport>),
    Sweep(Vec<SweepPoint>),
    Minimize(Vec<MinimizeRow>),
}

/// Detects the kind of output file from its content and parses it.
pub fn parse_input(text: &str) -> Result<Input, String> {
    let first = text.lines().next().unwrap_or("").trim();
    if first.is_empty() {
        return Err("input is empty".into());
    }
    if text.trim_start().starts_with('{') {
        if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
            if value.get("problem").is_some() {
                let r: SearchResult = serde_json::from_value(value).map_err(|e| e.to_string())?;
                return Ok(Input::Minimize(vec![MinimizeRow::from(&r)]));
            }
            if value.get("rows").is_some() {
                let t: gurlab::searcher::SweepTable = serde_json::from_value(value).map_err(|e| e.to_string())?;
                return Ok(Input::Sweep(sweep_points_from_table(&t)));
            }
        }
        let reports = gurlab::report::read_jsonl(text.as_bytes()).map_err(|e| e.to_string())?;
        return Ok(Input::Verify(reports));
    }
    let header: Vec<&str> = first.split(',').collect();
    if header == CSV_HEADER {
        let reports = gurlab::report::read_csv(text.as_bytes()).map_err(|e| e.to_string())?;
        return Ok(Input::Verify(reports));
    }
    if header == MINIMIZE_CSV_HEADER {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows = rd.deserialize().collect::<Result<Vec<MinimizeRow>, _>>().map_err(|e| e.to_string())?;
        return Ok(Input::Minimize(rows));
    }
    if header.first() == Some(&"descriptor") {
        return Ok(Input::Sweep(sweep_points_from_csv(text)?));
    }
    Err("unrecognized input: expected verify, sweep or minimize output".into())
}

pub fn render(input: &Input) -> String {
    match input {
        Input::Verify(r) => verify(r),
        Input::Sweep(p) => sweep(p),
        Input::Minimize(m) => minimize(m),
    }
}
