//! Evaluated relations and their JSON-lines / CSV encodings.
//!
//! Floats are written as shortest round-trip decimal strings; parsing them
//! back yields the identical `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The relations of the suite, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationName {
    /// (ΔA)²(ΔB)² ≥ |⟨[A,B]⟩|²/4 for grid operators.
    Robertson,
    /// (ΔQ)²(ΔP)² ≥ N²ℏ²/4 for the collective observables.
    CollectiveGur,
    /// Same relation written as diagonal plus off-diagonal QCF sums.
    GurN,
    /// Two-particle bracketed form with halved variances plus QCF.
    GurTwo,
    SchwarzQTwo,
    SchwarzPTwo,
    GurTwoBound,
    SymmetricTwo,
    SchwarzThreeQ,
    SchwarzThreeP,
    GurThreeBound,
    SymmetricThree,
}

impl RelationName {
    pub const ALL: [RelationName; 12] = [
        RelationName::Robertson,
        RelationName::CollectiveGur,
        RelationName::GurN,
        RelationName::GurTwo,
        RelationName::SchwarzQTwo,
        RelationName::SchwarzPTwo,
        RelationName::GurTwoBound,
        RelationName::SymmetricTwo,
        RelationName::SchwarzThreeQ,
        RelationName::SchwarzThreeP,
        RelationName::GurThreeBound,
        RelationName::SymmetricThree,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationName::Robertson => "robertson",
            RelationName::CollectiveGur => "collective_gur",
            RelationName::GurN => "gur_n",
            RelationName::GurTwo => "gur_two",
            RelationName::SchwarzQTwo => "schwarz_q_two",
            RelationName::SchwarzPTwo => "schwarz_p_two",
            RelationName::GurTwoBound => "gur_two_bound",
            RelationName::SymmetricTwo => "symmetric_two",
            RelationName::SchwarzThreeQ => "schwarz_three_q",
            RelationName::SchwarzThreeP => "schwarz_three_p",
            RelationName::GurThreeBound => "gur_three_bound",
            RelationName::SymmetricThree => "symmetric_three",
        }
    }

    /// Relations whose verdict is invariant under q → λq, p → p/λ.
    pub fn is_dimensionally_balanced(&self) -> bool {
        matches!(
            self,
            RelationName::CollectiveGur
                | RelationName::GurTwoBound
                | RelationName::SymmetricTwo
                | RelationName::GurThreeBound
                | RelationName::SymmetricThree
        )
    }
}

impl fmt::Display for RelationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown relation name {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Gaussian,
    Grid,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Gaussian => "gaussian",
            Engine::Grid => "grid",
        }
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Engine::Gaussian),
            "grid" => Ok(Engine::Grid),
            other => Err(Error::Format(format!("unknown engine {other:?}"))),
        }
    }
}

/// One evaluated relation: `slack = lhs − rhs`, `holds ⇔ slack ≥ −tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: RelationName,
    /// Distinguishes several reports of the same relation on one state
    /// (sign vectors of the three-particle bounds, operator pairs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub n: usize,
    pub engine: Engine,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    #[serde(default)]
    pub sub_values: BTreeMap<String, f64>,
    #[serde(default)]
    pub state_descriptor: String,
}

impl InequalityReport {
    pub fn evaluate(name: RelationName, n: usize, engine: Engine, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            name,
            variant: None,
            n,
            engine,
            lhs,
            rhs,
            slack,
            holds: slack >= -tol,
            sub_values: BTreeMap::new(),
            state_descriptor: String::new(),
        }
    }

    pub fn with_sub(mut self, key: &str, value: f64) -> Self {
        self.sub_values.insert(key.to_string(), value);
        self
    }

    pub fn with_variant(mut self, variant: impl Into<String>) -> Self {
        self.variant = Some(variant.into());
        self
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.state_descriptor = descriptor.into();
        self
    }

    /// Column/row key: relation name plus variant, if any.
    pub fn key(&self) -> String {
        match &self.variant {
            Some(v) => format!("{}[{}]", self.name, v),
            None => self.name.to_string(),
        }
    }

    /// Fixed output order: relation name, then state descriptor, then variant.
    pub fn sort_key(&self) -> (RelationName, &str, &str) {
        (self.name, self.state_descriptor.as_str(), self.variant.as_deref().unwrap_or(""))
    }
}

/// A relation either evaluated on a state or explicitly skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RelationOutcome {
    Evaluated(InequalityReport),
    NotApplicable { name: RelationName, reason: String },
}

impl RelationOutcome {
    pub fn name(&self) -> RelationName {
        match self {
            RelationOutcome::Evaluated(r) => r.name,
            RelationOutcome::NotApplicable { name, .. } => *name,
        }
    }

    pub fn report(&self) -> Option<&InequalityReport> {
        match self {
            RelationOutcome::Evaluated(r) => Some(r),
            RelationOutcome::NotApplicable { .. } => None,
        }
    }
}

pub fn write_jsonl<W: Write>(mut out: W, reports: &[InequalityReport]) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<InequalityReport>> {
    let mut reports = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        reports.push(r);
    }
    Ok(reports)
}

pub const CSV_HEADER: [&str; 10] = [
    "name",
    "variant",
    "n",
    "engine",
    "lhs",
    "rhs",
    "slack",
    "holds",
    "sub_values",
    "state_descriptor",
];

pub fn write_csv<W: Write>(out: W, reports: &[InequalityReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in reports {
        let subs = serde_json::to_string(&r.sub_values)?;
        w.write_record([
            r.name.as_str(),
            r.variant.as_deref().unwrap_or(""),
            &r.n.to_string(),
            r.engine.as_str(),
            &r.lhs.to_string(),
            &r.rhs.to_string(),
            &r.slack.to_string(),
            &r.holds.to_string(),
            &subs,
            &r.state_descriptor,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<InequalityReport>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Format(format!("unexpected report CSV header: {header:?}")));
    }
    let mut reports = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("column {}: {e}", CSV_HEADER[i])))
        };
        reports.push(InequalityReport {
            name: rec[0].parse()?,
            variant: (!rec[1].is_empty()).then(|| rec[1].to_string()),
            n: rec[2].parse().map_err(|e| Error::Format(format!("column n: {e}")))?,
            engine: rec[3].parse()?,
            lhs: num(4)?,
            rhs: num(5)?,
            slack: num(6)?,
            holds: rec[7].parse().map_err(|e| Error::Format(format!("column holds: {e}")))?,
            sub_values: serde_json::from_str(&rec[8])?,
            state_descriptor: rec[9].to_string(),
        });
    }
    Ok(reports)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<InequalityReport> {
        vec![
            InequalityReport::evaluate(RelationName::CollectiveGur, 2, Engine::Gaussian, 1.0, 1.0, 1e-9)
                .with_descriptor("tms r=0.1"),
            InequalityReport::evaluate(RelationName::SchwarzThreeQ, 3, Engine::Grid, 0.1 + 0.2, -1.0 / 3.0, 1e-6)
                .with_variant("+--")
                .with_sub("a1", 1.0)
                .with_sub("weird", 1e-300)
                .with_descriptor("has, comma \"and quotes\""),
        ]
    }

    #[test]
    fn holds_tracks_tolerance() {
        let r = InequalityReport::evaluate(RelationName::GurN, 1, Engine::Grid, 1.0, 1.0 + 1e-7, 1e-6);
        assert!(r.holds);
        let r = InequalityReport::evaluate(RelationName::GurN, 1, Engine::Grid, 1.0, 1.0 + 1e-5, 1e-6);
        assert!(!r.holds);
        assert_eq!(r.slack, 1.0 - (1.0 + 1e-5));
    }

    #[test]
    fn jsonl_and_csv_are_lossless() {
        let reports = sample();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &reports).unwrap();
        assert_eq!(read_jsonl(&buf[..]).unwrap(), reports);

        let mut buf = Vec::new();
        write_csv(&mut buf, &reports).unwrap();
        assert_eq!(read_csv(&buf[..]).unwrap(), reports);
    }

    #[test]
    fn names_round_trip_through_strings() {
        for name in RelationName::ALL {
            assert_eq!(name.as_str().parse::<RelationName>().unwrap(), name);
            let json = serde_json::to_string(&name).unwrap();
            assert_eq!(json, format!("\"{}\"", name.as_str()));
        }
        assert!("bogus".parse::<RelationName>().is_err());
    }
}
