//! Report records and their JSON/CSV forms.
//!
//! JSON output is canonical: object keys are sorted and wall-clock data
//! lives only under `timing`, so two runs with the same seed and config
//! differ at most there.

use std::io::Write;

use qpoly::polygamy::{IdentityCheck, PolygamyReport, SubsetValue};
use qpoly::{Bound, CorrelationValue, OptimizerConfig, Route, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const CSV_COLUMNS: [&str; 8] = [
    "check",
    "lhs",
    "middle",
    "rhs",
    "slack1",
    "slack2",
    "tolerance",
    "verdict",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub subset: Vec<String>,
    pub value: f64,
    pub bound: Bound,
    pub converged: bool,
}

impl From<&SubsetValue> for Term {
    fn from(s: &SubsetValue) -> Self {
        Term {
            subset: s.subset.clone(),
            value: s.value.value,
            bound: s.value.bound,
            converged: s.value.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: f64,
    pub middle: Option<f64>,
    pub rhs: Option<f64>,
    pub residual: Option<f64>,
    pub slack1: Option<f64>,
    pub slack2: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Option<Verdict>,
    pub bound: Option<Bound>,
    pub route: Option<Route>,
    pub converged: Option<bool>,
    pub escalated: Option<bool>,
    pub notes: Vec<String>,
    pub terms: Vec<Term>,
}

impl CheckRecord {
    fn bare(name: impl Into<String>, lhs: f64) -> Self {
        CheckRecord {
            name: name.into(),
            lhs,
            middle: None,
            rhs: None,
            residual: None,
            slack1: None,
            slack2: None,
            tolerance: None,
            verdict: None,
            bound: None,
            route: None,
            converged: None,
            escalated: None,
            notes: Vec::new(),
            terms: Vec::new(),
        }
    }

    pub fn measure(name: impl Into<String>, v: &CorrelationValue) -> Self {
        CheckRecord {
            bound: Some(v.bound),
            route: Some(v.route),
            converged: Some(v.converged),
            ..Self::bare(name, v.value)
        }
    }

    pub fn scalar(name: impl Into<String>, value: f64) -> Self {
        Self::bare(name, value)
    }

    /// The chain itself: `lhs <= middle <= rhs`.
    pub fn chain(name: impl Into<String>, r: &PolygamyReport) -> Self {
        let verdict = r
            .verdict_middle_rhs
            .map_or(r.verdict_lhs_middle, |v| v.and(r.verdict_lhs_middle));
        CheckRecord {
            middle: Some(r.middle),
            rhs: r.rhs,
            slack1: Some(r.slack_lhs_middle),
            slack2: r.slack_middle_rhs,
            tolerance: Some(r.tolerance),
            verdict: Some(verdict),
            bound: Some(r.lhs_bound),
            escalated: Some(r.escalated),
            notes: r.notes.clone(),
            terms: r.per_subset.iter().map(Term::from).collect(),
            ..Self::bare(name, r.lhs)
        }
    }

    /// The single-party inequality `lhs <= rhs` carried by the same report.
    pub fn single_party(name: impl Into<String>, r: &PolygamyReport) -> Option<Self> {
        Some(CheckRecord {
            rhs: Some(r.rhs?),
            slack1: r.slack_lhs_rhs,
            tolerance: Some(r.tolerance),
            verdict: r.verdict_lhs_rhs,
            bound: Some(r.lhs_bound),
            escalated: Some(r.escalated),
            terms: r.per_single.iter().map(Term::from).collect(),
            ..Self::bare(name, r.lhs)
        })
    }

    pub fn identity(c: &IdentityCheck) -> Self {
        CheckRecord {
            rhs: Some(c.rhs),
            residual: Some(c.residual),
            slack1: Some(c.residual),
            tolerance: Some(c.tolerance),
            verdict: Some(if c.pass { Verdict::Pass } else { Verdict::Fail }),
            ..Self::bare(format!("identity:{}", c.name), c.lhs)
        }
    }

    /// Smallest chain slack, if this check has any.
    pub fn min_slack(&self) -> Option<f64> {
        if self.residual.is_some() {
            return None;
        }
        [self.slack1, self.slack2]
            .into_iter()
            .flatten()
            .reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub command: String,
    pub state: String,
    pub seed: u64,
    pub focus: Option<String>,
    pub optimizer: OptimizerConfig,
    pub escalate: bool,
    pub checks: Vec<CheckRecord>,
    pub verdict: Option<Verdict>,
    pub timing: Timing,
}

impl ReportRecord {
    /// PASS only if every check with a verdict passed.
    pub fn overall(checks: &[CheckRecord]) -> Verdict {
        checks
            .iter()
            .filter_map(|c| c.verdict)
            .fold(Verdict::Pass, Verdict::and)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub trials: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub escalations: usize,
    pub min_slack: f64,
    pub nonnegative_slack_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub dims: Vec<usize>,
    pub seed: u64,
    pub records: Vec<ReportRecord>,
    pub summary: FuzzSummary,
    pub verdict: Verdict,
    pub timing: Timing,
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(
                entries
                    .into_iter()
                    .map(|(k, v)| (k, sorted(v)))
                    .collect::<Map<_, _>>(),
            )
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Drops every `timing` key, at any depth.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("timing");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

pub fn canonical_json<T: Serialize>(report: &T) -> String {
    let v = serde_json::to_value(report).expect("reports serialize");
    let mut s = serde_json::to_string_pretty(&sorted(v)).expect("values serialize");
    s.push('\n');
    s
}

fn cell(x: Option<f64>) -> String {
    x.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn verdict_cell(v: Option<Verdict>) -> String {
    match v {
        Some(Verdict::Pass) => "PASS".into(),
        Some(Verdict::Fail) => "FAIL".into(),
        Some(Verdict::Inconclusive) => "INCONCLUSIVE".into(),
        None => String::new(),
    }
}

fn csv_rows<W: Write>(
    w: &mut csv::Writer<W>,
    prefix: &str,
    checks: &[CheckRecord],
) -> csv::Result<()> {
    for c in checks {
        w.write_record([
            format!("{prefix}{}", c.name),
            cell(Some(c.lhs)),
            cell(c.middle),
            cell(c.rhs),
            cell(c.slack1),
            cell(c.slack2),
            cell(c.tolerance),
            verdict_cell(c.verdict),
        ])?;
    }
    Ok(())
}

fn finish<W: Write>(w: csv::Writer<W>) -> CliResult<W> {
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// One row per check. Identity checks put their residual in `slack1`.
pub fn record_csv(r: &ReportRecord) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    csv_rows(&mut w, "", &r.checks).map_err(io)?;
    Ok(String::from_utf8(finish(w)?).expect("csv output is utf-8"))
}

/// Rows of every trial, with `check` prefixed by `trial<k>/`.
pub fn fuzz_csv(r: &FuzzReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for (k, rec) in r.records.iter().enumerate() {
        csv_rows(&mut w, &format!("trial{k}/"), &rec.checks).map_err(io)?;
    }
    Ok(String::from_utf8(finish(w)?).expect("csv output is utf-8"))
}
