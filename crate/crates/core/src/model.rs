//! Group decision problem model.
//!
//! A [`GroupProblem`] holds the alternative, criterion and decision-maker
//! sets, the maker weights, and one [`DecisionMatrix`] per maker (that maker's
//! cell judgments plus their own criterion weights). Cells are tagged
//! [`CellValue`]s so a single problem can mix crisp, stochastic and
//! intuitionistic fuzzy information.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fuzzy::Ifv;
use crate::rough::SortingBlock;
use crate::uncertainty::Situation;

/// Tolerance on weight vectors summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-6;
/// Tolerance on probability sums and IFV closure.
pub const CLOSURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alternative {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Benefit,
    Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionMaker {
    pub id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Crisp,
    Dist,
    Ifs,
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellKind::Crisp => "crisp",
            CellKind::Dist => "dist",
            CellKind::Ifs => "ifs",
        })
    }
}

/// One judgment cell.
///
/// JSON forms: `{"kind":"crisp","value":x}` (a bare number is also accepted
/// on input), `{"kind":"dist","outcomes":[[value,prob],...]}` and
/// `{"kind":"ifs","mu":m,"nu":n}`.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Crisp(f64),
    Dist(Vec<(f64, f64)>),
    Ifs(Ifv),
}

impl CellValue {
    pub fn kind(&self) -> CellKind {
        match self {
            CellValue::Crisp(_) => CellKind::Crisp,
            CellValue::Dist(_) => CellKind::Dist,
            CellValue::Ifs(_) => CellKind::Ifs,
        }
    }

    pub fn as_crisp(&self) -> Option<f64> {
        match self {
            CellValue::Crisp(v) => Some(*v),
            _ => None,
        }
    }

    /// Checks the payload invariants, returning a human-readable reason on
    /// failure.
    pub fn check(&self) -> std::result::Result<(), String> {
        match self {
            CellValue::Crisp(v) if !v.is_finite() => Err(format!("crisp value {v} is not finite")),
            CellValue::Crisp(_) => Ok(()),
            CellValue::Dist(outcomes) => {
                if outcomes.is_empty() {
                    return Err("distribution has no outcomes".into());
                }
                for &(v, p) in outcomes {
                    if !v.is_finite() {
                        return Err(format!("outcome {v} is not finite"));
                    }
                    if !(0.0..=1.0).contains(&p) {
                        return Err(format!("probability {p} outside [0, 1]"));
                    }
                }
                let total: f64 = outcomes.iter().map(|&(_, p)| p).sum();
                if (total - 1.0).abs() > CLOSURE_TOL {
                    return Err(format!("probabilities sum to {total}"));
                }
                Ok(())
            }
            CellValue::Ifs(v) => v.check(),
        }
    }
}

impl Serialize for CellValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = match self {
            CellValue::Crisp(v) => json!({"kind": "crisp", "value": v}),
            CellValue::Dist(outcomes) => json!({"kind": "dist", "outcomes": outcomes}),
            CellValue::Ifs(v) => json!({"kind": "ifs", "mu": v.mu, "nu": v.nu}),
        };
        doc.serialize(serializer)
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TaggedCell {
    Crisp { value: f64 },
    Dist { outcomes: Vec<(f64, f64)> },
    Ifs { mu: f64, nu: f64 },
}

impl<'de> Deserialize<'de> for CellValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Value::deserialize(deserializer)?;
        if let Some(v) = raw.as_f64() {
            return Ok(CellValue::Crisp(v));
        }
        let tagged: TaggedCell = serde_json::from_value(raw).map_err(de::Error::custom)?;
        Ok(match tagged {
            TaggedCell::Crisp { value } => CellValue::Crisp(value),
            TaggedCell::Dist { outcomes } => CellValue::Dist(outcomes),
            TaggedCell::Ifs { mu, nu } => CellValue::Ifs(Ifv { mu, nu }),
        })
    }
}

/// One maker's decision plane: cell judgments keyed by alternative then
/// criterion, and that maker's criterion weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DecisionMatrix {
    pub maker: String,
    pub criterion_weights: BTreeMap<String, f64>,
    pub cells: BTreeMap<String, BTreeMap<String, CellValue>>,
}

impl DecisionMatrix {
    pub fn new(maker: impl Into<String>) -> Self {
        DecisionMatrix {
            maker: maker.into(),
            criterion_weights: BTreeMap::new(),
            cells: BTreeMap::new(),
        }
    }

    pub fn cell(&self, alternative: &str, criterion: &str) -> Option<&CellValue> {
        self.cells.get(alternative)?.get(criterion)
    }

    pub fn set_cell(&mut self, alternative: &str, criterion: &str, value: CellValue) {
        self.cells
            .entry(alternative.to_string())
            .or_default()
            .insert(criterion.to_string(), value);
    }

    /// Criterion weights in the given criterion order; absent entries read 0.
    pub fn weights_for(&self, criteria: &[Criterion]) -> Vec<f64> {
        criteria
            .iter()
            .map(|c| self.criterion_weights.get(&c.id).copied().unwrap_or(0.0))
            .collect()
    }

    /// True when every (alternative, criterion) pair has a cell.
    pub fn covers(&self, alternatives: &[Alternative], criteria: &[Criterion]) -> bool {
        alternatives
            .iter()
            .all(|a| criteria.iter().all(|c| self.cell(&a.id, &c.id).is_some()))
    }

    /// Crisp values as rows (alternatives) by columns (criteria).
    pub fn crisp_values(
        &self,
        alternatives: &[Alternative],
        criteria: &[Criterion],
    ) -> Result<Vec<Vec<f64>>> {
        alternatives
            .iter()
            .map(|a| {
                criteria
                    .iter()
                    .map(|c| match self.cell(&a.id, &c.id) {
                        Some(CellValue::Crisp(v)) => Ok(*v),
                        Some(_) => Err(Error::NonCrispCell {
                            alternative: a.id.clone(),
                            criterion: c.id.clone(),
                        }),
                        None => Err(Error::DimensionMismatch(format!(
                            "missing cell ({}, {})",
                            a.id, c.id
                        ))),
                    })
                    .collect()
            })
            .collect()
    }
}

/// The complete group decision problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GroupProblem {
    pub id: String,
    pub alternatives: Vec<Alternative>,
    pub criteria: Vec<Criterion>,
    pub makers: Vec<DecisionMaker>,
    #[serde(default)]
    pub judgments: Vec<DecisionMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorting: Option<SortingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<Vec<Situation>>,
}

/// Top-level problem file: `{"problem": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub problem: GroupProblem,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> serde_json::Result<GroupProblem> {
        serde_json::from_str::<ProblemFile>(text).map(|f| f.problem)
    }

    pub fn to_json_pretty(problem: &GroupProblem) -> String {
        serde_json::to_string_pretty(&ProblemFile {
            problem: problem.clone(),
        })
        .expect("problem documents always serialize")
    }
}

impl GroupProblem {
    pub fn matrix_for(&self, maker: &str) -> Option<&DecisionMatrix> {
        self.judgments.iter().find(|m| m.maker == maker)
    }

    pub fn alternative_ids(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.id.clone()).collect()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.criteria.iter().map(|c| c.direction).collect()
    }

    pub fn criterion_index(&self, id: &str) -> Option<usize> {
        self.criteria.iter().position(|c| c.id == id)
    }

    /// Distinct cell kinds observed anywhere in the judgments.
    pub fn cell_kinds(&self) -> BTreeSet<CellKind> {
        self.judgments
            .iter()
            .flat_map(|m| m.cells.values())
            .flat_map(|row| row.values())
            .map(CellValue::kind)
            .collect()
    }

    /// A copy of the problem containing only one maker, re-weighted to 1.
    pub fn single_maker_view(&self, maker: &str) -> Option<GroupProblem> {
        let matrix = self.matrix_for(maker)?.clone();
        Some(GroupProblem {
            makers: vec![DecisionMaker {
                id: maker.to_string(),
                weight: 1.0,
            }],
            judgments: vec![matrix],
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// No violations of any severity.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// No error-class violations.
    pub fn is_valid(&self) -> bool {
        self.violations.iter().all(|v| v.severity != Severity::Error)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: &str, severity: Severity, location: String, message: String) {
        self.violations.push(Violation {
            code: code.to_string(),
            severity,
            location,
            message,
        });
    }

    fn error(&mut self, code: &str, location: impl Into<String>, message: impl Into<String>) {
        self.push(code, Severity::Error, location.into(), message.into());
    }
}

fn check_ids<'a>(
    report: &mut ValidationReport,
    section: &str,
    ids: impl Iterator<Item = &'a str>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        if id.is_empty() {
            report.error("EMPTY_ID", format!("{section}[{i}]"), "id must be nonempty");
        } else if !seen.insert(id) {
            report.error("DUPLICATE_ID", format!("{section}[{i}]"), format!("duplicate id {id}"));
        }
    }
    seen
}

fn check_weight(report: &mut ValidationReport, location: String, w: f64) {
    if !w.is_finite() || !(0.0..=1.0).contains(&w) {
        report.error("WEIGHT_RANGE", location, format!("weight {w} outside [0, 1]"));
    }
}

/// Checks every structural invariant of the problem.
///
/// Problems are reported, never thrown. With `strict` off, missing cells are
/// downgraded to warnings so partially elicited problems can still be
/// classified.
pub fn validate_problem(problem: &GroupProblem, strict: bool) -> ValidationReport {
    let mut report = ValidationReport::default();

    if problem.alternatives.len() < 2 {
        report.error("TOO_FEW_ALTERNATIVES", "alternatives", "at least two alternatives are required");
    }
    if problem.criteria.is_empty() {
        report.error("NO_CRITERIA", "criteria", "at least one criterion is required");
    }
    if problem.makers.is_empty() {
        report.error("NO_MAKERS", "makers", "at least one decision maker is required");
    }
    let alt_ids = check_ids(&mut report, "alternatives", problem.alternatives.iter().map(|a| a.id.as_str()));
    let crit_ids = check_ids(&mut report, "criteria", problem.criteria.iter().map(|c| c.id.as_str()));
    let maker_ids = check_ids(&mut report, "makers", problem.makers.iter().map(|m| m.id.as_str()));

    for (i, m) in problem.makers.iter().enumerate() {
        check_weight(&mut report, format!("makers[{i}]"), m.weight);
    }
    if !problem.makers.is_empty() {
        let sum: f64 = problem.makers.iter().map(|m| m.weight).sum();
        if !((sum - 1.0).abs() <= WEIGHT_SUM_TOL) {
            report.error("WEIGHT_SUM", "makers", format!("maker weights sum to {sum}"));
        }
    }

    let mut matrices: BTreeMap<&str, usize> = BTreeMap::new();
    for matrix in &problem.judgments {
        let loc = format!("judgments[{}]", matrix.maker);
        if !maker_ids.contains(matrix.maker.as_str()) {
            report.error("UNKNOWN_MAKER", loc.clone(), format!("no maker {}", matrix.maker));
        }
        let count = matrices.entry(matrix.maker.as_str()).or_default();
        *count += 1;
        if *count == 2 {
            report.error("DUPLICATE_MATRIX", loc.clone(), "maker has more than one matrix");
        }

        for (crit, &w) in &matrix.criterion_weights {
            if !crit_ids.contains(crit.as_str()) {
                report.error(
                    "UNKNOWN_CRITERION",
                    format!("{loc}.criterionWeights.{crit}"),
                    format!("no criterion {crit}"),
                );
            }
            check_weight(&mut report, format!("{loc}.criterionWeights.{crit}"), w);
        }
        for c in &problem.criteria {
            if !matrix.criterion_weights.contains_key(&c.id) {
                report.error(
                    "MISSING_WEIGHT",
                    format!("{loc}.criterionWeights.{}", c.id),
                    format!("no weight for criterion {}", c.id),
                );
            }
        }
        let sum: f64 = matrix.criterion_weights.values().sum();
        if !((sum - 1.0).abs() <= WEIGHT_SUM_TOL) {
            report.error(
                "CRITERION_WEIGHT_SUM",
                format!("{loc}.criterionWeights"),
                format!("criterion weights sum to {sum}"),
            );
        }

        for (alt, row) in &matrix.cells {
            if !alt_ids.contains(alt.as_str()) {
                report.error("UNKNOWN_ALTERNATIVE", format!("{loc}.cells.{alt}"), format!("no alternative {alt}"));
            }
            for (crit, cell) in row {
                let cell_loc = format!("{loc}.cells.{alt}.{crit}");
                if !crit_ids.contains(crit.as_str()) {
                    report.error("UNKNOWN_CRITERION", cell_loc.clone(), format!("no criterion {crit}"));
                }
                if let Err(reason) = cell.check() {
                    report.error("BAD_CELL", cell_loc, reason);
                }
            }
        }
        for a in &problem.alternatives {
            for c in &problem.criteria {
                if matrix.cell(&a.id, &c.id).is_none() {
                    let severity = if strict { Severity::Error } else { Severity::Warning };
                    report.push(
                        "MISSING_CELL",
                        severity,
                        format!("{loc}.cells.{}.{}", a.id, c.id),
                        format!("missing cell ({}, {})", a.id, c.id),
                    );
                }
            }
        }
    }
    for m in &problem.makers {
        if !matrices.contains_key(m.id.as_str()) {
            report.error("MISSING_MATRIX", format!("makers.{}", m.id), format!("maker {} has no matrix", m.id));
        }
    }

    if let Some(sorting) = &problem.sorting {
        sorting.validate_into(&problem.criteria, &mut report);
    }
    report
}

pub(crate) fn push_sorting_violation(report: &mut ValidationReport, code: &str, location: String, message: String) {
    report.error(code, location, message);
}

/// Min-max normalizes each column to [0, 1], reversing cost columns.
/// Constant columns map to 0.5.
pub fn normalize_columns(values: &[Vec<f64>], directions: &[Direction]) -> Result<Vec<Vec<f64>>> {
    for (i, row) in values.iter().enumerate() {
        if row.len() != directions.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} values for {} criteria",
                row.len(),
                directions.len()
            )));
        }
    }
    let mut out = values.to_vec();
    for (j, dir) in directions.iter().enumerate() {
        let (lo, hi) = values
            .iter()
            .map(|r| r[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        for row in out.iter_mut() {
            row[j] = if span <= 0.0 {
                0.5
            } else {
                match dir {
                    Direction::Benefit => (row[j] - lo) / span,
                    Direction::Cost => (hi - row[j]) / span,
                }
            };
        }
    }
    Ok(out)
}

/// How crisp planes are brought onto the [0, 1] utility scale before
/// ranking.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `Unit` when every value already lies in [0, 1], otherwise `MinMax`.
    #[default]
    Auto,
    MinMax,
    /// Values are taken as utilities in [0, 1]; cost columns read `1 - v`.
    Unit,
}

pub fn scale_columns(values: &[Vec<f64>], directions: &[Direction], scaling: Scaling) -> Result<Vec<Vec<f64>>> {
    let in_unit = values.iter().flatten().all(|v| (0.0..=1.0).contains(v));
    match scaling {
        Scaling::MinMax => normalize_columns(values, directions),
        Scaling::Auto if !in_unit => normalize_columns(values, directions),
        Scaling::Unit if !in_unit => Err(Error::InvalidParameter(
            "unit scaling requires every value in [0, 1]".into(),
        )),
        Scaling::Auto | Scaling::Unit => Ok(values
            .iter()
            .map(|row| {
                row.iter()
                    .zip(directions)
                    .map(|(&v, d)| match d {
                        Direction::Benefit => v,
                        Direction::Cost => 1.0 - v,
                    })
                    .collect()
            })
            .collect()),
    }
}

/// Rows of normalized utilities in [0, 1], one per alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub alternatives: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(alternatives: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        ScoreMatrix { alternatives, rows }
    }

    pub fn criterion_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub(crate) fn check(&self, weights: &[f64]) -> Result<()> {
        if self.rows.len() != self.alternatives.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows for {} alternatives",
                self.rows.len(),
                self.alternatives.len()
            )));
        }
        if let Some(bad) = self.rows.iter().find(|r| r.len() != weights.len()) {
            return Err(Error::DimensionMismatch(format!(
                "row of {} values against {} weights",
                bad.len(),
                weights.len()
            )));
        }
        Ok(())
    }
}

/// Normalizes a crisp decision matrix into a [`ScoreMatrix`] by min-max.
pub fn normalize_crisp_matrix(
    matrix: &DecisionMatrix,
    alternatives: &[Alternative],
    criteria: &[Criterion],
) -> Result<ScoreMatrix> {
    let values = matrix.crisp_values(alternatives, criteria)?;
    let directions: Vec<Direction> = criteria.iter().map(|c| c.direction).collect();
    Ok(ScoreMatrix::new(
        alternatives.iter().map(|a| a.id.clone()).collect(),
        normalize_columns(&values, &directions)?,
    ))
}

/// Rescales nonnegative weights to sum to one, preserving order.
pub fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = raw.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidParameter(format!("weight {bad} is negative or not finite")));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(raw.iter().map(|w| w / total).collect())
}
