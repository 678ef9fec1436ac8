use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Scores closer than this are treated as tied and fall back to id order.
pub const SCORE_TIE_TOL: f64 = 1e-12;

/// Output of one ranking method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub method: String,
    pub scores: BTreeMap<String, f64>,
    /// Best first.
    pub order: Vec<String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub diagnostics: Map<String, Value>,
}

impl RankResult {
    /// Builds a result ordered by score descending, ties broken by id.
    pub fn from_scores(method: &str, ids: &[String], scores: &[f64]) -> Self {
        debug_assert_eq!(ids.len(), scores.len());
        let order = order_by(ids, |a, b| compare_scores(scores[a], scores[b]));
        RankResult {
            method: method.to_string(),
            scores: ids.iter().cloned().zip(scores.iter().copied()).collect(),
            order,
            diagnostics: Map::new(),
        }
    }

    pub fn with_diagnostic(mut self, key: &str, value: Value) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    pub fn top(&self) -> Option<&str> {
        self.order.first().map(String::as_str)
    }

    /// Zero-based position of an alternative in the order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.order.iter().position(|o| o == id)
    }
}

fn quantize(x: f64) -> i64 {
    (x / SCORE_TIE_TOL).round() as i64
}

/// Total order on scores, higher first, with sub-tolerance differences tied.
pub fn compare_scores(a: f64, b: f64) -> Ordering {
    quantize(b).cmp(&quantize(a))
}

/// Sorts ids with `better` (which yields `Less` when the first index ranks
/// higher), breaking remaining ties lexicographically by id.
pub fn order_by(ids: &[String], better: impl Fn(usize, usize) -> Ordering) -> Vec<String> {
    let mut idx: Vec<usize> = (0..ids.len()).collect();
    idx.sort_by(|&a, &b| better(a, b).then_with(|| ids[a].cmp(&ids[b])));
    idx.into_iter().map(|i| ids[i].clone()).collect()
}
