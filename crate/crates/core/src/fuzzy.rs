//! Intuitionistic fuzzy values, the IFWA operator and fuzzy group ranking.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{CellValue, Criterion, DecisionMatrix, GroupProblem, CLOSURE_TOL};
use crate::rank::{compare_scores, order_by, RankResult};

/// Intuitionistic fuzzy value: membership `mu`, non-membership `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ifv {
    pub mu: f64,
    pub nu: f64,
}

impl Ifv {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        let v = Ifv { mu, nu };
        v.check().map_err(|_| Error::InvalidIfv { mu, nu })?;
        Ok(v)
    }

    pub(crate) fn check(&self) -> std::result::Result<(), String> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.mu) || !unit(self.nu) {
            return Err(format!("degrees ({}, {}) outside [0, 1]", self.mu, self.nu));
        }
        if self.mu + self.nu > 1.0 + CLOSURE_TOL {
            return Err(format!("mu + nu = {} exceeds 1", self.mu + self.nu));
        }
        Ok(())
    }

    /// Hesitation degree `1 - mu - nu`.
    pub fn pi(&self) -> f64 {
        1.0 - self.mu - self.nu
    }

    pub fn score(&self) -> f64 {
        ifv_score(*self)
    }

    pub fn accuracy(&self) -> f64 {
        ifv_accuracy(*self)
    }
}

/// `(μa + μb − μa·μb, νa·νb)`
pub fn ifv_add(a: Ifv, b: Ifv) -> Ifv {
    Ifv {
        mu: a.mu + b.mu - a.mu * b.mu,
        nu: a.nu * b.nu,
    }
}

/// `(1 − (1−μ)^λ, ν^λ)` for λ > 0.
pub fn ifv_scale(lambda: f64, a: Ifv) -> Result<Ifv> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BadLambda(lambda));
    }
    Ok(Ifv {
        mu: 1.0 - (1.0 - a.mu).powf(lambda),
        nu: a.nu.powf(lambda),
    })
}

// x^w with 0^0 = 1, so zero-weight inputs drop out of the product.
fn pow_weight(x: f64, w: f64) -> f64 {
    if w == 0.0 {
        1.0
    } else {
        x.powf(w)
    }
}

/// Intuitionistic fuzzy weighted average:
/// `(1 − Π(1−μ_k)^{w_k}, Π ν_k^{w_k})`.
pub fn ifwa(values: &[Ifv], weights: &[f64]) -> Result<Ifv> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values against {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidParameter(format!("weight {w} is negative or not finite")));
    }
    let active: Vec<(Ifv, f64)> = values.iter().copied().zip(weights.iter().copied()).filter(|&(_, w)| w > 0.0).collect();
    if let Some(&(first, _)) = active.first() {
        if active.iter().all(|&(v, _)| v == first) {
            return Ok(first);
        }
    }
    let keep: f64 = values.iter().zip(weights).map(|(v, &w)| pow_weight(1.0 - v.mu, w)).product();
    let nu: f64 = values.iter().zip(weights).map(|(v, &w)| pow_weight(v.nu, w)).product();
    Ok(Ifv { mu: 1.0 - keep, nu })
}

pub fn ifv_score(a: Ifv) -> f64 {
    a.mu - a.nu
}

pub fn ifv_accuracy(a: Ifv) -> f64 {
    a.mu + a.nu
}

/// Orders by score, then accuracy. `Greater` means `a` is preferred.
pub fn ifv_compare(a: Ifv, b: Ifv) -> Ordering {
    compare_scores(ifv_score(b), ifv_score(a)).then_with(|| compare_scores(ifv_accuracy(b), ifv_accuracy(a)))
}

fn ifs_cell(matrix: &DecisionMatrix, alt: &str, crit: &str) -> Result<Ifv> {
    match matrix.cell(alt, crit) {
        Some(CellValue::Ifs(v)) => Ok(*v),
        _ => Err(Error::NonIfsCell {
            alternative: alt.to_string(),
            criterion: crit.to_string(),
        }),
    }
}

/// Ranks one fuzzy decision plane: each alternative's cells are combined
/// across criteria with IFWA under the plane's criterion weights.
pub fn ifwa_plane_rank(
    matrix: &DecisionMatrix,
    alternatives: &[String],
    criteria: &[Criterion],
) -> Result<RankResult> {
    let weights = matrix.weights_for(criteria);
    let overall: Vec<Ifv> = alternatives
        .iter()
        .map(|a| {
            let cells = criteria.iter().map(|c| ifs_cell(matrix, a, &c.id)).collect::<Result<Vec<_>>>()?;
            ifwa(&cells, &weights)
        })
        .collect::<Result<_>>()?;
    let order = order_by(alternatives, |i, j| ifv_compare(overall[j], overall[i]));
    let aggregated: serde_json::Map<String, serde_json::Value> = alternatives
        .iter()
        .zip(&overall)
        .map(|(a, v)| (a.clone(), json!({"mu": v.mu, "nu": v.nu})))
        .collect();
    Ok(RankResult {
        method: "ifwa_group".into(),
        scores: alternatives.iter().cloned().zip(overall.iter().map(|v| v.score())).collect(),
        order,
        diagnostics: Default::default(),
    }
    .with_diagnostic("aggregated", aggregated.into()))
}

/// Fuzzy group ranking: project every maker's plane onto the group plane
/// with IFWA over maker weights, then rank the group plane.
pub fn ifwa_group_rank(problem: &GroupProblem) -> Result<RankResult> {
    let group = crate::group::aggregate_group_matrix(problem)?;
    for a in &problem.alternatives {
        for c in &problem.criteria {
            ifs_cell(&group, &a.id, &c.id)?;
        }
    }
    ifwa_plane_rank(&group, &problem.alternative_ids(), &problem.criteria)
}
