//! Certain-information ranking: weighted-sum utility and the outranking
//! family (PROMETHEE II, SIR, ELECTRE I).
//!
//! All methods take a [`ScoreMatrix`] of normalized utilities, so a higher
//! value is always better regardless of the criterion's original direction.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::ScoreMatrix;
use crate::rank::RankResult;

/// Preference degree as a function of the utility difference on one
/// criterion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum PreferenceFunction {
    #[default]
    Usual,
    /// Zero up to `q`, linear ramp to one at `p`.
    Linear { q: f64, p: f64 },
}

impl PreferenceFunction {
    pub fn linear(q: f64, p: f64) -> Result<Self> {
        let f = PreferenceFunction::Linear { q, p };
        f.check()?;
        Ok(f)
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            PreferenceFunction::Usual => Ok(()),
            PreferenceFunction::Linear { q, p } if q >= 0.0 && q < p && p.is_finite() => Ok(()),
            PreferenceFunction::Linear { q, p } => Err(Error::BadThresholds(format!(
                "linear preference needs 0 <= q < p, got q={q}, p={p}"
            ))),
        }
    }
}

/// Preference degree in [0, 1] for a utility difference `d`.
pub fn pairwise_preference(d: f64, f: PreferenceFunction) -> Result<f64> {
    f.check()?;
    Ok(match f {
        PreferenceFunction::Usual => {
            if d > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        PreferenceFunction::Linear { q, p } => {
            if d <= q {
                0.0
            } else if d <= p {
                (d - q) / (p - q)
            } else {
                1.0
            }
        }
    })
}

fn check_prefs(matrix: &ScoreMatrix, weights: &[f64], prefs: &[PreferenceFunction]) -> Result<()> {
    matrix.check(weights)?;
    if prefs.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} preference functions for {} criteria",
            prefs.len(),
            weights.len()
        )));
    }
    prefs.iter().try_for_each(PreferenceFunction::check)
}

fn require_pairs(matrix: &ScoreMatrix) -> Result<()> {
    if matrix.alternatives.len() < 2 {
        return Err(Error::DimensionMismatch("at least two alternatives are required".into()));
    }
    Ok(())
}

/// `score(a) = Σ_j w_j · r_aj`.
pub fn weighted_sum_rank(matrix: &ScoreMatrix, weights: &[f64]) -> Result<RankResult> {
    matrix.check(weights)?;
    let scores: Vec<f64> = matrix
        .rows
        .iter()
        .map(|row| row.iter().zip(weights).map(|(r, w)| r * w).sum())
        .collect();
    Ok(RankResult::from_scores("weighted_sum", &matrix.alternatives, &scores))
}

/// Per-criterion preference degrees `P_j(r_aj - r_bj)`, indexed `[j][a][b]`.
fn preference_tensor(matrix: &ScoreMatrix, prefs: &[PreferenceFunction]) -> Vec<Vec<Vec<f64>>> {
    let n = matrix.rows.len();
    prefs
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            if a == b {
                                0.0
                            } else {
                                pairwise_preference(matrix.rows[a][j] - matrix.rows[b][j], f)
                                    .expect("preference functions checked")
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Positive, negative and net outranking flows per alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTable {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    pub net: Vec<f64>,
}

/// PROMETHEE II flows.
pub fn promethee2_flows(matrix: &ScoreMatrix, weights: &[f64], prefs: &[PreferenceFunction]) -> Result<FlowTable> {
    check_prefs(matrix, weights, prefs)?;
    require_pairs(matrix)?;
    let n = matrix.rows.len();
    let tensor = preference_tensor(matrix, prefs);
    let pi = |a: usize, b: usize| -> f64 { weights.iter().enumerate().map(|(j, w)| w * tensor[j][a][b]).sum() };
    let scale = 1.0 / (n as f64 - 1.0);
    let mut positive = vec![0.0; n];
    let mut negative = vec![0.0; n];
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            positive[a] += pi(a, b);
            negative[a] += pi(b, a);
        }
        positive[a] *= scale;
        negative[a] *= scale;
    }
    let net = positive.iter().zip(&negative).map(|(p, m)| p - m).collect();
    Ok(FlowTable { positive, negative, net })
}

fn flow_map(ids: &[String], values: &[f64]) -> serde_json::Value {
    ids.iter()
        .zip(values)
        .map(|(id, v)| (id.clone(), json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

pub fn promethee2_rank(matrix: &ScoreMatrix, weights: &[f64], prefs: &[PreferenceFunction]) -> Result<RankResult> {
    let flows = promethee2_flows(matrix, weights, prefs)?;
    let ids = &matrix.alternatives;
    Ok(RankResult::from_scores("promethee2", ids, &flows.net)
        .with_diagnostic("positiveFlow", flow_map(ids, &flows.positive))
        .with_diagnostic("negativeFlow", flow_map(ids, &flows.negative)))
}

/// SIR superiority and inferiority flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirFlows {
    pub superiority: Vec<f64>,
    pub inferiority: Vec<f64>,
}

pub fn sir_flows(matrix: &ScoreMatrix, weights: &[f64], prefs: &[PreferenceFunction]) -> Result<SirFlows> {
    check_prefs(matrix, weights, prefs)?;
    require_pairs(matrix)?;
    let n = matrix.rows.len();
    let tensor = preference_tensor(matrix, prefs);
    let mut superiority = vec![0.0; n];
    let mut inferiority = vec![0.0; n];
    for (j, w) in weights.iter().enumerate() {
        for a in 0..n {
            let s: f64 = (0..n).filter(|&b| b != a).map(|b| tensor[j][a][b]).sum();
            let i: f64 = (0..n).filter(|&b| b != a).map(|b| tensor[j][b][a]).sum();
            superiority[a] += w * s;
            inferiority[a] += w * i;
        }
    }
    Ok(SirFlows { superiority, inferiority })
}

/// Ranks by the n-flow, superiority minus inferiority.
pub fn sir_rank(matrix: &ScoreMatrix, weights: &[f64], prefs: &[PreferenceFunction]) -> Result<RankResult> {
    let flows = sir_flows(matrix, weights, prefs)?;
    let net: Vec<f64> = flows
        .superiority
        .iter()
        .zip(&flows.inferiority)
        .map(|(s, i)| s - i)
        .collect();
    let ids = &matrix.alternatives;
    Ok(RankResult::from_scores("sir", ids, &net)
        .with_diagnostic("superiorityFlow", flow_map(ids, &flows.superiority))
        .with_diagnostic("inferiorityFlow", flow_map(ids, &flows.inferiority)))
}

/// Concordance, discordance and the crisp outranking relation.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectreRelation {
    pub concordance: Vec<Vec<f64>>,
    pub discordance: Vec<Vec<f64>>,
    pub outranks: Vec<Vec<bool>>,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::BadThresholds(format!("{name} = {v} outside [0, 1]")))
    }
}

pub fn electre1_relation(matrix: &ScoreMatrix, weights: &[f64], c_hat: f64, d_hat: f64) -> Result<ElectreRelation> {
    check_unit("concordance threshold", c_hat)?;
    check_unit("discordance threshold", d_hat)?;
    matrix.check(weights)?;
    require_pairs(matrix)?;
    let rows = &matrix.rows;
    let n = rows.len();
    let mut concordance = vec![vec![0.0; n]; n];
    let mut discordance = vec![vec![0.0; n]; n];
    let mut outranks = vec![vec![false; n]; n];
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            let c: f64 = weights
                .iter()
                .enumerate()
                .filter(|&(j, _)| rows[a][j] >= rows[b][j])
                .map(|(_, w)| w)
                .sum();
            let d = (0..weights.len())
                .map(|j| (rows[b][j] - rows[a][j]).max(0.0))
                .fold(0.0, f64::max);
            concordance[a][b] = c;
            discordance[a][b] = d;
            outranks[a][b] = c >= c_hat && d <= d_hat;
        }
    }
    Ok(ElectreRelation {
        concordance,
        discordance,
        outranks,
    })
}

/// ELECTRE I scored by net qualification: how many alternatives `a`
/// outranks minus how many outrank `a`.
pub fn electre1_rank(matrix: &ScoreMatrix, weights: &[f64], c_hat: f64, d_hat: f64) -> Result<RankResult> {
    let rel = electre1_relation(matrix, weights, c_hat, d_hat)?;
    let n = matrix.rows.len();
    let scores: Vec<f64> = (0..n)
        .map(|a| {
            let wins = (0..n).filter(|&b| rel.outranks[a][b]).count() as f64;
            let losses = (0..n).filter(|&b| rel.outranks[b][a]).count() as f64;
            wins - losses
        })
        .collect();
    let ids = &matrix.alternatives;
    let pairs: Vec<[&str; 2]> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| rel.outranks[a][b])
        .map(|(a, b)| [ids[a].as_str(), ids[b].as_str()])
        .collect();
    Ok(RankResult::from_scores("electre1", ids, &scores)
        .with_diagnostic("outranking", json!(pairs))
        .with_diagnostic("concordanceThreshold", json!(c_hat))
        .with_diagnostic("discordanceThreshold", json!(d_hat)))
}
