//! Method registry: ids, shared options and dispatch over a decision plane.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classic::{electre1_rank, promethee2_rank, sir_rank, weighted_sum_rank, PreferenceFunction};
use crate::error::{Error, Result};
use crate::fuzzy::ifwa_plane_rank;
use crate::group::aggregate_group_matrix;
use crate::model::{scale_columns, DecisionMatrix, GroupProblem, Scaling, ScoreMatrix};
use crate::rank::RankResult;
use crate::rough::{classify_with_rules, induce_rules, quality_gamma};
use crate::stochastic::{eu_rank, fsd_rank, monte_carlo_stability, stability_rank, UtilityFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    WeightedSum,
    Promethee2,
    Sir,
    Electre1,
    ExpectedUtility,
    MonteCarloStability,
    Fsd,
    IfwaGroup,
    Drsa,
}

impl MethodId {
    pub const ALL: [MethodId; 9] = [
        MethodId::WeightedSum,
        MethodId::Promethee2,
        MethodId::Sir,
        MethodId::Electre1,
        MethodId::ExpectedUtility,
        MethodId::MonteCarloStability,
        MethodId::Fsd,
        MethodId::IfwaGroup,
        MethodId::Drsa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::WeightedSum => "weighted_sum",
            MethodId::Promethee2 => "promethee2",
            MethodId::Sir => "sir",
            MethodId::Electre1 => "electre1",
            MethodId::ExpectedUtility => "expected_utility",
            MethodId::MonteCarloStability => "monte_carlo_stability",
            MethodId::Fsd => "fsd",
            MethodId::IfwaGroup => "ifwa_group",
            MethodId::Drsa => "drsa",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Tunables shared by every method. Defaults are what the pipeline, CLI and
/// HTTP API use unless told otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct MethodOptions {
    pub scaling: Scaling,
    /// Per-criterion preference functions for PROMETHEE II and SIR; absent
    /// criteria use the usual criterion.
    pub preferences: BTreeMap<String, PreferenceFunction>,
    pub concordance_threshold: f64,
    pub discordance_threshold: f64,
    pub utility: UtilityFunction,
    pub samples: usize,
    pub seed: u64,
    pub max_conditions: usize,
}

impl Default for MethodOptions {
    fn default() -> Self {
        MethodOptions {
            scaling: Scaling::Auto,
            preferences: BTreeMap::new(),
            concordance_threshold: 0.6,
            discordance_threshold: 0.4,
            utility: UtilityFunction::Linear,
            samples: 1000,
            seed: 7,
            max_conditions: 3,
        }
    }
}

fn score_matrix(problem: &GroupProblem, plane: &DecisionMatrix, scaling: Scaling) -> Result<ScoreMatrix> {
    let values = plane.crisp_values(&problem.alternatives, &problem.criteria)?;
    Ok(ScoreMatrix::new(
        problem.alternative_ids(),
        scale_columns(&values, &problem.directions(), scaling)?,
    ))
}

/// Runs a method on a single decision plane (one maker's matrix, or the
/// aggregated group matrix) using that plane's criterion weights.
pub fn rank_plane(
    problem: &GroupProblem,
    plane: &DecisionMatrix,
    method: MethodId,
    options: &MethodOptions,
) -> Result<RankResult> {
    let weights = plane.weights_for(&problem.criteria);
    let alternatives = problem.alternative_ids();
    let prefs: Vec<PreferenceFunction> = problem
        .criteria
        .iter()
        .map(|c| options.preferences.get(&c.id).copied().unwrap_or_default())
        .collect();
    match method {
        MethodId::WeightedSum => weighted_sum_rank(&score_matrix(problem, plane, options.scaling)?, &weights),
        MethodId::Promethee2 => promethee2_rank(&score_matrix(problem, plane, options.scaling)?, &weights, &prefs),
        MethodId::Sir => sir_rank(&score_matrix(problem, plane, options.scaling)?, &weights, &prefs),
        MethodId::Electre1 => electre1_rank(
            &score_matrix(problem, plane, options.scaling)?,
            &weights,
            options.concordance_threshold,
            options.discordance_threshold,
        ),
        MethodId::ExpectedUtility => eu_rank(plane, &alternatives, &problem.criteria, options.utility, &weights),
        MethodId::MonteCarloStability => {
            let freq = monte_carlo_stability(
                plane,
                &alternatives,
                &problem.criteria,
                &weights,
                options.samples,
                options.seed,
                options.scaling,
            )?;
            Ok(stability_rank(&freq))
        }
        MethodId::Fsd => fsd_rank(plane, &alternatives, &problem.criteria, &weights),
        MethodId::IfwaGroup => ifwa_plane_rank(plane, &alternatives, &problem.criteria),
        MethodId::Drsa => drsa_rank(problem, plane, options),
    }
}

/// Induces rules from the problem's sorting table and places every
/// alternative in a class interval; alternatives rank by interval midpoint.
fn drsa_rank(problem: &GroupProblem, plane: &DecisionMatrix, options: &MethodOptions) -> Result<RankResult> {
    let block = problem.sorting.as_ref().ok_or_else(|| Error::MethodInapplicable {
        method: MethodId::Drsa.to_string(),
        reason: "problem has no sorting table".into(),
    })?;
    let table = block.to_table(&problem.criteria)?;
    let rules = induce_rules(&table, options.max_conditions)?;
    let values = plane.crisp_values(&problem.alternatives, &problem.criteria)?;
    let alternatives = problem.alternative_ids();
    let intervals: Vec<(usize, usize)> = values
        .iter()
        .map(|row| classify_with_rules(&rules, &problem.criteria, row, table.class_count()))
        .collect();
    let scores: Vec<f64> = intervals.iter().map(|&(lo, hi)| (lo + hi) as f64 / 2.0).collect();
    let table_json: serde_json::Map<String, serde_json::Value> = alternatives
        .iter()
        .zip(&intervals)
        .map(|(a, (lo, hi))| (a.clone(), json!([lo, hi])))
        .collect();
    Ok(RankResult::from_scores("drsa", &alternatives, &scores)
        .with_diagnostic("classIntervals", table_json.into())
        .with_diagnostic("qualityOfApproximation", json!(quality_gamma(&table)))
        .with_diagnostic("ruleCount", json!(rules.len())))
}

/// Aggregates the group plane and ranks it.
pub fn rank_group(problem: &GroupProblem, method: MethodId, options: &MethodOptions) -> Result<RankResult> {
    let group = aggregate_group_matrix(problem)?;
    rank_plane(problem, &group, method, options)
}
