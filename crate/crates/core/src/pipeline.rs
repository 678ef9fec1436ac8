//! The six-stage group decision process: environment, problem, group,
//! scheme, conflict and coordination.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::group::{consensus, ConsensusConfig};
use crate::methods::{rank_group, rank_plane, MethodId, MethodOptions};
use crate::model::{normalize_weights, validate_problem, GroupProblem};
use crate::rank::RankResult;
use crate::scheme::{SchemeDescriptor, SchemeLookup};
use crate::uncertainty::{classify_problem, recommend_methods};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Environment,
    Problem,
    Group,
    Scheme,
    Conflict,
    Coordination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub status: StageStatus,
    pub payload: Value,
}

/// The committed group ranking as it appears in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub method: String,
    pub scores: BTreeMap<String, f64>,
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stages: Vec<StageReport>,
    pub result: Option<ResultSummary>,
}

impl PipelineReport {
    pub fn stage(&self, stage: Stage) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    /// First stage that ended in error, if any.
    pub fn failure(&self) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.status == StageStatus::Error)
    }
}

/// What a completed run needs to be filed as a reusable scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub report: PipelineReport,
    pub descriptor: SchemeDescriptor,
    pub committed: Option<(MethodId, RankResult)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct PipelineOptions {
    /// Forces one method instead of the recommended list.
    pub method: Option<MethodId>,
    pub options: MethodOptions,
    pub consensus: ConsensusConfig,
    /// How many similar past schemes to retrieve.
    pub similar: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            method: None,
            options: MethodOptions::default(),
            consensus: ConsensusConfig::default(),
            similar: 3,
        }
    }
}

fn error_payload(code: &str, message: impl Into<String>) -> Value {
    json!({"error": {"code": code, "message": message.into()}})
}

pub fn run_pipeline(problem: &GroupProblem, options: &PipelineOptions, lookup: Option<&dyn SchemeLookup>) -> PipelineRun {
    let mut stages = Vec::with_capacity(6);
    let mut push = |stage, status, payload| stages.push(StageReport { stage, status, payload });

    let env = classify_problem(problem);
    let descriptor = SchemeDescriptor::of(problem, env.uncertainty_class);
    push(
        Stage::Environment,
        if env.flags.is_empty() { StageStatus::Ok } else { StageStatus::Warning },
        serde_json::to_value(&env).expect("serializable"),
    );

    let validation = validate_problem(problem, true);
    let valid = validation.is_valid();
    let mut payload = serde_json::to_value(&validation).expect("serializable");
    if !valid {
        payload["error"] = json!({"code": "VALIDATION_FAILED", "message": "problem failed strict validation"});
    }
    push(Stage::Problem, if valid { StageStatus::Ok } else { StageStatus::Error }, payload);
    let finish = |stages, descriptor| PipelineRun {
        report: PipelineReport { stages, result: None },
        descriptor,
        committed: None,
    };
    if !valid {
        return finish(stages, descriptor);
    }

    let raw: Vec<f64> = problem.makers.iter().map(|m| m.weight).collect();
    let mut problem = problem.clone();
    let normalized = normalize_weights(&raw).expect("validated maker weights are positive");
    for (m, w) in problem.makers.iter_mut().zip(&normalized) {
        m.weight = *w;
    }
    push(
        Stage::Group,
        StageStatus::Ok,
        json!({
            "makerWeights": problem.makers.iter().map(|m| (m.id.clone(), json!(m.weight))).collect::<serde_json::Map<_, _>>(),
            "rawWeightSum": raw.iter().sum::<f64>(),
            "makerCount": problem.makers.len(),
            "note": "maker weights audited and normalized; organizational analysis not performed",
        }),
    );

    let candidates = match options.method {
        Some(m) => vec![m],
        None => recommend_methods(&env),
    };
    let mut selected: Option<(MethodId, RankResult)> = None;
    let mut evaluated = Vec::new();
    let mut failures = 0;
    for &method in &candidates {
        let group = rank_group(&problem, method, &options.options);
        let per_maker: serde_json::Map<String, Value> = problem
            .judgments
            .iter()
            .map(|m| {
                let v = match rank_plane(&problem, m, method, &options.options) {
                    Ok(r) => json!(r.order),
                    Err(e) => error_payload(e.code(), e.to_string()),
                };
                (m.maker.clone(), v)
            })
            .collect();
        let entry = match group {
            Ok(r) => {
                let entry = json!({"method": method, "status": "ok", "order": r.order, "scores": r.scores, "perMaker": per_maker});
                if selected.is_none() {
                    selected = Some((method, r));
                }
                entry
            }
            Err(e) => {
                failures += 1;
                json!({"method": method, "status": "error", "error": {"code": e.code(), "message": e.to_string()}, "perMaker": per_maker})
            }
        };
        evaluated.push(entry);
    }
    let similar = lookup.map(|l| l.similar(&descriptor, options.similar)).unwrap_or_default();
    let mut payload = json!({
        "recommended": candidates,
        "candidates": evaluated,
        "selected": selected.as_ref().map(|s| s.0),
        "descriptor": descriptor,
        "similarSchemes": similar,
    });
    let Some((method, result)) = selected else {
        payload["error"] = json!({"code": "METHOD_INAPPLICABLE", "message": "no candidate method applies to this problem"});
        push(Stage::Scheme, StageStatus::Error, payload);
        return finish(stages, descriptor);
    };
    push(Stage::Scheme, if failures > 0 { StageStatus::Warning } else { StageStatus::Ok }, payload);

    match consensus(&problem, method, &options.options, &options.consensus) {
        Ok(report) => push(
            Stage::Conflict,
            if report.conflicts.is_empty() { StageStatus::Ok } else { StageStatus::Warning },
            serde_json::to_value(&report).expect("serializable"),
        ),
        Err(e) => push(Stage::Conflict, StageStatus::Error, error_payload(e.code(), e.to_string())),
    }

    push(
        Stage::Coordination,
        StageStatus::Ok,
        json!({"method": method, "result": result}),
    );
    let summary = ResultSummary {
        method: result.method.clone(),
        scores: result.scores.clone(),
        order: result.order.clone(),
    };
    PipelineRun {
        report: PipelineReport {
            stages,
            result: Some(summary),
        },
        descriptor,
        committed: Some((method, result)),
    }
}
