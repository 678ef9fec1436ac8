//! Pipeline execution shared by the `pipeline` command and the session API,
//! so both produce the same report for the same problem and store state.

use gdss_core::{run_pipeline, GroupProblem, PipelineOptions, PipelineRun, ProblemFile, SchemeLookup};
use gdss_store::{KnowledgeStore, SessionRecord, StoreError};
use serde::Serialize;

/// Pretty JSON with a trailing newline; every document the gateway emits
/// goes through here.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    text
}

pub fn scheme_id(session_id: &str) -> String {
    format!("scheme-{session_id}")
}

/// Unguessable session token.
pub fn random_token() -> String {
    format!("{:032x}", rand::random::<u128>())
}

/// Runs the pipeline with similar-scheme retrieval from `store` and, when a
/// ranking was committed, files the scheme and persists the session under
/// `session_id`.
pub fn execute(problem: &GroupProblem, store: Option<&KnowledgeStore>, session_id: &str) -> Result<PipelineRun, StoreError> {
    let lookup = store.map(|s| s as &dyn SchemeLookup);
    let run = run_pipeline(problem, &PipelineOptions::default(), lookup);
    if let (Some(store), Some((method, result))) = (store, &run.committed) {
        let scheme = scheme_id(session_id);
        store.file_generated_scheme(&scheme, run.descriptor, *method, result.order.clone())?;
        store.persist_session(&SessionRecord {
            id: session_id.to_string(),
            problem: serde_json::to_value(ProblemFile { problem: problem.clone() }).expect("problems serialize"),
            report: serde_json::to_value(&run.report).expect("reports serialize"),
            scheme_refs: vec![scheme],
        })?;
    }
    Ok(run)
}
