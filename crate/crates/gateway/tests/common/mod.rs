#![allow(dead_code)]

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use gdss_core::model::{Alternative, CellValue, Criterion, DecisionMaker, DecisionMatrix, Direction, GroupProblem};
use gdss_gateway::api::{router, AppState};
use gdss_store::{Clock, KnowledgeStore};
use http_body_util::BodyExt;
use rand::Rng;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn app(dir: &tempfile::TempDir) -> Router {
    let store = KnowledgeStore::open_with_clock(dir.path(), Clock::epoch()).unwrap();
    router(AppState::new(store), None)
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("bad json ({e}): {}", self.text))
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<&Value>) -> Reply {
    let mut request = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            request = request.header("content-type", "application/json");
            Body::from(serde_json::to_vec(v).unwrap())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

/// Creates a session from the problem's skeleton, then submits every
/// maker's matrix one request at a time. Returns the session id.
pub async fn submit_problem(app: &Router, problem: &GroupProblem) -> String {
    let mut skeleton = problem.clone();
    skeleton.judgments.clear();
    let created = call(app, Method::POST, "/api/sessions", Some(&serde_json::json!({"problem": skeleton}))).await;
    assert_eq!(created.status, StatusCode::CREATED, "{}", created.text);
    let id = created.json()["id"].as_str().unwrap().to_string();
    for matrix in &problem.judgments {
        let uri = format!("/api/sessions/{id}/judgments/{}", matrix.maker);
        let reply = call(app, Method::PUT, &uri, Some(&serde_json::to_value(matrix).unwrap())).await;
        assert_eq!(reply.status, StatusCode::OK, "{}", reply.text);
    }
    id
}

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|w| w / sum).collect()
}

#[derive(Clone, Copy, Debug)]
pub enum Kind {
    Crisp,
    Ifs,
    Dist,
}

fn random_cell(rng: &mut impl Rng, kind: Kind) -> CellValue {
    match kind {
        Kind::Crisp => CellValue::Crisp((rng.random_range(0.0..100.0f64) * 100.0).round() / 100.0),
        Kind::Ifs => {
            let mu: f64 = rng.random_range(0.0..1.0);
            let nu: f64 = rng.random_range(0.0..(1.0 - mu));
            CellValue::Ifs(gdss_core::fuzzy::Ifv { mu, nu })
        }
        Kind::Dist => {
            let k = rng.random_range(1..=3);
            let p = random_weights(rng, k);
            let outcomes = p.into_iter().map(|p| (rng.random_range(0.0..10.0f64).round(), p)).collect();
            CellValue::Dist(outcomes)
        }
    }
}

/// A complete, strictly valid problem with one cell kind throughout.
pub fn random_problem(rng: &mut impl Rng, id: &str, kind: Kind) -> GroupProblem {
    let n = rng.random_range(2..=5);
    let m = rng.random_range(1..=4);
    let k = rng.random_range(1..=3);
    let alternatives: Vec<Alternative> = ids("a", n)
        .into_iter()
        .map(|id| Alternative {
            name: id.to_uppercase(),
            id,
        })
        .collect();
    let criteria: Vec<Criterion> = ids("c", m)
        .into_iter()
        .map(|id| Criterion {
            name: id.to_uppercase(),
            id,
            direction: if matches!(kind, Kind::Ifs) || rng.random_bool(0.6) {
                Direction::Benefit
            } else {
                Direction::Cost
            },
        })
        .collect();
    let maker_weights = random_weights(rng, k);
    let makers: Vec<DecisionMaker> = ids("dm", k)
        .into_iter()
        .zip(maker_weights)
        .map(|(id, weight)| DecisionMaker { id, weight })
        .collect();
    let judgments = makers
        .iter()
        .map(|mk| {
            let mut matrix = DecisionMatrix::new(mk.id.clone());
            let w = random_weights(rng, m);
            matrix.criterion_weights = criteria.iter().map(|c| c.id.clone()).zip(w).collect();
            for a in &alternatives {
                for c in &criteria {
                    matrix.set_cell(&a.id, &c.id, random_cell(rng, kind));
                }
            }
            matrix
        })
        .collect();
    GroupProblem {
        id: id.to_string(),
        alternatives,
        criteria,
        makers,
        judgments,
        sorting: None,
        flags: None,
    }
}
