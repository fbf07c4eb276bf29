mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use common::{assert_schema, is_valid, kbs};
use http_body_util::BodyExt;
use mu_service::http::router;
use mu_service::SessionManager;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Client {
    app: axum::Router,
}

impl Client {
    fn new(manager: SessionManager) -> Self {
        Client {
            app: router(Arc::new(manager)),
        }
    }

    async fn call(&self, method: Method, path: &str, body: Option<&str>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(path);
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("not JSON: {}", String::from_utf8_lossy(&bytes)));
        (status, value)
    }

    async fn get(&self, path: &str) -> (StatusCode, Value) {
        self.call(Method::GET, path, None).await
    }

    async fn post(&self, path: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, Some(&body.to_string())).await
    }

    /// Creates a session and checks the response shape.
    async fn create(&self) -> String {
        let (status, body) = self.post("/v1/sessions", json!({"kb": "chest-pain"})).await;
        assert_eq!(status, StatusCode::CREATED);
        assert_schema("StateResponse", &body);
        body["session"].as_str().unwrap().to_string()
    }
}

fn error(status: StatusCode, body: &Value, expected_status: StatusCode, code: &str) {
    assert_eq!(status, expected_status, "{body}");
    assert_schema("Error", body);
    assert_eq!(body["code"], code);
}

#[tokio::test]
async fn full_workup_over_http_is_schema_valid() {
    let c = Client::new(SessionManager::in_memory(kbs()));
    let (status, list) = c.get("/v1/kbs").await;
    assert_eq!(status, StatusCode::OK);
    assert_schema("KbList", &list);

    let id = c.create().await;
    let base = format!("/v1/sessions/{id}");
    let patient = common::classic_patient();
    for _ in 0..30 {
        let (status, rec) = c.get(&format!("{base}/recommendation")).await;
        assert_eq!(status, StatusCode::OK);
        assert_schema("RecommendationResponse", &rec);
        let r = &rec["recommendation"];
        let asks: Vec<String> = match r["type"].as_str().unwrap() {
            "terminal" => break,
            "presenting" => serde_json::from_value(r["findings"].clone()).unwrap(),
            _ => serde_json::from_value(r["chosen"]["asks"].clone()).unwrap(),
        };
        for f in asks {
            let (status, body) = c
                .post(&format!("{base}/findings"), json!({"finding": f, "value": patient[&f]}))
                .await;
            assert_eq!(status, StatusCode::OK, "{body}");
            assert_schema("RecordFindingResponse", &body);
        }
        for q in [
            json!({"class": "state", "node": "angina", "parameter": "belief"}),
            json!({"class": "change", "target": "angina", "direction": "increase", "ceiling": {"monetary": "low"}}),
            json!({"class": "effect", "finding": "sex"}),
            json!({"class": "discriminate", "h1": "angina", "h2": "esophageal-spasm"}),
            json!({"class": "focus", "kind": "cluster", "condition": "belief at-least supported"}),
            json!({"class": "focus", "structural": {"supports": "angina"}}),
        ] {
            let (status, body) = c.post(&format!("{base}/query"), q.clone()).await;
            assert_eq!(status, StatusCode::OK, "{q}: {body}");
            assert_schema("QueryResponse", &body);
        }
        let (status, state) = c.get(&format!("{base}/state")).await;
        assert_eq!(status, StatusCode::OK);
        assert_schema("StateResponse", &state);
    }
    let (_, state) = c.get(&format!("{base}/state")).await;
    assert_eq!(state["status"], "terminated");
    assert_eq!(state["beliefs"]["angina"], "confirmed");
    let (status, trace) = c.get(&format!("{base}/trace")).await;
    assert_eq!(status, StatusCode::OK);
    assert_schema("TraceDocument", &trace);
    let actions: Vec<&str> = trace["trace"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["chosen"].as_str().unwrap())
        .collect();
    assert_eq!(
        actions,
        ["ask-age", "ask-sex", "ask-episode", "ekg", "trial-therapy", "stress-test", "angiogram"]
    );
}

#[tokio::test]
async fn errors_carry_codes_and_statuses() {
    let c = Client::new(SessionManager::in_memory(kbs()));
    let (s, b) = c.post("/v1/sessions", json!({"kb": "nope"})).await;
    error(s, &b, StatusCode::NOT_FOUND, "unknown-kb");
    let (s, b) = c.post("/v1/sessions", json!({"knowledge": 1})).await;
    error(s, &b, StatusCode::BAD_REQUEST, "malformed-request");
    let (s, b) = c.call(Method::POST, "/v1/sessions", Some("{not json")).await;
    error(s, &b, StatusCode::BAD_REQUEST, "malformed-request");
    let (s, b) = c.get("/v1/sessions/ffff/state").await;
    error(s, &b, StatusCode::NOT_FOUND, "unknown-session");
    let (s, b) = c.get("/v2/anything").await;
    error(s, &b, StatusCode::NOT_FOUND, "not-found");

    let id = c.create().await;
    let base = format!("/v1/sessions/{id}");
    let (s, b) = c.post(&format!("{base}/findings"), json!({"finding": "sex", "value": "other"})).await;
    error(s, &b, StatusCode::UNPROCESSABLE_ENTITY, "out-of-domain-value");
    let (s, b) = c.post(&format!("{base}/findings"), json!({"finding": "height", "value": "tall"})).await;
    error(s, &b, StatusCode::UNPROCESSABLE_ENTITY, "unknown-finding");
    let (s, b) = c.post(&format!("{base}/findings"), json!({"finding": "sex"})).await;
    error(s, &b, StatusCode::BAD_REQUEST, "malformed-request");
    let (s, b) = c.post(&format!("{base}/query"), json!({"class": "guess"})).await;
    error(s, &b, StatusCode::BAD_REQUEST, "malformed-request");
    let (s, b) = c
        .post(&format!("{base}/query"), json!({"class": "state", "node": "angina", "parameter": "mood"}))
        .await;
    error(s, &b, StatusCode::UNPROCESSABLE_ENTITY, "unknown-parameter");
    let (s, b) = c
        .post(&format!("{base}/query"), json!({"class": "discriminate", "h1": "angina", "h2": "age"}))
        .await;
    error(s, &b, StatusCode::UNPROCESSABLE_ENTITY, "wrong-kind");
    let (s, b) = c
        .post(&format!("{base}/query"), json!({"class": "focus", "condition": "belief at-least"}))
        .await;
    error(s, &b, StatusCode::BAD_REQUEST, "malformed-request");
    assert!(b["location"]["column"].as_u64().unwrap() >= 1);

    c.post(&format!("{base}/findings"), json!({"finding": "ekg-result", "value": "ischemic-changes"})).await;
    c.post(&format!("{base}/findings"), json!({"finding": "during-episode", "value": true})).await;
    c.post(&format!("{base}/findings"), json!({"finding": "age", "value": 30})).await;
    let (s, b) = c.post(&format!("{base}/findings"), json!({"finding": "sex", "value": "female"})).await;
    error(s, &b, StatusCode::CONFLICT, "inconsistent-evidence");

    let (_, state) = c.get(&format!("{base}/state")).await;
    assert_eq!(state["seq"], 4, "rejected calls append nothing");
}

#[tokio::test]
async fn terminated_session_rejects_findings() {
    let c = Client::new(SessionManager::in_memory(kbs()));
    let id = c.create().await;
    let base = format!("/v1/sessions/{id}");
    c.post(&format!("{base}/findings"), json!({"finding": "substernal-pain", "value": "absent"})).await;
    let (_, rec) = c.get(&format!("{base}/recommendation")).await;
    assert_eq!(rec["recommendation"]["type"], "terminal");
    assert_eq!(rec["status"], "terminated");
    let (s, b) = c.post(&format!("{base}/findings"), json!({"finding": "age", "value": "older"})).await;
    error(s, &b, StatusCode::CONFLICT, "session-terminated");
}

#[tokio::test]
async fn server_restart_resumes_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let (id, state, trace) = {
        let c = Client::new(SessionManager::open(kbs(), dir.path()).unwrap());
        let id = c.create().await;
        let base = format!("/v1/sessions/{id}");
        c.post(&format!("{base}/findings"), json!({"finding": "substernal-pain", "value": "present"})).await;
        c.get(&format!("{base}/recommendation")).await;
        c.post(&format!("{base}/findings"), json!({"finding": "age", "value": 70})).await;
        c.post(&format!("{base}/query"), json!({"class": "effect", "finding": "sex", "mode": "semantic"})).await;
        c.get(&format!("{base}/recommendation")).await;
        let (_, state) = c.get(&format!("{base}/state")).await;
        let (_, trace) = c.get(&format!("{base}/trace")).await;
        (id, state, trace)
    };
    let c = Client::new(SessionManager::open(kbs(), dir.path()).unwrap());
    let base = format!("/v1/sessions/{id}");
    assert_eq!(c.get(&format!("{base}/state")).await.1, state);
    assert_eq!(c.get(&format!("{base}/trace")).await.1, trace);
    assert_eq!(state["status"], "awaiting-input");
}

#[test]
fn schemas_reject_what_they_should() {
    assert!(!is_valid("Error", &json!({"code": "x"})));
    assert!(!is_valid("Error", &json!({"code": "Bad Code", "message": ""})));
    assert!(is_valid("Error", &json!({"code": "unknown-kb", "message": "", "location": {"line": 1, "column": 2}})));
    assert!(!is_valid("BeliefLevel", &json!("maybe")));
    assert!(!is_valid("SessionEvent", &json!({"seq": 1, "timestamp": "yesterday", "kind": "created", "payload": {"session": "0123456789abcdef0123456789abcdef", "kb": "k"}})));
    assert!(!is_valid("SessionEvent", &json!({"seq": 1, "timestamp": "2026-01-01T00:00:00Z", "kind": "created", "payload": {"kb": "k"}})));
    assert!(!is_valid("QueryRequest", &json!({"class": "change", "target": "a", "direction": "sideways"})));
    assert!(is_valid("QueryRequest", &json!({"class": "focus"})));
    assert!(!is_valid("Recommendation", &json!({"type": "terminal"})));
    assert!(!is_valid("ChangePlan", &json!({"assignments": {}, "resulting_belief": "supported", "rank_change": 1, "supplying_actions": null, "cost": null})));
}

#[test]
fn request_types_match_their_schemas() {
    use mu_service::protocol::{Ceiling, QueryRequest, RecordFindingRequest};
    let requests = [
        QueryRequest::State { node: "a".into(), parameter: "belief".into() },
        QueryRequest::Change { target: "a".into(), direction: mu_core::query::Direction::Decrease, ceiling: Some(Ceiling::default()) },
        QueryRequest::Effect { finding: "f".into(), mode: Default::default() },
        QueryRequest::Discriminate { h1: "a".into(), h2: "b".into(), mode: Default::default() },
        QueryRequest::Focus { kind: None, condition: Some("triggered".into()), structural: Some(mu_core::query::Structural::Detracts("a".into())) },
    ];
    for r in &requests {
        let v = serde_json::to_value(r).unwrap();
        assert_schema("QueryRequest", &v);
        assert_eq!(&serde_json::from_value::<QueryRequest>(v).unwrap(), r);
    }
    for v in [json!("x"), json!(true), json!(3.5), Value::Null] {
        let body = json!({"finding": "f", "value": v});
        assert_schema("RecordFindingRequest", &body);
        serde_json::from_value::<RecordFindingRequest>(body).unwrap();
    }
    assert!(!common::schema_names().is_empty());
}
