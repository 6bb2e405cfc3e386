//! The session API end to end through the router, without a socket.

use std::collections::BTreeMap;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use ose_cli::server::{app, AppState, Defaults};
use ose_planner::fixtures::{audit_seeded_db, pump_carter, sealed_cavity, seed_db, seed_tools};
use ose_planner::matching::{CustomConfig, Selection};
use ose_planner::ose::CuttingParam;
use ose_planner::pipeline::{run_pipeline, PipelineOptions};
use ose_planner::session::SessionStore;
use ose_planner::transform::Tolerances;

struct Service {
    router: Router,
    _dir: tempfile::TempDir,
}

fn service() -> Service {
    let dir = tempfile::tempdir().unwrap();
    let router = with_store(dir.path());
    Service { router, _dir: dir }
}

fn with_store(dir: &std::path::Path) -> Router {
    let defaults = Defaults {
        part: Some(pump_carter()),
        db: seed_db(),
        tools: seed_tools(),
        tolerances: Tolerances::default(),
    };
    app(AppState::new(SessionStore::open(dir).unwrap(), defaults))
}

async fn call(router: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>, Option<String>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(serde_json::to_vec(&v).unwrap())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = router.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let stale = res
        .headers()
        .get("x-plan-stale")
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, stale)
}

async fn json_call(router: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes, _) = call(router, method, uri, body).await;
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&bytes)))
    };
    (status, v)
}

async fn create(router: &Router) -> String {
    let (status, v) = json_call(router, Method::POST, "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

/// A face whose second candidate shares the OSE of the first, and that
/// candidate's id.
async fn alternative(router: &Router, id: &str) -> (String, String) {
    let (_, faces) = json_call(router, Method::GET, &format!("/sessions/{id}/faces"), None).await;
    faces
        .as_array()
        .unwrap()
        .iter()
        .find_map(|f| {
            let c = f["candidates"].as_array()?;
            (c.len() >= 2 && c[0]["ose"] == c[1]["ose"]).then(|| {
                (
                    f["attributes"]["face"].as_str().unwrap().to_string(),
                    c[1]["id"].as_str().unwrap().to_string(),
                )
            })
        })
        .unwrap()
}

#[tokio::test]
async fn created_session_proposes_defaults_and_exports_the_batch_plan() {
    let s = service();
    let id = create(&s.router).await;
    assert_eq!(id, "s0001");

    let (status, summary) = json_call(&s.router, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(summary["version"], 0);
    assert_eq!(summary["faces"], 24);
    assert_eq!(summary["stale"], false);
    assert!(summary["selections"].as_object().unwrap().values().all(|v| v.is_string()));

    let (status, cands) = json_call(&s.router, Method::GET, &format!("/sessions/{id}/faces/FLOOR/candidates"), None).await;
    assert_eq!(status, StatusCode::OK);
    let cands = cands.as_array().unwrap();
    assert_eq!(cands[0]["rank"], 1);
    assert_eq!(cands[0]["selected"], true);

    let batch = run_pipeline(&pump_carter(), &seed_db(), &seed_tools(), &PipelineOptions::default()).unwrap();
    let (status, body, stale) = call(&s.router, Method::GET, &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(String::from_utf8(body).unwrap(), batch.document.json);
    assert_eq!(stale.as_deref(), Some("false"));
    let (_, text, _) = call(&s.router, Method::GET, &format!("/sessions/{id}/plan?format=text"), None).await;
    assert_eq!(String::from_utf8(text).unwrap(), batch.document.text);
}

#[tokio::test]
async fn level_2_selection_persists_and_rebuild_reflects_it() {
    let s = service();
    let id = create(&s.router).await;
    let (face, alt) = alternative(&s.router, &id).await;
    let uri = format!("/sessions/{id}/faces/{face}/selection");
    let sel = serde_json::to_value(Selection::Choose { candidate: alt.clone() }).unwrap();

    let (status, v) = json_call(&s.router, Method::PUT, &uri, Some(json!({ "version": 0, "selection": sel }))).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 1);
    assert_eq!(v["stale"], true);
    assert_eq!(v["face"]["selected"], alt.as_str());

    // a fresh read sees the selection with every alternative still listed
    let (_, cands) = json_call(&s.router, Method::GET, &format!("/sessions/{id}/faces/{face}/candidates"), None).await;
    let cands = cands.as_array().unwrap();
    assert!(cands.len() >= 2);
    let chosen: Vec<&Value> = cands.iter().filter(|c| c["selected"] == true).collect();
    assert_eq!(chosen.len(), 1);
    assert_eq!(chosen[0]["id"], alt.as_str());
    assert_eq!(chosen[0]["origin"], "ExpertChoice");

    let (_, _, stale) = call(&s.router, Method::GET, &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(stale.as_deref(), Some("true"));

    let (status, summary) = json_call(&s.router, Method::POST, &format!("/sessions/{id}/rebuild"), Some(json!({ "version": 1 }))).await;
    assert_eq!(status, StatusCode::OK, "{summary}");
    assert_eq!(summary["version"], 2);
    assert_eq!(summary["stale"], false);

    let (_, body, _) = call(&s.router, Method::GET, &format!("/sessions/{id}/plan"), None).await;
    let plan: Value = serde_json::from_slice(&body).unwrap();
    let justified = plan["setups"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["sequences"].as_array().unwrap())
        .flat_map(|q| q["justification"].as_array().unwrap())
        .find(|j| j["face"] == face.as_str())
        .unwrap()
        .clone();
    assert_eq!(justified["candidate"], alt.as_str());
}

#[tokio::test]
async fn stale_version_is_a_conflict() {
    let s = service();
    let id = create(&s.router).await;
    let (face, alt) = alternative(&s.router, &id).await;
    let uri = format!("/sessions/{id}/faces/{face}/selection");
    let choose = serde_json::to_value(Selection::Choose { candidate: alt }).unwrap();
    let default = serde_json::to_value(Selection::Default).unwrap();

    let (status, _) = json_call(&s.router, Method::PUT, &uri, Some(json!({ "version": 0, "selection": choose }))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, v) = json_call(&s.router, Method::PUT, &uri, Some(json!({ "version": 0, "selection": default }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["version"], 1);
    let (status, _) = json_call(&s.router, Method::POST, &format!("/sessions/{id}/rebuild"), Some(json!({ "version": 0 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (_, summary) = json_call(&s.router, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(summary["version"], 1);
    assert_eq!(summary["events"], 1);
}

#[tokio::test]
async fn level_3_out_of_range_condition_carries_a_warning() {
    let s = service();
    let id = create(&s.router).await;
    let (_, cands) = json_call(&s.router, Method::GET, &format!("/sessions/{id}/faces/FLOOR/candidates"), None).await;
    let first = &cands[0];
    let custom = Selection::Custom(CustomConfig {
        ose: first["ose"].as_str().unwrap().into(),
        cutting_set: first["cutting_set"].as_str().unwrap().into(),
        tmc: None,
        conditions: BTreeMap::from([(CuttingParam::CuttingSpeed, 9999.0)]),
    });
    let (status, v) = json_call(
        &s.router,
        Method::PUT,
        &format!("/sessions/{id}/faces/FLOOR/selection"),
        Some(json!({ "selection": custom })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let selected = v["face"]["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["selected"] == true)
        .unwrap();
    assert_eq!(selected["origin"], "ExpertCustom");
    let warnings = selected["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("cutting_speed")), "{warnings:?}");
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let s = service();
    let id = create(&s.router).await;
    for uri in [
        "/sessions/s9999".to_string(),
        "/sessions/s9999/faces".to_string(),
        format!("/sessions/{id}/faces/NOPE/candidates"),
    ] {
        let (status, _) = json_call(&s.router, Method::GET, &uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
    let sel = serde_json::to_value(Selection::Choose { candidate: "X/Y".into() }).unwrap();
    let (status, _) = json_call(
        &s.router,
        Method::PUT,
        &format!("/sessions/{id}/faces/FLOOR/selection"),
        Some(json!({ "selection": sel })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = json_call(&s.router, Method::POST, &format!("/sessions/{id}/whatif"), Some(json!({ "ose": "NOPE" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = json_call(&s.router, Method::PUT, &format!("/sessions/{id}/faces/FLOOR/selection"), Some(json!({ "bogus": 1 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn create_accepts_inline_inputs_and_rejects_invalid_ones() {
    let s = service();
    let (status, v) = json_call(&s.router, Method::POST, "/sessions", Some(json!({ "part": sealed_cavity() }))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert_eq!(v["inaccessible"], json!(["CAVITY"]));

    let mut db = seed_db();
    db.oses[0].family = "F_MISSING".into();
    let (status, v) = json_call(&s.router, Method::POST, "/sessions", Some(json!({ "osedb": db }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["report"]["osedb"].as_array().is_some_and(|a| !a.is_empty()), "{v}");

    let mut tools = seed_tools();
    tools[0].diameter = -1.0;
    let (status, v) = json_call(&s.router, Method::POST, "/sessions", Some(json!({ "tools": tools }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains("diameter"), "{v}");

    let (_, ids) = json_call(&s.router, Method::GET, "/sessions", None).await;
    assert_eq!(ids, json!(["s0001"]));
}

#[tokio::test]
async fn whatif_and_audit() {
    let s = service();
    let id = create(&s.router).await;
    let (status, v) = json_call(
        &s.router,
        Method::POST,
        &format!("/sessions/{id}/whatif"),
        Some(json!({ "ose": "O_PLAN_END_R", "vary": ["mode"] })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert!(v.as_array().unwrap().iter().all(|x| x["field"] == "mode"));

    let (status, r) = json_call(&s.router, Method::GET, "/db/audit", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r, json!({ "shadowing": [], "unsatisfiable": [], "duplicates": [] }));

    let (status, v) = json_call(&s.router, Method::POST, "/sessions", Some(json!({ "osedb": audit_seeded_db() }))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    let seeded = v["id"].as_str().unwrap();
    let (_, r) = json_call(&s.router, Method::GET, &format!("/db/audit?session={seeded}"), None).await;
    for kind in ["shadowing", "duplicates", "unsatisfiable"] {
        assert_eq!(r[kind].as_array().unwrap().len(), 1, "{kind}");
    }
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let first = with_store(dir.path());
    let id = create(&first).await;
    let (face, alt) = alternative(&first, &id).await;
    let sel = serde_json::to_value(Selection::Choose { candidate: alt.clone() }).unwrap();
    json_call(&first, Method::PUT, &format!("/sessions/{id}/faces/{face}/selection"), Some(json!({ "selection": sel }))).await;
    drop(first);

    let second = with_store(dir.path());
    let (status, summary) = json_call(&second, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(summary["version"], 1);
    assert_eq!(summary["selections"][face.as_str()], alt.as_str());
    assert_eq!(create(&second).await, "s0002");
}

#[tokio::test]
async fn concurrent_mutations_on_one_version_admit_one_writer() {
    let s = service();
    let id = create(&s.router).await;
    let (face, alt) = alternative(&s.router, &id).await;
    let uri = format!("/sessions/{id}/faces/{face}/selection");
    let sel = serde_json::to_value(Selection::Choose { candidate: alt }).unwrap();
    let body = json!({ "version": 0, "selection": sel });
    let calls = (0..8).map(|_| {
        let router = s.router.clone();
        let uri = uri.clone();
        let body = body.clone();
        tokio::spawn(async move { json_call(&router, Method::PUT, &uri, Some(body)).await.0 })
    });
    let mut statuses = Vec::new();
    for c in calls {
        statuses.push(c.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|&&s| s == StatusCode::OK).count(), 1, "{statuses:?}");
    assert_eq!(statuses.iter().filter(|&&s| s == StatusCode::CONFLICT).count(), 7);
}
