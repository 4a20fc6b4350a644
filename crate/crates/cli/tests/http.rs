mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::engine;
use semnav_cli::server::{router, AppState};
use semnav_cli::{BackendChoice, Sources};

fn app() -> Router {
    let engine = engine();
    let world = Sources::default().load_world(&engine.kb).unwrap();
    router(Arc::new(AppState::new(
        engine,
        world,
        BackendChoice::Relational,
        2,
    )))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => request
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, "GET", uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(body)).await
}

#[tokio::test]
async fn fourteen_methods() {
    let (status, body) = get(&app(), "/api/kb/methods").await;
    assert_eq!(status, StatusCode::OK);
    let methods = body.as_array().unwrap();
    assert_eq!(methods.len(), 14);
    assert!(methods.iter().any(|m| m["id"] == "characteristics_of"));
    assert_eq!(
        methods[0]["input"],
        json!({"shape": "set", "kind": "object_class"})
    );
}

#[tokio::test]
async fn state_describes_the_world() {
    let (status, body) = get(&app(), "/api/state").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["width"], 17);
    assert_eq!(body["grid"].as_array().unwrap().len(), 7);
    assert_eq!(body["robot"], json!({"x": 8, "y": 3}));
    assert_eq!(body["anchors"]["room1"], json!({"x": 3, "y": 3}));
}

#[tokio::test]
async fn query_single_and_both() {
    let app = app();
    let (status, body) = get(&app, "/api/kb/query?method=probable_locations&input=soft_drink").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["backend"], "relational");
    assert_eq!(
        body["answers"],
        json!([{"answer": "kitchen", "chain": ["refrigerator"]}])
    );

    let (_, body) = get(
        &app,
        "/api/kb/query?method=label_rooms_by_objects&input=chair,computer&backend=ontology",
    )
    .await;
    assert_eq!(body["backend"], "ontology");
    assert_eq!(body["answers"][0]["answer"], "office");

    let (status, body) = get(&app, "/api/kb/query?method=all_object_classes&backend=both").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["equal"], true);
    assert_eq!(body["results"][0]["answers"].as_array().unwrap().len(), 8);
    assert_eq!(body["results"][1]["backend"], "ontology");
}

#[tokio::test]
async fn query_is_idempotent() {
    let app = app();
    let uri = "/api/kb/query?method=related_objects&input=computer&backend=ontology";
    let first = get(&app, uri).await;
    let second = get(&app, uri).await;
    assert_eq!(first, second);
    let (_, state) = get(&app, "/api/state").await;
    assert_eq!(state["robot"], json!({"x": 8, "y": 3}));
}

#[tokio::test]
async fn query_errors() {
    let app = app();
    let (status, body) = get(&app, "/api/kb/query?method=room_class_of&input=room9").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(
        body,
        json!({"error": {"kind": "UnknownEntity", "subject": "room9"}})
    );

    let (status, body) = get(&app, "/api/kb/query?method=teleport").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["kind"], "UnknownMethod");

    let (status, body) = get(&app, "/api/kb/query?method=all_utilities&backend=prolog").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "UnknownBackend");

    let (status, body) = get(&app, "/api/kb/query?method=room_class_of").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "EmptyInput");

    let (status, body) = get(&app, "/api/kb/query?method=room_class_of&input=room1,room2").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "WrongArity");
}

#[tokio::test]
async fn work_goal_then_accept() {
    let app = app();
    let (status, body) = post(&app, "/api/goal", json!({"request": "work"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["session"], "s1");
    assert_eq!(body["proposal"]["destination"], "room1");
    assert_eq!(body["proposal"]["ordinal"], 0);
    let chain: Vec<&str> = body["proposal"]["chain"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["entity"].as_str().unwrap())
        .collect();
    assert_eq!(chain, ["work", "computer", "office", "room1"]);

    let (status, body) = post(&app, "/api/session/s1/accept", json!({"ordinal": 0})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["arrived_in"], "room1");
    assert_eq!(body["robot"], json!({"x": 3, "y": 3}));
    let trajectory = body["trajectory"].as_array().unwrap();
    assert_eq!(trajectory.first().unwrap(), &json!({"x": 8, "y": 3}));
    assert_eq!(trajectory.len(), 6);

    let (_, state) = get(&app, "/api/state").await;
    assert_eq!(state["robot"], json!({"x": 3, "y": 3}));

    let (status, body) = post(&app, "/api/session/s1/accept", json!({"ordinal": 0})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "UnknownOrdinal");
}

#[tokio::test]
async fn funny_reject_exhausts() {
    let app = app();
    let (_, body) = post(
        &app,
        "/api/goal",
        json!({"request": "funny", "backend": "ontology"}),
    )
    .await;
    assert_eq!(body["proposal"]["destination"], "room1");
    let id = body["session"].as_str().unwrap().to_string();
    let (status, body) = post(&app, &format!("/api/session/{id}/reject"), json!({"ordinal": 0})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["exhausted"], true);
    let dead = body["unrealizable"].as_array().unwrap();
    assert_eq!(dead.len(), 2);
    assert_eq!(dead[0]["reason"], "no physical room of class living_room");
}

#[tokio::test]
async fn sessions_are_independent() {
    let app = app();
    let (_, a) = post(&app, "/api/goal", json!({"request": "work"})).await;
    let (_, b) = post(&app, "/api/goal", json!({"request": "soft drink"})).await;
    assert_eq!(
        (a["session"].as_str(), b["session"].as_str()),
        (Some("s1"), Some("s2"))
    );
    let (_, r) = post(&app, "/api/session/s1/reject", json!({"ordinal": 0})).await;
    assert_eq!(r["exhausted"], true);
    let (status, body) = post(&app, "/api/session/s2/accept", json!({"ordinal": 0})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["arrived_in"], "room2");
}

#[tokio::test]
async fn goal_and_session_errors() {
    let app = app();
    let (status, body) = post(&app, "/api/goal", json!({"request": "teleporter"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "UnknownEntity");

    let (status, body) = post(&app, "/api/goal", json!({"request": "work", "backend": "both"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "UnknownBackend");

    let (status, body) = post(&app, "/api/session/s99/reject", json!({"ordinal": 0})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(
        body,
        json!({"error": {"kind": "UnknownSession", "subject": "s99"}})
    );

    let (_, _) = post(&app, "/api/goal", json!({"request": "work"})).await;
    let (status, body) = post(&app, "/api/session/s1/reject", json!({"ordinal": 5})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "UnknownOrdinal");
}

#[tokio::test]
async fn concurrent_accepts_are_serialized() {
    let app = app();
    post(&app, "/api/goal", json!({"request": "work"})).await;
    post(&app, "/api/goal", json!({"request": "soft drink"})).await;
    let (a, b) = tokio::join!(
        post(&app, "/api/session/s1/accept", json!({"ordinal": 0})),
        post(&app, "/api/session/s2/accept", json!({"ordinal": 0})),
    );
    assert_eq!((a.0, b.0), (StatusCode::OK, StatusCode::OK));
    // Whichever ran second must start where the first one ended.
    let (first, second) = if a.1["trajectory"][0] == json!({"x": 8, "y": 3}) {
        (a.1, b.1)
    } else {
        (b.1, a.1)
    };
    assert_eq!(second["trajectory"][0], first["robot"]);
    let (_, state) = get(&app, "/api/state").await;
    assert_eq!(state["robot"], second["robot"]);
}

#[tokio::test]
async fn bench_endpoint() {
    let app = app();
    let (status, body) = get(&app, "/api/bench?reps=1").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["all_equal"], true);
    assert_eq!(body["cases"].as_array().unwrap().len(), 13);
    assert_eq!(body["meta"]["timing_boundary"], "in-process reasoner call");

    let (status, body) = get(&app, "/api/bench?reps=0").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "InvalidRepetitions");
}
