use std::time::Duration;

use asnav_core::samples::{PI1, PI2, PI3, PI4};
use asnav_service::{router, Config};
use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_text(app: &Router, uri: &str, text: &str) -> (StatusCode, Value) {
    call(app, Request::post(uri).body(Body::from(text.to_owned())).unwrap()).await
}

async fn post_json(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req =
        Request::post(uri).header(header::CONTENT_TYPE, "application/json").body(Body::from(body.to_string())).unwrap();
    call(app, req).await
}

async fn session(app: &Router, text: &str) -> String {
    let (status, v) = post_text(app, "/programs", text).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v["session_id"].as_str().unwrap().to_owned()
}

fn app() -> Router {
    router(Config::default())
}

#[tokio::test]
async fn create_reports_stats() {
    let app = app();
    let (status, v) = post_text(&app, "/programs", PI3).await;
    assert_eq!(status, StatusCode::OK);
    let s = &v["stats"];
    assert_eq!((s["atoms"].as_u64(), s["rules"].as_u64()), (Some(7), Some(9)));
    assert_eq!((s["tight"].as_bool(), s["cycles"].as_u64()), (Some(false), Some(2)));

    let (_, v) = post_text(&app, "/programs", PI1).await;
    assert_eq!(v["stats"]["tight"], false);
    assert_eq!(v["stats"]["supported_count"], "2");

    let (status, v) = post_json(&app, "/programs", json!({ "program": PI4, "cycles": "exhaustive" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["stats"]["cycle_mode"], "exhaustive");
}

#[tokio::test]
async fn malformed_program_is_rejected() {
    let app = app();
    let (status, v) = post_text(&app, "/programs", "a :- b\nc.").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().starts_with("2:1:"), "{v}");
    let (status, _) = post_text(&app, "/programs?cycles=some", PI1).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn counts_under_assumptions() {
    let app = app();
    let id = session(&app, PI3).await;
    let (status, v) = get(&app, &format!("/programs/{id}/count?assume=d&depth=2")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((v["count"].as_str(), v["bound"].as_str()), (Some("1"), Some("exact")));
    assert!(v["trace"].as_array().unwrap().len() >= 2);

    let (_, v) = get(&app, &format!("/programs/{id}/count?assume=d&depth=1")).await;
    assert_eq!((v["count"].as_str(), v["bound"].as_str()), (Some("0"), Some("lower")));

    let (_, v) = get(&app, &format!("/programs/{id}/count?assume=d,-d")).await;
    assert_eq!(v["count"], "0");
    assert_eq!(v["bound"], "exact");
    assert_eq!(v["warning"], "inconsistent");

    let (_, v) = get(&app, &format!("/programs/{id}/count")).await;
    assert_eq!((v["count"].as_str(), v["bound"].as_str()), (Some("2"), Some("exact")));

    let id4 = session(&app, PI4).await;
    let (_, v) = get(&app, &format!("/programs/{id4}/count?assume=-a,b")).await;
    assert_eq!((v["count"].as_str(), v["bound"].as_str()), (Some("0"), Some("exact")));
}

#[tokio::test]
async fn count_errors() {
    let app = app();
    let (status, _) = get(&app, "/programs/nope/count").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let id = session(&app, PI3).await;
    let (status, v) = get(&app, &format!("/programs/{id}/count?assume=zz")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("zz"));
    let (status, _) = get(&app, &format!("/programs/{id}/count?depth=deep")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn facets_of_pi2() {
    let app = app();
    let id = session(&app, PI2).await;
    let (status, v) = get(&app, &format!("/programs/{id}/facets")).await;
    assert_eq!(status, StatusCode::OK);
    let facets = v["facets"].as_array().unwrap();
    assert_eq!(facets.len(), 4);
    for atom in ["a", "d"] {
        let f = facets.iter().find(|f| f["atom"] == atom).unwrap();
        assert_eq!((f["count_true"].as_str(), f["count_false"].as_str()), (Some("1"), Some("1")));
        assert_eq!((f["bound_true"].as_str(), f["bound_false"].as_str()), (Some("exact"), Some("exact")));
    }

    post_json(&app, &format!("/programs/{id}/assume"), json!({ "literal": "d" })).await;
    let (_, v) = get(&app, &format!("/programs/{id}/facets")).await;
    let facets = v["facets"].as_array().unwrap();
    assert_eq!(facets.len(), 3);
    assert!(facets.iter().all(|f| f["atom"] != "d"));
}

#[tokio::test]
async fn depth_zero_facets_split_the_supported_count() {
    let app = app();
    let id = session(&app, PI3).await;
    let (_, v) = get(&app, &format!("/programs/{id}/facets?depth=0")).await;
    for f in v["facets"].as_array().unwrap() {
        let t: u64 = f["count_true"].as_str().unwrap().parse().unwrap();
        let e: u64 = f["count_false"].as_str().unwrap().parse().unwrap();
        assert_eq!(t + e, 6, "{f}");
    }
}

#[tokio::test]
async fn assume_and_undo() {
    let app = app();
    let id = session(&app, PI3).await;
    let (_, before) = get(&app, &format!("/programs/{id}")).await;

    let (status, v) = post_json(&app, &format!("/programs/{id}/assume"), json!({ "literal": "d" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((v["count"]["count"].as_str(), v["count"]["bound"].as_str()), (Some("1"), Some("exact")));
    assert_eq!(v["assumptions"], json!(["d"]));
    assert_ne!(v["state_digest"], before["state_digest"]);

    let (status, v) = post_json(&app, &format!("/programs/{id}/assume"), json!({ "literal": "-d" })).await;
    assert_eq!(status, StatusCode::CONFLICT, "{v}");

    let (status, v) = post_text(&app, &format!("/programs/{id}/undo"), "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["count"]["count"], "2");
    assert_eq!(v["state_digest"], before["state_digest"]);

    let (status, _) = post_text(&app, &format!("/programs/{id}/undo"), "").await;
    assert_eq!(status, StatusCode::CONFLICT);

    post_json(&app, &format!("/programs/{id}/assume"), json!({ "literal": "-d" })).await;
    let (status, _) = post_json(&app, &format!("/programs/{id}/assume"), json!({ "literal": "d" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn session_depth_applies_to_navigation() {
    let app = app();
    let (_, v) = post_text(&app, "/programs?depth=1", PI3).await;
    let id = v["session_id"].as_str().unwrap();
    let (_, v) = post_json(&app, &format!("/programs/{id}/assume"), json!({ "literal": "d" })).await;
    assert_eq!((v["count"]["count"].as_str(), v["count"]["bound"].as_str()), (Some("0"), Some("lower")));
    let (_, v) = get(&app, &format!("/programs/{id}/count?depth=2")).await;
    assert_eq!((v["count"].as_str(), v["bound"].as_str()), (Some("1"), Some("exact")));
}

async fn poll(app: &Router, id: &str) -> (StatusCode, Value) {
    for _ in 0..500 {
        let (status, v) = get(app, &format!("/programs/{id}")).await;
        if status != StatusCode::ACCEPTED {
            return (status, v);
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("compilation did not finish");
}

#[tokio::test]
async fn background_compilation() {
    let app = app();
    let (status, v) = post_text(&app, "/programs?async=true", PI3).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let id = v["session_id"].as_str().unwrap().to_owned();
    assert_eq!(v["poll"], format!("/programs/{id}"));
    let (status, v) = poll(&app, &id).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["stats"]["cycles"], 2);
}

#[tokio::test]
async fn budgets_map_to_422() {
    let app = app();
    let (status, v) = post_text(&app, "/programs?budget_nodes=1", PI3).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    let (status, _) = post_text(&app, "/programs?cycles=exhaustive&budget_cycles=2", PI4).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, v) = post_text(&app, "/programs?async=true&budget_nodes=1", PI3).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let (status, _) = poll(&app, v["session_id"].as_str().unwrap()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn artifacts_are_cached_by_digest() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Config { cache_dir: Some(dir.path().to_owned()), ..Default::default() });
    let first = session(&app, PI4).await;
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    let second = session(&app, PI4).await;
    assert_ne!(first, second);
    let (_, a) = get(&app, &format!("/programs/{first}/count?assume=-a,b")).await;
    let (_, b) = get(&app, &format!("/programs/{second}/count?assume=-a,b")).await;
    assert_eq!(a["count"], b["count"]);
    assert_eq!(a["trace"], b["trace"]);
}

#[tokio::test]
async fn cors_headers() {
    let app = router(Config { cors_origin: Some("http://localhost:5173".into()), ..Default::default() });
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/programs")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://localhost:5173");
}
