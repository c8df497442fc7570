use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use fixwit::server::{router, AppState, Defaults};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const G: &str = r#"{"type":"mc","states":["t","x"],"terminal":["t"],"delta":{"x":{"t":"1/2","x":"1/2"}}}"#;
const TS3: &str = r#"{"type":"ts","states":["u","v","w"],"edges":[["u","w"]]}"#;

fn app() -> Router {
    router(AppState::new(Defaults::default()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn create(app: &Router, model: &str, variant: &str, role: &str, start: &str) -> (String, Value) {
    let body = json!({"model": serde_json::from_str::<Value>(model).unwrap(), "variant": variant, "humanRole": role, "start": start});
    let (status, v) = call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["sessionId"].as_str().unwrap().to_string(), v)
}

/// Plays the human side by following the server's suggestions; returns the
/// final state.
async fn play_out(app: &Router, id: &str) -> Value {
    for _ in 0..50 {
        let (status, state) = call(app, "GET", &format!("/sessions/{id}"), None).await;
        assert_eq!(status, StatusCode::OK);
        if !state["position"]["over"].is_null() {
            return state;
        }
        let legal = &state["legalMoves"];
        let mv = if legal["suggestion"].is_null() { json!("resign") } else { legal["suggestion"].clone() };
        let (status, reply) = call(app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": mv}))).await;
        assert_eq!(status, StatusCode::OK, "{reply}");
        assert_eq!(reply["verdict"]["accepted"], true);
        assert_eq!(reply["position"], call(app, "GET", &format!("/sessions/{id}"), None).await.1["position"]);
    }
    panic!("game did not end");
}

#[tokio::test]
async fn full_games_on_g() {
    let app = app();
    for (variant, role, start, winner, witness) in [
        ("primal", "exists", "f^{3/5}_x", "exists", Some("x→(t, x→t)")),
        ("primal", "forall", "f^{3/5}_x", "exists", Some("x→(t, x→t)")),
        ("dual", "forall", "fdot^{1/2}_x", "forall", None),
        ("dual", "exists", "fdot^{1/2}_x", "forall", None),
    ] {
        let (id, created) = create(&app, G, variant, role, start).await;
        assert_eq!(created["humanRole"], role);
        let fin = play_out(&app, &id).await;
        assert_eq!(fin["position"]["over"]["winner"], winner, "{variant}/{role}: {fin}");
        let ws = fin["witnessSoFar"].as_array().unwrap();
        assert_eq!(ws[0]["basis"], start);
        if let Some(w) = witness {
            assert_eq!(ws[0]["display"], w);
        }
        let (status, _) = call(&app, "DELETE", &format!("/sessions/{id}"), None).await;
        assert_eq!(status, StatusCode::NO_CONTENT);
        let (status, _) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
    }
}

#[tokio::test]
async fn dual_game_with_manual_exists_moves() {
    let app = app();
    let (id, _) = create(&app, G, "dual", "exists", "fdot^{1/2}_x").await;
    let (status, reply) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": {"val": {"t": "0", "x": "1"}}}))).await;
    assert_eq!(status, StatusCode::OK, "{reply}");
    let answer = reply["engineReply"]["basis"].as_str().unwrap();
    assert!(answer.starts_with("fdot^"), "{answer}");
    let fin = play_out(&app, &id).await;
    assert_eq!(fin["position"]["over"]["winner"], "forall");
    let t = fin["transcript"].as_array().unwrap();
    assert_eq!(t[0]["player"], "exists");
    assert_eq!(t[1]["player"], "forall");
    assert_eq!(fin["witnessSoFar"][0]["basis"], "fdot^{1/2}_x");
}

#[tokio::test]
async fn full_games_on_the_transition_system() {
    let app = app();
    for (variant, role, start, winner) in [
        ("primal", "exists", "co(u,v)", "exists"),
        ("primal", "forall", "co(u,v)", "exists"),
        ("dual", "forall", "pair(u,v)", "forall"),
        ("dual", "exists", "pair(u,v)", "forall"),
        ("primal", "forall", "co(v,w)", "forall"),
    ] {
        let (id, _) = create(&app, TS3, variant, role, start).await;
        let fin = play_out(&app, &id).await;
        assert_eq!(fin["position"]["over"]["winner"], winner, "{variant}/{role}/{start}: {fin}");
        if winner == "exists" && variant == "primal" || winner == "forall" && variant == "dual" {
            assert_eq!(fin["witnessSoFar"][0]["display"], "◇true", "{fin}");
        }
    }
}

#[tokio::test]
async fn invalid_moves_get_422_with_the_inequality() {
    let app = app();
    let (id, _) = create(&app, G, "primal", "exists", "f^{3/5}_x").await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": {"val": {"t": "1", "x": "0"}}}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["verdict"]["accepted"], false);
    let reason = v["verdict"]["reason"].as_str().unwrap();
    assert!(reason.contains("≪") && reason.contains("3/5"), "{reason}");
    assert_eq!(v["position"]["round"], 1);

    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": {"val": {"t": "1/x"}}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{v}");

    let (id, created) = create(&app, G, "primal", "forall", "f^{3/5}_x").await;
    assert_eq!(created["position"]["turn"], "forall");
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": "f^{1}_x"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    assert!(v["verdict"]["reason"].as_str().unwrap().contains("≪ d fails"));

    let (id, _) = create(&app, G, "dual", "exists", "fdot^{1/2}_x").await;
    let (status, v) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": {"val": {"t": "1", "x": "1"}}}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["verdict"]["reason"].as_str().unwrap().contains("⊑"), "{v}");
}

#[tokio::test]
async fn request_errors() {
    let app = app();
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"start": "f^{1/2}_x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"model": {"type": "mc"}, "start": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "GET", "/sessions/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "DELETE", &format!("/sessions/{}", uuid_like()), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (id, _) = create(&app, G, "primal", "exists", "f^{3/5}_x").await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": "f^{1}_t"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": "resign"}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/move"), Some(json!({"move": "resign"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

fn uuid_like() -> &'static str {
    "00000000-0000-4000-8000-000000000000"
}

#[tokio::test]
async fn server_default_model() {
    let model = std::sync::Arc::new(fixwit::model::Model::from_json(G).unwrap());
    let app = router(AppState::new(Defaults { model: Some(model), start: Some(String::from("f^{1/2}_x")), ..Defaults::default() }));
    let (status, v) = call(&app, "POST", "/sessions", Some(json!({}))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert_eq!(v["start"], "f^{1/2}_x");
}
