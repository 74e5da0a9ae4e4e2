use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use spread_edge::{EdgeMatrix, Odds, SpreadPoints, WeightTable, DEFAULT_CELL_SD};
use spread_edge_service::{router, AppState, Model, ServiceConfig};
use tower::ServiceExt;

fn shipped_model() -> Model {
    Model::from_weights(WeightTable::shipped(), DEFAULT_CELL_SD).unwrap()
}

fn app(state: AppState) -> Router {
    router(state, &ServiceConfig::default()).unwrap()
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let body = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, body)
}

fn post_edge(body: Value) -> Request<Body> {
    Request::post("/api/v1/edge")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn edge_body(projected: f64, book: f64, odds: f64, format: &str) -> Value {
    json!({"projected_spread": projected, "book_spread": book, "odds": odds, "odds_format": format})
}

#[tokio::test]
async fn baylor_edge_matches_engine() {
    let app = app(AppState::with_model(shipped_model()));
    let (status, body) = send(&app, post_edge(edge_body(-2.9, -2.5, -110.0, "american"))).await;
    assert_eq!(status, StatusCode::OK, "{body}");

    let matrix = EdgeMatrix::build(&WeightTable::shipped(), DEFAULT_CELL_SD).unwrap();
    let quote = matrix
        .edge_quote(SpreadPoints(-2.9), SpreadPoints(-2.5), &Odds::american(-110.0).unwrap())
        .unwrap();
    let edge = body["edge"].as_f64().unwrap();
    assert!((edge - quote.edge).abs() < 1e-12);
    assert!((body["cover_probability"].as_f64().unwrap() - quote.cover.value()).abs() < 1e-12);
    assert!((edge - 0.008).abs() <= 0.01);
    assert_eq!(body["push_probability"], 0.0);
    assert_eq!(body["model"]["cell_sd"], 15.0);
    assert_eq!(body["model"]["ref_sigma"], 22.0);
    assert_eq!(body["model"]["weights_version"], WeightTable::shipped().version());
    assert_eq!(body["request"]["book_spread"], -2.5);
    assert_eq!(body["request"]["odds_format"], "american");
}

#[tokio::test]
async fn underdog_edge_and_probability_totals() {
    let app = app(AppState::with_model(shipped_model()));
    let (status, body) = send(&app, post_edge(edge_body(8.0, 7.5, -110.0, "american"))).await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["edge"].as_f64().unwrap() - 0.012).abs() <= 0.01);

    let (_, body) = send(&app, post_edge(edge_body(-3.0, -3.0, 1.91, "decimal"))).await;
    let cover = body["cover_probability"].as_f64().unwrap();
    let push = body["push_probability"].as_f64().unwrap();
    let lose = 1.0 - cover - push;
    assert!(push > 0.0);
    assert!((0.0..=1.0).contains(&lose));
    assert!((body["break_even_probability"].as_f64().unwrap() - 1.0 / 1.91).abs() < 1e-12);
}

#[tokio::test]
async fn out_of_model_projection_is_422() {
    let app = app(AppState::with_model(shipped_model()));
    let (status, body) = send(&app, post_edge(edge_body(-45.0, -44.0, -110.0, "american"))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["field"], "projected_spread");
    assert!(body["error"].as_str().unwrap().contains("outside the model range"));
}

#[tokio::test]
async fn validation_failures_are_400_with_field() {
    let app = app(AppState::with_model(shipped_model()));
    let cases = [
        (edge_body(-3.0, -3.0, -50.0, "american"), "odds"),
        (edge_body(-3.0, -3.0, 0.9, "decimal"), "odds"),
        (edge_body(-3.0, -61.0, -110.0, "american"), "book_spread"),
        (edge_body(-3.0, -3.0, -110.0, "fractional"), "odds_format"),
        (
            json!({"book_spread": -3.0, "odds": -110.0, "odds_format": "american"}),
            "projected_spread",
        ),
    ];
    for (body, field) in cases {
        let (status, resp) = send(&app, post_edge(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(resp["field"], field, "{body}");
    }
    let raw = Request::post("/api/v1/edge").body(Body::from("{not json")).unwrap();
    let (status, _) = send(&app, raw).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn distribution_endpoint() {
    let app = app(AppState::with_model(shipped_model()));
    let matrix = EdgeMatrix::build(&WeightTable::shipped(), DEFAULT_CELL_SD).unwrap();

    let (status, body) = send(&app, get("/api/v1/distribution?projected_spread=0")).await;
    assert_eq!(status, StatusCode::OK);
    let margins: Vec<i64> = body["margins"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_i64().unwrap())
        .collect();
    assert_eq!(margins, (-60..=60).collect::<Vec<_>>());
    let p: Vec<f64> = body["probabilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    for i in 0..121 {
        assert_eq!(p[i], p[120 - i]);
    }

    let (_, body) = send(&app, get("/api/v1/distribution?projected_spread=-3")).await;
    let p = &body["probabilities"];
    assert!(p[60 + 3].as_f64().unwrap() > p[60 + 2].as_f64().unwrap());

    let (_, body) = send(&app, get("/api/v1/distribution?projected_spread=-2.9")).await;
    let c2 = matrix.column_distribution(2).unwrap();
    let c3 = matrix.column_distribution(3).unwrap();
    for (i, v) in body["probabilities"].as_array().unwrap().iter().enumerate() {
        let oracle = 0.9 * c3[i] + 0.1 * c2[i];
        assert!((v.as_f64().unwrap() - oracle).abs() < 1e-12);
    }
}

#[tokio::test]
async fn distribution_errors() {
    let app = app(AppState::with_model(shipped_model()));
    let (status, body) = send(&app, get("/api/v1/distribution")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "projected_spread");
    let (status, _) = send(&app, get("/api/v1/distribution?projected_spread=abc")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send(&app, get("/api/v1/distribution?projected_spread=40")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn health_tracks_loading() {
    let state = AppState::empty();
    let app = app(state.clone());
    let (status, _) = send(&app, get("/api/v1/health")).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, _) = send(&app, get("/api/v1/config")).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, _) = send(&app, post_edge(edge_body(-3.0, -2.5, -110.0, "american"))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    state.load(shipped_model()).unwrap();
    let (status, body) = send(&app, get("/api/v1/health")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["weights_version"], WeightTable::shipped().version());
    assert!(state.load(shipped_model()).is_err());
}

#[tokio::test]
async fn config_echoes_model() {
    let app = app(AppState::with_model(shipped_model()));
    let (status, body) = send(&app, get("/api/v1/config")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(format!("{:.1}", body["weights"]["3"].as_f64().unwrap()), "2.7");
    assert_eq!(body["weights"]["0"], 0.0);
    assert_eq!(body["cell_sd"], 15.0);
    assert_eq!(body["ref_sigma"], 22.0);
    assert_eq!(body["default_weight"], 1.0);
    assert_eq!(body["col_range"], json!([-39, 39]));
}

#[tokio::test]
async fn identical_requests_are_byte_identical() {
    let app = app(AppState::with_model(shipped_model()));
    let mut tasks = Vec::new();
    for _ in 0..100 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let resp = app
                .oneshot(post_edge(edge_body(-6.2, -7.0, -115.0, "american")))
                .await
                .unwrap();
            assert_eq!(resp.status(), StatusCode::OK);
            resp.into_body().collect().await.unwrap().to_bytes()
        }));
    }
    let mut bodies = Vec::new();
    for t in tasks {
        bodies.push(t.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn cors_preflight() {
    let config = ServiceConfig {
        cors_origins: vec!["http://localhost:5173".into()],
    };
    let app = router(AppState::with_model(shipped_model()), &config).unwrap();
    let req = Request::options("/api/v1/edge")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(
        resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(),
        "http://localhost:5173"
    );
}

#[test]
fn mismatched_matrix_and_weights_rejected() {
    let matrix = EdgeMatrix::build(&WeightTable::unit(22.0).unwrap(), 15.0).unwrap();
    assert!(Model::new(matrix, WeightTable::shipped()).is_err());
}
