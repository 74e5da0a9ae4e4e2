use std::collections::{BTreeMap, HashMap};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spread_edge::{Error, Odds, OddsFormat, SpreadPoints};

use crate::{AppState, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRequest {
    pub projected_spread: f64,
    pub book_spread: f64,
    pub odds: f64,
    pub odds_format: OddsFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub cell_sd: f64,
    pub ref_sigma: f64,
    pub weights_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeResponse {
    pub cover_probability: f64,
    pub push_probability: f64,
    pub break_even_probability: f64,
    pub edge: f64,
    pub ev_per_unit: f64,
    pub model: ModelInfo,
    /// Echo of the request this answers, so clients can discard stale replies.
    pub request: EdgeRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionResponse {
    pub projected_spread: f64,
    pub margins: Vec<i32>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

pub(crate) struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn bad_request(field: Option<&str>, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                error: message.into(),
                field: field.map(str::to_string),
            },
        }
    }

    fn out_of_model(field: &str, err: Error) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ErrorBody {
                error: err.to_string(),
                field: Some(field.to_string()),
            },
        }
    }

    fn not_ready() -> Self {
        ApiError {
            status: StatusCode::SERVICE_UNAVAILABLE,
            body: ErrorBody {
                error: "model is still loading".into(),
                field: None,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn ready(state: &AppState) -> Result<&Model, ApiError> {
    state.model().map(|m| m.as_ref()).ok_or_else(ApiError::not_ready)
}

fn model_info(model: &Model) -> ModelInfo {
    ModelInfo {
        cell_sd: model.matrix().cell_sd(),
        ref_sigma: model.weights().sigma_ref(),
        weights_version: model.weights_version().to_string(),
    }
}

const EDGE_FIELDS: [&str; 4] = ["projected_spread", "book_spread", "odds", "odds_format"];

fn number_field(body: &Map<String, Value>, name: &str) -> Result<f64, ApiError> {
    match body.get(name) {
        None | Some(Value::Null) => Err(ApiError::bad_request(Some(name), format!("{name} is required"))),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ApiError::bad_request(Some(name), format!("{name} must be a number"))),
    }
}

/// Field-by-field parse so every validation failure can name its field.
fn parse_edge_request(raw: &[u8]) -> Result<EdgeRequest, ApiError> {
    let body: Map<String, Value> = serde_json::from_slice(raw)
        .map_err(|e| ApiError::bad_request(None, format!("body must be a JSON object: {e}")))?;
    if let Some(unknown) = body.keys().find(|k| !EDGE_FIELDS.contains(&k.as_str())) {
        return Err(ApiError::bad_request(
            Some(unknown),
            format!("unknown field {unknown:?}"),
        ));
    }
    let odds_format = match body.get("odds_format") {
        None | Some(Value::Null) => {
            return Err(ApiError::bad_request(Some("odds_format"), "odds_format is required"));
        }
        Some(Value::String(s)) => s
            .parse::<OddsFormat>()
            .map_err(|e| ApiError::bad_request(Some("odds_format"), e.to_string()))?,
        Some(_) => {
            return Err(ApiError::bad_request(
                Some("odds_format"),
                "odds_format must be a string",
            ))
        }
    };
    Ok(EdgeRequest {
        projected_spread: number_field(&body, "projected_spread")?,
        book_spread: number_field(&body, "book_spread")?,
        odds: number_field(&body, "odds")?,
        odds_format,
    })
}

pub(crate) async fn edge(State(state): State<AppState>, body: Bytes) -> Result<Json<EdgeResponse>, ApiError> {
    let model = ready(&state)?;
    let request = parse_edge_request(&body)?;
    let odds =
        Odds::new(request.odds_format, request.odds).map_err(|e| ApiError::bad_request(Some("odds"), e.to_string()))?;
    let matrix = model.matrix();
    let line_limit = f64::from(matrix.row_halfwidth());
    if request.book_spread.abs() > line_limit {
        return Err(ApiError::bad_request(
            Some("book_spread"),
            Error::LineOutOfRange(request.book_spread, matrix.row_halfwidth()).to_string(),
        ));
    }
    let quote = matrix
        .edge_quote(
            SpreadPoints(request.projected_spread),
            SpreadPoints(request.book_spread),
            &odds,
        )
        .map_err(|e| match e {
            Error::OutOfModel(..) => ApiError::out_of_model("projected_spread", e),
            other => ApiError::bad_request(None, other.to_string()),
        })?;
    Ok(Json(EdgeResponse {
        cover_probability: quote.cover.value(),
        push_probability: quote.push.value(),
        break_even_probability: quote.break_even.value(),
        edge: quote.edge,
        ev_per_unit: quote.ev_per_unit,
        model: model_info(model),
        request,
    }))
}

pub(crate) async fn distribution(
    State(state): State<AppState>,
    query: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Result<Json<DistributionResponse>, ApiError> {
    let model = ready(&state)?;
    const FIELD: &str = "projected_spread";
    let Query(params) = query.map_err(|e| ApiError::bad_request(None, e.body_text()))?;
    let raw = params
        .get(FIELD)
        .ok_or_else(|| ApiError::bad_request(Some(FIELD), "projected_spread query parameter is required"))?;
    let spread: f64 = raw
        .trim()
        .parse()
        .ok()
        .filter(|x: &f64| x.is_finite())
        .ok_or_else(|| ApiError::bad_request(Some(FIELD), format!("projected_spread {raw:?} is not a number")))?;
    let matrix = model.matrix();
    let probabilities = matrix
        .interpolated_distribution(SpreadPoints(spread).expected_margin().value())
        .map_err(|e| ApiError::out_of_model(FIELD, e))?;
    Ok(Json(DistributionResponse {
        projected_spread: spread,
        margins: matrix.margins().collect(),
        probabilities,
    }))
}

#[derive(Serialize)]
struct Health<'a> {
    status: &'static str,
    weights_version: &'a str,
}

pub(crate) async fn health(State(state): State<AppState>) -> Response {
    match state.model() {
        Some(model) => Json(Health {
            status: "ok",
            weights_version: model.weights_version(),
        })
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(serde_json::json!({ "status": "loading" })),
        )
            .into_response(),
    }
}

#[derive(Serialize)]
struct Config<'a> {
    cell_sd: f64,
    ref_sigma: f64,
    default_weight: f64,
    weights: BTreeMap<u32, f64>,
    weights_version: &'a str,
    weight_table_id: &'a str,
    row_range: [i32; 2],
    col_range: [i32; 2],
}

pub(crate) async fn config(State(state): State<AppState>) -> Result<Response, ApiError> {
    let model = ready(&state)?;
    let matrix = model.matrix();
    Ok(Json(Config {
        cell_sd: matrix.cell_sd(),
        ref_sigma: model.weights().sigma_ref(),
        default_weight: model.weights().default_weight(),
        weights: model.weights().entries().collect(),
        weights_version: model.weights_version(),
        weight_table_id: matrix.weight_table_id(),
        row_range: [-matrix.row_halfwidth(), matrix.row_halfwidth()],
        col_range: [-matrix.col_halfwidth(), matrix.col_halfwidth()],
    })
    .into_response())
}

pub(crate) async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        body: ErrorBody {
            error: "no such endpoint".into(),
            field: None,
        },
    }
}
