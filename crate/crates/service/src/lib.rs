//! Stateless JSON API over a prebuilt [`EdgeMatrix`].
//!
//! The model is loaded once and shared read-only by every request. Until
//! it is loaded, model-backed endpoints answer 503.
//!
//! | method | path                     |                                    |
//! |--------|--------------------------|------------------------------------|
//! | POST   | `/api/v1/edge`           | quote for one bet                  |
//! | GET    | `/api/v1/distribution`   | conditional margin distribution    |
//! | GET    | `/api/v1/health`         | readiness                          |
//! | GET    | `/api/v1/config`         | model metadata and multipliers     |

mod api;

use std::sync::{Arc, OnceLock};

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use spread_edge::{EdgeMatrix, Error, WeightTable};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::{DistributionResponse, EdgeRequest, EdgeResponse, ErrorBody, ModelInfo};

/// Everything a request needs: the matrix and the multipliers it was built from.
#[derive(Debug)]
pub struct Model {
    matrix: EdgeMatrix,
    weights: WeightTable,
    weights_version: String,
}

impl Model {
    /// Pairs a matrix with its weights. A matrix that records a different
    /// weight table id is rejected.
    pub fn new(matrix: EdgeMatrix, weights: WeightTable) -> Result<Self, Error> {
        let weights_version = weights.version();
        if !matrix.weight_table_id().is_empty() && matrix.weight_table_id() != weights_version {
            return Err(Error::Table(format!(
                "matrix was built from weights {} but weights {} were supplied",
                matrix.weight_table_id(),
                weights_version
            )));
        }
        Ok(Model {
            matrix,
            weights,
            weights_version,
        })
    }

    pub fn from_weights(weights: WeightTable, cell_sd: f64) -> Result<Self, Error> {
        let matrix = EdgeMatrix::build(&weights, cell_sd)?;
        Model::new(matrix, weights)
    }

    pub fn matrix(&self) -> &EdgeMatrix {
        &self.matrix
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    pub fn weights_version(&self) -> &str {
        &self.weights_version
    }
}

/// Shared handle to the model; cloned into every handler.
#[derive(Clone, Default)]
pub struct AppState {
    model: Arc<OnceLock<Arc<Model>>>,
}

impl AppState {
    /// State with no model yet. Call [`AppState::load`] once startup finishes.
    pub fn empty() -> Self {
        AppState::default()
    }

    pub fn with_model(model: Model) -> Self {
        let state = AppState::empty();
        state.load(model).expect("fresh state has no model");
        state
    }

    /// Installs the model. Only the first call succeeds.
    pub fn load(&self, model: Model) -> Result<(), Arc<Model>> {
        self.model.set(Arc::new(model))
    }

    pub fn model(&self) -> Option<&Arc<Model>> {
        self.model.get()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Origins allowed by CORS. Empty means any origin.
    pub cors_origins: Vec<String>,
}

pub fn router(state: AppState, config: &ServiceConfig) -> Result<Router, Error> {
    let origins = if config.cors_origins.is_empty() {
        AllowOrigin::any()
    } else {
        let values = config
            .cors_origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| Error::Domain(format!("invalid CORS origin {o:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(values)
    };
    let cors = CorsLayer::new()
        .allow_origin(origins)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);

    Ok(Router::new()
        .route("/api/v1/edge", post(api::edge))
        .route("/api/v1/distribution", get(api::distribution))
        .route("/api/v1/health", get(api::health))
        .route("/api/v1/config", get(api::config))
        .fallback(api::not_found)
        .layer(cors)
        .with_state(state))
}

/// Serves until the listener fails or the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, router: Router) -> std::io::Result<()> {
    axum::serve(listener, router).await
}
