//! JSON prediction service for lineup selection.
//!
//! State is loaded once and shared read-only across requests, so identical
//! requests always produce identical bodies.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{Any, CorsLayer};

use crate::featurize::Target;
use crate::predict::{MatchContextInput, PredictError, PredictionRequest, PredictionResponse, Predictor};

pub const DEFAULT_PORT: u16 = 8096;
pub const MAX_LINEUP: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineupRequest {
    pub players: Vec<String>,
    pub context: MatchContextInput,
    /// Targets predicted for every player, in this order.
    #[serde(default = "default_targets")]
    pub targets: Vec<Target>,
}

fn default_targets() -> Vec<Target> {
    vec![Target::Runs]
}

#[derive(Debug, Deserialize)]
struct SquadQuery {
    team: String,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<PredictError> for ApiError {
    fn from(e: PredictError) -> Self {
        let status = match &e {
            PredictError::ModelNotLoaded(_) => StatusCode::SERVICE_UNAVAILABLE,
            PredictError::UnknownPlayer(_) | PredictError::UnknownTeam(_) => StatusCode::NOT_FOUND,
            PredictError::Invalid(_) => StatusCode::BAD_REQUEST,
            PredictError::Featurize(_) | PredictError::Learner(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("malformed request: {e}")))
}

async fn health(State(p): State<Arc<Predictor>>) -> Json<serde_json::Value> {
    let model = |t| p.model(t).map(|m| m.kind().token());
    Json(json!({ "status": "ok", "models": { "runs": model(Target::Runs), "wickets": model(Target::Wickets) } }))
}

async fn teams(State(p): State<Arc<Predictor>>) -> Json<Vec<String>> {
    Json(p.teams())
}

async fn squad(State(p): State<Arc<Predictor>>, Query(q): Query<SquadQuery>) -> Result<Response, ApiError> {
    // With no rosters at all there is nothing to list, which is not an error.
    if !p.has_rosters() {
        return Ok(Json(Vec::<()>::new()).into_response());
    }
    Ok(Json(p.squad(&q.team)?).into_response())
}

async fn predict(State(p): State<Arc<Predictor>>, body: Bytes) -> Result<Json<PredictionResponse>, ApiError> {
    let req: PredictionRequest = parse(&body)?;
    Ok(Json(p.predict(&req)?))
}

/// Predictions for each player in request order, one per requested target.
pub fn evaluate_lineup(p: &Predictor, req: &LineupRequest) -> Result<Vec<PredictionResponse>, PredictError> {
    if req.players.is_empty() || req.players.len() > MAX_LINEUP {
        return Err(PredictError::Invalid(format!(
            "a lineup holds 1 to {MAX_LINEUP} players, got {}",
            req.players.len()
        )));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = req.players.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(PredictError::Invalid(format!("player `{dup}` appears twice")));
    }
    if req.targets.is_empty() {
        return Err(PredictError::Invalid("targets must not be empty".to_string()));
    }
    let mut out = Vec::with_capacity(req.players.len() * req.targets.len());
    for player_id in &req.players {
        for &target in &req.targets {
            out.push(p.predict(&PredictionRequest {
                player_id: player_id.clone(),
                target,
                context: req.context.clone(),
            })?);
        }
    }
    Ok(out)
}

async fn lineup(State(p): State<Arc<Predictor>>, body: Bytes) -> Result<Json<Vec<PredictionResponse>>, ApiError> {
    let req: LineupRequest = parse(&body)?;
    Ok(Json(evaluate_lineup(&p, &req)?))
}

/// The service's routes. `cors_origin` restricts cross-origin access to one
/// origin; `None` allows any.
pub fn router(predictor: Arc<Predictor>, cors_origin: Option<HeaderValue>) -> Router {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match cors_origin {
        Some(origin) => cors.allow_origin(origin),
        None => cors.allow_origin(Any),
    };
    Router::new()
        .route("/api/health", get(health))
        .route("/api/teams", get(teams))
        .route("/api/squad", get(squad))
        .route("/api/predict", post(predict))
        .route("/api/lineup/evaluate", post(lineup))
        .layer(cors)
        .with_state(predictor)
}

/// Serves until interrupted.
pub async fn serve(
    predictor: Arc<Predictor>,
    addr: SocketAddr,
    cors_origin: Option<HeaderValue>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(predictor, cors_origin))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
