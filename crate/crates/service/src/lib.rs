//! HTTP API over a mashup library: browse tracks, rank donors, queue
//! renders and stream the results, and fetch analysis payloads.
//!
//! Every endpoint answers 503 until the library has been loaded. Errors
//! carry a JSON body `{"error": "..."}`.

pub mod jobs;

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::extract::{Path, Query, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mashup_core::align::{build_plan, PlanOptions};
use mashup_core::audio::BitDepth;
use mashup_core::compat::{
    agglomerative_cluster, asymmetry_stats, rank_candidates, AsymmetryStats, ItemLabel, Linkage,
};
use mashup_core::library::LibraryError;
use mashup_core::render::RenderSettings;
use mashup_core::{Library, Role, RoleAssignment};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeFile;

use jobs::{JobState, JobTable, RenderJob};

/// Runtime options fixed at startup.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Concurrent renders; further jobs wait in FIFO order.
    pub workers: usize,
    /// Render cache; `<library>/.renders` when unset.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { workers: 2, cache_dir: None }
    }
}

/// Shared state: the immutable library once loaded, and the job table.
#[derive(Clone)]
pub struct AppState {
    library: Arc<OnceLock<Arc<Library>>>,
    jobs: Arc<JobTable>,
    config: Arc<ServiceConfig>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            library: Arc::new(OnceLock::new()),
            jobs: Arc::new(JobTable::new(config.workers)),
            config: Arc::new(config),
        }
    }

    /// Installs the library; false if one was already installed.
    pub fn set_library(&self, library: Library) -> bool {
        self.library.set(Arc::new(library)).is_ok()
    }

    pub fn is_ready(&self) -> bool {
        self.library.get().is_some()
    }

    fn library(&self) -> Result<Arc<Library>, ApiError> {
        self.library.get().cloned().ok_or(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "library is loading"))
    }

    fn cache_dir(&self, library: &Library) -> PathBuf {
        self.config.cache_dir.clone().unwrap_or_else(|| library.root().join(".renders"))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/library", get(list_library))
        .route("/api/rank", get(rank))
        .route("/api/mashup", post(submit_mashup))
        .route("/api/mashup/{job}/status", get(job_status))
        .route("/api/mashup/{job}/audio", get(job_audio))
        .route("/api/matrix", get(matrix))
        .route("/api/clusters", get(clusters))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl ToString) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

fn unknown_song(e: LibraryError) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, e.to_string())
}

fn required<'a>(value: &'a Option<String>, name: &str) -> Result<&'a str, ApiError> {
    value.as_deref().ok_or_else(|| ApiError::bad_request(format!("missing query parameter {name:?}")))
}

#[derive(Debug, Serialize)]
pub struct TrackSummary {
    pub id: String,
    pub bpm: f64,
    pub key: String,
    pub duration: f64,
    pub segments: Vec<String>,
}

async fn list_library(State(state): State<AppState>) -> Result<Json<Vec<TrackSummary>>, ApiError> {
    let library = state.library()?;
    Ok(Json(
        library
            .tracks()
            .map(|t| TrackSummary {
                id: t.song_id.clone(),
                bpm: t.bpm,
                key: t.key.to_string(),
                duration: t.duration,
                segments: t.segments.iter().map(|s| s.label.clone()).collect(),
            })
            .collect(),
    ))
}

#[derive(Debug, Deserialize)]
pub struct RankQuery {
    base: Option<String>,
    role: Option<String>,
    source: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub song_id: String,
    pub score: f64,
}

/// `role` is what the base contributes; defaults mirror the CLI.
async fn rank(State(state): State<AppState>, Query(q): Query<RankQuery>) -> Result<Json<Vec<RankRow>>, ApiError> {
    let library = state.library()?;
    let base = required(&q.base, "base")?;
    let role: Role = q.role.as_deref().unwrap_or("accompaniment").parse().map_err(ApiError::bad_request)?;
    let source = q.source.as_deref().unwrap_or("cocola");
    library.track(base).map_err(unknown_song)?;
    let matrix = library.matrix(source).map_err(ApiError::unprocessable)?;
    let ranked = rank_candidates(&matrix, base, role).map_err(ApiError::unprocessable)?;
    Ok(Json(
        ranked
            .into_iter()
            .enumerate()
            .map(|(i, (song_id, score))| RankRow { rank: i + 1, song_id, score })
            .collect(),
    ))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub semitones: Option<f64>,
    pub tempo_ratio: Option<f64>,
    pub allow_self: bool,
    pub base_gain: Option<f64>,
    pub donor_gain: Option<f64>,
    pub normalize_dbfs: Option<f64>,
    pub bit_depth: Option<BitDepth>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MashupRequest {
    pub base: String,
    pub donor: String,
    #[serde(default = "default_donor_role")]
    pub donor_role: String,
    #[serde(default)]
    pub overrides: Overrides,
}

fn default_donor_role() -> String {
    "vocals".into()
}

/// Plans immediately so bad requests fail here; rendering is queued.
async fn submit_mashup(
    State(state): State<AppState>,
    Json(req): Json<MashupRequest>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let library = state.library()?;
    let donor_role: Role = req.donor_role.parse().map_err(ApiError::bad_request)?;
    let base = library.track(&req.base).map_err(unknown_song)?;
    let donor = library.track(&req.donor).map_err(unknown_song)?;
    let o = &req.overrides;
    let roles = RoleAssignment::new(&req.base, &req.donor, donor_role, o.allow_self).map_err(ApiError::unprocessable)?;
    let options = PlanOptions { allow_self: o.allow_self, semitones: o.semitones, tempo_ratio: o.tempo_ratio };
    let plan = build_plan(base, donor, &roles, &options).map_err(ApiError::unprocessable)?;
    let defaults = RenderSettings::default();
    let settings = RenderSettings {
        output_bit_depth: o.bit_depth.unwrap_or(defaults.output_bit_depth),
        donor_gain: o.donor_gain.unwrap_or(defaults.donor_gain),
        base_gain: o.base_gain.unwrap_or(defaults.base_gain),
        normalize_peak_dbfs: o.normalize_dbfs.unwrap_or(defaults.normalize_peak_dbfs),
    };
    let cache_dir = state.cache_dir(&library);
    let job_id = state.jobs.submit(library, cache_dir, plan, settings);
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job_id }))))
}

fn find_job(state: &AppState, job_id: &str) -> Result<RenderJob, ApiError> {
    state.library()?;
    state.jobs.get(job_id).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown job {job_id:?}")))
}

async fn job_status(State(state): State<AppState>, Path(job_id): Path<String>) -> Result<Json<RenderJob>, ApiError> {
    Ok(Json(find_job(&state, &job_id)?))
}

/// Streams the finished WAV; range requests are honoured for scrubbing.
async fn job_audio(
    State(state): State<AppState>,
    Path(job_id): Path<String>,
    req: Request,
) -> Result<Response, ApiError> {
    let job = find_job(&state, &job_id)?;
    match (job.state, job.output) {
        (JobState::Done, Some(path)) => {
            let response = ServeFile::new(&path)
                .try_call(req)
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("{}: {e}", path.display())))?;
            Ok(response.map(Body::new))
        }
        (JobState::Failed, _) => Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            job.error.unwrap_or_else(|| "render failed".into()),
        )),
        (state, _) => Err(ApiError::new(StatusCode::CONFLICT, format!("job {job_id} is {}", json!(state)))),
    }
}

#[derive(Debug, Deserialize)]
pub struct MatrixQuery {
    source: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct MatrixPayload {
    pub source: String,
    /// Row index is the vocals song, column the accompaniment song.
    pub song_ids: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Absent with fewer than two songs.
    pub asymmetry: Option<AsymmetryStats<f64>>,
}

async fn matrix(State(state): State<AppState>, Query(q): Query<MatrixQuery>) -> Result<Json<MatrixPayload>, ApiError> {
    let library = state.library()?;
    let source = required(&q.source, "source")?;
    let m = library.matrix(source).map_err(ApiError::unprocessable)?;
    Ok(Json(MatrixPayload {
        source: source.to_string(),
        asymmetry: asymmetry_stats(&m).ok(),
        rows: m.rows(),
        song_ids: m.song_ids,
    }))
}

#[derive(Debug, Deserialize)]
pub struct ClusterQuery {
    model: Option<String>,
    threshold: Option<String>,
    linkage: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ClusterPayload {
    pub model: String,
    pub threshold: f64,
    pub linkage: Linkage,
    pub cluster_count: usize,
    pub items: Vec<ItemLabel>,
}

async fn clusters(State(state): State<AppState>, Query(q): Query<ClusterQuery>) -> Result<Json<ClusterPayload>, ApiError> {
    let library = state.library()?;
    let model = required(&q.model, "model")?;
    let threshold: f64 = required(&q.threshold, "threshold")?
        .parse()
        .map_err(|e| ApiError::bad_request(format!("threshold: {e}")))?;
    let linkage: Linkage = q.linkage.as_deref().unwrap_or("average").parse().map_err(ApiError::bad_request)?;
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(ApiError::bad_request(format!("threshold must be finite and >= 0, got {threshold}")));
    }
    let mut embeddings = library.embeddings(model).map_err(ApiError::unprocessable)?.to_vec();
    embeddings.sort_by(|a, b| (&a.song_id, a.role).cmp(&(&b.song_id, b.role)));
    let clustering = agglomerative_cluster(&embeddings, threshold, linkage).map_err(ApiError::unprocessable)?;
    Ok(Json(ClusterPayload {
        model: model.to_string(),
        threshold,
        linkage,
        cluster_count: clustering.cluster_count(),
        items: clustering
            .item_ids
            .into_iter()
            .zip(clustering.labels)
            .map(|((song_id, role), cluster)| ItemLabel { song_id, role, cluster })
            .collect(),
    }))
}
