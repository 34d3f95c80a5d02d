//! HTTP/JSON front end over loaded graph snapshots.
//!
//! Graphs are loaded once (`POST /v1/graphs`) and then queried by id. Every
//! search-heavy handler runs on the blocking pool so the async workers stay
//! responsive while rayon fans the work out.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgfc_core::api::{
    self, ApiError, AurocRequest, CheckRequest, CheckResponse, CorpusRequest, GraphInfo, Health, LoadGraphRequest,
    MatrixRequest, MatrixResponse,
};
use kgfc_core::calibration::{run_calibration, CalibrationReport, CalibrationRequest, GraphViews};
use kgfc_core::evaluation::{CorpusEvaluation, RocReport};
use kgfc_core::{snapshot, Directedness, Error, ErrorKind, GraphStats, KnowledgeBase};
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

const BODY_LIMIT: usize = 512 * 1024 * 1024;

/// A snapshot plus its lazily built undirected view.
pub struct LoadedGraph {
    pub info: GraphInfo,
    base: KnowledgeBase,
    undirected: OnceLock<KnowledgeBase>,
}

impl LoadedGraph {
    pub fn new(id: String, path: PathBuf, base: KnowledgeBase) -> Self {
        let info = GraphInfo {
            id,
            path,
            directedness: base.graph.directedness(),
            node_count: base.graph.node_count(),
            edge_count: base.graph.edge_count(),
        };
        Self {
            info,
            base,
            undirected: OnceLock::new(),
        }
    }

    pub fn view(&self, d: Option<Directedness>) -> Result<&KnowledgeBase, Error> {
        match (d, self.base.graph.directedness()) {
            (None, _) | (Some(Directedness::Directed), Directedness::Directed) => Ok(&self.base),
            (Some(Directedness::Undirected), Directedness::Undirected) => Ok(&self.base),
            (Some(Directedness::Undirected), Directedness::Directed) => {
                Ok(self.undirected.get_or_init(|| self.base.to_undirected()))
            }
            (Some(Directedness::Directed), Directedness::Undirected) => Err(Error::validation(
                "the snapshot is undirected; a directed view is unavailable",
            )),
        }
    }

    fn views(&self) -> Result<GraphViews<'_>, Error> {
        Ok(GraphViews {
            directed: (self.base.graph.directedness() == Directedness::Directed).then_some(&self.base),
            undirected: self.view(Some(Directedness::Undirected))?,
        })
    }
}

#[derive(Default)]
pub struct AppState {
    graphs: RwLock<BTreeMap<String, Arc<LoadedGraph>>>,
}

impl AppState {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn insert(&self, graph: LoadedGraph) -> GraphInfo {
        let info = graph.info.clone();
        self.graphs.write().unwrap().insert(info.id.clone(), Arc::new(graph));
        info
    }

    pub fn get(&self, id: &str) -> Result<Arc<LoadedGraph>, Error> {
        self.graphs.read().unwrap().get(id).cloned().ok_or_else(|| Error::Unresolved {
            missing: vec![id.to_owned()],
            suggestions: self.graphs.read().unwrap().keys().cloned().collect(),
        })
    }

    pub fn list(&self) -> Vec<GraphInfo> {
        self.graphs.read().unwrap().values().map(|g| g.info.clone()).collect()
    }

    /// Loads a snapshot from disk, reusing an already loaded graph with the
    /// same id and path.
    pub fn load(&self, path: &Path, id: Option<String>) -> Result<GraphInfo, Error> {
        let id = id.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".to_owned())
        });
        if let Some(g) = self.graphs.read().unwrap().get(&id) {
            if g.info.path == path {
                return Ok(g.info.clone());
            }
        }
        let kb = snapshot::load(path)?;
        tracing::info!(id, path = %path.display(), nodes = kb.graph.node_count(), "graph loaded");
        Ok(self.insert(LoadedGraph::new(id, path.to_owned(), kb)))
    }
}

/// Error response carrying an [`ApiError`] body.
pub struct AppError(pub ApiError);

pub fn status_for(kind: ErrorKind) -> StatusCode {
    match kind {
        ErrorKind::Io => StatusCode::INTERNAL_SERVER_ERROR,
        ErrorKind::Resolution => StatusCode::NOT_FOUND,
        ErrorKind::Validation => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError(ApiError::from(&e))
    }
}

impl From<JsonRejection> for AppError {
    fn from(r: JsonRejection) -> Self {
        AppError(ApiError {
            kind: ErrorKind::Validation,
            message: r.body_text(),
            missing: Vec::new(),
            suggestions: Vec::new(),
        })
    }
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        (status_for(self.0.kind), Json(self.0)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, AppError>;

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, Error> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => Ok(Json(r?)),
        Err(e) => Err(AppError(ApiError {
            kind: ErrorKind::Io,
            message: format!("worker failed: {e}"),
            missing: Vec::new(),
            suggestions: Vec::new(),
        })),
    }
}

fn body<T: DeserializeOwned>(payload: Result<Json<T>, JsonRejection>) -> Result<T, AppError> {
    Ok(payload?.0)
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

async fn list_graphs(State(state): State<Arc<AppState>>) -> Json<Vec<GraphInfo>> {
    Json(state.list())
}

async fn load_graph(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<LoadGraphRequest>, JsonRejection>,
) -> ApiResult<GraphInfo> {
    let req = body(payload)?;
    blocking(move || state.load(&req.path, req.id)).await
}

async fn graph_stats(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<GraphStats> {
    let g = state.get(&id)?;
    blocking(move || Ok(g.base.graph.stats())).await
}

async fn truth(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<CheckRequest>, JsonRejection>,
) -> ApiResult<CheckResponse> {
    let req = body(payload)?;
    let g = state.get(&id)?;
    blocking(move || api::check(g.view(req.view)?, &req)).await
}

async fn matrix(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<MatrixRequest>, JsonRejection>,
) -> ApiResult<MatrixResponse> {
    let req = body(payload)?;
    let g = state.get(&id)?;
    blocking(move || api::matrix(g.view(req.view)?, &req)).await
}

async fn corpus(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<CorpusRequest>, JsonRejection>,
) -> ApiResult<CorpusEvaluation> {
    let req = body(payload)?;
    let g = state.get(&id)?;
    blocking(move || api::corpus(g.view(req.view)?, &req)).await
}

async fn calibrate(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    payload: Result<Json<CalibrationRequest>, JsonRejection>,
) -> ApiResult<CalibrationReport> {
    let req = body(payload)?;
    let g = state.get(&id)?;
    blocking(move || run_calibration(g.views()?, &req)).await
}

async fn roc(payload: Result<Json<AurocRequest>, JsonRejection>) -> ApiResult<RocReport> {
    let req = body(payload)?;
    blocking(move || api::roc(&req)).await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/graphs", get(list_graphs).post(load_graph))
        .route("/v1/graphs/{id}/stats", get(graph_stats))
        .route("/v1/graphs/{id}/truth", post(truth))
        .route("/v1/graphs/{id}/matrix", post(matrix))
        .route("/v1/graphs/{id}/corpus", post(corpus))
        .route("/v1/graphs/{id}/calibrate", post(calibrate))
        .route("/v1/auroc", post(roc))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Binds `addr` and serves in a background task. Port 0 picks a free port;
/// the bound address is returned.
pub async fn spawn(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<(SocketAddr, JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, tokio::spawn(serve(listener, state))))
}
