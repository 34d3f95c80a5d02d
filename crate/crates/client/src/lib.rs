//! Async client for the kgfc service.

use kgfc_core::api::{
    ApiError, AurocRequest, CheckRequest, CheckResponse, CorpusRequest, GraphInfo, Health, LoadGraphRequest,
    MatrixRequest, MatrixResponse,
};
use kgfc_core::calibration::{CalibrationReport, CalibrationRequest};
use kgfc_core::evaluation::{CorpusEvaluation, RocReport};
use kgfc_core::{ErrorKind, GraphStats};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("{0}")]
    Api(ApiError),
    #[error("cannot reach service at {url}: {source}")]
    Transport {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("unexpected response from {url} (status {status}): {message}")]
    Protocol { url: String, status: u16, message: String },
}

impl ClientError {
    /// Transport and protocol failures count as I/O errors.
    pub fn kind(&self) -> ErrorKind {
        match self {
            ClientError::Api(e) => e.kind,
            _ => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base = base_url.into().trim_end_matches('/').to_owned();
        Self {
            base,
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(&self, url: String, resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        let bytes = resp.bytes().await.map_err(|source| ClientError::Transport {
            url: url.clone(),
            source,
        })?;
        if status.is_success() {
            return serde_json::from_slice(&bytes).map_err(|e| ClientError::Protocol {
                url,
                status: status.as_u16(),
                message: e.to_string(),
            });
        }
        match serde_json::from_slice::<ApiError>(&bytes) {
            Ok(e) => Err(ClientError::Api(e)),
            Err(_) => Err(ClientError::Protocol {
                url,
                status: status.as_u16(),
                message: String::from_utf8_lossy(&bytes).into_owned(),
            }),
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let url = format!("{}{path}", self.base);
        let resp = self.http.get(&url).send().await.map_err(|source| ClientError::Transport {
            url: url.clone(),
            source,
        })?;
        self.decode(url, resp).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let url = format!("{}{path}", self.base);
        let resp = self
            .http
            .post(&url)
            .json(body)
            .send()
            .await
            .map_err(|source| ClientError::Transport {
                url: url.clone(),
                source,
            })?;
        self.decode(url, resp).await
    }

    pub async fn health(&self) -> Result<Health> {
        self.get("/health").await
    }

    pub async fn graphs(&self) -> Result<Vec<GraphInfo>> {
        self.get("/v1/graphs").await
    }

    /// Asks the service to load a snapshot from its own filesystem.
    pub async fn load_graph(&self, req: &LoadGraphRequest) -> Result<GraphInfo> {
        self.post("/v1/graphs", req).await
    }

    pub async fn stats(&self, graph: &str) -> Result<GraphStats> {
        self.get(&format!("/v1/graphs/{graph}/stats")).await
    }

    pub async fn check(&self, graph: &str, req: &CheckRequest) -> Result<CheckResponse> {
        self.post(&format!("/v1/graphs/{graph}/truth"), req).await
    }

    pub async fn matrix(&self, graph: &str, req: &MatrixRequest) -> Result<MatrixResponse> {
        self.post(&format!("/v1/graphs/{graph}/matrix"), req).await
    }

    pub async fn corpus(&self, graph: &str, req: &CorpusRequest) -> Result<CorpusEvaluation> {
        self.post(&format!("/v1/graphs/{graph}/corpus"), req).await
    }

    pub async fn calibrate(&self, graph: &str, req: &CalibrationRequest) -> Result<CalibrationReport> {
        self.post(&format!("/v1/graphs/{graph}/calibrate"), req).await
    }

    pub async fn auroc(&self, req: &AurocRequest) -> Result<RocReport> {
        self.post("/v1/auroc", req).await
    }
}
