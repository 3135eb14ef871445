//! Thin async client for the preview service.

use pointline_api::{ErrorBody, Health, PreviewRequest, PreviewResponse, HEALTH_PATH, PREVIEW_PATH};
use reqwest::StatusCode;
use thiserror::Error;

pub use pointline_api as api;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("service answered {status}: {}", .body.error)]
    Status { status: StatusCode, body: ErrorBody },
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Status { status, .. } => Some(*status),
            ClientError::Transport(e) => e.status(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` like `http://127.0.0.1:8731`.
    pub fn new(base: impl Into<String>) -> Self {
        Self { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    pub async fn health(&self) -> Result<Health, ClientError> {
        let resp = self.http.get(format!("{}{HEALTH_PATH}", self.base)).send().await?;
        decode(resp).await
    }

    pub async fn preview(&self, request: &PreviewRequest) -> Result<PreviewResponse, ClientError> {
        let resp = self.http.post(format!("{}{PREVIEW_PATH}", self.base)).json(request).send().await?;
        decode(resp).await
    }
}

async fn decode<T: serde::de::DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp.json().await?);
    }
    let text = resp.text().await.unwrap_or_default();
    let body = serde_json::from_str(&text).unwrap_or(ErrorBody { error: text, field: None });
    Err(ClientError::Status { status, body })
}
