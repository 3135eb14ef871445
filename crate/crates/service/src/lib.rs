//! HTTP preview service: submit a slice and in-progress weak labels, get the
//! pseudo-label back. Nothing is kept between requests.

use std::future::Future;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::DefaultBodyLimit;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use pointline_api::{
    DiceSummary, ErrorBody, Health, PreviewRequest, PreviewResponse, RegionDice, TimingsMs, HEALTH_PATH,
    MAX_BODY_BYTES, PREVIEW_PATH,
};
use pointline_core::eval::dice;
use pointline_core::imaging::{decode_gray, decode_mask, encode_mask_png, BinaryMask};
use pointline_core::pseudolabel::{run_pipeline, GrowConfig, PipelineError};
use pointline_core::weaklabel::{bounding_box, weak_labels_from_value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Margin around a region's annotation when scoring it alone.
const REGION_DICE_MARGIN: u32 = 6;

#[derive(Debug, Clone, Default)]
pub struct ServiceOptions {
    /// Allowed CORS origins; `None` allows any origin.
    pub cors_origins: Option<Vec<String>>,
}

pub fn router(options: &ServiceOptions) -> Router {
    let cors = match &options.cors_origins {
        None => CorsLayer::permissive(),
        Some(origins) => {
            let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
            CorsLayer::new().allow_origin(AllowOrigin::list(list)).allow_methods(Any).allow_headers(Any)
        }
    };
    Router::new()
        .route(HEALTH_PATH, get(health))
        .route(PREVIEW_PATH, post(preview))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(cors)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    options: ServiceOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "preview service listening");
    }
    axum::serve(listener, router(&options)).with_graceful_shutdown(shutdown).await
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok".into(), version: VERSION.into(), defaults: GrowConfig::default() })
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn bad_request(field: &str, error: impl ToString) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody { error: error.to_string(), field: Some(field.into()) },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let (status, field) = match &e {
            PipelineError::ConstraintGeometry { .. } => (StatusCode::UNPROCESSABLE_ENTITY, Some("labels")),
            PipelineError::Config(_) => (StatusCode::BAD_REQUEST, Some("config")),
            PipelineError::DimensionMismatch { .. } => (StatusCode::BAD_REQUEST, Some("labels")),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, None),
        };
        if status.is_server_error() {
            tracing::error!("preview failed: {e}");
        }
        Self { status, body: ErrorBody { error: e.to_string(), field: field.map(Into::into) } }
    }
}

async fn preview(body: Bytes) -> Result<Json<PreviewResponse>, ApiError> {
    let req: PreviewRequest = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("body", e))?;
    tokio::task::spawn_blocking(move || run_preview(req))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody { error: format!("worker failed: {e}"), field: None },
        })?
        .map(Json)
}

fn run_preview(req: PreviewRequest) -> Result<PreviewResponse, ApiError> {
    let start = Instant::now();
    let bytes = pointline_api::decode(&req.image).map_err(|e| ApiError::bad_request("image", format!("invalid base64: {e}")))?;
    let image = decode_gray(&bytes).map_err(|e| ApiError::bad_request("image", e))?;
    let labels = weak_labels_from_value(req.labels).map_err(|e| ApiError::bad_request("labels", e))?;
    let cfg = req.config.map(|p| p.apply(&GrowConfig::default())).unwrap_or_default();
    cfg.validate().map_err(|e| ApiError::bad_request("config", e))?;
    let reference = match req.reference {
        Some(text) => {
            let bytes = pointline_api::decode(&text)
                .map_err(|e| ApiError::bad_request("reference", format!("invalid base64: {e}")))?;
            let mask = decode_mask(&bytes).map_err(|e| ApiError::bad_request("reference", e))?;
            if mask.dims() != image.dims() {
                return Err(ApiError::bad_request(
                    "reference",
                    format!("reference is {:?} but the image is {:?}", mask.dims(), image.dims()),
                ));
            }
            Some(mask)
        }
        None => None,
    };
    let decode_ms = ms(start.elapsed());

    let out = run_pipeline(&image, &labels, &cfg)?;
    let (h, w) = image.dims();
    let dice = match &reference {
        Some(reference) => {
            let overall = dice(&out.mask, reference).map_err(PipelineError::from)?;
            let mut regions = Vec::with_capacity(out.regions.len());
            for (region, trace) in labels.regions.iter().zip(&out.regions) {
                let bbox = bounding_box(region, REGION_DICE_MARGIN, h, w);
                let crop = |m: &BinaryMask| {
                    let mut c = BinaryMask::empty(h, w);
                    for p in m.iter_set().filter(|&p| bbox.contains(p)) {
                        c.insert(p);
                    }
                    c
                };
                let d = pointline_core::eval::dice(&crop(&trace.grown), &crop(reference)).map_err(PipelineError::from)?;
                regions.push(RegionDice { kind: trace.kind, dice: d });
            }
            Some(DiceSummary { overall, regions })
        }
        None => None,
    };
    let png = encode_mask_png(&out.mask).map_err(PipelineError::from)?;
    let t = out.timings;
    Ok(PreviewResponse {
        mask: pointline_api::encode(&png),
        height: h,
        width: w,
        empty: out.mask.is_empty(),
        dice,
        timings_ms: TimingsMs {
            decode: decode_ms,
            smooth: ms(t.smooth),
            geometry: ms(t.geometry),
            grow: ms(t.grow),
            close: ms(t.close),
            total: ms(start.elapsed()),
        },
    })
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
