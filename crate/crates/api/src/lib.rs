//! Request and response bodies of the preview service.
//!
//! Images and masks travel as base64-encoded PNG (or binary PGM for
//! images). Weak labels travel inline in their JSON document form.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

pub use pointline_core::pseudolabel::{GrowConfig, GrowConfigPatch};
use pointline_core::weaklabel::RegionKind;

pub const HEALTH_PATH: &str = "/v1/health";
pub const PREVIEW_PATH: &str = "/v1/preview";

/// Request bodies larger than this are refused with 413.
pub const MAX_BODY_BYTES: usize = 8 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreviewRequest {
    /// Base64 PNG or PGM, 8-bit grayscale.
    pub image: String,
    /// Weak-label document.
    pub labels: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<GrowConfigPatch>,
    /// Base64 PNG mask to score the result against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

impl PreviewRequest {
    pub fn new(image_bytes: &[u8], labels: serde_json::Value) -> Self {
        Self { image: encode(image_bytes), labels, config: None, reference: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewResponse {
    /// Base64 PNG, 0 or 255 per pixel.
    pub mask: String,
    pub height: usize,
    pub width: usize,
    pub empty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dice: Option<DiceSummary>,
    pub timings_ms: TimingsMs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiceSummary {
    pub overall: f64,
    pub regions: Vec<RegionDice>,
}

/// Dice of one region's grown area against the reference, both cut to the
/// region's bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDice {
    pub kind: RegionKind,
    pub dice: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingsMs {
    pub decode: f64,
    pub smooth: f64,
    pub geometry: f64,
    pub grow: f64,
    pub close: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub defaults: GrowConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    /// Request field the error refers to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

pub fn encode(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

pub fn decode(text: &str) -> Result<Vec<u8>, base64::DecodeError> {
    STANDARD.decode(text.trim())
}
