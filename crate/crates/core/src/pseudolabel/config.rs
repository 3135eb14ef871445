use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::weaklabel::MidpointRule;

/// Pixel neighbourhood used by region growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(i32, i32); 8] =
            [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: u8 = s.trim().parse().map_err(|_| format!("connectivity must be 4 or 8, got {s:?}"))?;
        Connectivity::try_from(v)
    }
}

/// Which pipeline stages run. The four cumulative presets form the ablation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stages {
    /// Seed from the backbone; otherwise from the centre points alone.
    pub use_backbone: bool,
    /// Pre-accept the area between each annotated line and its centre point.
    pub use_fill: bool,
    /// Confine growth to the constraint region; otherwise the whole image.
    pub use_edge_limit: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Stages::FULL
    }
}

impl Stages {
    pub const CENTER_POINT: Stages = Stages { use_backbone: false, use_fill: false, use_edge_limit: false };
    pub const BACKBONE: Stages = Stages { use_backbone: true, use_fill: false, use_edge_limit: false };
    pub const BACKBONE_FILL: Stages = Stages { use_backbone: true, use_fill: true, use_edge_limit: false };
    pub const FULL: Stages = Stages { use_backbone: true, use_fill: true, use_edge_limit: true };

    /// Ablation rows, least to most complete.
    pub const LADDER: [(&'static str, Stages); 4] = [
        ("Center point growth", Stages::CENTER_POINT),
        ("Backbone growth", Stages::BACKBONE),
        ("Backbone growth + Difficult area filling", Stages::BACKBONE_FILL),
        ("Backbone growth + Difficult area filling + Edge limiting", Stages::FULL),
    ];
}

impl fmt::Display for Stages {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.use_backbone {
            parts.push("backbone");
        }
        if self.use_fill {
            parts.push("fill");
        }
        if self.use_edge_limit {
            parts.push("edge");
        }
        if parts.is_empty() {
            f.write_str("center")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

/// Parses `all`, `center`, or a comma list of `backbone`, `fill`, `edge`.
impl FromStr for Stages {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "all" | "full" => return Ok(Stages::FULL),
            "center" | "none" => return Ok(Stages::CENTER_POINT),
            _ => {}
        }
        let mut out = Stages::CENTER_POINT;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "backbone" => out.use_backbone = true,
                "fill" => out.use_fill = true,
                "edge" | "edge_limit" => out.use_edge_limit = true,
                other => return Err(format!("unknown stage {other:?} (expected backbone, fill, edge, all or center)")),
            }
        }
        Ok(out)
    }
}

/// Region-growing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowConfig {
    /// Largest accepted |intensity - backbone mean|, inclusive.
    pub epsilon: f64,
    pub smooth_kernel: usize,
    pub close_kernel: usize,
    /// Number of dilations, then as many erosions.
    pub close_iterations: usize,
    /// Perpendicular distance of a horn's Bezier control point from its chord midpoint.
    pub bezier_offset: f64,
    pub connectivity: Connectivity,
    pub midpoint: MidpointRule,
    /// Also seed from the annotated line's own pixels.
    pub include_line_in_backbone: bool,
    pub stages: Stages,
}

impl Default for GrowConfig {
    fn default() -> Self {
        Self {
            epsilon: 30.0,
            smooth_kernel: 3,
            close_kernel: 3,
            close_iterations: 1,
            bezier_offset: 3.0,
            connectivity: Connectivity::Eight,
            midpoint: MidpointRule::Index,
            include_line_in_backbone: false,
            stages: Stages::FULL,
        }
    }
}

impl GrowConfig {
    pub fn with_stages(&self, stages: Stages) -> Self {
        Self { stages, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(format!("epsilon must be a non-negative number, got {}", self.epsilon));
        }
        for (name, k) in [("smooth_kernel", self.smooth_kernel), ("close_kernel", self.close_kernel)] {
            if k == 0 || k % 2 == 0 {
                return Err(format!("{name} must be odd and positive, got {k}"));
            }
        }
        if !self.bezier_offset.is_finite() || self.bezier_offset < 0.0 {
            return Err(format!("bezier_offset must be a non-negative number, got {}", self.bezier_offset));
        }
        Ok(())
    }

    /// Reads a TOML (`.toml`) or JSON (anything else) config file.
    pub fn from_file(path: &std::path::Path) -> Result<GrowConfigPatch, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let is_toml = path.extension().and_then(|e| e.to_str()) == Some("toml");
        if is_toml {
            GrowConfigPatch::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
        } else {
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

/// Partial [`GrowConfig`]; unset fields fall through to the base config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowConfigPatch {
    pub epsilon: Option<f64>,
    pub smooth_kernel: Option<usize>,
    pub close_kernel: Option<usize>,
    pub close_iterations: Option<usize>,
    pub bezier_offset: Option<f64>,
    pub connectivity: Option<Connectivity>,
    pub midpoint: Option<MidpointRule>,
    pub include_line_in_backbone: Option<bool>,
    pub stages: Option<StagesPatch>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StagesPatch {
    pub use_backbone: Option<bool>,
    pub use_fill: Option<bool>,
    pub use_edge_limit: Option<bool>,
}

impl From<Stages> for StagesPatch {
    fn from(s: Stages) -> Self {
        Self {
            use_backbone: Some(s.use_backbone),
            use_fill: Some(s.use_fill),
            use_edge_limit: Some(s.use_edge_limit),
        }
    }
}

impl From<&GrowConfig> for GrowConfigPatch {
    fn from(c: &GrowConfig) -> Self {
        Self {
            epsilon: Some(c.epsilon),
            smooth_kernel: Some(c.smooth_kernel),
            close_kernel: Some(c.close_kernel),
            close_iterations: Some(c.close_iterations),
            bezier_offset: Some(c.bezier_offset),
            connectivity: Some(c.connectivity),
            midpoint: Some(c.midpoint),
            include_line_in_backbone: Some(c.include_line_in_backbone),
            stages: Some(c.stages.into()),
        }
    }
}

impl GrowConfigPatch {
    fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// `self` layered over `base`: fields set here win.
    pub fn apply(&self, base: &GrowConfig) -> GrowConfig {
        let mut out = base.clone();
        if let Some(v) = self.epsilon {
            out.epsilon = v;
        }
        if let Some(v) = self.smooth_kernel {
            out.smooth_kernel = v;
        }
        if let Some(v) = self.close_kernel {
            out.close_kernel = v;
        }
        if let Some(v) = self.close_iterations {
            out.close_iterations = v;
        }
        if let Some(v) = self.bezier_offset {
            out.bezier_offset = v;
        }
        if let Some(v) = self.connectivity {
            out.connectivity = v;
        }
        if let Some(v) = self.midpoint {
            out.midpoint = v;
        }
        if let Some(v) = self.include_line_in_backbone {
            out.include_line_in_backbone = v;
        }
        if let Some(s) = self.stages {
            if let Some(v) = s.use_backbone {
                out.stages.use_backbone = v;
            }
            if let Some(v) = s.use_fill {
                out.stages.use_fill = v;
            }
            if let Some(v) = s.use_edge_limit {
                out.stages.use_edge_limit = v;
            }
        }
        out
    }
}
