//! Weak labels to binary pseudo-label.
//!
//! Per region: centre points, backbone, difficult-area fill, constraint, then
//! region growing. The union over regions is closed once. Every stage can be
//! switched off through [`Stages`] for ablation.

mod config;
mod geometry;
mod grow;

use std::time::{Duration, Instant};

use thiserror::Error;

pub use config::{Connectivity, GrowConfig, GrowConfigPatch, Stages, StagesPatch};
pub use geometry::{
    backbone_pixels, bezier_control, build_backbone, build_constraint, center_points,
    constraint_outline, fill_difficult_area, Backbone, ConstraintRegion,
};
pub use grow::region_grow;

use crate::imaging::{close_iterated, mean_smooth, BinaryMask, GrayImage, ImagingError, PixelPoint};
use crate::weaklabel::{RegionKind, WeakLabelSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("labels are for a {labels:?} image but the image is {image:?}")]
    DimensionMismatch { labels: (usize, usize), image: (usize, usize) },
    #[error("region {region} ({kind}): {message}")]
    ConstraintGeometry { region: usize, kind: RegionKind, message: String },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Wall time spent per stage, summed over regions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub smooth: Duration,
    pub geometry: Duration,
    pub grow: Duration,
    pub close: Duration,
}

/// Intermediate products for one region.
#[derive(Debug, Clone)]
pub struct RegionTrace {
    pub kind: RegionKind,
    pub centers: Vec<PixelPoint>,
    /// Seeds actually used: the backbone, or the centre points alone.
    pub seeds: Backbone,
    pub pregrown: Option<BinaryMask>,
    pub constraint: Option<ConstraintRegion>,
    pub grown: BinaryMask,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Final pseudo-label.
    pub mask: BinaryMask,
    /// Union of the grown regions before closing.
    pub pre_close: BinaryMask,
    pub regions: Vec<RegionTrace>,
    pub timings: StageTimings,
}

impl PipelineOutput {
    /// Empty output is legal (no regions) but worth flagging to callers.
    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }
}

/// Full pipeline, returning only the final mask.
pub fn generate_pseudo_label(
    img: &GrayImage,
    labels: &WeakLabelSet,
    cfg: &GrowConfig,
) -> Result<BinaryMask, PipelineError> {
    run_pipeline(img, labels, cfg).map(|o| o.mask)
}

/// Full pipeline with per-region intermediates and stage timings.
pub fn run_pipeline(
    img: &GrayImage,
    labels: &WeakLabelSet,
    cfg: &GrowConfig,
) -> Result<PipelineOutput, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    let (h, w) = img.dims();
    if (labels.height, labels.width) != (h, w) {
        return Err(PipelineError::DimensionMismatch {
            labels: (labels.height, labels.width),
            image: (h, w),
        });
    }
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let smoothed = mean_smooth(img, cfg.smooth_kernel)?;
    timings.smooth = t.elapsed();

    let mut pre_close = BinaryMask::empty(h, w);
    let mut regions = Vec::with_capacity(labels.regions.len());
    for (index, region) in labels.regions.iter().enumerate() {
        let t = Instant::now();
        let centers = center_points(region, cfg.midpoint, h, w);
        let seeds = if cfg.stages.use_backbone {
            build_backbone(region, &centers, &smoothed, cfg.include_line_in_backbone)?
        } else {
            Backbone::measure(centers.iter().copied(), &smoothed)?
        };
        let pregrown = cfg.stages.use_fill.then(|| fill_difficult_area(region, &centers, h, w));
        let constraint = if cfg.stages.use_edge_limit {
            Some(build_constraint(region, index, &centers, cfg, h, w)?)
        } else {
            None
        };
        timings.geometry += t.elapsed();

        let t = Instant::now();
        let unbounded = ConstraintRegion { allowed: BinaryMask::full(h, w) };
        let empty = BinaryMask::empty(h, w);
        let grown = region_grow(
            &smoothed,
            &seeds,
            pregrown.as_ref().unwrap_or(&empty),
            constraint.as_ref().unwrap_or(&unbounded),
            cfg.epsilon,
            cfg.connectivity,
        )?;
        timings.grow += t.elapsed();

        pre_close.union_with(&grown)?;
        regions.push(RegionTrace { kind: region.kind, centers, seeds, pregrown, constraint, grown });
    }

    let t = Instant::now();
    let mask = close_iterated(&pre_close, cfg.close_kernel, cfg.close_iterations)?;
    timings.close = t.elapsed();
    if mask.is_empty() {
        tracing::warn!(image = %labels.image, "pseudo-label is empty");
    }
    Ok(PipelineOutput { mask, pre_close, regions, timings })
}
