//! Geometry derived from one region's annotation: centre points, backbone,
//! difficult-area fill and the growth constraint.

use std::collections::BTreeSet;

use crate::imaging::{
    dilate, fill_polygon, rasterize_bezier_with_control, rasterize_segment, BinaryMask, GrayImage,
    PixelPoint,
};
use crate::weaklabel::{MidpointRule, RegionAnnotation, RegionKind};

use super::{GrowConfig, PipelineError};

/// Seed pixels and the reference intensity for growing.
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    /// Sorted, deduplicated, in bounds.
    pub pixels: Vec<PixelPoint>,
    /// Mean smoothed intensity over `pixels`.
    pub mean_intensity: f64,
}

impl Backbone {
    /// Measures `pixels` (deduplicated, clipped to the image) on `smoothed`.
    pub fn measure(
        pixels: impl IntoIterator<Item = PixelPoint>,
        smoothed: &GrayImage,
    ) -> Result<Self, PipelineError> {
        let (h, w) = smoothed.dims();
        let pixels: Vec<PixelPoint> = pixels
            .into_iter()
            .filter(|p| p.in_bounds(h, w))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if pixels.is_empty() {
            return Err(PipelineError::Internal("backbone has no pixels inside the image".into()));
        }
        let sum: u64 = pixels.iter().map(|&p| smoothed.at(p) as u64).sum();
        Ok(Self { mean_intensity: sum as f64 / pixels.len() as f64, pixels })
    }
}

/// Growth is confined to `allowed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRegion {
    pub allowed: BinaryMask,
}

/// Centre points: one for a horn, `[posterior, anterior]` for the body.
///
/// A horn's centre is the midpoint between its corner point and the middle of
/// its line. A body centre is the midpoint between a side line's middle and
/// the midpoint of the upper and lower points. Halves round up; results are
/// clamped to the image.
pub fn center_points(
    region: &RegionAnnotation,
    rule: MidpointRule,
    height: usize,
    width: usize,
) -> Vec<PixelPoint> {
    let clamp = |p: PixelPoint| {
        PixelPoint::new(p.row.clamp(0, height as i32 - 1), p.col.clamp(0, width as i32 - 1))
    };
    match region.kind {
        RegionKind::AnteriorHorn | RegionKind::PosteriorHorn => {
            let mid = region.lines[0].midpoint(rule);
            let corner = region.points[0];
            // round((a + b) / 2) half-up == floor((a + b + 1) / 2)
            let half = |a: i32, b: i32| (a + b + 1).div_euclid(2);
            vec![clamp(PixelPoint::new(half(mid.row, corner.row), half(mid.col, corner.col)))]
        }
        RegionKind::Body => {
            let (upper, lower) = (region.points[0], region.points[1]);
            // round((2m + u + d) / 4) half-up == floor((2m + u + d + 2) / 4)
            let quarter = |m: i32, u: i32, d: i32| (2 * m + u + d + 2).div_euclid(4);
            region
                .lines
                .iter()
                .map(|line| {
                    let mid = line.midpoint(rule);
                    clamp(PixelPoint::new(
                        quarter(mid.row, upper.row, lower.row),
                        quarter(mid.col, upper.col, lower.col),
                    ))
                })
                .collect()
        }
    }
}

/// Skeleton joining each line's ends to its centre, plus centre to centre for
/// the body. The annotated line itself is left out unless `include_line`.
pub fn backbone_pixels(
    region: &RegionAnnotation,
    centers: &[PixelPoint],
    include_line: bool,
) -> BTreeSet<PixelPoint> {
    let mut out = BTreeSet::new();
    for (line, &center) in region.lines.iter().zip(centers) {
        out.extend(rasterize_segment(line.first(), center));
        out.extend(rasterize_segment(line.last(), center));
        if include_line {
            for w in line.points().windows(2) {
                out.extend(rasterize_segment(w[0], w[1]));
            }
        }
    }
    if let [a, b] = centers {
        out.extend(rasterize_segment(*a, *b));
    }
    out
}

pub fn build_backbone(
    region: &RegionAnnotation,
    centers: &[PixelPoint],
    smoothed: &GrayImage,
    include_line: bool,
) -> Result<Backbone, PipelineError> {
    Backbone::measure(backbone_pixels(region, centers, include_line), smoothed)
}

/// Union over the region's lines of the polygon (line vertices, then the
/// line's centre point).
pub fn fill_difficult_area(
    region: &RegionAnnotation,
    centers: &[PixelPoint],
    height: usize,
    width: usize,
) -> BinaryMask {
    let mut mask = BinaryMask::empty(height, width);
    for (line, &center) in region.lines.iter().zip(centers) {
        let mut poly = line.points().to_vec();
        poly.push(center);
        let part = fill_polygon(&poly, height, width).expect("line plus centre has 3+ vertices");
        mask.union_with(&part).expect("same dims");
    }
    mask
}

/// Straight-edged outline of the region's maximal extent.
///
/// Horn: the line followed by the corner point. Body: posterior line top to
/// bottom, lower point, anterior line bottom to top, upper point.
pub fn constraint_outline(region: &RegionAnnotation) -> Vec<PixelPoint> {
    match region.kind {
        RegionKind::AnteriorHorn | RegionKind::PosteriorHorn => {
            let mut v = region.lines[0].points().to_vec();
            v.push(region.points[0]);
            v
        }
        RegionKind::Body => {
            let mut v = region.lines[0].points().to_vec();
            v.push(region.points[1]);
            v.extend(region.lines[1].points().iter().rev());
            v.push(region.points[0]);
            v
        }
    }
}

/// Allowed-growth mask for one region.
///
/// Horns replace the two straight sides meeting at the corner point with
/// quadratic Bezier arcs whose control point sits `cfg.bezier_offset` pixels
/// off the chord midpoint, on the side away from the centre point. The filled
/// outline is dilated by one pixel, and the backbone and difficult area are
/// always included.
pub fn build_constraint(
    region: &RegionAnnotation,
    region_index: usize,
    centers: &[PixelPoint],
    cfg: &GrowConfig,
    height: usize,
    width: usize,
) -> Result<ConstraintRegion, PipelineError> {
    let outline = constraint_outline(region);
    if let Some((i, j)) = first_crossing(&outline) {
        return Err(PipelineError::ConstraintGeometry {
            region: region_index,
            kind: region.kind,
            message: format!("constraint outline crosses itself (edges {i} and {j})"),
        });
    }

    let polygon = match region.kind {
        RegionKind::Body => outline,
        _ if cfg.bezier_offset == 0.0 => outline,
        _ => {
            let line = &region.lines[0];
            let corner = region.points[0];
            let center = centers[0];
            let mut v = line.points().to_vec();
            let arc_in = bulged_arc(line.last(), corner, center, cfg.bezier_offset);
            v.extend(&arc_in[1..]);
            let arc_out = bulged_arc(corner, line.first(), center, cfg.bezier_offset);
            // the closing vertex is line.first(), already at the front
            v.extend(arc_out.iter().skip(1).take(arc_out.len().saturating_sub(2)));
            v
        }
    };

    let filled = fill_polygon(&polygon, height, width).map_err(PipelineError::Imaging)?;
    let mut allowed = dilate(&filled, 3).map_err(PipelineError::Imaging)?;
    for p in backbone_pixels(region, centers, cfg.include_line_in_backbone) {
        allowed.insert(p);
    }
    allowed
        .union_with(&fill_difficult_area(region, centers, height, width))
        .expect("same dims");
    Ok(ConstraintRegion { allowed })
}

/// Control point for the chord `a -> b`: on the perpendicular bisector,
/// `offset` away from the chord, on the side facing away from `away_from`.
pub fn bezier_control(a: PixelPoint, b: PixelPoint, away_from: PixelPoint, offset: f64) -> (f64, f64) {
    let mid = ((a.row + b.row) as f64 / 2.0, (a.col + b.col) as f64 / 2.0);
    let (dr, dc) = ((b.row - a.row) as f64, (b.col - a.col) as f64);
    let len = (dr * dr + dc * dc).sqrt();
    if len == 0.0 {
        return mid;
    }
    let mut normal = (-dc / len, dr / len);
    let to_mid = (mid.0 - away_from.row as f64, mid.1 - away_from.col as f64);
    if normal.0 * to_mid.0 + normal.1 * to_mid.1 < 0.0 {
        normal = (-normal.0, -normal.1);
    }
    (mid.0 + offset * normal.0, mid.1 + offset * normal.1)
}

fn bulged_arc(a: PixelPoint, b: PixelPoint, away_from: PixelPoint, offset: f64) -> Vec<PixelPoint> {
    rasterize_bezier_with_control(a, bezier_control(a, b, away_from, offset), b)
}

/// First pair of non-adjacent polygon edges that properly cross.
fn first_crossing(poly: &[PixelPoint]) -> Option<(usize, usize)> {
    let n = poly.len();
    let edge = |i: usize| (poly[i], poly[(i + 1) % n]);
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_cross(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

fn orient(a: PixelPoint, b: PixelPoint, c: PixelPoint) -> i64 {
    let v = (b.row - a.row) as i64 * (c.col - a.col) as i64 - (b.col - a.col) as i64 * (c.row - a.row) as i64;
    v.signum()
}

fn segments_cross(a: PixelPoint, b: PixelPoint, c: PixelPoint, d: PixelPoint) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0 && o3 * o4 < 0
}
