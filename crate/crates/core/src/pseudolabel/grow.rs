use std::collections::VecDeque;

use crate::imaging::{BinaryMask, GrayImage, PixelPoint};

use super::{Backbone, Connectivity, ConstraintRegion, PipelineError};

/// Seeded region growing under the intensity-similarity test.
///
/// Backbone and `pregrown` pixels are accepted unconditionally. A neighbour
/// of an accepted pixel is accepted iff it lies in `constraint.allowed` and
/// `|intensity - backbone.mean_intensity| <= epsilon`. The result is the
/// reachability fixpoint of that rule, so visit order does not matter.
pub fn region_grow(
    smoothed: &GrayImage,
    backbone: &Backbone,
    pregrown: &BinaryMask,
    constraint: &ConstraintRegion,
    epsilon: f64,
    connectivity: Connectivity,
) -> Result<BinaryMask, PipelineError> {
    let (h, w) = smoothed.dims();
    let allowed = &constraint.allowed;
    if allowed.dims() != (h, w) || pregrown.dims() != (h, w) {
        return Err(PipelineError::Contract(format!(
            "grow inputs disagree on size: image {h}x{w}, pregrown {:?}, constraint {:?}",
            pregrown.dims(),
            allowed.dims()
        )));
    }
    if let Some(p) = backbone.pixels.iter().find(|&&p| !allowed.contains(p)) {
        return Err(PipelineError::Contract(format!(
            "backbone pixel ({}, {}) lies outside the constraint region",
            p.row, p.col
        )));
    }
    if !pregrown.is_subset_of(allowed) {
        return Err(PipelineError::Contract("pregrown area leaves the constraint region".into()));
    }

    let mean = backbone.mean_intensity;
    let mut accepted = pregrown.clone();
    let mut queue: VecDeque<PixelPoint> = pregrown.iter_set().collect();
    for &p in &backbone.pixels {
        if !accepted.contains(p) {
            accepted.insert(p);
            queue.push_back(p);
        }
    }

    let offsets = connectivity.offsets();
    while let Some(p) = queue.pop_front() {
        for &(dr, dc) in offsets {
            let q = PixelPoint::new(p.row + dr, p.col + dc);
            if !q.in_bounds(h, w) {
                continue;
            }
            let (r, c) = (q.row as usize, q.col as usize);
            if accepted.get(r, c) || !allowed.get(r, c) {
                continue;
            }
            if (smoothed.get(r, c) as f64 - mean).abs() <= epsilon {
                accepted.set(r, c, true);
                queue.push_back(q);
            }
        }
    }
    Ok(accepted)
}
