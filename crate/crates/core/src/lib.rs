//! Pseudo-label synthesis for knee meniscus MRI slices from point-line weak
//! annotations.
//!
//! The pipeline smooths the slice, derives centre points and a seed backbone
//! from each region's annotation, pre-fills the area between the annotated
//! edge and its centre, bounds growth with a constraint polygon (quadratic
//! Bezier sides for horns), grows by intensity similarity to the backbone
//! mean, and closes the union of regions.

pub mod eval;
pub mod imaging;
pub mod pseudolabel;
pub mod weaklabel;

pub use imaging::{BinaryMask, GrayImage, ImagingError, PixelPoint};
pub use pseudolabel::{generate_pseudo_label, GrowConfig, PipelineError, Stages};
pub use weaklabel::{parse_weak_labels, serialize_weak_labels, RegionAnnotation, RegionKind, WeakLabelSet};
