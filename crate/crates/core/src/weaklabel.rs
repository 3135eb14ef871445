//! Point-line weak labels for the three meniscus regions.
//!
//! A horn (anterior or posterior) carries one corner point and one line along
//! its outer edge. The body carries two points (upper then lower boundary
//! point at its centre) and two side lines (posterior side first), each line
//! drawn from its upper end to its lower end.
//!
//! The file format is a JSON object:
//!
//! ```json
//! { "image": "slice_012.png", "height": 224, "width": 224,
//!   "regions": [ { "kind": "anterior_horn",
//!                  "points": [[40, 60]],
//!                  "lines": [[[12, 50], [20, 60], [28, 70]]] } ] }
//! ```
//!
//! Coordinates are integer `[row, col]` pairs, origin top-left.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::PixelPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    AnteriorHorn,
    PosteriorHorn,
    Body,
}

impl RegionKind {
    pub fn is_horn(self) -> bool {
        !matches!(self, RegionKind::Body)
    }

    /// Number of points and lines the kind requires.
    pub fn required_counts(self) -> usize {
        if self.is_horn() {
            1
        } else {
            2
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionKind::AnteriorHorn => "anterior_horn",
            RegionKind::PosteriorHorn => "posterior_horn",
            RegionKind::Body => "body",
        }
    }
}

impl std::fmt::Display for RegionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How `Polyline::midpoint` picks the middle of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidpointRule {
    /// Vertex at index `(n - 1) / 2`.
    #[default]
    Index,
    /// Point halfway along the polyline's length, rounded half-up.
    Arclength,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline {
    points: Vec<PixelPoint>,
}

impl Polyline {
    /// At least two vertices, no two consecutive vertices equal.
    pub fn new(points: Vec<PixelPoint>) -> Result<Self, String> {
        if points.len() < 2 {
            return Err(format!("a line needs at least 2 points, got {}", points.len()));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(format!("line repeats vertex {} at index {}", fmt_point(points[i]), i + 1));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[PixelPoint] {
        &self.points
    }

    pub fn first(&self) -> PixelPoint {
        self.points[0]
    }

    pub fn last(&self) -> PixelPoint {
        self.points[self.points.len() - 1]
    }

    pub fn midpoint(&self, rule: MidpointRule) -> PixelPoint {
        match rule {
            MidpointRule::Index => self.points[(self.points.len() - 1) / 2],
            MidpointRule::Arclength => self.arclength_midpoint(),
        }
    }

    fn arclength_midpoint(&self) -> PixelPoint {
        let seg_len = |a: PixelPoint, b: PixelPoint| {
            (((b.row - a.row) as f64).powi(2) + ((b.col - a.col) as f64).powi(2)).sqrt()
        };
        let total: f64 = self.points.windows(2).map(|w| seg_len(w[0], w[1])).sum();
        let mut remaining = total / 2.0;
        for w in self.points.windows(2) {
            let len = seg_len(w[0], w[1]);
            if remaining <= len {
                let t = remaining / len;
                let row = w[0].row as f64 + t * (w[1].row - w[0].row) as f64;
                let col = w[0].col as f64 + t * (w[1].col - w[0].col) as f64;
                return PixelPoint::new((row + 0.5).floor() as i32, (col + 0.5).floor() as i32);
            }
            remaining -= len;
        }
        self.last()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionAnnotation {
    pub kind: RegionKind,
    pub points: Vec<PixelPoint>,
    pub lines: Vec<Polyline>,
}

impl RegionAnnotation {
    pub fn horn(kind: RegionKind, corner: PixelPoint, line: Polyline) -> Self {
        debug_assert!(kind.is_horn());
        Self { kind, points: vec![corner], lines: vec![line] }
    }

    /// `upper`/`lower` are the boundary points at the body's centre;
    /// `posterior`/`anterior` the side lines, each drawn top to bottom.
    pub fn body(upper: PixelPoint, lower: PixelPoint, posterior: Polyline, anterior: Polyline) -> Self {
        Self { kind: RegionKind::Body, points: vec![upper, lower], lines: vec![posterior, anterior] }
    }

    /// Every annotated point and line vertex.
    pub fn vertices(&self) -> impl Iterator<Item = PixelPoint> + '_ {
        self.points.iter().copied().chain(self.lines.iter().flat_map(|l| l.points().iter().copied()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakLabelSet {
    pub image: String,
    pub height: usize,
    pub width: usize,
    pub regions: Vec<RegionAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeakLabelError {
    #[error("malformed weak-label document: {0}")]
    Syntax(String),
    #[error("region {region}: {message}")]
    Schema { region: usize, message: String },
    #[error("region {region}: coordinate {point} outside the {height}x{width} image")]
    OutOfBounds { region: usize, point: String, height: usize, width: usize },
    #[error("region {region}: duplicate region kind {kind}")]
    DuplicateKind { region: usize, kind: RegionKind },
    #[error("invalid image dimensions {height}x{width}")]
    Dimensions { height: usize, width: usize },
}

fn fmt_point(p: PixelPoint) -> String {
    format!("({}, {})", p.row, p.col)
}

// Wire shape before validation: lines are raw vertex lists.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    image: String,
    height: usize,
    width: usize,
    regions: Vec<RawRegion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    kind: RegionKind,
    points: Vec<PixelPoint>,
    lines: Vec<Vec<PixelPoint>>,
}

/// Parses and fully validates a weak-label document.
pub fn parse_weak_labels(document: &str) -> Result<WeakLabelSet, WeakLabelError> {
    let raw: RawDocument =
        serde_json::from_str(document).map_err(|e| WeakLabelError::Syntax(e.to_string()))?;
    validate(raw)
}

/// Like [`parse_weak_labels`] for a document already held as a JSON value.
pub fn weak_labels_from_value(value: serde_json::Value) -> Result<WeakLabelSet, WeakLabelError> {
    let raw: RawDocument =
        serde_json::from_value(value).map_err(|e| WeakLabelError::Syntax(e.to_string()))?;
    validate(raw)
}

/// Pretty-printed JSON; always re-parses to an equal set.
pub fn serialize_weak_labels(labels: &WeakLabelSet) -> String {
    let mut out = serde_json::to_string_pretty(labels).expect("weak labels serialize");
    out.push('\n');
    out
}

fn validate(raw: RawDocument) -> Result<WeakLabelSet, WeakLabelError> {
    let (height, width) = (raw.height, raw.width);
    if height == 0 || width == 0 {
        return Err(WeakLabelError::Dimensions { height, width });
    }
    let mut seen = BTreeSet::new();
    let mut regions = Vec::with_capacity(raw.regions.len());
    for (index, r) in raw.regions.into_iter().enumerate() {
        let schema = |message: String| WeakLabelError::Schema { region: index, message };
        if !seen.insert(r.kind) {
            return Err(WeakLabelError::DuplicateKind { region: index, kind: r.kind });
        }
        let need = r.kind.required_counts();
        let plural = |n: usize, word: &str| if n == 1 { word.to_string() } else { format!("{word}s") };
        if r.points.len() != need {
            return Err(schema(format!(
                "{} requires {need} {}, got {}",
                r.kind,
                plural(need, "point"),
                r.points.len()
            )));
        }
        if r.lines.len() != need {
            return Err(schema(format!(
                "{} requires {need} {}, got {}",
                r.kind,
                plural(need, "line"),
                r.lines.len()
            )));
        }
        for p in r.points.iter().chain(r.lines.iter().flatten()) {
            if !p.in_bounds(height, width) {
                return Err(WeakLabelError::OutOfBounds {
                    region: index,
                    point: fmt_point(*p),
                    height,
                    width,
                });
            }
        }
        let lines = r
            .lines
            .into_iter()
            .enumerate()
            .map(|(li, pts)| Polyline::new(pts).map_err(|m| schema(format!("line {li}: {m}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if r.kind == RegionKind::Body {
            if r.points[0].row > r.points[1].row {
                return Err(schema("body points must be ordered upper then lower".into()));
            }
            for (li, line) in lines.iter().enumerate() {
                if line.first().row > line.last().row {
                    return Err(schema(format!(
                        "body line {li} must be drawn from its upper end to its lower end"
                    )));
                }
            }
        }
        regions.push(RegionAnnotation { kind: r.kind, points: r.points, lines });
    }
    Ok(WeakLabelSet { image: raw.image, height, width, regions })
}

/// Inclusive axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_row: i32,
    pub max_row: i32,
    pub min_col: i32,
    pub max_col: i32,
}

impl BoundingBox {
    pub fn contains(&self, p: PixelPoint) -> bool {
        (self.min_row..=self.max_row).contains(&p.row) && (self.min_col..=self.max_col).contains(&p.col)
    }
}

/// Tight box over the region's points and line vertices, grown by `margin`
/// and clamped to a `height`×`width` image.
pub fn bounding_box(region: &RegionAnnotation, margin: u32, height: usize, width: usize) -> BoundingBox {
    let mut it = region.vertices();
    let first = it.next().expect("valid regions have vertices");
    let mut b = BoundingBox { min_row: first.row, max_row: first.row, min_col: first.col, max_col: first.col };
    for p in it {
        b.min_row = b.min_row.min(p.row);
        b.max_row = b.max_row.max(p.row);
        b.min_col = b.min_col.min(p.col);
        b.max_col = b.max_col.max(p.col);
    }
    let m = margin as i32;
    BoundingBox {
        min_row: (b.min_row - m).max(0),
        max_row: (b.max_row + m).min(height as i32 - 1),
        min_col: (b.min_col - m).max(0),
        max_col: (b.max_col + m).min(width as i32 - 1),
    }
}

/// One dataset slice; paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub labels: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { base_dir, entries })
    }

    pub fn resolve(&self, relative: &Path) -> PathBuf {
        self.base_dir.join(relative)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.entries).expect("manifest serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(row: i32, col: i32) -> PixelPoint {
        PixelPoint::new(row, col)
    }

    const HORN: &str = r#"{
        "image": "s.png", "height": 64, "width": 64,
        "regions": [{ "kind": "anterior_horn", "points": [[40, 30]],
                      "lines": [[[10, 20], [12, 25], [14, 30], [12, 35], [10, 40]]] }]
    }"#;

    #[test]
    fn parses_single_horn() {
        let set = parse_weak_labels(HORN).unwrap();
        assert_eq!(set.regions.len(), 1);
        let r = &set.regions[0];
        assert_eq!(r.kind, RegionKind::AnteriorHorn);
        assert_eq!(r.points, vec![p(40, 30)]);
        assert_eq!(r.lines[0].points().len(), 5);
        assert_eq!(r.lines[0].midpoint(MidpointRule::Index), p(14, 30));
    }

    #[test]
    fn body_with_one_point_is_a_schema_error() {
        let doc = r#"{"image":"s","height":50,"width":50,"regions":[
            {"kind":"body","points":[[10,10]],"lines":[[[0,0],[5,0]],[[0,9],[5,9]]]}]}"#;
        let err = parse_weak_labels(doc).unwrap_err();
        assert!(matches!(err, WeakLabelError::Schema { region: 0, .. }));
        assert!(err.to_string().contains("body requires 2 points"), "{err}");
    }

    #[test]
    fn negative_coordinate_is_out_of_bounds() {
        let doc = r#"{"image":"s","height":50,"width":50,"regions":[
            {"kind":"posterior_horn","points":[[-1,5]],"lines":[[[0,0],[5,0]]]}]}"#;
        assert!(matches!(parse_weak_labels(doc), Err(WeakLabelError::OutOfBounds { region: 0, .. })));
        let doc = doc.replace("[-1,5]", "[1,50]");
        assert!(matches!(parse_weak_labels(&doc), Err(WeakLabelError::OutOfBounds { .. })));
    }

    #[test]
    fn each_error_class_is_distinct() {
        assert!(matches!(parse_weak_labels("{"), Err(WeakLabelError::Syntax(_))));
        assert!(matches!(
            parse_weak_labels(r#"{"image":"s","height":5,"width":5,"regions":[{"kind":"x","points":[],"lines":[]}]}"#),
            Err(WeakLabelError::Syntax(_))
        ));
        // non-integer coordinates never make it into the typed structure
        assert!(matches!(
            parse_weak_labels(r#"{"image":"s","height":5,"width":5,"regions":[{"kind":"body","points":[[1.5,2]],"lines":[]}]}"#),
            Err(WeakLabelError::Syntax(_))
        ));
        let dup = r#"{"image":"s","height":20,"width":20,"regions":[
            {"kind":"anterior_horn","points":[[5,5]],"lines":[[[0,0],[0,9]]]},
            {"kind":"anterior_horn","points":[[5,5]],"lines":[[[0,0],[0,9]]]}]}"#;
        assert!(matches!(parse_weak_labels(dup), Err(WeakLabelError::DuplicateKind { region: 1, .. })));
        let repeated = r#"{"image":"s","height":20,"width":20,"regions":[
            {"kind":"anterior_horn","points":[[5,5]],"lines":[[[0,0],[0,0],[0,9]]]}]}"#;
        assert!(matches!(parse_weak_labels(repeated), Err(WeakLabelError::Schema { .. })));
        let zero = r#"{"image":"s","height":0,"width":20,"regions":[]}"#;
        assert!(matches!(parse_weak_labels(zero), Err(WeakLabelError::Dimensions { .. })));
    }

    #[test]
    fn body_ordering_rules() {
        let flipped_points = r#"{"image":"s","height":50,"width":50,"regions":[
            {"kind":"body","points":[[30,20],[10,20]],"lines":[[[0,0],[40,0]],[[0,40],[40,40]]]}]}"#;
        assert!(parse_weak_labels(flipped_points).unwrap_err().to_string().contains("upper then lower"));
        let upward_line = r#"{"image":"s","height":50,"width":50,"regions":[
            {"kind":"body","points":[[10,20],[30,20]],"lines":[[[40,0],[0,0]],[[0,40],[40,40]]]}]}"#;
        assert!(parse_weak_labels(upward_line).unwrap_err().to_string().contains("upper end"));
    }

    #[test]
    fn empty_regions_serialize_as_empty_array() {
        let set = WeakLabelSet { image: "x.png".into(), height: 4, width: 4, regions: vec![] };
        let text = serialize_weak_labels(&set);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["regions"], serde_json::json!([]));
        assert_eq!(parse_weak_labels(&text).unwrap(), set);
    }

    #[test]
    fn three_regions_roundtrip() {
        let line = |pts: &[(i32, i32)]| Polyline::new(pts.iter().copied().map(PixelPoint::from).collect()).unwrap();
        let set = WeakLabelSet {
            image: "slice.png".into(),
            height: 100,
            width: 120,
            regions: vec![
                RegionAnnotation::horn(RegionKind::PosteriorHorn, p(50, 30), line(&[(40, 5), (50, 3), (60, 6)])),
                RegionAnnotation::body(p(45, 60), p(55, 60), line(&[(40, 45), (60, 45)]), line(&[(40, 75), (60, 75)])),
                RegionAnnotation::horn(RegionKind::AnteriorHorn, p(50, 90), line(&[(40, 115), (60, 116)])),
            ],
        };
        let text = serialize_weak_labels(&set);
        assert_eq!(parse_weak_labels(&text).unwrap(), set);
        assert!(!text.replace("slice.png", "").contains('.'), "coordinates serialize as integers");
    }

    #[test]
    fn bounding_box_examples() {
        let line = Polyline::new(vec![p(5, 5), p(5, 15)]).unwrap();
        let r = RegionAnnotation::horn(RegionKind::AnteriorHorn, p(10, 10), line);
        assert_eq!(bounding_box(&r, 0, 100, 100), BoundingBox { min_row: 5, max_row: 10, min_col: 5, max_col: 15 });
        assert_eq!(bounding_box(&r, 2, 100, 100), BoundingBox { min_row: 3, max_row: 12, min_col: 3, max_col: 17 });
        assert_eq!(bounding_box(&r, 8, 14, 100), BoundingBox { min_row: 0, max_row: 13, min_col: 0, max_col: 23 });
    }

    #[test]
    fn body_bounding_box_is_exact() {
        let body = RegionAnnotation::body(
            p(25, 55),
            p(35, 55),
            Polyline::new(vec![p(20, 30), p(30, 33), p(40, 30)]).unwrap(),
            Polyline::new(vec![p(20, 80), p(30, 77), p(40, 80)]).unwrap(),
        );
        // exhaustive oracle over the vertex list
        let all: Vec<PixelPoint> = body.vertices().collect();
        let oracle = BoundingBox {
            min_row: all.iter().map(|q| q.row).min().unwrap(),
            max_row: all.iter().map(|q| q.row).max().unwrap(),
            min_col: all.iter().map(|q| q.col).min().unwrap(),
            max_col: all.iter().map(|q| q.col).max().unwrap(),
        };
        let b = bounding_box(&body, 0, 224, 224);
        assert_eq!(b, oracle);
        assert_eq!(b, BoundingBox { min_row: 20, max_row: 40, min_col: 30, max_col: 80 });
    }

    #[test]
    fn arclength_midpoint() {
        let line = Polyline::new(vec![p(0, 0), p(0, 2), p(0, 10)]).unwrap();
        assert_eq!(line.midpoint(MidpointRule::Index), p(0, 2));
        assert_eq!(line.midpoint(MidpointRule::Arclength), p(0, 5));
    }

    fn arb_set() -> impl Strategy<Value = WeakLabelSet> {
        let pt = || (0i32..60, 0i32..60).prop_map(PixelPoint::from);
        let line = move || {
            prop::collection::vec(pt(), 2..6).prop_filter_map("distinct neighbours", |v| Polyline::new(v).ok())
        };
        let horn = move |kind| (pt(), line()).prop_map(move |(c, l)| RegionAnnotation::horn(kind, c, l));
        let body = (pt(), pt(), line(), line()).prop_map(|(a, b, l1, l2)| {
            let (u, d) = if a.row <= b.row { (a, b) } else { (b, a) };
            let orient = |l: Polyline| {
                if l.first().row <= l.last().row {
                    l
                } else {
                    let mut v = l.points().to_vec();
                    v.reverse();
                    Polyline::new(v).unwrap()
                }
            };
            RegionAnnotation::body(u, d, orient(l1), orient(l2))
        });
        (
            prop::option::of(horn(RegionKind::AnteriorHorn)),
            prop::option::of(body),
            prop::option::of(horn(RegionKind::PosteriorHorn)),
        )
            .prop_map(|(a, b, c)| WeakLabelSet {
                image: "img.pgm".into(),
                height: 60,
                width: 60,
                regions: [a, b, c].into_iter().flatten().collect(),
            })
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(set in arb_set()) {
            prop_assert_eq!(parse_weak_labels(&serialize_weak_labels(&set)).unwrap(), set);
        }

        #[test]
        fn validation_is_total(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse_weak_labels(&text);
        }

        #[test]
        fn box_covers_line_rasters(set in arb_set(), margin in 0u32..4) {
            for r in &set.regions {
                let b = bounding_box(r, margin, set.height, set.width);
                for l in &r.lines {
                    for w in l.points().windows(2) {
                        for q in crate::imaging::rasterize_segment(w[0], w[1]) {
                            prop_assert!(b.contains(q));
                        }
                    }
                }
            }
        }
    }
}
