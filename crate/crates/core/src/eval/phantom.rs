//! Synthetic meniscus slices with exact ground truth and derived weak labels.
//!
//! A horn phantom is a triangle: a gently bowed outer edge (the annotated
//! line), a corner point, and two inner sides one of which bulges outward.
//! A body phantom is a symmetric double triangle: two bowed side edges joined
//! through an upper and a lower waist point.
//!
//! With `confounders` the slice also carries three features that make plain
//! region growing fail in different ways: a bright partial-volume rim along
//! the outer edge(s), a high-signal tear that cuts off the corner at the
//! first line vertex, and a similar-intensity neighbouring structure touching
//! the inner side. All three are deterministic given the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::imaging::{BinaryMask, GrayImage, ImagingError, PixelPoint};
use crate::weaklabel::{Polyline, RegionAnnotation, RegionKind, WeakLabelSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    Horn,
    Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomParams {
    pub kind: PhantomKind,
    pub height: usize,
    pub width: usize,
    pub foreground: u8,
    pub background: u8,
    /// Standard deviation of additive Gaussian noise.
    pub noise_sigma: f64,
    /// Box-blur radius applied to the clean image before noise.
    pub blur_radius: usize,
    pub seed: u64,
    pub confounders: bool,
}

impl PhantomParams {
    pub fn new(kind: PhantomKind, seed: u64) -> Self {
        Self {
            kind,
            height: 224,
            width: 224,
            foreground: 60,
            background: 135,
            noise_sigma: 0.0,
            blur_radius: 0,
            seed,
            confounders: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: GrayImage,
    pub truth: BinaryMask,
    pub labels: WeakLabelSet,
    pub params: PhantomParams,
}

type Pt = (f64, f64);

pub fn make_phantom(params: &PhantomParams) -> Result<Phantom, ImagingError> {
    let invalid = |m: String| Err(ImagingError::InvalidParameter(m));
    if params.height < 96 || params.width < 96 {
        return invalid(format!("phantom needs at least 96x96 pixels, got {}x{}", params.height, params.width));
    }
    if params.foreground == params.background {
        return invalid("foreground and background intensities must differ".into());
    }
    if !params.noise_sigma.is_finite() || params.noise_sigma < 0.0 {
        return invalid(format!("noise sigma must be non-negative, got {}", params.noise_sigma));
    }
    if params.blur_radius * 4 >= params.height.min(params.width) {
        return invalid(format!("blur radius {} too large", params.blur_radius));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let shape = match params.kind {
        PhantomKind::Horn => horn_shape(params, &mut rng),
        PhantomKind::Body => body_shape(params, &mut rng),
    };

    let (h, w) = (params.height, params.width);
    let truth = rasterize_shape(&shape.outline, h, w);
    let fg = params.foreground as f64;
    let bg = params.background as f64;
    let mut clean = vec![bg; h * w];
    for p in truth.iter_set() {
        clean[p.row as usize * w + p.col as usize] = fg;
    }
    if params.confounders {
        paint_confounders(&shape, &truth, fg, bg, &mut clean, h, w, &mut rng);
    }
    let blurred = box_blur(&clean, h, w, params.blur_radius);
    let noise = Normal::new(0.0, params.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let pixels = blurred
        .iter()
        .map(|&v| {
            let n = if params.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            (v + n + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    let image = GrayImage::new(h, w, pixels)?;

    let labels = WeakLabelSet {
        image: format!("phantom_{}.png", params.seed),
        height: h,
        width: w,
        regions: vec![shape.annotation.clone()],
    };
    Ok(Phantom { image, truth, labels, params: params.clone() })
}

/// `count` confounded phantoms alternating horn and body, seeds `base_seed..`.
pub fn phantom_suite(count: usize, base_seed: u64, noise_sigma: f64) -> Result<Vec<Phantom>, ImagingError> {
    (0..count)
        .map(|i| {
            let kind = if i % 2 == 0 { PhantomKind::Horn } else { PhantomKind::Body };
            let mut p = PhantomParams::new(kind, base_seed + i as u64);
            p.noise_sigma = noise_sigma;
            p.confounders = true;
            make_phantom(&p)
        })
        .collect()
}

struct Shape {
    /// Closed truth outline in image coordinates.
    outline: Vec<Pt>,
    annotation: RegionAnnotation,
    /// Polylines along the annotated outer edges.
    edges: Vec<Vec<Pt>>,
    /// Tear segment isolating the corner at the first line vertex.
    tear: (Pt, Pt),
    /// Centre and semi-axes (rows, cols) of the neighbouring structure.
    neighbour: (Pt, Pt),
}

fn to_pp(p: Pt) -> PixelPoint {
    PixelPoint::new((p.0 + 0.5).floor() as i32, (p.1 + 0.5).floor() as i32)
}

fn to_pt(p: PixelPoint) -> Pt {
    (p.row as f64, p.col as f64)
}

fn lerp(a: Pt, b: Pt, t: f64) -> Pt {
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

/// Integer polyline from `a` to `b` bowed by `sagitta` toward `side`
/// (a unit vector), through `n` vertices.
fn bowed_line(a: Pt, b: Pt, sagitta: f64, side: Pt, n: usize) -> Vec<PixelPoint> {
    let mut out: Vec<PixelPoint> = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let bulge = 4.0 * sagitta * t * (1.0 - t);
        let p = lerp(a, b, t);
        let q = to_pp((p.0 + bulge * side.0, p.1 + bulge * side.1));
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    out
}

/// Quadratic curve from `a` to `b` bowed by `sagitta` toward `side`, sampled.
fn bowed_curve(a: Pt, b: Pt, sagitta: f64, side: Pt, n: usize) -> Vec<Pt> {
    let mid = lerp(a, b, 0.5);
    let ctrl = (mid.0 + 2.0 * sagitta * side.0, mid.1 + 2.0 * sagitta * side.1);
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let (u, v, w) = ((1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t);
            (u * a.0 + v * ctrl.0 + w * b.0, u * a.1 + v * ctrl.1 + w * b.1)
        })
        .collect()
}

fn unit_normal_away(a: Pt, b: Pt, from: Pt) -> Pt {
    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
    let len = (dr * dr + dc * dc).sqrt();
    let n = (-dc / len, dr / len);
    let mid = lerp(a, b, 0.5);
    if n.0 * (mid.0 - from.0) + n.1 * (mid.1 - from.1) >= 0.0 {
        n
    } else {
        (-n.0, -n.1)
    }
}

fn horn_shape(params: &PhantomParams, rng: &mut ChaCha8Rng) -> Shape {
    let (h, w) = (params.height as f64, params.width as f64);
    let edge_len: f64 = rng.random_range(26.0..36.0);
    let depth: f64 = rng.random_range(28.0..40.0);
    let tip_shift: f64 = rng.random_range(-4.0..4.0);
    let angle: f64 = rng.random_range(-0.2..0.2);
    // anterior horns open to the right, posterior to the left
    let anterior = rng.random_bool(0.5);
    let mirror = if anterior { -1.0 } else { 1.0 };
    let centre = (h / 2.0 + rng.random_range(-20.0..20.0), w / 2.0 + rng.random_range(-20.0..20.0));

    // local frame: u along the outer edge (rows), v toward the tip (cols)
    let (s, c) = angle.sin_cos();
    let place = |u: f64, v: f64| -> Pt {
        let v = v * mirror;
        let (r, q) = (u * c - v * s, u * s + v * c);
        (centre.0 + r, centre.1 + q - mirror * depth / 2.0)
    };
    let a = to_pp(place(-edge_len / 2.0, 0.0));
    let b = to_pp(place(edge_len / 2.0, 0.0));
    let tip = to_pp(place(tip_shift, depth));
    let outward = {
        let o = place(0.0, -1.0);
        let z = place(0.0, 0.0);
        (o.0 - z.0, o.1 - z.1)
    };
    let sagitta: f64 = rng.random_range(0.5..2.0);
    let line = bowed_line(to_pt(a), to_pt(b), sagitta, outward, 5);

    // inner sides: one straight, one bulging outward by at most 1.4 px
    let centroid = lerp(lerp(to_pt(a), to_pt(b), 0.5), to_pt(tip), 1.0 / 3.0);
    let bulge: f64 = rng.random_range(0.6..1.4);
    let curved_first = rng.random_bool(0.5);
    let mut outline: Vec<Pt> = line.iter().map(|&p| to_pt(p)).collect();
    let (b_pt, tip_pt, a_pt) = (to_pt(*line.last().unwrap()), to_pt(tip), to_pt(line[0]));
    let side_in = if curved_first {
        bowed_curve(b_pt, tip_pt, bulge, unit_normal_away(b_pt, tip_pt, centroid), 24)
    } else {
        vec![b_pt, tip_pt]
    };
    outline.extend(&side_in[1..]);
    let side_out = if curved_first {
        vec![tip_pt, a_pt]
    } else {
        bowed_curve(tip_pt, a_pt, bulge, unit_normal_away(tip_pt, a_pt, centroid), 24)
    };
    outline.extend(&side_out[1..side_out.len() - 1]);

    // tear across the corner at the first line vertex
    let f1: f64 = rng.random_range(0.3..0.4);
    let f2: f64 = rng.random_range(0.3..0.4);
    let on_edge = point_along(&line.iter().map(|&p| to_pt(p)).collect::<Vec<_>>(), f1);
    let on_side = lerp(a_pt, tip_pt, f2);
    let tear = extend_segment(on_edge, on_side, 4.0);

    // neighbour beyond the tip, overlapping it slightly
    let axis = {
        let m = lerp(to_pt(a), to_pt(b), 0.5);
        let d = ((tip_pt.0 - m.0), (tip_pt.1 - m.1));
        let len = (d.0 * d.0 + d.1 * d.1).sqrt();
        (d.0 / len, d.1 / len)
    };
    let radii: (f64, f64) = (rng.random_range(9.0..13.0), rng.random_range(7.0..10.0));
    let reach = radii.0.min(radii.1) - 3.0;
    let neighbour_centre = (tip_pt.0 + axis.0 * reach, tip_pt.1 + axis.1 * reach);

    let kind = if anterior { RegionKind::AnteriorHorn } else { RegionKind::PosteriorHorn };
    let annotation = RegionAnnotation::horn(kind, tip, Polyline::new(line.clone()).expect("distinct vertices"));
    let _ = (h, w);
    Shape {
        outline,
        annotation,
        edges: vec![line.iter().map(|&p| to_pt(p)).collect()],
        tear,
        neighbour: (neighbour_centre, radii),
    }
}

fn body_shape(params: &PhantomParams, rng: &mut ChaCha8Rng) -> Shape {
    let (h, w) = (params.height as f64, params.width as f64);
    let height: f64 = rng.random_range(22.0..30.0);
    let width: f64 = rng.random_range(40.0..56.0);
    let waist: f64 = rng.random_range(6.0..8.5);
    let centre = (h / 2.0 + rng.random_range(-20.0..20.0), w / 2.0 + rng.random_range(-20.0..20.0));
    let (top, bottom) = (centre.0 - height / 2.0, centre.0 + height / 2.0);
    let (left, right) = (centre.1 - width / 2.0, centre.1 + width / 2.0);

    let s1: f64 = rng.random_range(0.5..2.0);
    let s2: f64 = rng.random_range(0.5..2.0);
    let posterior = bowed_line((top, left), (bottom, left + rng.random_range(-2.0..2.0)), s1, (0.0, -1.0), 4);
    let anterior = bowed_line((top, right), (bottom, right + rng.random_range(-2.0..2.0)), s2, (0.0, 1.0), 4);
    let mid_col = (left + right) / 2.0 + rng.random_range(-3.0..3.0);
    let upper = to_pp((top + waist, mid_col));
    let lower = to_pp((bottom - waist + rng.random_range(-1.0..1.0), mid_col));

    let mut outline: Vec<Pt> = posterior.iter().map(|&p| to_pt(p)).collect();
    outline.push(to_pt(lower));
    outline.extend(anterior.iter().rev().map(|&p| to_pt(p)));
    outline.push(to_pt(upper));

    let f1: f64 = rng.random_range(0.3..0.4);
    let f2: f64 = rng.random_range(0.3..0.4);
    let post_pts: Vec<Pt> = posterior.iter().map(|&p| to_pt(p)).collect();
    let tear = extend_segment(point_along(&post_pts, f1), lerp(post_pts[0], to_pt(upper), f2), 4.0);

    let radii: (f64, f64) = (rng.random_range(7.0..10.0), rng.random_range(8.0..12.0));
    let neighbour_centre = (to_pt(upper).0 - radii.0 + 3.0, to_pt(upper).1);

    let annotation = RegionAnnotation::body(
        upper,
        lower,
        Polyline::new(posterior.clone()).expect("distinct vertices"),
        Polyline::new(anterior.clone()).expect("distinct vertices"),
    );
    Shape {
        outline,
        annotation,
        edges: vec![post_pts, anterior.iter().map(|&p| to_pt(p)).collect()],
        tear,
        neighbour: (neighbour_centre, radii),
    }
}

/// Point at fraction `t` of a polyline's length.
fn point_along(poly: &[Pt], t: f64) -> Pt {
    let lens: Vec<f64> = poly.windows(2).map(|s| dist(s[0], s[1])).collect();
    let mut remaining = t * lens.iter().sum::<f64>();
    for (s, len) in poly.windows(2).zip(&lens) {
        if remaining <= *len {
            return lerp(s[0], s[1], remaining / len);
        }
        remaining -= len;
    }
    *poly.last().unwrap()
}

fn extend_segment(a: Pt, b: Pt, by: f64) -> (Pt, Pt) {
    let len = dist(a, b);
    let d = ((b.0 - a.0) / len, (b.1 - a.1) / len);
    ((a.0 - by * d.0, a.1 - by * d.1), (b.0 + by * d.0, b.1 + by * d.1))
}

fn dist(a: Pt, b: Pt) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn dist_to_segment(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
    let len2 = dr * dr + dc * dc;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dr + (p.1 - a.1) * dc) / len2).clamp(0.0, 1.0) };
    dist(p, (a.0 + t * dr, a.1 + t * dc))
}

fn dist_to_polyline(p: Pt, poly: &[Pt]) -> f64 {
    poly.windows(2).map(|s| dist_to_segment(p, s[0], s[1])).fold(f64::INFINITY, f64::min)
}

/// Pixel centres inside the outline (even-odd) or within half a pixel of it.
fn rasterize_shape(outline: &[Pt], h: usize, w: usize) -> BinaryMask {
    let mut mask = BinaryMask::empty(h, w);
    let rows = outline.iter().map(|p| p.0);
    let cols = outline.iter().map(|p| p.1);
    let r0 = rows.clone().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let r1 = (rows.fold(f64::NEG_INFINITY, f64::max).ceil() as usize).min(h - 1);
    let c0 = cols.clone().fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
    let c1 = (cols.fold(f64::NEG_INFINITY, f64::max).ceil() as usize).min(w - 1);
    let n = outline.len();
    for r in r0..=r1 {
        for c in c0..=c1 {
            let p = (r as f64, c as f64);
            let mut inside = false;
            let mut near = f64::INFINITY;
            for i in 0..n {
                let (a, b) = (outline[i], outline[(i + 1) % n]);
                near = near.min(dist_to_segment(p, a, b));
                if (a.0 > p.0) != (b.0 > p.0) && p.1 < a.1 + (p.0 - a.0) * (b.1 - a.1) / (b.0 - a.0) {
                    inside = !inside;
                }
            }
            if inside || near <= 0.5 {
                mask.set(r, c, true);
            }
        }
    }
    mask
}

#[allow(clippy::too_many_arguments)]
fn paint_confounders(
    shape: &Shape,
    truth: &BinaryMask,
    fg: f64,
    bg: f64,
    clean: &mut [f64],
    h: usize,
    w: usize,
    rng: &mut ChaCha8Rng,
) {
    let d = bg - fg;
    let rim = fg + 0.9 * d;
    let tear = (fg + 1.4 * d).clamp(0.0, 255.0);
    let neighbour = fg + rng.random_range(0.05..0.15) * d;
    let rim_width: f64 = rng.random_range(2.5..3.5);

    for p in truth.iter_set() {
        let q = to_pt(p);
        let idx = p.row as usize * w + p.col as usize;
        if shape.edges.iter().any(|e| dist_to_polyline(q, e) <= rim_width) {
            clean[idx] = rim;
        }
        if dist_to_segment(q, shape.tear.0, shape.tear.1) <= 1.0 {
            clean[idx] = tear;
        }
    }
    let ((cr, cc), (ar, ac)) = shape.neighbour;
    for r in 0..h {
        for c in 0..w {
            let (dr, dc) = ((r as f64 - cr) / ar, (c as f64 - cc) / ac);
            if dr * dr + dc * dc <= 1.0 && !truth.get(r, c) {
                clean[r * w + c] = neighbour;
            }
        }
    }
}

fn box_blur(src: &[f64], h: usize, w: usize, radius: usize) -> Vec<f64> {
    if radius == 0 {
        return src.to_vec();
    }
    let r = radius as isize;
    let at = |y: isize, x: isize| src[y.clamp(0, h as isize - 1) as usize * w + x.clamp(0, w as isize - 1) as usize];
    let n = ((2 * r + 1) * (2 * r + 1)) as f64;
    let mut out = vec![0.0; h * w];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut s = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    s += at(y + dy, x + dx);
                }
            }
            out[y as usize * w + x as usize] = s / n;
        }
    }
    out
}
