use super::{rasterize_segment, BinaryMask, ImagingError, PixelPoint};

/// Even-odd scanline fill of the closed polygon through `vertices`.
///
/// Pixel centres are tested against the polygon; the rasterized outline is
/// always included. Zero-area (collinear) polygons fill to their outline.
/// Anything outside `height`×`width` is clipped.
pub fn fill_polygon(
    vertices: &[PixelPoint],
    height: usize,
    width: usize,
) -> Result<BinaryMask, ImagingError> {
    if vertices.len() < 3 {
        return Err(ImagingError::InvalidParameter(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let mut mask = BinaryMask::from_bits(height, width, vec![false; height * width])?;
    let edges: Vec<(PixelPoint, PixelPoint)> = vertices
        .iter()
        .zip(vertices.iter().cycle().skip(1))
        .map(|(&a, &b)| (a, b))
        .collect();

    if !is_collinear(vertices) {
        scanline(&edges, &mut mask);
    }
    for &(a, b) in &edges {
        for px in rasterize_segment(a, b) {
            mask.insert(px);
        }
    }
    Ok(mask)
}

fn is_collinear(vertices: &[PixelPoint]) -> bool {
    let a = vertices[0];
    let Some(&b) = vertices.iter().find(|&&v| v != a) else {
        return true;
    };
    vertices.iter().all(|&v| {
        let cross = (b.row - a.row) as i64 * (v.col - a.col) as i64
            - (b.col - a.col) as i64 * (v.row - a.row) as i64;
        cross == 0
    })
}

/// Exact rational column `num / den`, `den > 0`.
#[derive(Clone, Copy)]
struct Crossing {
    num: i64,
    den: i64,
}

impl Crossing {
    fn ceil(self) -> i64 {
        -(-self.num).div_euclid(self.den)
    }

    fn floor(self) -> i64 {
        self.num.div_euclid(self.den)
    }
}

fn scanline(edges: &[(PixelPoint, PixelPoint)], mask: &mut BinaryMask) {
    let (h, w) = mask.dims();
    let top = edges.iter().map(|e| e.0.row).min().unwrap_or(0).max(0);
    let bottom = edges.iter().map(|e| e.0.row).max().unwrap_or(-1).min(h as i32 - 1);
    let mut crossings: Vec<Crossing> = Vec::new();
    for row in top..=bottom {
        crossings.clear();
        for &(a, b) in edges {
            if a.row == b.row {
                continue;
            }
            let (lo, hi) = if a.row < b.row { (a, b) } else { (b, a) };
            // half-open in row so shared vertices count once
            if row < lo.row || row >= hi.row {
                continue;
            }
            let den = (hi.row - lo.row) as i64;
            let num = lo.col as i64 * den + (row - lo.row) as i64 * (hi.col - lo.col) as i64;
            crossings.push(Crossing { num, den });
        }
        crossings.sort_by(|x, y| (x.num * y.den).cmp(&(y.num * x.den)));
        for pair in crossings.chunks_exact(2) {
            let from = pair[0].ceil().max(0);
            let to = pair[1].floor().min(w as i64 - 1);
            for col in from..=to {
                mask.set(row as usize, col as usize, true);
            }
        }
    }
}
