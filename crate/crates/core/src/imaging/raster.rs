use super::PixelPoint;

/// 8-connected digital segment from `a` to `b`, both included.
///
/// Steps one pixel at a time along the dominant axis and rounds the exact
/// minor coordinate half-up. Rounding depends only on absolute position, so
/// `rasterize_segment(b, a)` is the same pixel set in reverse order.
pub fn rasterize_segment(a: PixelPoint, b: PixelPoint) -> Vec<PixelPoint> {
    let row_major = (b.row - a.row).abs() >= (b.col - a.col).abs();
    // (major, minor) coordinates
    let split = |p: PixelPoint| {
        if row_major {
            (p.row as i64, p.col as i64)
        } else {
            (p.col as i64, p.row as i64)
        }
    };
    let forward = split(a).0 <= split(b).0;
    let (start, end) = if forward { (split(a), split(b)) } else { (split(b), split(a)) };
    let (m0, n0) = start;
    let dm = end.0 - m0;
    let dn = end.1 - n0;
    if dm == 0 {
        return vec![a];
    }

    let mut out: Vec<PixelPoint> = (0..=dm)
        .map(|i| {
            // floor(n0 + i*dn/dm + 1/2) in exact integer arithmetic
            let n = (2 * n0 * dm + 2 * i * dn + dm).div_euclid(2 * dm) as i32;
            let m = (m0 + i) as i32;
            if row_major {
                PixelPoint::new(m, n)
            } else {
                PixelPoint::new(n, m)
            }
        })
        .collect();
    if !forward {
        out.reverse();
    }
    out
}

/// Pixels of the quadratic Bezier curve with integer control points.
pub fn rasterize_bezier(p0: PixelPoint, p1: PixelPoint, p2: PixelPoint) -> Vec<PixelPoint> {
    rasterize_bezier_with_control(p0, (p1.row as f64, p1.col as f64), p2)
}

/// Pixels of `B(t) = (1-t)^2 p0 + 2t(1-t) ctrl + t^2 p2`, `t` in `[0, 1]`.
///
/// The result starts at `p0`, ends at `p2`, and consecutive pixels are
/// 8-adjacent. A control point lying on the chord reduces to
/// [`rasterize_segment`].
pub fn rasterize_bezier_with_control(
    p0: PixelPoint,
    ctrl: (f64, f64),
    p2: PixelPoint,
) -> Vec<PixelPoint> {
    let a = (p0.row as f64, p0.col as f64);
    let c = (p2.row as f64, p2.col as f64);
    if control_on_chord(a, ctrl, c) {
        return rasterize_segment(p0, p2);
    }

    // parameter speed is bounded by twice the control polygon leg, so this
    // keeps every step under half a pixel
    let legs = dist(a, ctrl) + dist(ctrl, c);
    let steps = ((4.0 * legs).ceil() as usize).max(2);

    let mut out: Vec<PixelPoint> = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let p = if i == 0 {
            p0
        } else if i == steps {
            p2
        } else {
            let t = i as f64 / steps as f64;
            let (u, v, w) = ((1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t);
            let row = u * a.0 + v * ctrl.0 + w * c.0;
            let col = u * a.1 + v * ctrl.1 + w * c.1;
            PixelPoint::new(round_half_up(row), round_half_up(col))
        };
        if out.last() == Some(&p) {
            continue;
        }
        out.push(p);
        // drop corner pixels of 4-connected staircases
        while out.len() >= 3 {
            let n = out.len();
            if out[n - 3] != out[n - 1] && out[n - 3].chebyshev(out[n - 1]) <= 1 {
                out.remove(n - 2);
            } else {
                break;
            }
        }
    }
    out
}

fn control_on_chord(a: (f64, f64), ctrl: (f64, f64), c: (f64, f64)) -> bool {
    let chord = (c.0 - a.0, c.1 - a.1);
    let to_ctrl = (ctrl.0 - a.0, ctrl.1 - a.1);
    let cross = chord.0 * to_ctrl.1 - chord.1 * to_ctrl.0;
    let len2 = chord.0 * chord.0 + chord.1 * chord.1;
    if len2 == 0.0 {
        return to_ctrl.0 == 0.0 && to_ctrl.1 == 0.0;
    }
    let along = chord.0 * to_ctrl.0 + chord.1 * to_ctrl.1;
    cross.abs() <= 1e-9 * len2 && (0.0..=len2).contains(&along)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub(crate) fn round_half_up(v: f64) -> i32 {
    (v + 0.5).floor() as i32
}
