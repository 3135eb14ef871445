//! Binary morphology with square structuring elements.
//!
//! Pixels outside the mask read as unset. Both passes are separable because
//! the square window is the product of a row window and a column window.

use super::{check_kernel, BinaryMask, ImagingError};

#[derive(Clone, Copy)]
enum Op {
    Dilate,
    Erode,
}

/// Sets a pixel iff any pixel of its `kernel`×`kernel` neighbourhood is set.
pub fn dilate(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask, ImagingError> {
    check_kernel(kernel)?;
    Ok(apply(mask, kernel, Op::Dilate))
}

/// Keeps a pixel iff its whole `kernel`×`kernel` neighbourhood is set and in bounds.
pub fn erode(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask, ImagingError> {
    check_kernel(kernel)?;
    Ok(apply(mask, kernel, Op::Erode))
}

/// One dilation followed by one erosion with the same kernel.
pub fn close(mask: &BinaryMask, kernel: usize) -> Result<BinaryMask, ImagingError> {
    close_iterated(mask, kernel, 1)
}

/// `iterations` dilations followed by as many erosions.
///
/// Runs on a canvas padded by the total reach of the dilations, so set pixels
/// touching the image border survive and the result always contains `mask`.
pub fn close_iterated(
    mask: &BinaryMask,
    kernel: usize,
    iterations: usize,
) -> Result<BinaryMask, ImagingError> {
    check_kernel(kernel)?;
    if iterations == 0 || kernel == 1 {
        return Ok(mask.clone());
    }
    let pad = kernel / 2 * iterations;
    let (h, w) = mask.dims();
    let mut canvas = BinaryMask::empty(h + 2 * pad, w + 2 * pad);
    for p in mask.iter_set() {
        canvas.set(p.row as usize + pad, p.col as usize + pad, true);
    }
    for _ in 0..iterations {
        canvas = apply(&canvas, kernel, Op::Dilate);
    }
    for _ in 0..iterations {
        canvas = apply(&canvas, kernel, Op::Erode);
    }
    let mut out = BinaryMask::empty(h, w);
    for r in 0..h {
        for c in 0..w {
            out.set(r, c, canvas.get(r + pad, c + pad));
        }
    }
    Ok(out)
}

fn apply(mask: &BinaryMask, kernel: usize, op: Op) -> BinaryMask {
    if kernel == 1 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    let r = kernel / 2;
    let src = mask.bits();

    let mut rows = vec![false; h * w];
    let mut prefix = vec![0u32; w.max(h) + 1];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        window_pass(line.iter().copied(), w, r, op, &mut prefix, |x, v| rows[y * w + x] = v);
    }

    let mut out = vec![false; h * w];
    for x in 0..w {
        window_pass((0..h).map(|y| rows[y * w + x]), h, r, op, &mut prefix, |y, v| {
            out[y * w + x] = v
        });
    }
    BinaryMask::from_bits(h, w, out).expect("dims preserved")
}

/// 1-D sliding window over `n` samples using a prefix count of set samples.
fn window_pass(
    samples: impl Iterator<Item = bool>,
    n: usize,
    r: usize,
    op: Op,
    prefix: &mut [u32],
    mut emit: impl FnMut(usize, bool),
) {
    prefix[0] = 0;
    for (i, s) in samples.enumerate() {
        prefix[i + 1] = prefix[i] + s as u32;
    }
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r + 1).min(n);
        let set = prefix[hi] - prefix[lo];
        let v = match op {
            Op::Dilate => set > 0,
            // the window must lie fully inside and be fully set
            Op::Erode => i >= r && i + r < n && set as usize == 2 * r + 1,
        };
        emit(i, v);
    }
}
