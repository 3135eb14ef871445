use super::{check_kernel, GrayImage, ImagingError};

/// Box-mean filter with a `kernel`×`kernel` window and edge replication.
///
/// Sums are accumulated in `u32` and the mean is rounded half-up, so the
/// output is bit-reproducible.
pub fn mean_smooth(img: &GrayImage, kernel: usize) -> Result<GrayImage, ImagingError> {
    check_kernel(kernel)?;
    let (h, w) = img.dims();
    if kernel > h.min(w) {
        return Err(ImagingError::InvalidParameter(format!(
            "kernel {kernel} exceeds the smaller image side {}",
            h.min(w)
        )));
    }
    if kernel == 1 {
        return Ok(img.clone());
    }
    let r = (kernel / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    // horizontal window sums with replicated columns
    let src = img.pixels();
    let mut horiz = vec![0u32; h * w];
    for row in 0..h {
        let line = &src[row * w..(row + 1) * w];
        let out = &mut horiz[row * w..(row + 1) * w];
        let mut acc: u32 = (-r..=r).map(|d| line[clamp(d, w)] as u32).sum();
        out[0] = acc;
        for col in 1..w {
            let c = col as isize;
            acc += line[clamp(c + r, w)] as u32;
            acc -= line[clamp(c - r - 1, w)] as u32;
            out[col] = acc;
        }
    }

    let n = (kernel * kernel) as u32;
    let mut pixels = vec![0u8; h * w];
    for col in 0..w {
        let mut acc: u32 = (-r..=r).map(|d| horiz[clamp(d, h) * w + col]).sum();
        pixels[col] = ((acc + n / 2) / n) as u8;
        for row in 1..h {
            let rr = row as isize;
            acc += horiz[clamp(rr + r, h) * w + col];
            acc -= horiz[clamp(rr - r - 1, h) * w + col];
            pixels[row * w + col] = ((acc + n / 2) / n) as u8;
        }
    }
    GrayImage::new(h, w, pixels)
}
