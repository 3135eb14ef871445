//! Pixel-level containers and primitives: grayscale slices, binary masks,
//! smoothing, morphology and rasterization.

mod io;
mod morphology;
mod polygon;
mod raster;
mod smooth;

pub use io::{
    decode_gray, decode_mask, encode_mask_png, encode_pgm, encode_png, read_gray, read_mask, write_gray,
    write_mask,
};
pub use morphology::{close, close_iterated, dilate, erode};
pub use polygon::fill_polygon;
pub use raster::{rasterize_bezier, rasterize_bezier_with_control, rasterize_segment};
pub use smooth::mean_smooth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImagingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("image i/o: {0}")]
    Io(String),
}

/// Integer pixel coordinate, origin top-left, row increasing downward.
///
/// Serialized as a `[row, col]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(i32, i32)", into = "(i32, i32)")]
pub struct PixelPoint {
    pub row: i32,
    pub col: i32,
}

impl PixelPoint {
    pub const fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn in_bounds(self, height: usize, width: usize) -> bool {
        self.row >= 0 && self.col >= 0 && (self.row as usize) < height && (self.col as usize) < width
    }

    /// Chebyshev (chessboard) distance; 1 means 8-adjacent.
    pub fn chebyshev(self, other: PixelPoint) -> i32 {
        (self.row - other.row).abs().max((self.col - other.col).abs())
    }
}

impl From<(i32, i32)> for PixelPoint {
    fn from((row, col): (i32, i32)) -> Self {
        Self { row, col }
    }
}

impl From<PixelPoint> for (i32, i32) {
    fn from(p: PixelPoint) -> Self {
        (p.row, p.col)
    }
}

/// 8-bit single-channel image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        check_dims(height, width)?;
        if pixels.len() != height * width {
            return Err(ImagingError::InvalidParameter(format!(
                "{} pixels supplied for a {height}x{width} image",
                pixels.len()
            )));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn filled(height: usize, width: usize, value: u8) -> Result<Self, ImagingError> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn at(&self, p: PixelPoint) -> u8 {
        self.get(p.row as usize, p.col as usize)
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn min_max(&self) -> (u8, u8) {
        let min = self.pixels.iter().copied().min().unwrap_or(0);
        let max = self.pixels.iter().copied().max().unwrap_or(0);
        (min, max)
    }
}

/// Binary mask stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} set)", self.height, self.width, self.count())?;
        if self.height * self.width <= 64 * 64 {
            for r in 0..self.height {
                let line: String = (0..self.width)
                    .map(|c| if self.get(r, c) { '#' } else { '.' })
                    .collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    /// All-unset mask. Panics on zero dimensions.
    pub fn empty(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "mask dimensions must be positive");
        Self { height, width, bits: vec![false; height * width] }
    }

    pub fn full(height: usize, width: usize) -> Self {
        let mut m = Self::empty(height, width);
        m.bits.fill(true);
        m
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self, ImagingError> {
        check_dims(height, width)?;
        if bits.len() != height * width {
            return Err(ImagingError::InvalidParameter(format!(
                "{} bits supplied for a {height}x{width} mask",
                bits.len()
            )));
        }
        Ok(Self { height, width, bits })
    }

    /// Mask from an ASCII picture: `#` (or `1`) set, anything else unset.
    /// Rows are separated by newlines; blank lines and surrounding spaces are ignored.
    pub fn from_ascii(picture: &str) -> Self {
        let rows: Vec<&str> = picture.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut m = Self::empty(height, width);
        for (r, line) in rows.iter().enumerate() {
            assert_eq!(line.chars().count(), width, "ragged ascii mask");
            for (c, ch) in line.chars().enumerate() {
                m.set(r, c, ch == '#' || ch == '1');
            }
        }
        m
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Out-of-bounds points read as unset.
    pub fn contains(&self, p: PixelPoint) -> bool {
        p.in_bounds(self.height, self.width) && self.get(p.row as usize, p.col as usize)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    /// Sets `p` if it lies inside the mask; returns whether it did.
    pub fn insert(&mut self, p: PixelPoint) -> bool {
        if p.in_bounds(self.height, self.width) {
            self.set(p.row as usize, p.col as usize, true);
            true
        } else {
            false
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = PixelPoint> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| PixelPoint::new((i / w) as i32, (i % w) as i32))
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn union_with(&mut self, other: &BinaryMask) -> Result<(), ImagingError> {
        self.check_same_dims(other)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> Result<usize, ImagingError> {
        self.check_same_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a && b).count())
    }

    pub fn union_count(&self, other: &BinaryMask) -> Result<usize, ImagingError> {
        self.check_same_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(&a, &b)| a || b).count())
    }

    /// True iff every set pixel of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn check_same_dims(&self, other: &BinaryMask) -> Result<(), ImagingError> {
        if self.dims() != other.dims() {
            return Err(ImagingError::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }
}

fn check_dims(height: usize, width: usize) -> Result<(), ImagingError> {
    if height == 0 || width == 0 {
        return Err(ImagingError::InvalidParameter(format!(
            "dimensions must be positive, got {height}x{width}"
        )));
    }
    Ok(())
}

pub(crate) fn check_kernel(kernel: usize) -> Result<(), ImagingError> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(ImagingError::InvalidParameter(format!(
            "kernel side must be odd and positive, got {kernel}"
        )));
    }
    Ok(())
}
