//! PNG / binary PGM (P5) reading and writing.

use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, Luma};

use super::{BinaryMask, GrayImage, ImagingError};

fn io_err(e: impl std::fmt::Display) -> ImagingError {
    ImagingError::Io(e.to_string())
}

fn to_gray(img: DynamicImage) -> Result<GrayImage, ImagingError> {
    let luma = match img {
        DynamicImage::ImageLuma8(l) => l,
        other => {
            return Err(ImagingError::Io(format!(
                "expected an 8-bit single-channel image, got {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = luma.dimensions();
    GrayImage::new(h as usize, w as usize, luma.into_raw())
}

pub fn read_gray(path: &Path) -> Result<GrayImage, ImagingError> {
    let img = image::open(path).map_err(|e| ImagingError::Io(format!("{}: {e}", path.display())))?;
    to_gray(img)
}

/// Decodes PNG or PGM bytes (format sniffed from the content).
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    to_gray(image::load_from_memory(bytes).map_err(io_err)?)
}

/// Any non-zero pixel counts as set.
pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask, ImagingError> {
    gray_to_mask(decode_gray(bytes)?)
}

pub fn read_mask(path: &Path) -> Result<BinaryMask, ImagingError> {
    gray_to_mask(read_gray(path)?)
}

fn gray_to_mask(img: GrayImage) -> Result<BinaryMask, ImagingError> {
    let (h, w) = img.dims();
    BinaryMask::from_bits(h, w, img.pixels().iter().map(|&v| v != 0).collect())
}

fn mask_to_gray(mask: &BinaryMask) -> GrayImage {
    let (h, w) = mask.dims();
    let px = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    GrayImage::new(h, w, px).expect("mask dims are valid")
}

/// Writes a grayscale image; `.pgm` selects binary PGM, anything else PNG.
pub fn write_gray(img: &GrayImage, path: &Path) -> Result<(), ImagingError> {
    let bytes = if is_pgm(path) { encode_pgm(img)? } else { encode_png(img)? };
    std::fs::write(path, bytes).map_err(|e| ImagingError::Io(format!("{}: {e}", path.display())))
}

/// Writes a mask with values {0, 255}; `.pgm` selects binary PGM, anything else PNG.
pub fn write_mask(mask: &BinaryMask, path: &Path) -> Result<(), ImagingError> {
    write_gray(&mask_to_gray(mask), path)
}

pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>, ImagingError> {
    encode_png(&mask_to_gray(mask))
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>, ImagingError> {
    let buf: image::ImageBuffer<Luma<u8>, &[u8]> =
        image::ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.pixels())
            .expect("buffer length matches dims");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png).map_err(io_err)?;
    Ok(out.into_inner())
}

pub fn encode_pgm(img: &GrayImage) -> Result<Vec<u8>, ImagingError> {
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(img.pixels(), img.width() as u32, img.height() as u32, ExtendedColorType::L8)
        .map_err(io_err)?;
    Ok(out)
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}
