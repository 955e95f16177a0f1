//! Raster image encoding.
//!
//! Maps are stored as 8-bit RGB images: obstacles are pure black, free cells
//! pure white. The decoder is slightly more lenient: any gray pixel
//! (`r == g == b`) with value below 128 is an obstacle and any gray pixel at or
//! above 128 is free. Colored pixels are rejected. PNG is the primary format;
//! binary PPM is accepted for tooling, selected by file extension.

use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use super::GridMap;
use crate::{Error, Result};

pub const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
pub const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
pub const RED: Rgb<u8> = Rgb([255, 0, 0]);
pub const GREEN: Rgb<u8> = Rgb([0, 255, 0]);
pub const BLUE: Rgb<u8> = Rgb([0, 0, 255]);

pub fn render_map_image(map: &GridMap) -> RgbImage {
    RgbImage::from_fn(map.width() as u32, map.height() as u32, |x, y| {
        if map.is_obstacle_cell(x as usize, y as usize) {
            BLACK
        } else {
            WHITE
        }
    })
}

/// Alias kept for symmetry with [`decode_map`].
pub fn encode_map(map: &GridMap) -> RgbImage {
    render_map_image(map)
}

/// Decodes a map raster. `origin` only labels error messages.
pub fn decode_map(img: &RgbImage, origin: &str) -> Result<GridMap> {
    let (w, h) = img.dimensions();
    let mut cells = Vec::with_capacity((w * h) as usize);
    for (x, y, px) in img.enumerate_pixels() {
        let [r, g, b] = px.0;
        if r != g || g != b {
            return Err(Error::Decode {
                path: origin.to_string(),
                x,
                y,
                detail: format!("unknown map color ({r},{g},{b}); expected black or white"),
            });
        }
        cells.push(r < 128);
    }
    GridMap::from_cells(w as usize, h as usize, cells).map_err(|e| Error::Decode {
        path: origin.to_string(),
        x: 0,
        y: 0,
        detail: format!("wrong dimensions {w}x{h}: {e}"),
    })
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("png") => Ok(ImageFormat::Png),
        Some("ppm") | Some("pgm") | Some("pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::Config(format!(
            "{}: unsupported image extension (use .png or .ppm)",
            path.display()
        ))),
    }
}

pub fn save_rgb(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = format_for(path)?;
    img.save_with_format(path, format).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads any supported raster as RGB. Grayscale inputs become gray RGB.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let format = format_for(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let img = image::load_from_memory_with_format(&bytes, format).map_err(|source| {
        Error::Image {
            path: path.to_path_buf(),
            source,
        }
    })?;
    Ok(img.to_rgb8())
}

pub fn save_map(map: &GridMap, path: impl AsRef<Path>) -> Result<()> {
    save_rgb(&render_map_image(map), path)
}

pub fn load_map(path: impl AsRef<Path>) -> Result<GridMap> {
    let path = path.as_ref();
    decode_map(&load_rgb(path)?, &path.display().to_string())
}
