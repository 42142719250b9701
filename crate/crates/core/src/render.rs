//! 8-bit grayscale export of contrast maps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::contrast::ContrastMap;
use crate::error::{Error, Result};

/// Scale by the map maximum to `[0, 255]`, rounding to nearest. An all-zero
/// map renders black.
pub fn to_gray8(map: &ContrastMap) -> Vec<u8> {
    let max = map.max();
    map.values
        .iter()
        .map(|&v| {
            if max > 0.0 {
                (v.max(0.0) / max * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect()
}

/// Binary (P5) PGM.
pub fn write_pgm(path: &Path, map: &ContrastMap) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    write!(out, "P5\n{} {}\n255\n", map.geometry.width, map.geometry.height).map_err(io)?;
    out.write_all(&to_gray8(map)).map_err(io)?;
    out.flush().map_err(io)
}

pub fn write_png(path: &Path, map: &ContrastMap) -> Result<()> {
    let io = |e| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        map.geometry.width as u32,
        map.geometry.height as u32,
    );
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let encoded = encoder
        .write_header()
        .and_then(|mut w| w.write_image_data(&to_gray8(map)));
    encoded.map_err(|e| io(std::io::Error::other(e)))
}
