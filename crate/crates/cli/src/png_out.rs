use std::io::BufWriter;
use std::path::Path;

use crate::CliError;

/// `round(255 · clamp(v, 0, 1))`.
pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

/// Writes an 8-bit RGB PNG from row-major RGB triples.
pub fn write_png(path: &Path, width: usize, height: usize, data: &[[f64; 3]]) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = data.iter().flatten().map(|&v| quantize(v)).collect();
    let err = |e: png::EncodingError| CliError::io(path, std::io::Error::other(e));
    let mut writer = enc.write_header().map_err(err)?;
    writer.write_image_data(&bytes).map_err(err)?;
    writer.finish().map_err(err)
}
