//! Netpbm graymaps: P2 (ASCII) and P5 (binary), 8- or 16-bit samples.
//! Loaded values are divided by maxval; saved images are always 16-bit P5.

use std::path::Path;

use phaseret::ImageGrid;

use crate::error::{format_err, io_err, Result};

pub const SAVE_MAXVAL: u16 = 65535;

struct Header {
    binary: bool,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first raster byte.
    data_start: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(format_err(path, "not a P2/P5 graymap")),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (n, field) in fields.iter_mut().enumerate() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, format!("malformed header field {}", n + 1)));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(path, "header number out of range"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(format_err(path, "zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format_err(path, format!("unsupported maxval {maxval}")));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err(path, "missing whitespace after header"));
    }
    Ok(Header { binary, width: width as usize, height: height as usize, maxval, data_start: pos + 1 })
}

/// Decodes a graymap held in memory. `path` is only used in error messages.
pub fn parse_pgm(bytes: &[u8], path: &Path) -> Result<ImageGrid> {
    let h = parse_header(bytes, path)?;
    let count = h.width * h.height;
    let raster = &bytes[h.data_start..];
    let samples: Vec<u32> = if h.binary {
        let wide = h.maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        if raster.len() < need {
            return Err(format_err(path, format!("raster has {} bytes, need {need}", raster.len())));
        }
        if wide {
            raster[..need].chunks_exact(2).map(|p| u32::from(u16::from_be_bytes([p[0], p[1]]))).collect()
        } else {
            raster[..need].iter().map(|&v| u32::from(v)).collect()
        }
    } else {
        let text = std::str::from_utf8(raster).map_err(|_| format_err(path, "non-ASCII raster"))?;
        let values: Vec<u32> = text
            .split_ascii_whitespace()
            .take(count)
            .map(|t| t.parse().map_err(|_| format_err(path, format!("bad sample '{t}'"))))
            .collect::<Result<_>>()?;
        if values.len() < count {
            return Err(format_err(path, format!("found {} samples, need {count}", values.len())));
        }
        values
    };
    if let Some(bad) = samples.iter().find(|&&v| v > h.maxval) {
        return Err(format_err(path, format!("sample {bad} exceeds maxval {}", h.maxval)));
    }
    let scale = f64::from(h.maxval);
    let data = samples.into_iter().map(|v| f64::from(v) / scale).collect();
    Ok(ImageGrid::new(h.height, h.width, data)?)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    parse_pgm(&bytes, path)
}

/// `round(clamp(v, 0, 1) · 65535)`.
pub fn quantize16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * f64::from(SAVE_MAXVAL)).round() as u16
}

/// 16-bit binary graymap, samples big-endian.
pub fn encode_pgm16(x: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", x.cols(), x.rows(), SAVE_MAXVAL).into_bytes();
    for &v in x.as_slice() {
        out.extend_from_slice(&quantize16(v).to_be_bytes());
    }
    out
}

/// ASCII graymap with the given maxval.
pub fn encode_pgm_ascii(x: &ImageGrid, maxval: u16) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n{}\n", x.cols(), x.rows(), maxval);
    for row in x.as_slice().chunks(x.cols()) {
        let line: Vec<String> = row
            .iter()
            .map(|&v| ((v.clamp(0.0, 1.0) * f64::from(maxval)).round() as u16).to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn save_image(x: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm16(x)).map_err(io_err(path))
}
