//! PNG and binary Netpbm (P5/P6) codecs, 8 bits per sample.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::Image;
use crate::error::{Error, Result};

const PNG_MAGIC: &[u8; 8] = b"\x89PNG\r\n\x1a\n";

/// Decodes a PNG, PPM (P6) or PGM (P5) file, dispatching on the magic bytes.
///
/// Alpha channels are discarded. Sources with more than 8 bits per sample are
/// rejected rather than truncated.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(&bytes)
    } else {
        Err(Error::UnsupportedFormat(format!(
            "{}: not a PNG, P5 or P6 file",
            path.display()
        )))
    }
}

/// Writes `img` as PNG when the extension is `.png`, otherwise as binary
/// Netpbm: P5 for one channel, P6 for three.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    if is_png {
        encode_png(img, &mut out).map_err(|e| match e {
            png::EncodingError::IoError(io) => Error::io(path, io),
            other => Error::UnsupportedFormat(other.to_string()),
        })?;
    } else {
        encode_pnm(img, &mut out).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::CorruptStream(e.to_string()))?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err(Error::UnsupportedFormat("16-bit PNG".into()));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::CorruptStream("PNG dimensions overflow".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::CorruptStream(e.to_string()))?;
    if frame.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat(format!(
            "PNG bit depth {:?}",
            frame.bit_depth
        )));
    }
    let (w, h) = (frame.width as usize, frame.height as usize);
    let rows = buf[..frame.line_size * h]
        .chunks_exact(frame.line_size)
        .map(|row| &row[..frame.line_size]);
    let (src_channels, keep) = match frame.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => {
            return Err(Error::UnsupportedFormat("unexpanded palette PNG".into()))
        }
    };
    let mut data = Vec::with_capacity(w * h * keep);
    for row in rows {
        for px in row[..w * src_channels].chunks_exact(src_channels) {
            data.extend(px[..keep].iter().map(|&v| f64::from(v)));
        }
    }
    Image::new(w, h, keep, data)
}

fn encode_png<W: Write>(img: &Image, out: W) -> std::result::Result<(), png::EncodingError> {
    let mut encoder = png::Encoder::new(out, img.width() as u32, img.height() as u32);
    encoder.set_color(if img.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(&img.to_u8())?;
    writer.finish()
}

fn encode_pnm<W: Write>(img: &Image, mut out: W) -> std::io::Result<()> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    write!(out, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(&img.to_u8())
}

fn decode_pnm(bytes: &[u8]) -> Result<Image> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut header = HeaderTokens { bytes, pos: 2 };
    let width = header.next_number("width")?;
    let height = header.next_number("height")?;
    let maxval = header.next_number("maxval")?;
    if maxval == 0 {
        return Err(Error::CorruptStream("PNM maxval is 0".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PNM maxval {maxval} (16-bit samples)"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(Error::CorruptStream("PNM header not terminated".into())),
    }
    let start = header.pos + 1;
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::CorruptStream("PNM dimensions overflow".into()))?;
    let raster = bytes
        .get(start..start + len)
        .ok_or_else(|| Error::CorruptStream("PNM raster truncated".into()))?;
    let scale = 255.0 / maxval as f64;
    let data = raster
        .iter()
        .map(|&v| {
            if maxval == 255 {
                f64::from(v)
            } else {
                (f64::from(v) * scale).round()
            }
        })
        .collect();
    Image::new(width, height, channels, data)
        .map_err(|e| Error::CorruptStream(format!("PNM: {e}")))
}

struct HeaderTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderTokens<'_> {
    fn next_number(&mut self, what: &str) -> Result<usize> {
        loop {
            match self.bytes.get(self.pos) {
                None => {
                    return Err(Error::CorruptStream(format!(
                        "PNM header truncated before {what}"
                    )))
                }
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(_) => break,
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::CorruptStream(format!("PNM header: bad {what}")));
        }
        if self.pos == self.bytes.len() {
            return Err(Error::CorruptStream(format!(
                "PNM header truncated after {what}"
            )));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptStream(format!("PNM header: bad {what}")))
    }
}
