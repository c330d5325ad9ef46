//! Minimal PGM (portable graymap) reader/writer.
//!
//! Supports the ASCII (`P2`) and binary (`P5`) variants with maxval up to
//! 65535. Pixels are held internally as `f64` in `[0, 1]`; quantization to
//! the file's maxval happens only on write.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug)]
pub struct PgmError(pub String);

impl fmt::Display for PgmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pgm error: {}", self.0)
    }
}

impl std::error::Error for PgmError {}

type PgmResult<T> = Result<T, PgmError>;

fn err<T>(msg: impl Into<String>) -> PgmResult<T> {
    Err(PgmError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    Ascii,
    Binary,
}

#[derive(Debug, Clone)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub format: PgmFormat,
    /// Row-major intensities in `[0, 1]`, length `width * height`.
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
        GrayImage {
            width,
            height,
            maxval: 255,
            format: PgmFormat::Binary,
            pixels,
        }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Pull the next whitespace-separated token, skipping `#` comments.
struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(data: &'a [u8]) -> Self {
        Tokens { data, pos: 0 }
    }

    fn skip_filler(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> PgmResult<&'a str> {
        self.skip_filler();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return err("unexpected end of file in header");
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .map_err(|_| PgmError("non-ASCII bytes in header".into()))
    }

    fn next_uint(&mut self, what: &str) -> PgmResult<u64> {
        let tok = self.next_token()?;
        tok.parse::<u64>()
            .map_err(|_| PgmError(format!("invalid {what}: `{tok}`")))
    }
}

pub fn decode(data: &[u8]) -> PgmResult<GrayImage> {
    let mut toks = Tokens::new(data);
    let magic = toks.next_token()?;
    let format = match magic {
        "P2" => PgmFormat::Ascii,
        "P5" => PgmFormat::Binary,
        other => return err(format!("unsupported magic `{other}` (expected P2 or P5)")),
    };
    let width = toks.next_uint("width")? as usize;
    let height = toks.next_uint("height")? as usize;
    let maxval = toks.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return err("image dimensions must be positive");
    }
    if maxval == 0 || maxval > 65535 {
        return err(format!("maxval {maxval} out of range 1..=65535"));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;
    let mut pixels = Vec::with_capacity(count);
    match format {
        PgmFormat::Ascii => {
            for _ in 0..count {
                let v = toks.next_uint("pixel")?;
                if v > maxval {
                    return err(format!("pixel value {v} exceeds maxval {maxval}"));
                }
                pixels.push(v as f64 * scale);
            }
        }
        PgmFormat::Binary => {
            // exactly one whitespace byte separates maxval from raster data
            let mut pos = toks.pos;
            if pos >= data.len() || !data[pos].is_ascii_whitespace() {
                return err("missing whitespace before binary raster");
            }
            pos += 1;
            let wide = maxval > 255;
            let bytes_per = if wide { 2 } else { 1 };
            if data.len() < pos + count * bytes_per {
                return err("binary raster truncated");
            }
            for i in 0..count {
                let v = if wide {
                    let hi = data[pos + 2 * i] as u64;
                    let lo = data[pos + 2 * i + 1] as u64;
                    (hi << 8) | lo
                } else {
                    data[pos + i] as u64
                };
                if v > maxval {
                    return err(format!("pixel value {v} exceeds maxval {maxval}"));
                }
                pixels.push(v as f64 * scale);
            }
        }
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u32,
        format,
        pixels,
    })
}

pub fn encode(img: &GrayImage) -> PgmResult<Vec<u8>> {
    if img.pixels.len() != img.width * img.height {
        return err("pixel buffer size mismatch");
    }
    if img.maxval == 0 || img.maxval > 65535 {
        return err(format!("maxval {} out of range 1..=65535", img.maxval));
    }
    let maxval = img.maxval as f64;
    let quant = |p: f64| -> u32 { (p.clamp(0.0, 1.0) * maxval).round() as u32 };
    let mut out = Vec::new();
    match img.format {
        PgmFormat::Ascii => {
            out.extend_from_slice(format!("P2\n{} {}\n{}\n", img.width, img.height, img.maxval).as_bytes());
            for row in 0..img.height {
                let line: Vec<String> = (0..img.width)
                    .map(|c| quant(img.pixels[row * img.width + c]).to_string())
                    .collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        PgmFormat::Binary => {
            out.extend_from_slice(format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).as_bytes());
            let wide = img.maxval > 255;
            for &p in &img.pixels {
                let v = quant(p);
                if wide {
                    out.push((v >> 8) as u8);
                    out.push((v & 0xff) as u8);
                } else {
                    out.push(v as u8);
                }
            }
        }
    }
    Ok(out)
}

pub fn read_path(path: &Path) -> PgmResult<GrayImage> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| PgmError(format!("cannot read {}: {e}", path.display())))?;
    decode(&data)
}

pub fn write_path(path: &Path, img: &GrayImage) -> PgmResult<()> {
    let bytes = encode(img)?;
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| PgmError(format!("cannot write {}: {e}", path.display())))
}

/// Deterministic 64×64 test image: smooth sinusoidal shading with a bright
/// rectangle and a dark disc, so the signal has structure at several scales.
pub fn synthetic_image() -> GrayImage {
    const SIDE: usize = 64;
    let mut pixels = Vec::with_capacity(SIDE * SIDE);
    for row in 0..SIDE {
        for col in 0..SIDE {
            let u = row as f64 / (SIDE - 1) as f64;
            let v = col as f64 / (SIDE - 1) as f64;
            let mut p = 0.55 + 0.18 * (2.0 * std::f64::consts::PI * 2.0 * u).sin()
                + 0.14 * (2.0 * std::f64::consts::PI * 3.0 * v).cos();
            if (16..28).contains(&row) && (34..54).contains(&col) {
                p += 0.25;
            }
            let (dr, dc) = (row as f64 - 44.0, col as f64 - 18.0);
            if dr * dr + dc * dc <= 81.0 {
                p -= 0.35;
            }
            pixels.push(p.clamp(0.05, 1.0));
        }
    }
    GrayImage::new(SIDE, SIDE, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_round_trip() {
        let img = GrayImage {
            width: 3,
            height: 2,
            maxval: 255,
            format: PgmFormat::Ascii,
            pixels: vec![0.0, 0.5, 1.0, 0.25, 0.75, 0.1],
        };
        let bytes = encode(&img).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back.width, 3);
        assert_eq!(back.height, 2);
        assert_eq!(back.format, PgmFormat::Ascii);
        for (a, b) in img.pixels.iter().zip(back.pixels.iter()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn binary_round_trip_16bit() {
        let img = GrayImage {
            width: 4,
            height: 4,
            maxval: 65535,
            format: PgmFormat::Binary,
            pixels: (0..16).map(|i| i as f64 / 15.0).collect(),
        };
        let bytes = encode(&img).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back.maxval, 65535);
        for (a, b) in img.pixels.iter().zip(back.pixels.iter()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
    }

    #[test]
    fn header_comments_are_skipped() {
        let text = b"P2\n# a comment\n2 1\n# another\n10\n5 10\n";
        let img = decode(text).unwrap();
        assert_eq!(img.width, 2);
        assert_eq!(img.pixels, vec![0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(decode(b"P3\n1 1\n255\n0\n").is_err());
        assert!(decode(b"P2\n1 1\n300\n400\n").is_err()); // pixel > maxval
        assert!(decode(b"P5\n2 2\n255\nab").is_err()); // truncated raster
        assert!(decode(b"P2\n0 1\n255\n").is_err()); // zero dimension
    }

    #[test]
    fn synthetic_image_is_deterministic_and_in_range() {
        let a = synthetic_image();
        let b = synthetic_image();
        assert_eq!(a.pixels, b.pixels);
        assert_eq!(a.len(), 64 * 64);
        assert!(a.pixels.iter().all(|&p| (0.05..=1.0).contains(&p)));
        // nontrivial energy so the flattened signal is a usable truth vector
        let norm_sq: f64 = a.pixels.iter().map(|p| p * p).sum();
        assert!(norm_sq > 100.0);
    }
}
