//! Grayscale PGM (P5) images of per-node arrays at grid resolution.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Minimum to 0, maximum to 255; constant input renders black.
    MinMax,
    /// Zero to 128, `±max|v|` to the ends; all-zero input renders gray.
    Symmetric,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minmax" | "linear" => Ok(Self::MinMax),
            "symmetric" => Ok(Self::Symmetric),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization {other:?}"
            ))),
        }
    }
}

/// Maps each value to a gray level.
pub fn gray_levels(values: &[f64], norm: Normalization) -> Vec<u8> {
    let quantize = |t: f64| (t * 255.0).round().clamp(0.0, 255.0) as u8;
    match norm {
        Normalization::MinMax => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            values
                .iter()
                .map(|&v| if span > 0.0 { quantize((v - lo) / span) } else { 0 })
                .collect()
        }
        Normalization::Symmetric => {
            let m = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            values
                .iter()
                .map(|&v| {
                    if m > 0.0 {
                        (128.0 + 127.0 * v / m).round().clamp(0.0, 255.0) as u8
                    } else {
                        128
                    }
                })
                .collect()
        }
    }
}

/// Encodes node values as a P5 image. Node `(r, c)` becomes pixel column `c`
/// of image row `ny − 1 − r`, so larger `y` is up.
pub fn encode_pgm(grid: &GridSpec, values: &[f64], norm: Normalization) -> Result<Vec<u8>> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    let levels = gray_levels(values, norm);
    let mut out = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    for r in (0..grid.ny).rev() {
        out.extend_from_slice(&levels[r * grid.nx..(r + 1) * grid.nx]);
    }
    Ok(out)
}

/// Label maps spread cluster ids evenly over the gray range.
pub fn labels_to_values(labels: &[usize]) -> Vec<f64> {
    labels.iter().map(|&l| l as f64).collect()
}

pub fn write_pgm(path: impl AsRef<Path>, grid: &GridSpec, values: &[f64], norm: Normalization) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pgm(grid, values, norm)?;
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| Error::io(path, e))
}

/// Header fields and pixel payload of a P5 image.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, &[u8])> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedHeader("truncated PGM header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or(""));
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(Error::MalformedHeader("not an 8-bit P5 image".into()));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("bad dimension {s:?}")))
    };
    let (w, h) = (parse(fields[1])?, parse(fields[2])?);
    let data = &bytes[pos + 1..];
    if data.len() != w * h {
        return Err(Error::DimensionMismatch {
            expected: w * h,
            found: data.len(),
        });
    }
    Ok((w, h, data))
}
