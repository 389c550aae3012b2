//! Output formats: `SARF` complex rasters, 8-bit PGM quicklooks and CSV.
//! Every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub const SARF_MAGIC: &[u8; 4] = b"SARF";

/// Dynamic range of PGM quicklooks, dB below peak.
pub const PGM_RANGE_DB: f64 = 60.0;

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `SARF`, rows and cols as little-endian u32, then row-major `(re, im)`
/// little-endian f64 pairs.
pub fn encode_sarf(m: &ComplexMatrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::InvalidInput("raster too tall".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::InvalidInput("raster too wide".into()))?;
    let mut out = Vec::with_capacity(12 + 16 * m.as_slice().len());
    out.extend_from_slice(SARF_MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for x in m.as_slice() {
        out.extend_from_slice(&x.re.to_le_bytes());
        out.extend_from_slice(&x.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_sarf(bytes: &[u8]) -> Result<ComplexMatrix> {
    let bad = |msg: &str| Error::InvalidInput(format!("SARF: {msg}"));
    if bytes.len() < 12 || &bytes[..4] != SARF_MAGIC {
        return Err(bad("missing magic"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (rows, cols) = (word(4), word(8));
    let body = &bytes[12..];
    if body.len() != rows * cols * 16 {
        return Err(bad(&format!("expected {} payload bytes, found {}", rows * cols * 16, body.len())));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

pub fn write_sarf(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_atomic(path, &encode_sarf(m)?)
}

pub fn read_sarf(path: &Path) -> Result<ComplexMatrix> {
    decode_sarf(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Binary P5 greymap: magnitude in dB re peak, clipped to
/// `[−PGM_RANGE_DB, 0]` and mapped linearly onto 0..=255. An all-zero
/// raster is black.
pub fn encode_pgm(m: &ComplexMatrix) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", m.cols(), m.rows()).into_bytes();
    let peak = m.max_abs();
    out.extend(m.as_slice().iter().map(|x| {
        if peak == 0.0 || x.norm() == 0.0 {
            return 0u8;
        }
        let db = (20.0 * (x.norm() / peak).log10()).clamp(-PGM_RANGE_DB, 0.0);
        ((db + PGM_RANGE_DB) / PGM_RANGE_DB * 255.0).round() as u8
    }));
    out
}

pub fn write_pgm(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_atomic(path, &encode_pgm(m))
}

/// One CSV field.
pub enum Cell<'a> {
    Text(&'a str),
    Int(i64),
    Float(f64),
}

impl From<&'static str> for Cell<'static> {
    fn from(s: &'static str) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell<'_> {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell<'_> {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

/// In-memory CSV with a fixed header; floats use 17 significant digits.
pub struct Csv {
    cols: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            cols: header.len(),
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        debug_assert_eq!(cells.len(), self.cols);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = match c {
                Cell::Text(s) => write!(self.text, "{s}"),
                Cell::Int(v) => write!(self.text, "{v}"),
                Cell::Float(v) => write!(self.text, "{}", format_float(*v)),
            };
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.text.as_bytes())
    }
}

/// `d.dddddddddddddddde±x`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
