//! Matrix persistence.
//!
//! Binary container (little-endian):
//!
//! ```text
//! magic   4 bytes  "DTMX"
//! version u32      1
//! rows    u64
//! cols    u64
//! data    rows*cols f64, row-major
//! ```
//!
//! CSV: one line per row, comma separated, 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DTMX";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8;

pub fn encode_matrix(m: ArrayView2<'_, f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for &x in m.iter() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Array2<f64>> {
    let bad = |msg: &str| Error::Parse {
        line: 0,
        message: format!("matrix container: {msg}"),
    };
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != rows * cols * 8 {
        return Err(bad("payload length does not match the header"));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| bad(&e.to_string()))
}

pub fn write_matrix_bin(path: &Path, m: ArrayView2<'_, f64>) -> Result<()> {
    fs::write(path, encode_matrix(m)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_bin(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes)
}

/// 17 significant digits in scientific notation.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn matrix_to_csv(m: ArrayView2<'_, f64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        match cols {
            None => cols = Some(values.len()),
            Some(c) if c != values.len() => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {c} values, found {}", values.len()),
                })
            }
            _ => {}
        }
        data.extend(values);
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), data).map_err(|e| Error::Shape(e.to_string()))
}

pub fn write_matrix_csv(path: &Path, m: ArrayView2<'_, f64>) -> Result<()> {
    fs::write(path, matrix_to_csv(m)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_csv(&text)
}

/// `iteration,loss` with iteration 0 holding the loss before any update.
pub fn loss_trace_csv(initial: f64, trace: &[f64]) -> String {
    let mut out = String::from("iteration,loss\n");
    let _ = writeln!(out, "0,{}", format_f64(initial));
    for (i, l) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, format_f64(*l));
    }
    out
}
