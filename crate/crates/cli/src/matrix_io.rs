//! Complex matrix files.
//!
//! Text: optional `#` comment lines, a `rows cols` line, then one line per
//! row holding either `cols` real entries or `cols` pairs `re im`.
//!
//! Binary (little endian): `b"AQSM"`, `u32` version 1, `u64` rows,
//! `u64` cols, then row-major `(re, im)` pairs of `f64`.

use std::fs;
use std::path::Path;

use aqs_core::bogoliubov::{CMatrix, C64};

const MAGIC: &[u8; 4] = b"AQSM";
const VERSION: u32 = 1;

pub fn read_matrix(path: &Path) -> Result<CMatrix, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if bytes.starts_with(MAGIC) {
        parse_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| "matrix file is neither binary nor UTF-8 text".to_owned())?;
        parse_text(&text)
    }
    .map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_text(text: &str) -> Result<CMatrix, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, dims) = lines.next().ok_or("empty matrix file")?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("line {ln}: bad dimension `{t}`")))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format!("line {ln}: expected `rows cols`"));
    };
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        let (ln, line) = lines.next().ok_or(format!("expected {rows} rows, found {r}"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("line {ln}: bad number `{t}`")))
            .collect::<Result<_, _>>()?;
        if vals.len() == cols {
            for (c, v) in vals.into_iter().enumerate() {
                m[(r, c)] = C64::new(v, 0.0);
            }
        } else if vals.len() == 2 * cols {
            for c in 0..cols {
                m[(r, c)] = C64::new(vals[2 * c], vals[2 * c + 1]);
            }
        } else {
            return Err(format!(
                "line {ln}: expected {cols} real or {} complex entries, got {}",
                2 * cols,
                vals.len()
            ));
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(format!("line {ln}: trailing data after {rows} rows"));
    }
    Ok(m)
}

pub fn to_text(m: &CMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| format!("{:.16e} {:.16e}", m[(r, c)].re, m[(r, c)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_binary(bytes: &[u8]) -> Result<CMatrix, String> {
    let header = 4 + 4 + 8 + 8;
    if bytes.len() < header || &bytes[..4] != MAGIC {
        return Err("truncated binary matrix header".into());
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(format!("unsupported binary matrix version {version}"));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|k| k.checked_mul(16))
        .and_then(|k| k.checked_add(header))
        .ok_or("binary matrix dimensions overflow")?;
    if bytes.len() != expected {
        return Err(format!(
            "binary matrix of {rows}×{cols} needs {expected} bytes, file has {}",
            bytes.len()
        ));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[header + 8 * k..header + 8 * k + 8].try_into().unwrap());
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        let k = 2 * (r * cols + c);
        C64::new(f(k), f(k + 1))
    }))
}

pub fn to_binary(m: &CMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * m.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].re.to_le_bytes());
            out.extend_from_slice(&m[(r, c)].im.to_le_bytes());
        }
    }
    out
}
