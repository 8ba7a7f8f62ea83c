//! Matrix persistence.
//!
//! Binary layout (all little-endian):
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 8    | magic `b"CRMATF64"`        |
//! | 8      | 4    | rows (`u32`)               |
//! | 12     | 4    | cols (`u32`)               |
//! | 16     | 8·rows·cols | entries, row-major `f64` |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::matrix::DenseMatrix;

pub const MATRIX_MAGIC: [u8; 8] = *b"CRMATF64";
pub const HEADER_LEN: usize = 16;

pub fn write_matrix<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Format("row count exceeds u32".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::Format("column count exceeds u32".into()))?;
    w.write_all(&MATRIX_MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..8] != MATRIX_MAGIC {
        return Err(Error::Format("bad matrix magic".into()));
    }
    let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let mut bytes = vec![0u8; rows * cols * 8];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn save_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

/// Plain CSV, one matrix row per line, no header.
pub fn save_matrix_csv(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}
