//! Dense row-major matrices and their on-disk format.
//!
//! A matrix file is one line of JSON header followed by `rows * dims`
//! little-endian `f32` values:
//!
//! ```text
//! {"rows":R,"dims":D,"dtype":"f32","variant_id":"..."}\n<payload>
//! ```
//!
//! Values are held as `f64` in memory; every `f32` converts exactly, so a
//! load/write cycle reproduces the stored bits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub rows: usize,
    pub dims: usize,
    pub dtype: String,
    pub variant_id: String,
}

impl MatrixHeader {
    pub fn payload_bytes(&self) -> u64 {
        (self.rows as u64) * (self.dims as u64) * 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dims: usize,
    values: Vec<f64>,
    variant_id: String,
}

impl EmbeddingMatrix {
    pub fn new(
        rows: usize,
        dims: usize,
        values: Vec<f64>,
        variant_id: impl Into<String>,
    ) -> Result<Self> {
        let variant_id = variant_id.into();
        if rows.checked_mul(dims) != Some(values.len()) {
            return Err(Error::integrity(
                variant_id,
                format!("{rows} x {dims} does not match {} values", values.len()),
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::integrity(
                variant_id,
                format!("non-finite value at row {}, column {}", pos / dims.max(1), pos % dims.max(1)),
            ));
        }
        Ok(Self {
            rows,
            dims,
            values,
            variant_id,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], variant_id: impl Into<String>) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dims) {
            return Err(Error::InvalidInput(format!(
                "row {bad} has {} values, expected {dims}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), dims, rows.concat(), variant_id)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>, variant_id: impl Into<String>) -> Result<Self> {
        let mut values = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            values.extend(m.row(i).iter().copied());
        }
        Self::new(m.nrows(), m.ncols(), values, variant_id)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn variant_id(&self) -> &str {
        &self.variant_id
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.values[i * self.dims + j]).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.dims, &self.values)
    }

    /// Rows at the given indices, in order.
    pub fn select_rows(&self, indices: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(indices.len(), self.dims, |i, j| self.values[indices[i] * self.dims + j])
    }

    pub fn header(&self) -> MatrixHeader {
        MatrixHeader {
            rows: self.rows,
            dims: self.dims,
            dtype: "f32".to_string(),
            variant_id: self.variant_id.clone(),
        }
    }
}

/// Writes `matrix` in the header + f32 payload format.
pub fn write_matrix(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let header = serde_json::to_string(&matrix.header()).expect("header serializes");
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        out.write_all(header.as_bytes())?;
        out.write_all(b"\n")?;
        for &v in &matrix.values {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Reads only the header line, checking it against the file length.
pub fn read_matrix_header(path: impl AsRef<Path>) -> Result<MatrixHeader> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let total = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let mut reader = BufReader::new(file);
    let (header, header_len) = parse_header(&mut reader, path)?;
    let expected = header_len + header.payload_bytes();
    if total != expected {
        return Err(Error::integrity(
            header.variant_id.clone(),
            format!(
                "file {} holds {} payload bytes, header promises {}",
                path.display(),
                total.saturating_sub(header_len),
                header.payload_bytes()
            ),
        ));
    }
    Ok(header)
}

fn parse_header(reader: &mut impl BufRead, path: &Path) -> Result<(MatrixHeader, u64)> {
    let mut line = Vec::new();
    reader
        .read_until(b'\n', &mut line)
        .map_err(|e| Error::io(path, e))?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "missing newline-terminated header".into(),
        });
    }
    let header: MatrixHeader =
        serde_json::from_slice(&line[..line.len() - 1]).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("bad matrix header: {e}"),
        })?;
    if header.dtype != "f32" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unsupported dtype {:?}", header.dtype),
        });
    }
    Ok((header, line.len() as u64))
}

/// Streams the payload and fails on the first non-finite value without
/// keeping the matrix in memory.
pub fn scan_payload_finite(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let (header, _) = parse_header(&mut reader, path)?;
    let mut buf = [0u8; 4];
    for pos in 0..header.rows * header.dims {
        reader.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
        if !f32::from_le_bytes(buf).is_finite() {
            return Err(Error::integrity(
                header.variant_id,
                format!(
                    "non-finite value at row {}, column {}",
                    pos / header.dims,
                    pos % header.dims
                ),
            ));
        }
    }
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let (header, _) = parse_header(&mut reader, path)?;
    let mut payload = Vec::new();
    reader
        .read_to_end(&mut payload)
        .map_err(|e| Error::io(path, e))?;
    if payload.len() as u64 != header.payload_bytes() {
        return Err(Error::integrity(
            header.variant_id.clone(),
            format!(
                "payload is {} bytes, header promises {}",
                payload.len(),
                header.payload_bytes()
            ),
        ));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    EmbeddingMatrix::new(header.rows, header.dims, values, header.variant_id)
}
