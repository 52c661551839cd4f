//! Dense row-major real matrices and their on-disk formats.
//!
//! Two formats are supported:
//!
//! * CSV: one matrix row per line, comma separated. Values are written with
//!   Rust's shortest round-trip float formatting, so parsing the output gives
//!   back the exact same bits.
//! * Binary: the 8-byte magic `SSVMAT01`, then rows and columns as
//!   little-endian `u64`, then `rows * cols` little-endian `f64` in row-major
//!   order.

use std::fmt::Write as _;
use std::io::{Read, Write};

use thiserror::Error;

pub const BINARY_MAGIC: &[u8; 8] = b"SSVMAT01";

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad binary header: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Dimension { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(MatrixError::Dimension { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..rows {
            for i in 0..cols {
                data.push(f(j, i));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.rows).map(|j| self[(j, i)]).collect()
    }

    /// Columns as separate vectors, the layout the Jacobi and QR routines work in.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|i| self.column(i)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |j, i| self[(i, j)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        (0..self.rows).map(|j| self.row(j).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |j, i| self[(perm[j], i)])
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |j, i| self[(j, perm[i])])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.rows {
            for (i, v) in self.row(j).iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, MatrixError> {
        let mut rows = 0;
        let mut cols = None;
        let mut data = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let before = data.len();
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| MatrixError::Parse { line: idx + 1, msg: format!("{field:?}: {e}") })?;
                data.push(v);
            }
            let width = data.len() - before;
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(MatrixError::Parse {
                        line: idx + 1,
                        msg: format!("expected {c} columns, found {width}"),
                    })
                }
                _ => {}
            }
            rows += 1;
        }
        Ok(Self { rows, cols: cols.unwrap_or(0), data })
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), MatrixError> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.rows as u64).to_le_bytes())?;
        w.write_all(&(self.cols as u64).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, MatrixError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(MatrixError::Header(format!("magic {magic:?}")));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let rows = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let cols = u64::from_le_bytes(word) as usize;
        let len = rows.checked_mul(cols).ok_or_else(|| MatrixError::Header(format!("dims {rows}x{cols} overflow")))?;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut word)?;
            data.push(f64::from_le_bytes(word));
        }
        Ok(Self { rows, cols, data })
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (j, i): (usize, usize)) -> &f64 {
        debug_assert!(j < self.rows && i < self.cols);
        &self.data[j * self.cols + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (j, i): (usize, usize)) -> &mut f64 {
        debug_assert!(j < self.rows && i < self.cols);
        &mut self.data[j * self.cols + i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_rejects_ragged_rows() {
        let err = Matrix::from_csv("1,2\n3\n").unwrap_err();
        assert!(matches!(err, MatrixError::Parse { line: 2, .. }));
    }

    #[test]
    fn binary_rejects_bad_magic() {
        let bytes = b"NOTAMTRX\0\0\0\0\0\0\0\0".to_vec();
        assert!(matches!(Matrix::read_binary(&bytes[..]), Err(MatrixError::Header(_))));
    }

    #[test]
    fn binary_layout() {
        let m = Matrix::from_rows(&[&[1.0, -2.5]]).unwrap();
        let mut buf = Vec::new();
        m.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], BINARY_MAGIC);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), -2.5);
        assert_eq!(buf.len(), 40);
    }

    fn any_matrix() -> impl Strategy<Value = Matrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(
                prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64],
                r * c,
            )
            .prop_map(move |d| Matrix::from_row_major(r, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn formats_round_trip_bit_exact(m in any_matrix()) {
            let back = Matrix::from_csv(&m.to_csv()).unwrap();
            let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&m));
            let mut buf = Vec::new();
            m.write_binary(&mut buf).unwrap();
            let back = Matrix::read_binary(&buf[..]).unwrap();
            prop_assert_eq!((back.rows(), back.cols()), (m.rows(), m.cols()));
            prop_assert_eq!(bits(&back), bits(&m));
        }
    }
}
