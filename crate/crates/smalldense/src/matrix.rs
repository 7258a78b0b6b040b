use std::fmt::Write as _;
use std::path::Path;

use crate::{dimension_error, Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Row-major dense matrix of `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Below this many multiply-adds a parallel matmul is pure overhead.
#[cfg(feature = "parallel")]
const PAR_MATMUL_MIN_FLOPS: usize = 1 << 18;

impl DenseMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from a row-major entry vector.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dimension_error(
                "from_vec",
                format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    data.len()
                ),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(dimension_error(
                    "from_rows",
                    format!("row {i} has {} entries, expected {n_cols}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(n_rows, n_cols, data)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(dimension_error(
                "matvec",
                format!("matrix has {} cols, vector has {}", self.cols, v.len()),
            ));
        }
        let mut out = vec![0.0; self.rows];
        for (i, out_i) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            *out_i = acc;
        }
        Ok(out)
    }

    /// Matrix product `self * other`.
    ///
    /// Rows of the output are computed independently; with the `parallel`
    /// feature enabled large products are distributed over rayon. Results are
    /// identical in both modes because each output row is accumulated in the
    /// same order.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(dimension_error(
                "matmul",
                format!(
                    "{}x{} * {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        #[cfg(feature = "parallel")]
        {
            if self.rows * self.cols * other.cols >= PAR_MATMUL_MIN_FLOPS {
                out.data
                    .par_chunks_mut(other.cols)
                    .enumerate()
                    .for_each(|(i, out_row)| self.matmul_row_into(other, i, out_row));
                return Ok(out);
            }
        }
        let cols = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * cols..(i + 1) * cols];
            self.matmul_row_into(other, i, out_row);
        }
        Ok(out)
    }

    fn matmul_row_into(&self, other: &DenseMatrix, i: usize, out_row: &mut [f64]) {
        for k in 0..self.cols {
            let aik = self.get(i, k);
            if aik == 0.0 {
                continue;
            }
            let other_row = other.row(k);
            for (o, b) in out_row.iter_mut().zip(other_row) {
                *o += aik * b;
            }
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dimension_error(
                op,
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Adds `other` into `self` entrywise.
    pub fn add_assign(&mut self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dimension_error(
                "add_assign",
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// Rank-one update `self += alpha * v vᵀ` (square matrices only).
    pub fn add_scaled_outer(&mut self, v: &[f64], alpha: f64) -> Result<()> {
        if self.rows != v.len() || self.cols != v.len() {
            return Err(dimension_error(
                "add_scaled_outer",
                format!("matrix {}x{}, vector {}", self.rows, self.cols, v.len()),
            ));
        }
        for (i, &vi) in v.iter().enumerate() {
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            let s = alpha * vi;
            for (r, &vj) in row.iter_mut().zip(v) {
                *r += s * vj;
            }
        }
        Ok(())
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        let data = self.data.iter().map(|&x| alpha * x).collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale_in_place(&mut self, alpha: f64) {
        for x in &mut self.data {
            *x *= alpha;
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `(A + Aᵀ) / 2`; the matrix must be square.
    pub fn symmetrized(&self) -> DenseMatrix {
        debug_assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, m);
                out.set(j, i, m);
            }
        }
        out
    }

    /// Largest absolute difference `max |A - Aᵀ|` over off-diagonal pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|&x| x * x).sum::<f64>().sqrt()
    }

    /// `max |self - other|` entrywise.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dimension_error(
                "max_abs_diff",
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (&a, &b)| m.max((a - b).abs())))
    }

    /// Text form: first line `rows cols`, then one whitespace-separated line
    /// per row at full (17 significant digit) precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{x:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form produced by [`DenseMatrix::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            details: "empty input, expected 'rows cols' header".into(),
        })?;
        let mut parts = header.split_whitespace();
        let parse_dim = |tok: Option<&str>, what: &str| -> Result<usize> {
            tok.ok_or(Error::Parse {
                line: 1,
                details: format!("missing {what} in header"),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: 1,
                details: format!("bad {what}: {e}"),
            })
        };
        let rows = parse_dim(parts.next(), "row count")?;
        let cols = parse_dim(parts.next(), "column count")?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (idx, line) = lines.next().ok_or(Error::Parse {
                line: r + 2,
                details: format!("expected {rows} data rows, file ends after {r}"),
            })?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|e| Error::Parse {
                    line: idx + 1,
                    details: format!("bad entry '{tok}': {e}"),
                })?;
                data.push(v);
                count += 1;
            }
            if count != cols {
                return Err(Error::Parse {
                    line: idx + 1,
                    details: format!("expected {cols} entries, found {count}"),
                });
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load_text(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}
