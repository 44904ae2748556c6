use std::fmt;

use crate::gf::{Fe, Field};

use super::LinalgError;

/// Dense row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

/// Result of [`Mat::solve`]. Free variables are fixed to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub x: Vec<Fe>,
    pub unique: bool,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zero(field: &Field, rows: usize, cols: usize) -> Mat {
        Mat { field: field.clone(), rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut m = Mat::zero(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = Fe::ONE;
        }
        m
    }

    pub fn diag(field: &Field, entries: &[Fe]) -> Mat {
        let n = entries.len();
        let mut m = Mat::zero(field, n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn from_fn(field: &Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Fe) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { field: field.clone(), rows, cols, data }
    }

    /// Builds from integer rows, checking shape and membership in the field.
    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Mat, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch { left: (rows.len(), cols), right: (1, row.len()) });
            }
            for &v in row {
                data.push(field.elem(v)?);
            }
        }
        Ok(Mat { field: field.clone(), rows: rows.len(), cols, data })
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Fe>) -> Result<Mat, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch { left: (rows, cols), right: (1, data.len()) });
        }
        if let Some(&bad) = data.iter().find(|e| !field.contains(**e)) {
            return Err(crate::gf::GfError::FieldMismatch { value: bad.value(), q: field.order() }.into());
        }
        Ok(Mat { field: field.clone(), rows, cols, data })
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Fe] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).iter().map(|e| e.value()).collect()).collect()
    }

    fn same_field(&self, other: &Mat) -> Result<(), LinalgError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch)
        }
    }

    fn same_shape(&self, other: &Mat) -> Result<(), LinalgError> {
        self.same_field(other)?;
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch { left: self.shape(), right: other.shape() })
        }
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { left: self.shape(), right: other.shape() });
        }
        let f = &self.field;
        let mut out = Mat::zero(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { left: self.shape(), right: (v.len(), 1) });
        }
        let f = &self.field;
        Ok((0..self.rows).map(|r| f.sum(self.row(r).iter().zip(v).map(|(&a, &b)| f.mul(a, b)))).collect())
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.same_shape(other)?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Mat { field: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, LinalgError> {
        self.same_shape(other)?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Mat { field: f.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Fe) -> Mat {
        let f = &self.field;
        let data = self.data.iter().map(|&a| f.mul(a, s)).collect();
        Mat { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn pow(&self, e: u32) -> Result<Mat, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.shape()));
        }
        let mut acc = Mat::identity(&self.field, self.rows);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn vstack(parts: &[&Mat]) -> Result<Mat, LinalgError> {
        let first = parts.first().ok_or(LinalgError::Empty)?;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            p.same_field(first)?;
            if p.cols != first.cols {
                return Err(LinalgError::DimensionMismatch { left: first.shape(), right: p.shape() });
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Mat { field: first.field.clone(), rows, cols: first.cols, data })
    }

    pub fn hstack(parts: &[&Mat]) -> Result<Mat, LinalgError> {
        let first = parts.first().ok_or(LinalgError::Empty)?;
        for p in parts {
            p.same_field(first)?;
            if p.rows != first.rows {
                return Err(LinalgError::DimensionMismatch { left: first.shape(), right: p.shape() });
            }
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(first.rows * cols);
        for r in 0..first.rows {
            for p in parts {
                data.extend_from_slice(p.row(r));
            }
        }
        Ok(Mat { field: first.field.clone(), rows: first.rows, cols, data })
    }

    /// Assembles a grid of blocks. Every block in a grid row shares a row
    /// count and every block in a grid column shares a column count.
    pub fn block_assemble(grid: &[Vec<Mat>]) -> Result<Mat, LinalgError> {
        let rows: Vec<Mat> =
            grid.iter().map(|row| Mat::hstack(&row.iter().collect::<Vec<_>>())).collect::<Result<_, _>>()?;
        Mat::vstack(&rows.iter().collect::<Vec<_>>())
    }

    /// Submatrix of the given columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        Mat::from_fn(&self.field, self.rows, cols.len(), |r, c| self.get(r, cols[c]))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        Mat::from_fn(&self.field, rows.len(), self.cols, |r, c| self.get(rows[r], c))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self.get(r, c).is_zero()))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == if r == c { Fe::ONE } else { Fe::ZERO }))
    }

    /// In-place reduction to reduced row echelon form over the first
    /// `limit` columns. Returns pivot columns in row order.
    fn rref(&mut self, limit: usize) -> Vec<usize> {
        let f = self.field.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut prow = 0;
        for c in 0..limit {
            if prow == self.rows {
                break;
            }
            let Some(src) = (prow..self.rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            self.swap_rows(src, prow);
            let inv = f.inv(self.get(prow, c)).expect("pivot is nonzero");
            for k in c..cols {
                let v = self.get(prow, k);
                self.set(prow, k, f.mul(v, inv));
            }
            for r in 0..self.rows {
                if r == prow {
                    continue;
                }
                let factor = self.get(r, c);
                if !factor.is_zero() {
                    self.axpy_row(r, prow, f.neg(factor), c);
                }
            }
            pivots.push(c);
            prow += 1;
        }
        pivots
    }

    /// `row[dst] += factor * row[src]` over columns `from..`.
    fn axpy_row(&mut self, dst: usize, src: usize, factor: Fe, from: usize) {
        let f = &self.field;
        let cols = self.cols;
        for k in from..cols {
            let s = self.data[src * cols + k];
            if !s.is_zero() {
                let d = self.data[dst * cols + k];
                self.data[dst * cols + k] = f.add(d, f.mul(factor, s));
            }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.cols {
                self.data.swap(a * self.cols + k, b * self.cols + k);
            }
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let limit = m.cols;
        m.rref(limit).len()
    }

    pub fn det(&self) -> Result<Fe, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.shape()));
        }
        let f = self.field.clone();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Fe::ONE;
        for c in 0..n {
            let Some(src) = (c..n).find(|&r| !m.get(r, c).is_zero()) else {
                return Ok(Fe::ZERO);
            };
            if src != c {
                m.swap_rows(src, c);
                det = f.neg(det);
            }
            let p = m.get(c, c);
            det = f.mul(det, p);
            let inv = f.inv(p).expect("pivot is nonzero");
            for r in c + 1..n {
                let factor = m.get(r, c);
                if !factor.is_zero() {
                    m.axpy_row(r, c, f.neg(f.mul(factor, inv)), c);
                }
            }
        }
        Ok(det)
    }

    pub fn invert(&self) -> Result<Mat, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.shape()));
        }
        let n = self.rows;
        let mut aug = Mat::hstack(&[self, &Mat::identity(&self.field, n)])?;
        let pivots = aug.rref(n);
        if pivots.len() < n {
            return Err(LinalgError::Singular);
        }
        Ok(Mat::from_fn(&self.field, n, n, |r, c| aug.get(r, n + c)))
    }

    /// Solves `self * x = b`. Errors when the system is inconsistent.
    pub fn solve(&self, b: &[Fe]) -> Result<Solution, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch { left: self.shape(), right: (b.len(), 1) });
        }
        let col = Mat::from_vec(&self.field, b.len(), 1, b.to_vec())?;
        let mut aug = Mat::hstack(&[self, &col])?;
        let pivots = aug.rref(self.cols);
        let n = self.cols;
        if (pivots.len()..self.rows).any(|r| !aug.get(r, n).is_zero()) {
            return Err(LinalgError::Inconsistent);
        }
        let mut x = vec![Fe::ZERO; n];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, n);
        }
        Ok(Solution { x, unique: pivots.len() == n })
    }

    /// Basis of the right null space `{x : self * x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Fe>> {
        let f = &self.field;
        let mut m = self.clone();
        let pivots = m.rref(self.cols);
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Fe::ZERO; self.cols];
                v[free] = Fe::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(m.get(r, free));
                }
                v
            })
            .collect()
    }

    /// Serializes as u32 LE rows, u32 LE cols, then row-major u16 LE entries.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 2 * self.data.len());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for e in &self.data {
            out.extend_from_slice(&e.0.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(field: &Field, bytes: &[u8]) -> Result<Mat, LinalgError> {
        if bytes.len() < 8 {
            return Err(LinalgError::Truncated);
        }
        let rows = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() != 2 * rows * cols {
            return Err(LinalgError::Truncated);
        }
        let data = body.chunks_exact(2).map(|c| Fe(u16::from_le_bytes([c[0], c[1]]))).collect();
        Mat::from_vec(field, rows, cols, data)
    }
}
