//! Compressed sparse row matrices and an incremental row-echelon basis.
//!
//! The parity blocks of every construction are diagonal, scaled
//! permutations, or permutations plus a few correction entries, so large
//! sub-packetization levels stay cheap in CSR form.

use crate::gf::{Fe, Field};

use super::{LinalgError, Mat};

/// One sparse row: `(column, value)` pairs, columns strictly ascending,
/// values nonzero.
pub type SparseRow = Vec<(u32, Fe)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    row_ptr: Vec<u32>,
    col_idx: Vec<u32>,
    vals: Vec<Fe>,
}

/// Sorts entries by column, merges duplicates and drops zeros.
pub fn normalize_row(f: &Field, mut entries: SparseRow) -> SparseRow {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out: SparseRow = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 = f.add(last.1, v),
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| !e.1.is_zero());
    out
}

/// `a + s * b` for sorted sparse rows.
pub fn axpy(f: &Field, a: &[(u32, Fe)], s: Fe, b: &[(u32, Fe)]) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            let v = f.mul(s, b[j].1);
            if !v.is_zero() {
                out.push((b[j].0, v));
            }
            j += 1;
        } else {
            let v = f.add(a[i].1, f.mul(s, b[j].1));
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl SparseMat {
    pub fn zero(rows: usize, cols: usize) -> SparseMat {
        SparseMat { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(n: usize) -> SparseMat {
        SparseMat::diag(&vec![Fe::ONE; n])
    }

    pub fn diag(entries: &[Fe]) -> SparseMat {
        let n = entries.len();
        SparseMat::from_sorted_rows(
            n,
            entries.iter().enumerate().map(|(i, &v)| if v.is_zero() { Vec::new() } else { vec![(i as u32, v)] }),
        )
    }

    /// Builds from rows that are already sorted, duplicate-free and
    /// zero-free.
    pub fn from_sorted_rows<I>(cols: usize, rows: I) -> SparseMat
    where
        I: IntoIterator,
        I::Item: AsRef<[(u32, Fe)]>,
    {
        let mut row_ptr = vec![0u32];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for row in rows {
            for &(c, v) in row.as_ref() {
                debug_assert!((c as usize) < cols && !v.is_zero());
                col_idx.push(c);
                vals.push(v);
            }
            row_ptr.push(col_idx.len() as u32);
        }
        SparseMat { rows: row_ptr.len() - 1, cols, row_ptr, col_idx, vals }
    }

    /// Builds from arbitrary entry lists; columns are validated.
    pub fn from_rows(f: &Field, cols: usize, rows: Vec<SparseRow>) -> Result<SparseMat, LinalgError> {
        let mut normalized = Vec::with_capacity(rows.len());
        for row in rows {
            if let Some(&(c, _)) = row.iter().find(|e| e.0 as usize >= cols) {
                return Err(LinalgError::IndexOutOfRange { index: c as usize, bound: cols });
            }
            normalized.push(normalize_row(f, row));
        }
        Ok(SparseMat::from_sorted_rows(cols, normalized))
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
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn row_cols(&self, r: usize) -> &[u32] {
        &self.col_idx[self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize]
    }

    #[inline]
    pub fn row_vals(&self, r: usize) -> &[Fe] {
        &self.vals[self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize]
    }

    pub fn row(&self, r: usize) -> SparseRow {
        self.row_cols(r).iter().copied().zip(self.row_vals(r).iter().copied()).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> Fe {
        let cols = self.row_cols(r);
        match cols.binary_search(&(c as u32)) {
            Ok(k) => self.row_vals(r)[k],
            Err(_) => Fe::ZERO,
        }
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = SparseRow> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn scale(&self, f: &Field, s: Fe) -> SparseMat {
        if s.is_zero() {
            return SparseMat::zero(self.rows, self.cols);
        }
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = f.mul(*v, s);
        }
        out
    }

    pub fn mul(&self, f: &Field, other: &SparseMat) -> Result<SparseMat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { left: self.shape(), right: other.shape() });
        }
        let rows = (0..self.rows).map(|r| {
            let mut acc: SparseRow = Vec::new();
            for (&k, &a) in self.row_cols(r).iter().zip(self.row_vals(r)) {
                let k = k as usize;
                for (&c, &b) in other.row_cols(k).iter().zip(other.row_vals(k)) {
                    acc.push((c, f.mul(a, b)));
                }
            }
            normalize_row(f, acc)
        });
        Ok(SparseMat::from_sorted_rows(other.cols, rows.collect::<Vec<_>>()))
    }

    pub fn mul_vec(&self, f: &Field, v: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { left: self.shape(), right: (v.len(), 1) });
        }
        Ok((0..self.rows)
            .map(|r| f.sum(self.row_cols(r).iter().zip(self.row_vals(r)).map(|(&c, &a)| f.mul(a, v[c as usize]))))
            .collect())
    }

    fn combine(&self, f: &Field, other: &SparseMat, s: Fe) -> Result<SparseMat, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch { left: self.shape(), right: other.shape() });
        }
        let rows: Vec<SparseRow> = (0..self.rows).map(|r| axpy(f, &self.row(r), s, &other.row(r))).collect();
        Ok(SparseMat::from_sorted_rows(self.cols, rows))
    }

    pub fn add(&self, f: &Field, other: &SparseMat) -> Result<SparseMat, LinalgError> {
        self.combine(f, other, Fe::ONE)
    }

    pub fn sub(&self, f: &Field, other: &SparseMat) -> Result<SparseMat, LinalgError> {
        self.combine(f, other, f.neg(Fe::ONE))
    }

    pub fn pow(&self, f: &Field, e: u32) -> Result<SparseMat, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare(self.shape()));
        }
        let mut acc = SparseMat::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(f, self)?;
        }
        Ok(acc)
    }

    pub fn select_rows(&self, rows: &[u32]) -> SparseMat {
        SparseMat::from_sorted_rows(self.cols, rows.iter().map(|&r| self.row(r as usize)).collect::<Vec<_>>())
    }

    pub fn vstack(parts: &[&SparseMat]) -> Result<SparseMat, LinalgError> {
        let first = parts.first().ok_or(LinalgError::Empty)?;
        if let Some(bad) = parts.iter().find(|p| p.cols != first.cols) {
            return Err(LinalgError::DimensionMismatch { left: first.shape(), right: bad.shape() });
        }
        Ok(SparseMat::from_sorted_rows(first.cols, parts.iter().flat_map(|p| p.iter_rows()).collect::<Vec<_>>()))
    }

    pub fn transpose(&self) -> SparseMat {
        let mut rows: Vec<SparseRow> = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (&c, &v) in self.row_cols(r).iter().zip(self.row_vals(r)) {
                rows[c as usize].push((r as u32, v));
            }
        }
        SparseMat::from_sorted_rows(self.rows, rows)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|r| self.row_cols(r).iter().all(|&c| c as usize == r))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| self.row_cols(r) == [r as u32] && self.row_vals(r) == [Fe::ONE])
    }

    /// Coordinates of the first off-diagonal nonzero, if any.
    pub fn first_off_diagonal(&self) -> Option<(usize, usize, Fe)> {
        (0..self.rows).find_map(|r| {
            self.row_cols(r)
                .iter()
                .zip(self.row_vals(r))
                .find(|(&c, _)| c as usize != r)
                .map(|(&c, &v)| (r, c as usize, v))
        })
    }

    pub fn to_dense(&self, f: &Field) -> Mat {
        let mut m = Mat::zero(f, self.rows, self.cols);
        for r in 0..self.rows {
            for (&c, &v) in self.row_cols(r).iter().zip(self.row_vals(r)) {
                m.set(r, c as usize, v);
            }
        }
        m
    }

    pub fn from_dense(m: &Mat) -> SparseMat {
        SparseMat::from_sorted_rows(
            m.cols(),
            (0..m.rows())
                .map(|r| {
                    m.row(r)
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(c, &v)| (c as u32, v))
                        .collect::<SparseRow>()
                })
                .collect::<Vec<_>>(),
        )
    }

    /// Rank by sparse elimination.
    pub fn rank(&self, f: &Field) -> usize {
        let mut e = Echelon::new(self.cols, false);
        for r in 0..self.rows {
            e.insert(f, self.row(r));
        }
        e.rank()
    }
}

const NO_PIVOT: u32 = u32::MAX;

/// Incrementally built row-echelon basis. Each stored row has a distinct
/// leading column normalized to one. With origin tracking enabled every
/// basis row also records its expression in terms of the inserted rows.
#[derive(Debug, Clone)]
pub struct Echelon {
    cols: usize,
    /// Basis row whose lead is each column, `NO_PIVOT` if none.
    pivot_of: Vec<u32>,
    basis: Vec<SparseRow>,
    origins: Option<Vec<SparseRow>>,
    inserted: u32,
}

impl Echelon {
    pub fn new(cols: usize, track_origins: bool) -> Echelon {
        Echelon {
            cols,
            pivot_of: vec![NO_PIVOT; cols],
            basis: Vec::new(),
            origins: track_origins.then(Vec::new),
            inserted: 0,
        }
    }

    pub fn from_matrix(f: &Field, m: &SparseMat, track_origins: bool) -> Echelon {
        let mut e = Echelon::new(m.cols(), track_origins);
        for r in 0..m.rows() {
            e.insert(f, m.row(r));
        }
        e
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of rows offered through [`Echelon::insert`].
    #[inline]
    pub fn inserted(&self) -> usize {
        self.inserted as usize
    }

    /// Reduces `row` against the basis. Returns the remainder and the
    /// multiples of basis rows that were subtracted.
    pub fn reduce(&self, f: &Field, mut row: SparseRow) -> (SparseRow, Vec<(u32, Fe)>) {
        let mut used = Vec::new();
        let mut pos = 0;
        while pos < row.len() {
            let (col, val) = row[pos];
            match self.pivot_of.get(col as usize).copied().filter(|&k| k != NO_PIVOT) {
                Some(k) => {
                    row = axpy(f, &row, f.neg(val), &self.basis[k as usize]);
                    used.push((k, val));
                }
                None => pos += 1,
            }
        }
        (row, used)
    }

    /// Whether `row` lies in the span of the basis.
    pub fn contains(&self, f: &Field, row: SparseRow) -> bool {
        self.reduce(f, row).0.is_empty()
    }

    /// Adds `row`; returns whether it was independent of the basis.
    pub fn insert(&mut self, f: &Field, row: SparseRow) -> bool {
        let me = self.inserted;
        self.inserted += 1;
        let (rem, used) = self.reduce(f, row);
        let Some(&(lead, lead_val)) = rem.first() else {
            return false;
        };
        let inv = f.inv(lead_val).expect("remainder entries are nonzero");
        let normalized: SparseRow = rem.iter().map(|&(c, v)| (c, f.mul(v, inv))).collect();
        if let Some(origins) = &mut self.origins {
            let mut combo: SparseRow = vec![(me, Fe::ONE)];
            for (k, v) in used {
                combo = axpy(f, &combo, f.neg(v), &origins[k as usize]);
            }
            let combo = combo.iter().map(|&(c, v)| (c, f.mul(v, inv))).collect();
            origins.push(combo);
        }
        self.pivot_of[lead as usize] = self.basis.len() as u32;
        self.basis.push(normalized);
        true
    }

    /// Coefficients `t` over the inserted rows with `row = sum t_l * inserted_l`,
    /// or `None` if `row` is outside the span. Requires origin tracking.
    pub fn express(&self, f: &Field, row: SparseRow) -> Option<SparseRow> {
        let origins = self.origins.as_ref().expect("origin tracking enabled");
        let (rem, used) = self.reduce(f, row);
        if !rem.is_empty() {
            return None;
        }
        let mut combo: SparseRow = Vec::new();
        for (k, v) in used {
            combo = axpy(f, &combo, v, &origins[k as usize]);
        }
        Some(combo)
    }

    /// Solves `x * M = target` where `M` is the matrix of inserted rows,
    /// i.e. finds row coefficients. Thin wrapper around [`Echelon::express`].
    pub fn row_coefficients(&self, f: &Field, target: SparseRow) -> Option<SparseRow> {
        self.express(f, target)
    }
}

/// Solves the square or tall system `M x = b` by sparse elimination on the
/// augmented matrix. Returns `None` when the system is inconsistent or the
/// solution is not unique.
pub fn solve_unique(f: &Field, m: &SparseMat, b: &[Fe]) -> Result<Option<Vec<Fe>>, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch { left: m.shape(), right: (b.len(), 1) });
    }
    let n = m.cols();
    let rhs_col = n as u32;
    let mut e = Echelon::new(n + 1, false);
    for (r, &rhs) in b.iter().enumerate() {
        let mut row = m.row(r);
        if !rhs.is_zero() {
            row.push((rhs_col, rhs));
        }
        e.insert(f, row);
    }
    if e.pivot_of[rhs_col as usize] != NO_PIVOT || e.rank() < n {
        return Ok(None);
    }
    // Back substitution in descending lead order.
    let mut order: Vec<(u32, usize)> = e.basis.iter().enumerate().map(|(k, row)| (row[0].0, k)).collect();
    order.sort_unstable_by_key(|&(lead, _)| std::cmp::Reverse(lead));
    let mut x = vec![Fe::ZERO; n];
    for (lead, k) in order {
        let row = &e.basis[k];
        let mut acc = Fe::ZERO;
        for &(c, v) in &row[1..] {
            if c == rhs_col {
                acc = f.add(acc, v);
            } else {
                acc = f.sub(acc, f.mul(v, x[c as usize]));
            }
        }
        x[lead as usize] = acc;
    }
    Ok(Some(x))
}
