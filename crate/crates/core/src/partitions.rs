//! r-ary index machinery: digit expansions, the partitions `V_{i,t}` and
//! `V_{*,t}`, pairwise intersections, digit substitution and selection
//! matrices.
//!
//! Indices `a` in `[0, r^m)` expand as `a = sum_j r^(m-1-j) a_j`, so digit 0
//! is the most significant one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Fe, Field};
use crate::linalg::{Mat, SparseMat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("{what} = {value} out of range (bound {bound})")]
    OutOfRange { what: &'static str, value: u64, bound: u64 },
    #[error("axes {0} and {1} coincide modulo m")]
    SameAxis(usize, usize),
    #[error("r must be at least 2 and r^m must fit in 32 bits")]
    BadRadix,
}

fn check(what: &'static str, value: u64, bound: u64) -> Result<(), PartitionError> {
    if value < bound {
        Ok(())
    } else {
        Err(PartitionError::OutOfRange { what, value, bound })
    }
}

/// `r^m`, or an error if it does not fit in 32 bits.
pub fn radix_size(r: u32, m: u32) -> Result<u32, PartitionError> {
    if r < 2 {
        return Err(PartitionError::BadRadix);
    }
    (r as u64).checked_pow(m).filter(|&n| n <= u32::MAX as u64).map(|n| n as u32).ok_or(PartitionError::BadRadix)
}

/// An index together with its r-ary expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitIndex {
    pub value: u32,
    pub r: u32,
    pub digits: Vec<u32>,
}

impl DigitIndex {
    pub fn m(&self) -> u32 {
        self.digits.len() as u32
    }

    pub fn from_digits(r: u32, digits: &[u32]) -> Result<DigitIndex, PartitionError> {
        let mut value: u64 = 0;
        for &d in digits {
            check("digit", d as u64, r as u64)?;
            value = value * r as u64 + d as u64;
        }
        check("index", value, u32::MAX as u64 + 1)?;
        Ok(DigitIndex { value: value as u32, r, digits: digits.to_vec() })
    }
}

pub fn digits(a: u32, r: u32, m: u32) -> Result<DigitIndex, PartitionError> {
    let size = radix_size(r, m)?;
    check("index", a as u64, size as u64)?;
    let mut ds = vec![0u32; m as usize];
    let mut rest = a;
    for slot in ds.iter_mut().rev() {
        *slot = rest % r;
        rest /= r;
    }
    Ok(DigitIndex { value: a, r, digits: ds })
}

/// Digit `i` of `a` without allocating. `i` must be below `m`.
#[inline]
pub fn digit_at(a: u32, i: u32, r: u32, m: u32) -> u32 {
    (a / r.pow(m - 1 - i)) % r
}

/// `a` with digit `i` replaced by `u`. `i < m` and `u < r` are assumed.
#[inline]
pub fn replace_digit(a: u32, i: u32, u: u32, r: u32, m: u32) -> u32 {
    let w = r.pow(m - 1 - i);
    let cur = (a / w) % r;
    a - cur * w + u * w
}

/// Sum of all digits of `a`.
#[inline]
pub fn digit_sum(a: u32, r: u32, m: u32) -> u32 {
    let mut s = 0;
    let mut rest = a;
    for _ in 0..m {
        s += rest % r;
        rest /= r;
    }
    s
}

/// `a(i, u)`: replaces digit `i` by `u mod r`.
pub fn digit_sub(a: &DigitIndex, i: u32, u: u32) -> Result<u32, PartitionError> {
    check("position", i as u64, a.m() as u64)?;
    Ok(replace_digit(a.value, i, u % a.r, a.r, a.m()))
}

/// `a(i, j, u, v)` for `i < j`.
pub fn digit_sub2(a: &DigitIndex, i: u32, j: u32, u: u32, v: u32) -> Result<u32, PartitionError> {
    check("position", j as u64, a.m() as u64)?;
    if i >= j {
        return Err(PartitionError::OutOfRange { what: "first position", value: i as u64, bound: j as u64 });
    }
    let once = replace_digit(a.value, i, u % a.r, a.r, a.m());
    Ok(replace_digit(once, j, v % a.r, a.r, a.m()))
}

/// Which digit a partition is keyed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Digit `i mod m`.
    Index(usize),
    /// Digit sum modulo r.
    Star,
}

/// Ascending list of basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    members: Vec<u32>,
}

impl Subset {
    pub fn new(mut members: Vec<u32>) -> Subset {
        members.sort_unstable();
        members.dedup();
        Subset { members }
    }

    pub fn full(n: u32) -> Subset {
        Subset { members: (0..n).collect() }
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: u32) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    pub fn intersect(&self, other: &Subset) -> Subset {
        Subset { members: self.members.iter().copied().filter(|&a| other.contains(a)).collect() }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        Subset::new(self.members.iter().chain(&other.members).copied().collect())
    }
}

/// Membership test for `V_{axis,t}` without materializing the subset.
#[inline]
pub fn in_part(a: u32, axis: Axis, t: u32, r: u32, m: u32) -> bool {
    match axis {
        Axis::Index(i) => digit_at(a, (i % m as usize) as u32, r, m) == t,
        Axis::Star => digit_sum(a, r, m) % r == t,
    }
}

/// `V_{i,t}` (periodic in `i` with period `m`) or `V_{*,t}`.
pub fn v_subset(axis: Axis, t: u32, r: u32, m: u32) -> Result<Subset, PartitionError> {
    let n = radix_size(r, m)?;
    check("t", t as u64, r as u64)?;
    if m == 0 {
        return Err(PartitionError::OutOfRange { what: "m", value: 0, bound: 1 });
    }
    Ok(Subset { members: (0..n).filter(|&a| in_part(a, axis, t, r, m)).collect() })
}

/// `V_{i1,i2,t1,t2} = V_{i1,t1} ∩ V_{i2,t2}`.
pub fn v_intersect(i1: usize, i2: usize, t1: u32, t2: u32, r: u32, m: u32) -> Result<Subset, PartitionError> {
    if m == 0 || i1 % m as usize == i2 % m as usize {
        return Err(PartitionError::SameAxis(i1, i2));
    }
    let a = v_subset(Axis::Index(i1), t1, r, m)?;
    let b = v_subset(Axis::Index(i2), t2, r, m)?;
    Ok(a.intersect(&b))
}

fn check_members(s: &Subset, n: usize) -> Result<(), PartitionError> {
    match s.members.last() {
        Some(&last) => check("member", last as u64, n as u64),
        None => Ok(()),
    }
}

/// `|s| x n` matrix whose row `j` is `e_{s[j]}`.
pub fn selection_matrix(s: &Subset, n: usize, f: &Field) -> Result<Mat, PartitionError> {
    check_members(s, n)?;
    let mut m = Mat::zero(f, s.len(), n);
    for (row, &a) in s.members.iter().enumerate() {
        m.set(row, a as usize, Fe::ONE);
    }
    Ok(m)
}

pub fn selection_sparse(s: &Subset, n: usize) -> Result<SparseMat, PartitionError> {
    check_members(s, n)?;
    Ok(SparseMat::from_sorted_rows(n, s.members.iter().map(|&a| [(a, Fe::ONE)])))
}

/// Sum of selection matrices of equal-size subsets: row `k` is
/// `sum_p e_{parts[p][k]}`.
pub fn selection_sum_sparse(parts: &[Subset], n: usize) -> Result<SparseMat, PartitionError> {
    let len = parts.first().map_or(0, Subset::len);
    for p in parts {
        check_members(p, n)?;
        if p.len() != len {
            return Err(PartitionError::OutOfRange { what: "part size", value: p.len() as u64, bound: len as u64 + 1 });
        }
    }
    let rows: Vec<Vec<(u32, Fe)>> = (0..len)
        .map(|k| {
            let mut row: Vec<(u32, Fe)> = parts.iter().map(|p| (p.members[k], Fe::ONE)).collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    Ok(SparseMat::from_sorted_rows(n, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_examples() {
        assert_eq!(digits(5, 2, 3).unwrap().digits, vec![1, 0, 1]);
        assert_eq!(digits(0, 2, 4).unwrap().digits, vec![0; 4]);
        assert_eq!(digits(8, 3, 2).unwrap().digits, vec![2, 2]);
        assert!(matches!(digits(8, 2, 3), Err(PartitionError::OutOfRange { .. })));
        assert_eq!(DigitIndex::from_digits(3, &[2, 2]).unwrap().value, 8);
    }

    #[test]
    fn subset_examples() {
        assert_eq!(v_subset(Axis::Index(1), 0, 2, 3).unwrap().members(), &[0, 1, 4, 5]);
        assert_eq!(v_subset(Axis::Star, 0, 2, 3).unwrap().members(), &[0, 3, 5, 6]);
        assert_eq!(v_subset(Axis::Index(0), 1, 3, 2).unwrap().members(), &[3, 4, 5]);
        assert!(v_subset(Axis::Index(0), 2, 2, 3).is_err());
    }

    #[test]
    fn intersections() {
        assert_eq!(v_intersect(0, 1, 0, 0, 2, 3).unwrap().members(), &[0, 1]);
        assert_eq!(v_intersect(1, 0, 0, 0, 2, 3).unwrap(), v_intersect(0, 1, 0, 0, 2, 3).unwrap());
        let u = v_intersect(0, 1, 0, 0, 2, 3).unwrap().union(&v_intersect(0, 1, 0, 1, 2, 3).unwrap());
        assert_eq!(u, v_subset(Axis::Index(0), 0, 2, 3).unwrap());
        assert_eq!(v_intersect(0, 3, 0, 0, 2, 3).unwrap_err(), PartitionError::SameAxis(0, 3));
    }

    #[test]
    fn selection_examples() {
        let f = Field::new(13).unwrap();
        let s = selection_matrix(&v_subset(Axis::Index(1), 0, 2, 3).unwrap(), 8, &f).unwrap();
        assert_eq!(s.shape(), (4, 8));
        for (row, col) in [0, 1, 4, 5].into_iter().enumerate() {
            assert_eq!(s.get(row, col), Fe::ONE);
        }
        assert_eq!(s.entries().iter().filter(|e| !e.is_zero()).count(), 4);
        assert!(selection_matrix(&Subset::full(8), 8, &f).unwrap().is_identity());
        assert_eq!(selection_matrix(&Subset::new(vec![]), 8, &f).unwrap().shape(), (0, 8));
        assert!(selection_matrix(&Subset::new(vec![8]), 8, &f).is_err());
        let sparse = selection_sparse(&v_subset(Axis::Index(1), 0, 2, 3).unwrap(), 8).unwrap();
        assert_eq!(sparse.to_dense(&f), s);
    }

    #[test]
    fn substitution_examples() {
        let zero = digits(0, 2, 3).unwrap();
        assert_eq!(digit_sub(&zero, 0, 1).unwrap(), 4);
        let five = digits(5, 2, 3).unwrap();
        assert_eq!(digit_sub(&five, 2, (five.digits[2] + 1) % 2).unwrap(), 4);
        assert_eq!(digit_sub2(&zero, 0, 1, 1, 1).unwrap(), 6);
        assert!(digit_sub2(&zero, 1, 1, 0, 0).is_err());
        assert!(digit_sub(&zero, 3, 0).is_err());
    }

    #[test]
    fn sum_selection_rows() {
        let f = Field::new(13).unwrap();
        let parts: Vec<Subset> = (0..2).map(|t| v_subset(Axis::Index(0), t, 2, 3).unwrap()).collect();
        let m = selection_sum_sparse(&parts, 8).unwrap().to_dense(&f);
        assert_eq!(m.shape(), (4, 8));
        assert_eq!(m.row(0).iter().map(|e| e.value()).collect::<Vec<_>>(), vec![1, 0, 0, 0, 1, 0, 0, 0]);
    }
}
