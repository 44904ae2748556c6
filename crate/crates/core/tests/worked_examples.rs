//! The two displayed (12, 10) codes over GF(13), transcribed literally.

use ssmds_core::codes::{build_c1, build_c5, Projection};
use ssmds_core::gf::{Fe, Field};
use ssmds_core::linalg::SparseMat;

/// Power of `c` on each node's diagonal and the rows carrying the extra
/// factor `delta = c^6 = -1`.
const C1_TABLE: [(i64, [usize; 4]); 12] = [
    (0, [4, 5, 6, 7]),
    (1, [2, 3, 6, 7]),
    (2, [1, 3, 5, 7]),
    (0, [0, 1, 2, 3]),
    (1, [0, 1, 4, 5]),
    (2, [0, 2, 4, 6]),
    (3, [4, 5, 6, 7]),
    (4, [2, 3, 6, 7]),
    (5, [1, 3, 5, 7]),
    (3, [0, 1, 2, 3]),
    (4, [0, 1, 4, 5]),
    (5, [0, 2, 4, 6]),
];

/// Power of `c` on each diagonal entry.
const C5_TABLE: [[i64; 8]; 12] = [
    [0, 0, 0, 0, 1, 1, 1, 1],
    [2, 2, 3, 3, 2, 2, 3, 3],
    [4, 5, 4, 5, 4, 5, 4, 5],
    [1, 1, 1, 1, 0, 0, 0, 0],
    [3, 3, 2, 2, 3, 3, 2, 2],
    [5, 4, 5, 4, 5, 4, 5, 4],
    [6, 6, 6, 6, 7, 7, 7, 7],
    [8, 8, 9, 9, 8, 8, 9, 9],
    [10, 11, 10, 11, 10, 11, 10, 11],
    [7, 7, 7, 7, 6, 6, 6, 6],
    [9, 9, 8, 8, 9, 9, 8, 8],
    [11, 10, 11, 10, 11, 10, 11, 10],
];

fn pow2(f: &Field, e: i64) -> Fe {
    f.pow(Fe(2), e).unwrap()
}

#[test]
fn c1_generators_match_display() {
    let code = build_c1(3, 2, 12, None).unwrap();
    let f = code.field().clone();
    assert_eq!(f.order(), 13);
    assert_eq!(code.assignment().generator, Fe(2));
    let delta = pow2(&f, 6);
    assert_eq!(delta, f.neg(Fe::ONE));
    for (i, (e, delta_rows)) in C1_TABLE.iter().enumerate() {
        let base = pow2(&f, *e);
        let diag: Vec<Fe> = (0..8).map(|a| if delta_rows.contains(&a) { f.mul(delta, base) } else { base }).collect();
        assert_eq!(code.generator(i), SparseMat::diag(&diag), "node {i}");
        assert!(code.block_sparse(0, i).is_identity());
    }
}

#[test]
fn c1_node0_repair_and_select() {
    let code = build_c1(3, 2, 12, None).unwrap();
    let f = code.field().clone();
    let sums: Vec<Vec<u32>> = (0..4).map(|k| (0..8).map(|a| u32::from(a == k || a == k + 4)).collect()).collect();
    let expected = ssmds_core::linalg::Mat::from_rows(&f, &sums).unwrap();
    for j in 1..12 {
        let rmat = code.repair_matrix(0, j);
        if [3, 6, 9].contains(&j) {
            assert!(matches!(rmat, Projection::Identity(8)), "helper {j}");
        } else {
            assert_eq!(rmat.to_dense(&f), expected, "helper {j}");
        }
    }
    for t in 0..2 {
        assert_eq!(code.select_matrix(0, t).to_dense(&f), expected);
    }
}

#[test]
fn c5_generators_match_display() {
    let code = build_c5(3, 2, 12, None).unwrap();
    let f = code.field().clone();
    assert_eq!(f.order(), 13);
    for (i, row) in C5_TABLE.iter().enumerate() {
        let diag: Vec<Fe> = row.iter().map(|&e| pow2(&f, e)).collect();
        assert_eq!(code.generator(i), SparseMat::diag(&diag), "node {i}");
    }
}
