use proptest::prelude::*;
use ssmds_core::gf::{Fe, Field};
use ssmds_core::linalg::{Echelon, Mat, SparseMat};
use ssmds_core::partitions::{digit_at, digit_sum, digits, replace_digit, v_subset, Axis};

const ORDERS: [u64; 8] = [2, 3, 4, 7, 8, 9, 13, 16];

fn field(which: usize) -> Field {
    Field::new(ORDERS[which % ORDERS.len()]).unwrap()
}

fn elem(f: &Field, raw: u16) -> Fe {
    Fe(raw % f.order() as u16)
}

fn matrix(f: &Field, n: usize, raw: &[u16]) -> Mat {
    Mat::from_fn(f, n, n, |r, c| elem(f, raw[(r * n + c) % raw.len()]))
}

/// Leibniz expansion, independent of elimination.
fn leibniz(f: &Field, m: &Mat) -> Fe {
    let n = m.rows();
    let mut total = Fe::ZERO;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(f, m, &mut perm, 0, &mut total);
    total
}

fn permute(f: &Field, m: &Mat, perm: &mut Vec<usize>, at: usize, total: &mut Fe) {
    let n = perm.len();
    if at == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                inversions += usize::from(perm[i] > perm[j]);
            }
        }
        let mut term = if inversions % 2 == 0 { Fe::ONE } else { f.neg(Fe::ONE) };
        for (r, &c) in perm.iter().enumerate() {
            term = f.mul(term, m.get(r, c));
        }
        *total = f.add(*total, term);
        return;
    }
    for i in at..n {
        perm.swap(at, i);
        permute(f, m, perm, at + 1, total);
        perm.swap(at, i);
    }
}

#[test]
fn prime_fields_match_integer_arithmetic() {
    for q in [2u32, 3, 5, 7, 13] {
        let f = Field::new(q as u64).unwrap();
        for a in 0..q {
            for b in 0..q {
                assert_eq!(f.add(Fe(a as u16), Fe(b as u16)).value(), (a + b) % q);
                assert_eq!(f.mul(Fe(a as u16), Fe(b as u16)).value(), (a * b) % q);
            }
        }
    }
}

#[test]
fn extension_fields_have_cyclic_groups() {
    for q in [4u64, 8, 9, 16, 25, 27] {
        let f = Field::new(q).unwrap();
        let g = f.primitive();
        assert_eq!(f.multiplicative_order(g).unwrap() as u64, q - 1);
        let p = f.characteristic();
        assert!(f.elements().all(|a| f.sum(std::iter::repeat_n(a, p as usize)) == Fe::ZERO));
    }
    assert!(Field::new(6).is_err());
    assert!(Field::new(1).is_err());
}

proptest! {
    #[test]
    fn field_axioms(which in 0..8usize, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
        let f = field(which);
        let (a, b, c) = (elem(&f, a), elem(&f, b), elem(&f, c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
            prop_assert_eq!(f.pow(a, -1).unwrap(), f.inv(a).unwrap());
            prop_assert_eq!(f.exp(f.log(a).unwrap() as i64), a);
        }
    }

    #[test]
    fn determinant_matches_leibniz(which in 0..8usize, n in 1..5usize, raw in prop::collection::vec(any::<u16>(), 1..25)) {
        let f = field(which);
        let m = matrix(&f, n, &raw);
        let det = m.det().unwrap();
        prop_assert_eq!(det, leibniz(&f, &m));
        prop_assert_eq!(m.rank() == n, !det.is_zero());
        match m.invert() {
            Ok(inv) => {
                prop_assert_eq!(m.mul(&inv).unwrap(), Mat::identity(&f, n));
                prop_assert_eq!(inv.mul(&m).unwrap(), Mat::identity(&f, n));
            }
            Err(_) => prop_assert!(det.is_zero()),
        }
    }

    #[test]
    fn solve_and_kernel_are_consistent(which in 0..8usize, n in 1..6usize, raw in prop::collection::vec(any::<u16>(), 1..36), x in prop::collection::vec(any::<u16>(), 6)) {
        let f = field(which);
        let m = matrix(&f, n, &raw);
        let x: Vec<Fe> = x[..n].iter().map(|&v| elem(&f, v)).collect();
        let b = m.mul_vec(&x).unwrap();
        let sol = m.solve(&b).unwrap();
        prop_assert_eq!(m.mul_vec(&sol.x).unwrap(), b);
        prop_assert_eq!(sol.unique, m.rank() == n);
        let kernel = m.kernel();
        prop_assert_eq!(kernel.len(), n - m.rank());
        for v in kernel {
            prop_assert!(m.mul_vec(&v).unwrap().iter().all(|e| e.is_zero()));
        }
    }

    #[test]
    fn sparse_agrees_with_dense(which in 0..8usize, n in 1..7usize, a in prop::collection::vec(0u16..6, 1..49), b in prop::collection::vec(0u16..6, 1..49)) {
        let f = field(which);
        // small raw values keep the matrices sparse-ish
        let (da, db) = (matrix(&f, n, &a), matrix(&f, n, &b));
        let (sa, sb) = (SparseMat::from_dense(&da), SparseMat::from_dense(&db));
        prop_assert_eq!(sa.mul(&f, &sb).unwrap().to_dense(&f), da.mul(&db).unwrap());
        prop_assert_eq!(sa.add(&f, &sb).unwrap().to_dense(&f), da.add(&db).unwrap());
        prop_assert_eq!(sa.transpose().to_dense(&f), da.transpose());
        prop_assert_eq!(sa.rank(&f), da.rank());
        let ech = Echelon::from_matrix(&f, &sa, false);
        prop_assert_eq!(ech.rank(), da.rank());
        for r in 0..n {
            let stacked = Mat::vstack(&[&da, &Mat::from_fn(&f, 1, n, |_, c| db.get(r, c))]).unwrap();
            prop_assert_eq!(ech.contains(&f, sb.row(r)), stacked.rank() == da.rank());
        }
    }

    #[test]
    fn digit_maps_round_trip(r in 2u32..5, m in 1u32..5, seed in any::<u32>(), i in 0u32..5, u in 0u32..5) {
        let n = r.pow(m);
        let a = seed % n;
        let (i, u) = (i % m, u % r);
        let d = digits(a, r, m).unwrap();
        prop_assert_eq!(d.value, a);
        let b = replace_digit(a, i, u, r, m);
        prop_assert_eq!(digit_at(b, i, r, m), u);
        for j in (0..m).filter(|&j| j != i) {
            prop_assert_eq!(digit_at(b, j, r, m), digit_at(a, j, r, m));
        }
        let expected: u32 = (0..m).map(|j| digit_at(a, j, r, m)).sum();
        prop_assert_eq!(digit_sum(a, r, m), expected);
    }
}

#[test]
fn partitions_are_balanced_and_disjoint() {
    for (r, m) in [(2u32, 3u32), (3, 2), (4, 2)] {
        let n = r.pow(m);
        for axis in (0..m as usize).map(Axis::Index).chain([Axis::Star]) {
            let mut seen = vec![0u32; n as usize];
            for t in 0..r {
                let part = v_subset(axis, t, r, m).unwrap();
                assert_eq!(part.len() as u32, n / r);
                for &a in part.members() {
                    seen[a as usize] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }
    // axis indices wrap with period m
    assert_eq!(v_subset(Axis::Index(4), 1, 2, 3).unwrap(), v_subset(Axis::Index(1), 1, 2, 3).unwrap());
}
