//! The four base codes: the diagonal code, the two permutation codes and
//! the long code.

use std::collections::HashSet;
use std::sync::Arc;

use crate::gf::{Fe, Field};
use crate::linalg::{SparseMat, SparseRow};
use crate::partitions::{digit_at, digit_sum, replace_digit, v_subset, Axis, Subset};

use super::families::FieldRule;
use super::spec::CodeSpec;
use super::{Assignment, Block, CodeError, ConstructedCode, Family, Projection, RepairRule};

fn check_table(name: &str, table: &[Vec<Fe>], rows: usize, cols: usize) -> Result<(), CodeError> {
    if table.len() != rows || table.iter().any(|row| row.len() != cols) {
        return Err(CodeError::BadLambdas(format!("{name} table must be {rows} x {cols}")));
    }
    Ok(())
}

fn spec_for(family: Family, n: usize, r: usize, n_prime: usize, f: &Field) -> Result<CodeSpec, CodeError> {
    CodeSpec::new_internal(family, n, r, n_prime, f.order(), None)
}

fn parts(axis: Axis, r: usize, m: usize) -> Result<Vec<Subset>, CodeError> {
    (0..r as u32).map(|t| Ok(v_subset(axis, t, r as u32, m as u32)?)).collect()
}

fn select(axis: Axis, t: usize, r: usize, m: usize, n: usize) -> Result<Projection, CodeError> {
    Ok(Projection::Select { subset: Arc::new(v_subset(axis, t as u32, r as u32, m as u32)?), n })
}

fn select_sum(axis: Axis, r: usize, m: usize, n: usize) -> Result<Projection, CodeError> {
    Ok(Projection::SelectSum { parts: Arc::new(parts(axis, r, m)?), n })
}

/// Diagonal-code repair: `R' = S' = sum_t V_{i,t}` on axis `i mod m`.
pub(crate) fn sum_all_rule(n_prime: usize, r: usize, m: usize) -> Result<RepairRule, CodeError> {
    let big_n = r.pow(m as u32);
    let mut base_repair = Vec::with_capacity(n_prime);
    let mut base_select = Vec::with_capacity(n_prime);
    for i in 0..n_prime {
        let p = select_sum(Axis::Index(i), r, m, big_n)?;
        base_select.push(vec![p.clone(); r]);
        base_repair.push(p);
    }
    Ok(RepairRule { n_prime, sub_packetization: big_n, base_repair, base_select })
}

/// Diagonal block `diag(lambda_{i, a_{i mod m}}^t)`.
pub(crate) fn eigen_diagonal(f: &Field, lambdas: &[Fe], axis: usize, t: usize, r: usize, m: usize) -> SparseMat {
    let big_n = r.pow(m as u32) as u32;
    let powers: Vec<Fe> = lambdas.iter().map(|&l| f.pow(l, t as i64).unwrap_or(Fe::ZERO)).collect();
    let entries: Vec<Fe> =
        (0..big_n).map(|a| powers[digit_at(a, (axis % m) as u32, r as u32, m as u32) as usize]).collect();
    SparseMat::diag(&entries)
}

/// Diagonal base code over `f` with an `n' x r` eigenvalue table; no
/// validation beyond shapes.
pub(crate) fn diagonal_base(
    n_prime: usize,
    r: usize,
    f: &Field,
    lambdas: &[Vec<Fe>],
) -> Result<ConstructedCode, CodeError> {
    check_table("lambda", lambdas, n_prime, r)?;
    let spec = spec_for(Family::Yb1, n_prime, r, n_prime, f)?;
    let m = spec.m;
    let mut blocks = Vec::with_capacity(r * n_prime);
    for t in 0..r {
        for (i, row) in lambdas.iter().enumerate() {
            blocks.push(Block::new(eigen_diagonal(f, row, i, t, r, m)));
        }
    }
    let asg = Assignment {
        generator: f.primitive(),
        lambdas: lambdas.to_vec(),
        xs: Assignment::ones(r, n_prime),
        ys: Vec::new(),
        zs: Vec::new(),
        xis: Vec::new(),
        search: None,
    };
    Ok(ConstructedCode::from_parts(spec, f.clone(), asg, blocks, sum_all_rule(n_prime, r, m)?))
}

fn check_distinct_nonzero(values: impl IntoIterator<Item = Fe>, what: &str) -> Result<(), CodeError> {
    let mut seen = HashSet::new();
    for v in values {
        if v.is_zero() {
            return Err(CodeError::BadLambdas(format!("{what}: zero value")));
        }
        if !seen.insert(v) {
            return Err(CodeError::BadLambdas(format!("{what}: repeated value {v}")));
        }
    }
    Ok(())
}

/// Diagonal base code with eigenvalue table `lambdas[i][t]`, which must
/// hold `r n'` distinct nonzero elements.
pub fn build_yb1(n_prime: usize, r: usize, f: &Field, lambdas: &[Vec<Fe>]) -> Result<ConstructedCode, CodeError> {
    check_table("lambda", lambdas, n_prime, r)?;
    check_distinct_nonzero(lambdas.iter().flatten().copied(), "lambda")?;
    diagonal_base(n_prime, r, f, lambdas)
}

/// Default eigenvalues `c^(i r + t)`.
pub(crate) fn default_diagonal_lambdas(f: &Field, c: Fe, n_prime: usize, r: usize) -> Vec<Vec<Fe>> {
    (0..n_prime).map(|i| (0..r).map(|t| f.pow(c, (i * r + t) as i64).unwrap()).collect()).collect()
}

pub(crate) fn build_yb1_default(n_prime: usize, r: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let rule = FieldRule::above((r * n_prime) as u64);
    let f = rule.pick(field)?;
    let lambdas = default_diagonal_lambdas(&f, f.primitive(), n_prime, r);
    build_yb1(n_prime, r, &f, &lambdas)
}

/// Whether row `a` of node `i` carries the distinguished coefficient.
#[inline]
fn distinguished(a: u32, i: usize, r: usize, m: usize, improved: bool) -> bool {
    if improved {
        // prefix digit sum a_0 + ... + a_i vanishes modulo r
        let below = r.pow((m - 1 - i) as u32) as u32;
        digit_sum(a / below, r as u32, (i + 1) as u32).is_multiple_of(r as u32)
    } else {
        digit_at(a, i as u32, r as u32, m as u32) == 0
    }
}

/// Generator of a permutation-base node: row `a` has its coefficient at
/// column `a(i, a_i + 1)`. The last node is the identity.
pub(crate) fn permutation_generator(lambda: &[Fe], i: usize, r: usize, m: usize, improved: bool) -> SparseMat {
    let big_n = r.pow(m as u32) as u32;
    let rows: Vec<[(u32, Fe); 1]> = (0..big_n)
        .map(|a| {
            let d = digit_at(a, i as u32, r as u32, m as u32);
            let col = replace_digit(a, i as u32, (d + 1) % r as u32, r as u32, m as u32);
            let v = if distinguished(a, i, r, m, improved) { lambda[0] } else { lambda[1] };
            [(col, v)]
        })
        .collect();
    SparseMat::from_sorted_rows(
        big_n as usize,
        rows.iter().map(|row| if row[0].1.is_zero() { &row[..0] } else { &row[..] }),
    )
}

/// Permutation-code repair: `V_{i,0}` on ordinary nodes; on the last node
/// `V_{*,0}` for repair and `V_{*,(r - t) mod r}` for selection.
pub(crate) fn permutation_rule(n_prime: usize, r: usize) -> Result<RepairRule, CodeError> {
    let m = n_prime - 1;
    let big_n = r.pow(m as u32);
    let mut base_repair = Vec::with_capacity(n_prime);
    let mut base_select = Vec::with_capacity(n_prime);
    for i in 0..m {
        let p = select(Axis::Index(i), 0, r, m, big_n)?;
        base_select.push(vec![p.clone(); r]);
        base_repair.push(p);
    }
    base_repair.push(select(Axis::Star, 0, r, m, big_n)?);
    base_select.push((0..r).map(|t| select(Axis::Star, (r - t) % r, r, m, big_n)).collect::<Result<_, _>>()?);
    Ok(RepairRule { n_prime, sub_packetization: big_n, base_repair, base_select })
}

pub(crate) fn permutation_base(
    n_prime: usize,
    r: usize,
    f: &Field,
    lambdas: &[Vec<Fe>],
    improved: bool,
    generator: Fe,
) -> Result<ConstructedCode, CodeError> {
    let family = if improved { Family::Iyb2 } else { Family::Yb2 };
    let spec = spec_for(family, n_prime, r, n_prime, f)?;
    let m = spec.m;
    check_table("lambda", lambdas, m, 2)?;
    let big_n = spec.sub_packetization;
    let mut powers: Vec<Vec<SparseMat>> = Vec::with_capacity(n_prime);
    for i in 0..n_prime {
        let g = match lambdas.get(i) {
            Some(row) => permutation_generator(row, i, r, m, improved),
            None => SparseMat::identity(big_n),
        };
        let mut row = vec![SparseMat::identity(big_n)];
        for t in 1..r {
            let next = row[t - 1].mul(f, &g)?;
            row.push(next);
        }
        powers.push(row);
    }
    let mut blocks = Vec::with_capacity(r * n_prime);
    for t in 0..r {
        for p in &powers {
            blocks.push(Block::new(p[t].clone()));
        }
    }
    let asg = Assignment {
        generator,
        lambdas: lambdas.to_vec(),
        xs: Assignment::ones(r, n_prime),
        ys: Vec::new(),
        zs: Vec::new(),
        xis: Vec::new(),
        search: None,
    };
    Ok(ConstructedCode::from_parts(spec, f.clone(), asg, blocks, permutation_rule(n_prime, r)?))
}

/// Coefficients `[distinguished, other]` per node for the permutation bases.
pub(crate) fn permutation_lambdas(f: &Field, c: Fe, n_prime: usize, improved: bool) -> Vec<Vec<Fe>> {
    (0..n_prime - 1)
        .map(|i| {
            let special = if improved { c } else { f.pow(c, (i + 1) as i64).unwrap() };
            vec![special, Fe::ONE]
        })
        .collect()
}

/// Permutation base code: node `i < n'-1` has coefficient `c^(i+1)` on
/// rows with `a_i = 0` and one elsewhere. Needs `q > n'`.
pub fn build_yb2(n_prime: usize, r: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let f = FieldRule::above(n_prime as u64).pick(field)?;
    let c = f.primitive();
    permutation_base(n_prime, r, &f, &permutation_lambdas(&f, c, n_prime, false), false, c)
}

/// Improved permutation base code: coefficient `c` on rows whose prefix
/// digit sum `a_0 + ... + a_i` is zero modulo `r`. Needs `(q-1) ∤ (r-1)`.
pub fn build_iyb2(n_prime: usize, r: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let f = FieldRule::above(2).order_not_dividing(r as u64 - 1).pick(field)?;
    let c = f.primitive();
    permutation_base(n_prime, r, &f, &permutation_lambdas(&f, c, n_prime, true), true, c)
}

/// Long-code block `B'_{t,i'}`: diagonal `lambda_{i',a_axis}^t`, except
/// that rows in the anchored part `v = floor(i'/m)` (only for `i' < rm`)
/// also carry `lambda_v^t - lambda_u^t` at column `a(axis, u)`.
pub(crate) fn long_block(f: &Field, lambda: &[Fe], i_prime: usize, t: usize, r: usize, m: usize) -> SparseMat {
    let big_n = r.pow(m as u32) as u32;
    let axis = (i_prime % m) as u32;
    let anchored = (i_prime < r * m).then_some((i_prime / m) as u32);
    let pw: Vec<Fe> = lambda.iter().map(|&l| f.pow(l, t as i64).unwrap_or(Fe::ZERO)).collect();
    let rows: Vec<SparseRow> = (0..big_n)
        .map(|a| {
            let d = digit_at(a, axis, r as u32, m as u32);
            let mut row: SparseRow = vec![(a, pw[d as usize])];
            if anchored == Some(d) {
                for u in (0..r as u32).filter(|&u| u != d) {
                    let col = replace_digit(a, axis, u, r as u32, m as u32);
                    row.push((col, f.sub(pw[d as usize], pw[u as usize])));
                }
            }
            crate::linalg::sparse::normalize_row(f, row)
        })
        .collect();
    SparseMat::from_sorted_rows(big_n as usize, rows)
}

pub(crate) fn long_rule(m: usize, r: usize) -> Result<RepairRule, CodeError> {
    let n_prime = (r + 1) * m;
    let big_n = r.pow(m as u32);
    let mut base_repair = Vec::with_capacity(n_prime);
    let mut base_select = Vec::with_capacity(n_prime);
    for i in 0..n_prime {
        let p = if i < r * m {
            select(Axis::Index(i % m), i / m, r, m, big_n)?
        } else {
            select_sum(Axis::Index(i % m), r, m, big_n)?
        };
        base_select.push(vec![p.clone(); r]);
        base_repair.push(p);
    }
    Ok(RepairRule { n_prime, sub_packetization: big_n, base_repair, base_select })
}

pub(crate) fn long_base(
    m: usize,
    r: usize,
    f: &Field,
    lambdas: &[Vec<Fe>],
    ys: &[Vec<Fe>],
    generator: Fe,
) -> Result<ConstructedCode, CodeError> {
    let n_prime = (r + 1) * m;
    check_table("lambda", lambdas, n_prime, r)?;
    check_table("y", ys, r, n_prime)?;
    let spec = spec_for(Family::LongC4p, n_prime, r, n_prime, f)?;
    let mut blocks = Vec::with_capacity(r * n_prime);
    for (t, y_row) in ys.iter().enumerate().take(r) {
        for (i, row) in lambdas.iter().enumerate() {
            blocks.push(Block { scale: y_row[i], base: Arc::new(long_block(f, row, i, t, r, m)) });
        }
    }
    let asg = Assignment {
        generator,
        lambdas: lambdas.to_vec(),
        xs: Assignment::ones(r, n_prime),
        ys: ys.to_vec(),
        zs: ys.to_vec(),
        xis: Vec::new(),
        search: None,
    };
    Ok(ConstructedCode::from_parts(spec, f.clone(), asg, blocks, long_rule(m, r)?))
}

/// Default long-code eigenvalues. For `r = 2` the explicit schedule
/// `lambda_{i',0} = lambda_{i'+m,0} = lambda_{i'+2m,1} = c^(2i')` and
/// `lambda_{i',1} = lambda_{i'+m,1} = lambda_{i'+2m,0} = c^(2i'+1)`;
/// otherwise `c^(i' r + u)`.
pub(crate) fn default_long_lambdas(f: &Field, c: Fe, m: usize, r: usize) -> Vec<Vec<Fe>> {
    let pw = |e: usize| f.pow(c, e as i64).unwrap();
    if r == 2 {
        let mut out = vec![Vec::new(); 3 * m];
        for i in 0..m {
            let (lo, hi) = (pw(2 * i), pw(2 * i + 1));
            out[i] = vec![lo, hi];
            out[i + m] = vec![lo, hi];
            out[i + 2 * m] = vec![hi, lo];
        }
        out
    } else {
        (0..(r + 1) * m).map(|i| (0..r).map(|u| pw(i * r + u)).collect()).collect()
    }
}

/// The long base code of length `(r+1) m` with `N = r^m`. Missing tables
/// default to the explicit schedule and all-ones `y`. Every node's
/// eigenvalues must be pairwise distinct.
pub fn build_long_c4p(
    m: usize,
    r: usize,
    field: Option<Field>,
    ys: Option<Vec<Vec<Fe>>>,
    lambdas: Option<Vec<Vec<Fe>>>,
) -> Result<ConstructedCode, CodeError> {
    if m == 0 {
        return Err(CodeError::InvalidSpec("long code needs m >= 1".into()));
    }
    let n_prime = (r + 1) * m;
    let rule = if r == 2 {
        FieldRule::above(2 * m as u64)
    } else {
        FieldRule::above(super::families::generic_bound(r.pow(m as u32), n_prime, r)?)
    };
    let f = rule.pick(field)?;
    let c = f.primitive();
    let lambdas = lambdas.unwrap_or_else(|| default_long_lambdas(&f, c, m, r));
    check_table("lambda", &lambdas, n_prime, r)?;
    for (i, row) in lambdas.iter().enumerate() {
        check_distinct_nonzero(row.iter().copied(), &format!("lambda at node {i}"))?;
    }
    let ys = ys.unwrap_or_else(|| Assignment::ones(r, n_prime));
    check_table("y", &ys, r, n_prime)?;
    if let Some((t, i)) = (0..r).flat_map(|t| (0..n_prime).map(move |i| (t, i))).find(|&(t, i)| ys[t][i].is_zero()) {
        return Err(CodeError::CoefficientZero { t, j: i });
    }
    long_base(m, r, &f, &lambdas, &ys, c)
}
