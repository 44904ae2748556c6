//! Brute-force property checks producing [`VerifyReport`]s.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::bandwidth_formula;
use crate::codes::{ConstructedCode, Family, Projection};
use crate::gf::Fe;
use crate::linalg::{Echelon, Mat, SparseMat};

/// Largest `rN` for the determinant oracle.
pub const MAX_MDS_DIM: usize = 128;
/// Largest number of `r`-subsets for the determinant oracle.
pub const MAX_MDS_SUBSETS: u128 = 1_000_000;
/// Witness lists are truncated to this length.
pub const MAX_WITNESSES: usize = 32;

/// Largest connected component the decomposed oracle will expand.
pub const MAX_COMPONENT_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(
        "determinant check too large: {subsets} subsets of dimension {dim} (caps {MAX_MDS_SUBSETS} and {MAX_MDS_DIM})"
    )]
    TooLarge { subsets: u128, dim: usize },
    #[error("sub-block component of dimension {dim} exceeds {MAX_COMPONENT_DIM}")]
    ComponentTooLarge { dim: usize },
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// An `r`-subset of nodes whose sub-block matrix is singular.
    Subset { nodes: Vec<usize> },
    /// A repair rank condition failed. `helper` and `t` are absent for the
    /// useful-data condition.
    Repair { node: usize, helper: Option<usize>, t: Option<usize>, detail: String },
    /// A nonzero entry where a diagonal block should be zero.
    OffDiagonal { t: usize, node: usize, row: usize, col: usize, value: u32 },
    /// A block that is not the expected power of the node generator.
    PowerForm { t: usize, node: usize },
    /// A pair of generators that do not commute or differ singularly.
    Pair { i: usize, j: usize, detail: String },
    /// Two coefficient table cells that violate a constraint.
    Coefficient { rule: String, first: Vec<usize>, second: Vec<usize> },
    /// Measured versus closed-form repair bandwidth.
    Bandwidth { node: usize, measured: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub property: String,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    pub total_failures: usize,
    /// Items checked (subsets, nodes, pairs, blocks, cells).
    pub checked: u64,
    pub elapsed_ms: f64,
}

impl VerifyReport {
    fn finish(property: &str, failures: Vec<Witness>, checked: u64, start: Instant) -> VerifyReport {
        let total_failures = failures.len();
        let mut witnesses = failures;
        witnesses.truncate(MAX_WITNESSES);
        VerifyReport {
            property: property.to_string(),
            passed: total_failures == 0,
            witnesses,
            total_failures,
            checked,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn mds_guard(code: &ConstructedCode) -> Result<(), VerifyError> {
    let dim = code.r() * code.sub_packetization();
    let subsets = binomial(code.n(), code.r());
    if dim > MAX_MDS_DIM || subsets > MAX_MDS_SUBSETS {
        Err(VerifyError::TooLarge { subsets, dim })
    } else {
        Ok(())
    }
}

fn dense_blocks(code: &ConstructedCode) -> Vec<Mat> {
    (0..code.r()).flat_map(|t| (0..code.n()).map(move |i| (t, i))).map(|(t, i)| code.block_dense(t, i)).collect()
}

/// The `rN x rN` matrix `(A_{t,j})_{t, j in nodes}`.
pub fn sub_block_matrix(code: &ConstructedCode, nodes: &[usize]) -> Mat {
    let grid: Vec<Vec<Mat>> = (0..code.r()).map(|t| nodes.iter().map(|&j| code.block_dense(t, j)).collect()).collect();
    Mat::block_assemble(&grid).expect("uniform blocks")
}

fn subset_nonsingular(code: &ConstructedCode, dense: &[Mat], nodes: &[usize]) -> bool {
    let n = code.n();
    let grid: Vec<Vec<Mat>> =
        (0..code.r()).map(|t| nodes.iter().map(|&j| dense[t * n + j].clone()).collect()).collect();
    let m = Mat::block_assemble(&grid).expect("uniform blocks");
    !m.det().expect("square").is_zero()
}

/// Determinant oracle: every `r`-subset sub-block matrix is nonsingular.
pub fn check_mds(code: &ConstructedCode) -> Result<VerifyReport, VerifyError> {
    mds_guard(code)?;
    let start = Instant::now();
    let dense = dense_blocks(code);
    let subsets: Vec<Vec<usize>> = (0..code.n()).combinations(code.r()).collect();
    let failures: Vec<Witness> = subsets
        .par_iter()
        .filter(|s| !subset_nonsingular(code, &dense, s))
        .map(|s| Witness::Subset { nodes: s.clone() })
        .collect();
    Ok(VerifyReport::finish("mds", failures, subsets.len() as u64, start))
}

/// Whether the code is MDS, stopping at the first singular sub-block.
pub fn mds_holds(code: &ConstructedCode) -> Result<bool, VerifyError> {
    mds_guard(code)?;
    let dense = dense_blocks(code);
    Ok((0..code.n()).combinations(code.r()).all(|s| subset_nonsingular(code, &dense, &s)))
}

/// Cache of component determinants keyed by their sparse layout.
type ComponentCache = HashMap<Vec<u32>, bool>;

/// Nonsingularity of the sub-block matrix for `nodes`, decided per
/// connected component of its row/column incidence graph.
fn decomposed_nonsingular(
    code: &ConstructedCode,
    blocks: &[SparseMat],
    nodes: &[usize],
    cache: &mut ComponentCache,
) -> Result<bool, VerifyError> {
    let (n, r, big_n) = (code.n(), code.r(), code.sub_packetization());
    let dim = r * big_n;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols: Vec<u32> = Vec::new();
    let mut vals: Vec<Fe> = Vec::new();
    row_ptr.push(0usize);
    for t in 0..r {
        for a in 0..big_n {
            for (k, &j) in nodes.iter().enumerate() {
                let b = &blocks[t * n + j];
                let off = (k * big_n) as u32;
                cols.extend(b.row_cols(a).iter().map(|&c| c + off));
                vals.extend_from_slice(b.row_vals(a));
            }
            row_ptr.push(cols.len());
        }
    }

    let mut parent: Vec<u32> = (0..dim as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let up = parent[parent[x as usize] as usize];
            parent[x as usize] = up;
            x = up;
        }
        x
    }
    for row in 0..dim {
        let span = &cols[row_ptr[row]..row_ptr[row + 1]];
        let Some(&first) = span.first() else {
            return Ok(false);
        };
        let root = find(&mut parent, first);
        for &c in &span[1..] {
            let other = find(&mut parent, c);
            if other != root {
                parent[other as usize] = root;
            }
        }
    }

    // Local column numbering inside each component, ascending.
    let mut local = vec![0u32; dim];
    let mut col_count = vec![0u32; dim];
    for c in 0..dim as u32 {
        let root = find(&mut parent, c) as usize;
        local[c as usize] = col_count[root];
        col_count[root] += 1;
    }
    let mut rows_of: HashMap<u32, Vec<usize>> = HashMap::new();
    for row in 0..dim {
        let root = find(&mut parent, cols[row_ptr[row]]);
        rows_of.entry(root).or_default().push(row);
    }
    for c in 0..dim as u32 {
        let root = parent[c as usize];
        if root == c && !rows_of.contains_key(&root) {
            return Ok(false);
        }
    }
    let f = code.field();
    for (root, rows) in rows_of {
        let size = col_count[root as usize] as usize;
        if size != rows.len() {
            return Ok(false);
        }
        if size > MAX_COMPONENT_DIM {
            return Err(VerifyError::ComponentTooLarge { dim: size });
        }
        let mut key = Vec::with_capacity(rows.len() * 8);
        for &row in &rows {
            let span = row_ptr[row]..row_ptr[row + 1];
            key.push(span.len() as u32);
            for (&c, &v) in cols[span.clone()].iter().zip(&vals[span]) {
                key.push(local[c as usize]);
                key.push(v.value());
            }
        }
        let ok = match cache.get(&key) {
            Some(&ok) => ok,
            None => {
                let mut m = Mat::zero(f, size, size);
                let mut pos = 0;
                for i in 0..size {
                    let len = key[pos] as usize;
                    for e in 0..len {
                        m.set(i, key[pos + 1 + 2 * e] as usize, Fe(key[pos + 2 + 2 * e] as u16));
                    }
                    pos += 1 + 2 * len;
                }
                let ok = !m.det().expect("square").is_zero();
                cache.insert(key, ok);
                ok
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Determinant oracle without the dense dimension cap: every sub-block
/// matrix is split into connected components of its sparsity graph and
/// each distinct component gets one dense determinant.
pub fn check_mds_decomposed(code: &ConstructedCode) -> Result<VerifyReport, VerifyError> {
    let subsets = binomial(code.n(), code.r());
    if subsets > MAX_MDS_SUBSETS {
        return Err(VerifyError::TooLarge { subsets, dim: code.r() * code.sub_packetization() });
    }
    let start = Instant::now();
    let blocks: Vec<SparseMat> =
        (0..code.r()).flat_map(|t| (0..code.n()).map(move |i| (t, i))).map(|(t, i)| code.block_sparse(t, i)).collect();
    let all: Vec<Vec<usize>> = (0..code.n()).combinations(code.r()).collect();
    let outcomes: Vec<Result<bool, VerifyError>> = all
        .par_iter()
        .map_init(ComponentCache::new, |cache, s| decomposed_nonsingular(code, &blocks, s, cache))
        .collect();
    let mut failures = Vec::new();
    for (s, ok) in all.iter().zip(outcomes) {
        if !ok? {
            failures.push(Witness::Subset { nodes: s.clone() });
        }
    }
    Ok(VerifyReport::finish("mds", failures, all.len() as u64, start))
}

/// Dense oracle when within its caps, otherwise the decomposed one.
pub fn check_mds_auto(code: &ConstructedCode) -> Result<VerifyReport, VerifyError> {
    match check_mds(code) {
        Err(VerifyError::TooLarge { .. }) => check_mds_decomposed(code),
        other => other,
    }
}

/// Second MDS oracle: encodes a random codeword and rebuilds it from every
/// `k`-subset of nodes.
pub fn check_reconstruction(code: &ConstructedCode, seed: u64) -> Result<VerifyReport, VerifyError> {
    use rand::{Rng, SeedableRng};
    let subsets = binomial(code.n(), code.k());
    if code.r() * code.sub_packetization() > MAX_MDS_DIM || subsets > MAX_MDS_SUBSETS {
        return Err(VerifyError::TooLarge { subsets, dim: code.r() * code.sub_packetization() });
    }
    let start = Instant::now();
    let q = code.field().order();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Vec<Fe>> = (0..code.k())
        .map(|_| (0..code.sub_packetization()).map(|_| Fe(rng.gen_range(0..q) as u16)).collect())
        .collect();
    let word = crate::codec::encode(code, &data)?;
    let all: Vec<Vec<usize>> = (0..code.n()).combinations(code.k()).collect();
    let failures: Vec<Witness> = all
        .par_iter()
        .filter(|keep| {
            let avail: Vec<(usize, Vec<Fe>)> = keep.iter().map(|&i| (i, word.columns[i].clone())).collect();
            !matches!(crate::codec::reconstruct(code, &avail), Ok(w) if w == word)
        })
        .map(|keep| Witness::Subset { nodes: (0..code.n()).filter(|i| !keep.contains(i)).collect() })
        .collect();
    Ok(VerifyReport::finish("reconstruction", failures, all.len() as u64, start))
}

fn same_projection(a: &Projection, b: &Projection) -> bool {
    match (a, b) {
        (Projection::Identity(x), Projection::Identity(y)) => x == y,
        (Projection::Select { subset: x, .. }, Projection::Select { subset: y, .. }) => {
            std::sync::Arc::ptr_eq(x, y) || x == y
        }
        (Projection::SelectSum { parts: x, .. }, Projection::SelectSum { parts: y, .. }) => {
            std::sync::Arc::ptr_eq(x, y) || x == y
        }
        _ => false,
    }
}

/// Per-node repair conditions: the useful-data matrix has rank `N`, and
/// every interference block lies in the row space of the repair matrix.
fn repair_failures(code: &ConstructedCode, i: usize) -> Vec<Witness> {
    let f = code.field();
    let big_n = code.sub_packetization();
    let mut out = Vec::new();
    let mut useful = Echelon::new(big_n, false);
    for t in 0..code.r() {
        let s = code.select_matrix(i, t);
        let rows = s.apply(f, &code.block(t, i).base);
        for row in rows.iter_rows() {
            useful.insert(f, row);
        }
    }
    if useful.rank() != big_n {
        out.push(Witness::Repair {
            node: i,
            helper: None,
            t: None,
            detail: format!("useful-data rank {} < {big_n}", useful.rank()),
        });
    }
    let mut cache: Vec<(Projection, Echelon)> = Vec::new();
    for j in (0..code.n()).filter(|&j| j != i) {
        let rmat = code.repair_matrix(i, j);
        if rmat.is_identity() {
            continue;
        }
        let pos = match cache.iter().position(|(p, _)| same_projection(p, &rmat)) {
            Some(p) => p,
            None => {
                cache.push((rmat.clone(), Echelon::from_matrix(f, &rmat.to_sparse(), false)));
                cache.len() - 1
            }
        };
        let ech = &cache[pos].1;
        for t in 0..code.r() {
            let interference = code.select_matrix(i, t).apply(f, &code.block(t, j).base);
            let bad = (0..interference.rows()).find(|&row| !ech.contains(f, interference.row(row)));
            if let Some(row) = bad {
                out.push(Witness::Repair {
                    node: i,
                    helper: Some(j),
                    t: Some(t),
                    detail: format!("interference row {row} outside the repair row space"),
                });
            }
        }
    }
    out
}

/// Repair rank conditions at every node.
pub fn check_repair(code: &ConstructedCode) -> VerifyReport {
    let start = Instant::now();
    let failures: Vec<Witness> = (0..code.n()).into_par_iter().flat_map_iter(|i| repair_failures(code, i)).collect();
    VerifyReport::finish("repair", failures, code.n() as u64, start)
}

/// Every parity block is diagonal.
pub fn check_optimal_update(code: &ConstructedCode) -> VerifyReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    for t in 0..code.r() {
        for i in 0..code.n() {
            if let Some((row, col, v)) = code.block(t, i).base.first_off_diagonal() {
                failures.push(Witness::OffDiagonal {
                    t,
                    node: i,
                    row,
                    col,
                    value: code.field().mul(v, code.block(t, i).scale).value(),
                });
            }
        }
    }
    VerifyReport::finish("optimal_update", failures, (code.r() * code.n()) as u64, start)
}

/// Power form `A_{t,i} = A_i^t` plus pairwise commutation and nonsingular
/// differences of the generators.
pub fn check_lemma1(code: &ConstructedCode) -> VerifyReport {
    let start = Instant::now();
    let f = code.field();
    let n = code.n();
    let big_n = code.sub_packetization();
    let gens: Vec<SparseMat> = (0..n).into_par_iter().map(|i| code.generator(i)).collect();
    let mut failures: Vec<Witness> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut acc = SparseMat::identity(big_n);
            let mut bad = Vec::new();
            for t in 0..code.r() {
                if t > 0 {
                    acc = acc.mul(f, &gens[i]).expect("square");
                }
                if code.block_sparse(t, i) != acc {
                    bad.push(Witness::PowerForm { t, node: i });
                }
            }
            bad
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let pair_failures: Vec<Witness> = pairs
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let mut bad = Vec::new();
            let ab = gens[i].mul(f, &gens[j]).expect("square");
            let ba = gens[j].mul(f, &gens[i]).expect("square");
            if ab != ba {
                bad.push(Witness::Pair { i, j, detail: "generators do not commute".into() });
            }
            let diff = gens[i].sub(f, &gens[j]).expect("same shape");
            let rank = diff.rank(f);
            if rank != big_n {
                bad.push(Witness::Pair { i, j, detail: format!("difference has rank {rank} < {big_n}") });
            }
            bad
        })
        .collect();
    failures.extend(pair_failures);
    VerifyReport::finish("lemma1", failures, (n + pairs.len()) as u64, start)
}

fn coefficient_witness(rule: &str, first: &[usize], second: &[usize]) -> Witness {
    Witness::Coefficient { rule: rule.to_string(), first: first.to_vec(), second: second.to_vec() }
}

/// Cells of `table` holding equal values, as witness pairs.
fn collisions(rule: &str, cells: &[(Vec<usize>, Fe)], out: &mut Vec<Witness>) {
    let mut seen: HashMap<Fe, &Vec<usize>> = HashMap::new();
    for (coord, v) in cells {
        if let Some(prev) = seen.get(v) {
            out.push(coefficient_witness(rule, prev, coord));
        } else {
            seen.insert(*v, coord);
        }
    }
}

/// Family-specific distinctness and nonzero constraints on the
/// coefficient tables.
pub fn check_assignment(code: &ConstructedCode) -> VerifyReport {
    let start = Instant::now();
    let spec = code.spec();
    let f = code.field();
    let asg = code.assignment();
    let (n, r, n_prime) = (spec.n, spec.r, spec.n_prime);
    let mut failures = Vec::new();
    let mut checked = 0u64;

    let mut nonzero = |name: &str, cells: Vec<(Vec<usize>, Fe)>, failures: &mut Vec<Witness>| {
        for (coord, v) in cells {
            checked += 1;
            if v.is_zero() {
                failures.push(coefficient_witness(&format!("{name} nonzero"), &coord, &coord));
            }
        }
    };
    let table = |t: &Vec<Vec<Fe>>| -> Vec<(Vec<usize>, Fe)> {
        t.iter().enumerate().flat_map(|(a, row)| row.iter().enumerate().map(move |(b, &v)| (vec![a, b], v))).collect()
    };
    nonzero("generator", vec![(vec![], asg.generator)], &mut failures);
    nonzero("lambda", table(&asg.lambdas), &mut failures);
    nonzero("x", table(&asg.xs), &mut failures);
    nonzero("y", table(&asg.ys), &mut failures);
    nonzero("z", table(&asg.zs), &mut failures);
    let xi_cells: Vec<(Vec<usize>, Fe)> = asg
        .xis
        .iter()
        .enumerate()
        .flat_map(|(z, g)| {
            g.iter().enumerate().flat_map(move |(i, row)| row.iter().enumerate().map(move |(v, &x)| (vec![z, i, v], x)))
        })
        .collect();
    nonzero("xi", xi_cells.clone(), &mut failures);

    match spec.family {
        Family::Yb1 | Family::C1 | Family::Custom => {
            collisions("eigenvalues pairwise distinct", &table(&asg.lambdas), &mut failures);
        }
        Family::LongC4p | Family::C4 => {
            for (i, row) in asg.lambdas.iter().enumerate() {
                let cells: Vec<_> = row.iter().enumerate().map(|(u, &v)| (vec![i, u], v)).collect();
                collisions("per-node eigenvalues distinct", &cells, &mut failures);
            }
            if !asg.ys.is_empty() && !asg.zs.is_empty() {
                for t in 0..r {
                    for i in 0..n {
                        checked += 1;
                        if f.mul(asg.xs[t][i], asg.ys[t][i % n_prime]) != asg.zs[t][i] {
                            failures.push(coefficient_witness("z = x y", &[t, i], &[t, i % n_prime]));
                        }
                    }
                }
            }
        }
        Family::Yb2 | Family::C2 | Family::Iyb2 | Family::C3 => {
            for (i, row) in asg.lambdas.iter().enumerate() {
                checked += 1;
                if row.len() != 2 || row[0] == row[1] {
                    failures.push(coefficient_witness("distinguished coefficient differs from one", &[i, 0], &[i, 1]));
                }
            }
            if matches!(spec.family, Family::Iyb2 | Family::C3) {
                checked += 1;
                if f.pow(asg.generator, r as i64 - 1).ok() == Some(Fe::ONE) {
                    failures.push(coefficient_witness("generator order does not divide r - 1", &[], &[]));
                }
            }
        }
        Family::C5 => {
            for (i, row) in asg.lambdas.iter().enumerate() {
                let cells: Vec<_> = row.iter().enumerate().map(|(u, &v)| (vec![i, u], v)).collect();
                collisions("per-node eigenvalues distinct", &cells, &mut failures);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if (j - i) % n_prime == 0 {
                        for u in 0..r {
                            checked += 1;
                            if asg.lambdas[i][u] == asg.lambdas[j][u] {
                                failures.push(coefficient_witness(
                                    "same-residue nodes differ per index",
                                    &[i, u],
                                    &[j, u],
                                ));
                            }
                        }
                    } else {
                        for u in 0..r {
                            for v in 0..r {
                                checked += 1;
                                if asg.lambdas[i][u] == asg.lambdas[j][v] {
                                    failures.push(coefficient_witness(
                                        "cross-residue eigenvalues distinct",
                                        &[i, u],
                                        &[j, v],
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            collisions("xi pairwise distinct", &xi_cells, &mut failures);
        }
    }
    VerifyReport::finish("assignment", failures, checked, start)
}

/// Repair bandwidth `sum_j rank(R_{i,j})` against the closed form.
pub fn audit_bandwidth(code: &ConstructedCode) -> VerifyReport {
    let start = Instant::now();
    let f = code.field();
    let mut ranks: Vec<(Projection, usize)> = Vec::new();
    let mut failures = Vec::new();
    for i in 0..code.n() {
        let mut measured = 0;
        for j in (0..code.n()).filter(|&j| j != i) {
            let p = code.repair_matrix(i, j);
            let rank = match p {
                Projection::Identity(n) => n,
                _ => match ranks.iter().find(|(q, _)| same_projection(q, &p)) {
                    Some(&(_, rk)) => rk,
                    None => {
                        let rk = p.to_sparse().rank(f);
                        ranks.push((p, rk));
                        rk
                    }
                },
            };
            measured += rank;
        }
        let expected = bandwidth_formula(code.spec(), i).gamma;
        if measured != expected {
            failures.push(Witness::Bandwidth { node: i, measured, expected });
        }
    }
    VerifyReport::finish("bandwidth", failures, code.n() as u64, start)
}

/// Ensures a set of reports is ordered by property for stable output.
pub fn all_passed(reports: &[VerifyReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// Distinct nodes among witnesses, for quick summaries.
pub fn witness_nodes(report: &VerifyReport) -> Vec<usize> {
    let mut set = HashSet::new();
    for w in &report.witnesses {
        match w {
            Witness::Subset { nodes } => set.extend(nodes.iter().copied()),
            Witness::Repair { node, .. } | Witness::OffDiagonal { node, .. } | Witness::PowerForm { node, .. } => {
                set.insert(*node);
            }
            Witness::Pair { i, j, .. } => {
                set.insert(*i);
                set.insert(*j);
            }
            Witness::Bandwidth { node, .. } => {
                set.insert(*node);
            }
            Witness::Coefficient { .. } => {}
        }
    }
    let mut v: Vec<usize> = set.into_iter().collect();
    v.sort_unstable();
    v
}
