//! Systematic encoding, erasure decoding and single-node repair.
//!
//! A codeword is `n` node columns of `N` symbols each; nodes `0..k` carry
//! data and nodes `k..n` parity.

use std::cell::Cell;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::{CodeSpec, ConstructedCode, Projection};
use crate::gf::{Fe, Field};
use crate::linalg::sparse::solve_unique;
use crate::linalg::{Echelon, LinalgError, Mat, SparseMat};

/// Above this `rN` erasure solves use sparse elimination per codeword
/// instead of a precomputed dense inverse.
pub const DENSE_SOLVE_LIMIT: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("parity sub-block is singular; the code is not MDS")]
    SingularParityBlock,
    #[error("sub-block for erased nodes {nodes:?} is singular")]
    SingularSubBlock { nodes: Vec<usize> },
    #[error("repair of node {node} infeasible: {reason}")]
    RepairInfeasible { node: usize, helper: Option<usize>, t: Option<usize>, reason: String },
    #[error("helper {helper} delivered data that does not match the repair plan")]
    InterferenceNotResolvable { helper: usize },
    #[error("repair system for node {node} is singular")]
    SystemSingular { node: usize },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Node columns of one stripe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub columns: Vec<Vec<Fe>>,
}

impl Codeword {
    /// Parity-check residual `sum_i A_{t,i} f_i` for every `t`; all zero
    /// for a valid codeword.
    pub fn syndrome(&self, code: &ConstructedCode) -> Vec<Vec<Fe>> {
        let f = code.field();
        (0..code.r())
            .map(|t| {
                let mut acc = vec![Fe::ZERO; code.sub_packetization()];
                for (i, col) in self.columns.iter().enumerate() {
                    let b = code.block(t, i);
                    let part = b.base.mul_vec(f, col).expect("column length checked");
                    for (a, p) in acc.iter_mut().zip(part) {
                        *a = f.add(*a, f.mul(b.scale, p));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_valid(&self, code: &ConstructedCode) -> bool {
        self.syndrome(code).iter().flatten().all(|v| v.is_zero())
    }
}

enum Strategy {
    Dense(Mat),
    Sparse(SparseMat),
}

/// Recovers a fixed set of `r` erased columns from the other `k`.
pub struct ErasureSolver<'a> {
    code: &'a ConstructedCode,
    erased: Vec<usize>,
    known: Vec<usize>,
    strategy: Strategy,
}

impl<'a> ErasureSolver<'a> {
    pub fn new(code: &'a ConstructedCode, erased: &[usize]) -> Result<ErasureSolver<'a>, CodecError> {
        let (n, r, big_n) = (code.n(), code.r(), code.sub_packetization());
        let mut erased = erased.to_vec();
        erased.sort_unstable();
        erased.dedup();
        if erased.len() != r || erased.iter().any(|&e| e >= n) {
            return Err(CodecError::BadInput(format!("need exactly {r} distinct erased nodes below {n}")));
        }
        let known = (0..n).filter(|i| !erased.contains(i)).collect();
        let f = code.field();
        let singular = || CodecError::SingularSubBlock { nodes: erased.clone() };
        let strategy = if r * big_n <= DENSE_SOLVE_LIMIT {
            let grid: Vec<Vec<Mat>> =
                (0..r).map(|t| erased.iter().map(|&e| code.block_dense(t, e)).collect()).collect();
            let m = Mat::block_assemble(&grid)?;
            Strategy::Dense(m.invert().map_err(|_| singular())?)
        } else {
            let rows: Vec<_> = (0..r)
                .flat_map(|t| {
                    let blocks: Vec<SparseMat> = erased.iter().map(|&e| code.block_sparse(t, e)).collect();
                    (0..big_n)
                        .map(move |row| {
                            blocks
                                .iter()
                                .enumerate()
                                .flat_map(|(k, b)| {
                                    let off = (k * big_n) as u32;
                                    b.row(row).into_iter().map(move |(c, v)| (c + off, v))
                                })
                                .collect::<Vec<_>>()
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            let m = SparseMat::from_rows(f, r * big_n, rows)?;
            if m.rank(f) != r * big_n {
                return Err(singular());
            }
            Strategy::Sparse(m)
        };
        Ok(ErasureSolver { code, erased, known, strategy })
    }

    pub fn erased(&self) -> &[usize] {
        &self.erased
    }

    /// Known node indices, ascending.
    pub fn known(&self) -> &[usize] {
        &self.known
    }

    /// Given the known columns in [`ErasureSolver::known`] order, returns
    /// the erased columns in [`ErasureSolver::erased`] order.
    pub fn solve(&self, known_columns: &[&[Fe]]) -> Result<Vec<Vec<Fe>>, CodecError> {
        let code = self.code;
        let (r, big_n) = (code.r(), code.sub_packetization());
        let f = code.field();
        if known_columns.len() != self.known.len() || known_columns.iter().any(|c| c.len() != big_n) {
            return Err(CodecError::BadInput(format!("need {} columns of length {big_n}", self.known.len())));
        }
        let mut rhs = Vec::with_capacity(r * big_n);
        for t in 0..r {
            let mut acc = vec![Fe::ZERO; big_n];
            for (&i, col) in self.known.iter().zip(known_columns) {
                let b = code.block(t, i);
                let part = b.base.mul_vec(f, col)?;
                for (a, p) in acc.iter_mut().zip(part) {
                    *a = f.sub(*a, f.mul(b.scale, p));
                }
            }
            rhs.extend(acc);
        }
        let x = match &self.strategy {
            Strategy::Dense(inv) => inv.mul_vec(&rhs)?,
            Strategy::Sparse(m) => {
                solve_unique(f, m, &rhs)?.ok_or_else(|| CodecError::SingularSubBlock { nodes: self.erased.clone() })?
            }
        };
        Ok(x.chunks(big_n).map(<[Fe]>::to_vec).collect())
    }
}

/// Systematic encoder: data on nodes `0..k`, parity on `k..n`.
pub struct Encoder<'a>(ErasureSolver<'a>);

impl<'a> Encoder<'a> {
    pub fn new(code: &'a ConstructedCode) -> Result<Encoder<'a>, CodecError> {
        let parity: Vec<usize> = (code.k()..code.n()).collect();
        match ErasureSolver::new(code, &parity) {
            Err(CodecError::SingularSubBlock { .. }) => Err(CodecError::SingularParityBlock),
            other => other.map(Encoder),
        }
    }

    pub fn encode(&self, data: &[Vec<Fe>]) -> Result<Codeword, CodecError> {
        let cols: Vec<&[Fe]> = data.iter().map(Vec::as_slice).collect();
        let parity = self.0.solve(&cols)?;
        let mut columns = data.to_vec();
        columns.extend(parity);
        Ok(Codeword { columns })
    }
}

/// Encodes one stripe of `k` data columns.
pub fn encode(code: &ConstructedCode, data: &[Vec<Fe>]) -> Result<Codeword, CodecError> {
    if data.len() != code.k() {
        return Err(CodecError::BadInput(format!("expected {} data columns, got {}", code.k(), data.len())));
    }
    Encoder::new(code)?.encode(data)
}

/// Rebuilds the full codeword from any `k` surviving `(node, column)` pairs.
pub fn reconstruct(code: &ConstructedCode, available: &[(usize, Vec<Fe>)]) -> Result<Codeword, CodecError> {
    let mut have: Vec<Option<&Vec<Fe>>> = vec![None; code.n()];
    for (i, col) in available {
        if *i >= code.n() || have[*i].is_some() {
            return Err(CodecError::BadInput(format!("node {i} out of range or repeated")));
        }
        have[*i] = Some(col);
    }
    if available.len() != code.k() {
        return Err(CodecError::BadInput(format!(
            "need exactly {} surviving nodes, got {}",
            code.k(),
            available.len()
        )));
    }
    let erased: Vec<usize> = (0..code.n()).filter(|&i| have[i].is_none()).collect();
    let solver = ErasureSolver::new(code, &erased)?;
    let known: Vec<&[Fe]> = solver.known().iter().map(|&i| have[i].expect("known").as_slice()).collect();
    let recovered = solver.solve(&known)?;
    let mut columns: Vec<Vec<Fe>> = have.iter().map(|c| c.cloned().unwrap_or_default()).collect();
    for (&e, col) in solver.erased().iter().zip(recovered) {
        columns[e] = col;
    }
    Ok(Codeword { columns })
}

/// Closed-form repair bandwidth of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub gamma: usize,
    pub gamma_star: usize,
    pub ratio: Ratio<usize>,
}

/// `gamma* + (r-1) N / r` for every other node sharing `i`'s residue.
pub fn bandwidth_formula(spec: &CodeSpec, i: usize) -> Bandwidth {
    let (n, r, n_prime, big_n) = (spec.n, spec.r, spec.n_prime, spec.sub_packetization);
    let peers = (0..n).filter(|&j| j != i && j % n_prime == i % n_prime).count();
    let gamma_star = spec.gamma_star();
    let gamma = gamma_star + (r - 1) * big_n / r * peers;
    Bandwidth { gamma, gamma_star, ratio: Ratio::new(gamma, gamma_star) }
}

/// Everything needed to repair one node, derived from the code.
#[derive(Debug, Clone)]
pub struct RepairPlan {
    pub failed: usize,
    /// `(helper, R_{i,j})` for every helper, ascending.
    pub repairs: Vec<(usize, Projection)>,
    /// `transfers[h][t]`: `T` with `S_{i,t} A_{t,j} = T R_{i,j}` for helper
    /// `repairs[h].0`.
    pub transfers: Vec<Vec<SparseMat>>,
    /// Stacked `S_{i,t} A_{t,i}` over `t`, an `N x N` matrix.
    pub useful: SparseMat,
    pub gamma: usize,
    pub gamma_star: usize,
}

impl RepairPlan {
    /// Symbols downloaded from each helper, `rank R_{i,j}`.
    pub fn betas(&self) -> Vec<(usize, usize)> {
        self.repairs.iter().map(|(j, p)| (*j, p.rows())).collect()
    }
}

/// Builds the repair plan of node `failed`, checking both rank conditions.
pub fn plan_repair(code: &ConstructedCode, failed: usize) -> Result<RepairPlan, CodecError> {
    let (n, r, big_n) = (code.n(), code.r(), code.sub_packetization());
    if failed >= n {
        return Err(CodecError::BadInput(format!("node {failed} out of range")));
    }
    let f = code.field();
    let selects: Vec<Projection> = (0..r).map(|t| code.select_matrix(failed, t)).collect();
    let stacked: Vec<SparseMat> = (0..r).map(|t| selects[t].apply(f, &code.block_sparse(t, failed))).collect();
    let useful = SparseMat::vstack(&stacked.iter().collect::<Vec<_>>())?;
    let useful_rank = useful.rank(f);
    if useful_rank != big_n {
        return Err(CodecError::RepairInfeasible {
            node: failed,
            helper: None,
            t: None,
            reason: format!("useful data has rank {useful_rank} < {big_n}"),
        });
    }
    let mut cache: Vec<(Projection, Echelon)> = Vec::new();
    let mut repairs = Vec::with_capacity(n - 1);
    let mut transfers = Vec::with_capacity(n - 1);
    for j in (0..n).filter(|&j| j != failed) {
        let rmat = code.repair_matrix(failed, j);
        let mut per_t = Vec::with_capacity(r);
        for (t, s) in selects.iter().enumerate() {
            let interference = s.apply(f, &code.block_sparse(t, j));
            if rmat.is_identity() {
                per_t.push(interference);
                continue;
            }
            let pos = match cache.iter().position(|(p, _)| *p == rmat) {
                Some(p) => p,
                None => {
                    cache.push((rmat.clone(), Echelon::from_matrix(f, &rmat.to_sparse(), true)));
                    cache.len() - 1
                }
            };
            let ech = &cache[pos].1;
            let rows = interference
                .iter_rows()
                .map(|row| {
                    ech.express(f, row).ok_or_else(|| CodecError::RepairInfeasible {
                        node: failed,
                        helper: Some(j),
                        t: Some(t),
                        reason: "interference outside the repair row space".into(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            per_t.push(SparseMat::from_rows(f, rmat.rows(), rows)?);
        }
        repairs.push((j, rmat));
        transfers.push(per_t);
    }
    let gamma = repairs.iter().map(|(_, p)| p.rows()).sum();
    Ok(RepairPlan { failed, repairs, transfers, useful, gamma, gamma_star: code.spec().gamma_star() })
}

/// The symbols one helper sends for a repair, with a count of how many
/// times the repairing side read them.
#[derive(Debug)]
pub struct HelperTap {
    pub helper: usize,
    delivered: Vec<Fe>,
    reads: Cell<usize>,
}

impl HelperTap {
    /// Helper-side computation of `R_{i,j} f_j`.
    pub fn capture(f: &Field, helper: usize, repair: &Projection, column: &[Fe]) -> HelperTap {
        HelperTap::from_delivery(helper, repair.apply_vec(f, column))
    }

    pub fn from_delivery(helper: usize, delivered: Vec<Fe>) -> HelperTap {
        HelperTap { helper, delivered, reads: Cell::new(0) }
    }

    pub fn len(&self) -> usize {
        self.delivered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delivered.is_empty()
    }

    /// Reads the delivered symbols, counting every symbol read.
    pub fn symbols(&self) -> &[Fe] {
        self.reads.set(self.reads.get() + self.delivered.len());
        &self.delivered
    }

    pub fn symbols_read(&self) -> usize {
        self.reads.get()
    }
}

/// Taps for every helper of `plan`, computed from a full codeword.
pub fn taps_for(code: &ConstructedCode, plan: &RepairPlan, codeword: &Codeword) -> Vec<HelperTap> {
    plan.repairs.iter().map(|(j, p)| HelperTap::capture(code.field(), *j, p, &codeword.columns[*j])).collect()
}

/// Recovers the failed column from the helper deliveries alone:
/// `sum_t S_{i,t} A_{t,i} f_i = -sum_j T_{j,t} (R_{i,j} f_j)`.
pub fn repair_with_plan(code: &ConstructedCode, plan: &RepairPlan, taps: &[HelperTap]) -> Result<Vec<Fe>, CodecError> {
    let f = code.field();
    if taps.len() != plan.repairs.len() {
        return Err(CodecError::BadInput(format!("expected {} helper taps, got {}", plan.repairs.len(), taps.len())));
    }
    let mut rhs: Vec<Vec<Fe>> = plan.transfers[0].iter().map(|m| vec![Fe::ZERO; m.rows()]).collect();
    for (h, tap) in taps.iter().enumerate() {
        let (j, p) = &plan.repairs[h];
        if tap.helper != *j || tap.len() != p.rows() {
            return Err(CodecError::InterferenceNotResolvable { helper: tap.helper });
        }
        let data = tap.symbols();
        for (acc, transfer) in rhs.iter_mut().zip(&plan.transfers[h]) {
            let part = transfer.mul_vec(f, data)?;
            for (a, v) in acc.iter_mut().zip(part) {
                *a = f.sub(*a, v);
            }
        }
    }
    let rhs: Vec<Fe> = rhs.into_iter().flatten().collect();
    solve_unique(f, &plan.useful, &rhs)?.ok_or(CodecError::SystemSingular { node: plan.failed })
}

/// Plans and performs the repair of `failed` from `taps`.
pub fn repair(code: &ConstructedCode, failed: usize, taps: &[HelperTap]) -> Result<Vec<Fe>, CodecError> {
    let plan = plan_repair(code, failed)?;
    repair_with_plan(code, &plan, taps)
}
