//! Code constructions in parity-check form `sum_i A_{t,i} f_i = 0`,
//! `t in [0, r)`, with `A_{t,i}` square blocks of size `N`.
//!
//! Every family first produces an [`Assignment`] (its coefficient tables)
//! and then assembles blocks from it, so a stored assignment rebuilds the
//! exact same code.

mod assemble;
mod bases;
mod families;
mod search;
mod spec;
mod transform;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Fe, Field, GfError};
use crate::linalg::{LinalgError, Mat, SparseMat};
use crate::partitions::{PartitionError, Subset};

pub use assemble::assemble;
pub use bases::{build_iyb2, build_long_c4p, build_yb1, build_yb2};
pub use families::{
    build_c1, build_c2, build_c3, build_c3_with_generator, build_c4, build_c4_r2, build_c5, build_custom,
    default_field, field_bound, FieldRule,
};
pub use search::{search_coefficients, SearchOptions, DEFAULT_BUDGET, DEFAULT_SEED};
pub use spec::{build_from_config, CodeConfig, CodeSpec, Family};
pub use transform::transform;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("invalid code parameters: {0}")]
    InvalidSpec(String),
    #[error("bad coefficients: {0}")]
    BadLambdas(String),
    #[error("field GF({q}) is not admissible: {reason}")]
    BadField { q: u32, reason: String },
    #[error("field too small: need q > {bound}{extra}, got {q}")]
    FieldTooSmall { q: u64, bound: u64, extra: String },
    #[error("no admissible field of order at most 65536 (bound q > {bound}{extra})")]
    NoAdmissibleField { bound: u64, extra: String },
    #[error("transform coefficient x[{t}][{j}] is zero")]
    CoefficientZero { t: usize, j: usize },
    #[error("transform coefficients must cover {r} x {n}, got {got_rows} x {got_cols}")]
    CoverageGap { r: usize, n: usize, got_rows: usize, got_cols: usize },
    #[error("explicit construction requires r = 2, got r = {0}")]
    UnsupportedR(usize),
    #[error("coefficient search exhausted after {trials} trials")]
    SearchExhausted { trials: u64 },
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Record of a coefficient search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub seed: u64,
    pub trials: u64,
    pub exhaustive: bool,
}

/// Coefficient tables. Tables that a family does not use stay empty.
///
/// `lambdas` is indexed per base node: `n' x r` eigenvalues for the
/// diagonal and long constructions, `n x r` for the direct diagonal
/// family, and `(n'-1) x 2` for the permutation bases where entry 0 is the
/// value on the distinguished rows and entry 1 the value elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub generator: Fe,
    pub lambdas: Vec<Vec<Fe>>,
    /// `xs[t][j]`, transform coefficients.
    pub xs: Vec<Vec<Fe>>,
    /// `ys[t][i']`, long-code scalars.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ys: Vec<Vec<Fe>>,
    /// `zs[t][i] = xs[t][i] * ys[t][i mod n']`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zs: Vec<Vec<Fe>>,
    /// `xis[z][i'][v]`, distinct values feeding the direct diagonal family.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xis: Vec<Vec<Vec<Fe>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchRecord>,
}

impl Assignment {
    pub fn ones(r: usize, n: usize) -> Vec<Vec<Fe>> {
        vec![vec![Fe::ONE; n]; r]
    }
}

/// A parity block `scale * base`. Transformed codes share base matrices.
#[derive(Clone, PartialEq, Eq)]
pub struct Block {
    pub scale: Fe,
    pub base: Arc<SparseMat>,
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block(scale={}, {}x{}, nnz={})", self.scale, self.base.rows(), self.base.cols(), self.base.nnz())
    }
}

impl Block {
    pub fn new(base: SparseMat) -> Block {
        Block { scale: Fe::ONE, base: Arc::new(base) }
    }

    pub fn scaled(&self, f: &Field, s: Fe) -> Block {
        Block { scale: f.mul(self.scale, s), base: self.base.clone() }
    }

    pub fn to_sparse(&self, f: &Field) -> SparseMat {
        if self.scale == Fe::ONE {
            (*self.base).clone()
        } else {
            self.base.scale(f, self.scale)
        }
    }

    pub fn to_dense(&self, f: &Field) -> Mat {
        self.to_sparse(f).to_dense(f)
    }
}

/// A row-selection style matrix applied to a node's column: the repair
/// matrices `R_{i,j}` and select matrices `S_{i,t}` are all of this shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    /// The `N x N` identity.
    Identity(usize),
    /// Rows `e_a` for `a` in the subset, ascending.
    Select { subset: Arc<Subset>, n: usize },
    /// Row `k` is the sum of the `k`-th basis rows of every part.
    SelectSum { parts: Arc<Vec<Subset>>, n: usize },
}

impl Projection {
    pub fn rows(&self) -> usize {
        match self {
            Projection::Identity(n) => *n,
            Projection::Select { subset, .. } => subset.len(),
            Projection::SelectSum { parts, .. } => parts.first().map_or(0, Subset::len),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Projection::Identity(n) | Projection::Select { n, .. } | Projection::SelectSum { n, .. } => *n,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Projection::Identity(_))
    }

    /// The projection as an explicit sparse matrix.
    pub fn to_sparse(&self) -> SparseMat {
        match self {
            Projection::Identity(n) => SparseMat::identity(*n),
            Projection::Select { subset, n } => {
                crate::partitions::selection_sparse(subset, *n).expect("subset within range")
            }
            Projection::SelectSum { parts, n } => {
                crate::partitions::selection_sum_sparse(parts, *n).expect("parts within range")
            }
        }
    }

    pub fn to_dense(&self, f: &Field) -> Mat {
        self.to_sparse().to_dense(f)
    }

    /// `P * m` without forming `P`.
    pub fn apply(&self, f: &Field, m: &SparseMat) -> SparseMat {
        match self {
            Projection::Identity(_) => m.clone(),
            Projection::Select { subset, .. } => m.select_rows(subset.members()),
            Projection::SelectSum { parts, .. } => {
                let rows: Vec<_> = (0..self.rows())
                    .map(|k| {
                        let mut acc = Vec::new();
                        for p in parts.iter() {
                            acc = crate::linalg::sparse::axpy(f, &acc, Fe::ONE, &m.row(p.members()[k] as usize));
                        }
                        acc
                    })
                    .collect();
                SparseMat::from_sorted_rows(m.cols(), rows)
            }
        }
    }

    /// `P * v`.
    pub fn apply_vec(&self, f: &Field, v: &[Fe]) -> Vec<Fe> {
        match self {
            Projection::Identity(_) => v.to_vec(),
            Projection::Select { subset, .. } => subset.members().iter().map(|&a| v[a as usize]).collect(),
            Projection::SelectSum { parts, .. } => {
                (0..self.rows()).map(|k| f.sum(parts.iter().map(|p| v[p.members()[k] as usize]))).collect()
            }
        }
    }
}

/// Repair and select matrices of a code. For every construction here the
/// base repair matrix `R'_{i',j'}` depends only on the failed node `i'`, so
/// it is stored once per base node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRule {
    pub n_prime: usize,
    pub sub_packetization: usize,
    pub base_repair: Vec<Projection>,
    /// `base_select[i'][t]`.
    pub base_select: Vec<Vec<Projection>>,
}

impl RepairRule {
    /// `R_{i,j}`: the base repair matrix of `i mod n'` for helpers in a
    /// different residue class, the identity otherwise.
    pub fn repair_matrix(&self, i: usize, j: usize) -> Projection {
        if i % self.n_prime == j % self.n_prime {
            Projection::Identity(self.sub_packetization)
        } else {
            self.base_repair[i % self.n_prime].clone()
        }
    }

    pub fn select_matrix(&self, i: usize, t: usize) -> Projection {
        self.base_select[i % self.n_prime][t].clone()
    }
}

/// A fully materialized code.
#[derive(Debug, Clone)]
pub struct ConstructedCode {
    spec: CodeSpec,
    field: Field,
    assignment: Assignment,
    /// Parity grid, index `t * n + i`.
    blocks: Vec<Block>,
    repair: RepairRule,
}

impl ConstructedCode {
    pub(crate) fn from_parts(
        spec: CodeSpec,
        field: Field,
        assignment: Assignment,
        blocks: Vec<Block>,
        repair: RepairRule,
    ) -> ConstructedCode {
        debug_assert_eq!(blocks.len(), spec.r * spec.n);
        ConstructedCode { spec, field, assignment, blocks, repair }
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn repair_rule(&self) -> &RepairRule {
        &self.repair
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn r(&self) -> usize {
        self.spec.r
    }

    /// Sub-packetization level `N`.
    pub fn sub_packetization(&self) -> usize {
        self.spec.sub_packetization
    }

    pub fn block(&self, t: usize, i: usize) -> &Block {
        &self.blocks[t * self.spec.n + i]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_sparse(&self, t: usize, i: usize) -> SparseMat {
        self.block(t, i).to_sparse(&self.field)
    }

    pub fn block_dense(&self, t: usize, i: usize) -> Mat {
        self.block(t, i).to_dense(&self.field)
    }

    /// `A_i = A_{1,i}`, the generator of node `i` in power form.
    pub fn generator(&self, i: usize) -> SparseMat {
        if self.spec.r > 1 {
            self.block_sparse(1, i)
        } else {
            SparseMat::identity(self.sub_packetization())
        }
    }

    pub fn repair_matrix(&self, i: usize, j: usize) -> Projection {
        self.repair.repair_matrix(i, j)
    }

    pub fn select_matrix(&self, i: usize, t: usize) -> Projection {
        self.repair.select_matrix(i, t)
    }

    /// The whole `rN x nN` parity-check matrix, dense.
    pub fn parity_check_dense(&self) -> Mat {
        let grid: Vec<Vec<Mat>> =
            (0..self.r()).map(|t| (0..self.n()).map(|i| self.block_dense(t, i)).collect()).collect();
        Mat::block_assemble(&grid).expect("uniform block sizes")
    }

    /// Copy of this code with every block of node `to` replaced by the
    /// blocks of node `from`. Used to build negative controls.
    pub fn with_node_copied(&self, from: usize, to: usize) -> ConstructedCode {
        let mut out = self.clone();
        for t in 0..self.r() {
            out.blocks[t * self.n() + to] = self.blocks[t * self.n() + from].clone();
        }
        out
    }

    /// Copy with one block replaced.
    pub fn with_block(&self, t: usize, i: usize, block: Block) -> ConstructedCode {
        let mut out = self.clone();
        out.blocks[t * self.n() + i] = block;
        out
    }

    /// Copy with a different coefficient table but the same blocks.
    pub fn with_assignment(&self, assignment: Assignment) -> ConstructedCode {
        let mut out = self.clone();
        out.assignment = assignment;
        out
    }
}
