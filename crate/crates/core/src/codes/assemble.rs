use crate::gf::Field;

use super::bases::{diagonal_base, eigen_diagonal, long_base, permutation_base, sum_all_rule};
use super::spec::{BaseKind, CodeSpec};
use super::transform::transform_into;
use super::{Assignment, Block, CodeError, ConstructedCode};

/// Materializes a code from its parameters and coefficient tables. Tables
/// are taken as given; distinctness constraints are left to verification.
pub fn assemble(spec: CodeSpec, field: Field, asg: Assignment) -> Result<ConstructedCode, CodeError> {
    if field.order() != spec.q {
        return Err(CodeError::InvalidSpec(format!("spec names q = {} but field has order {}", spec.q, field.order())));
    }
    if !field.contains(asg.generator) {
        return Err(CodeError::InvalidSpec(format!("generator {} outside GF({})", asg.generator, spec.q)));
    }
    let bad = asg.lambdas.iter().chain(&asg.xs).chain(&asg.ys).flatten().find(|v| !field.contains(**v));
    if let Some(v) = bad {
        return Err(CodeError::InvalidSpec(format!("coefficient {v} outside GF({})", spec.q)));
    }
    let (r, n_prime) = (spec.r, spec.n_prime);
    let base = match spec.family.base_kind() {
        BaseKind::Direct => return direct_diagonal(spec, field, asg),
        BaseKind::Diagonal => diagonal_base(n_prime, r, &field, &asg.lambdas)?,
        BaseKind::Permutation { improved } => {
            permutation_base(n_prime, r, &field, &asg.lambdas, improved, asg.generator)?
        }
        BaseKind::Long => {
            let ys = if asg.ys.is_empty() { Assignment::ones(r, n_prime) } else { asg.ys.clone() };
            long_base(spec.m, r, &field, &asg.lambdas, &ys, asg.generator)?
        }
    };
    transform_into(&base, spec, asg)
}

/// Per-node diagonal blocks `diag(lambda_{i, a_{i mod n'}}^t)`.
fn direct_diagonal(spec: CodeSpec, field: Field, asg: Assignment) -> Result<ConstructedCode, CodeError> {
    let (r, n, m) = (spec.r, spec.n, spec.m);
    if asg.lambdas.len() != n || asg.lambdas.iter().any(|row| row.len() != r) {
        return Err(CodeError::BadLambdas(format!("lambda table must be {n} x {r}")));
    }
    let mut blocks = Vec::with_capacity(r * n);
    for t in 0..r {
        for (i, row) in asg.lambdas.iter().enumerate() {
            blocks.push(Block::new(eigen_diagonal(&field, row, i % spec.n_prime, t, r, m)));
        }
    }
    let rule = sum_all_rule(spec.n_prime, r, m)?;
    Ok(ConstructedCode::from_parts(spec, field, asg, blocks, rule))
}
