//! Length extension `A_{t,j} = x_{t,j} A'_{t, j mod n'}`. Repair matrices
//! become the identity between nodes of equal residue; select matrices
//! follow the residue.

use crate::gf::Fe;

use super::spec::CodeSpec;
use super::{Assignment, Block, CodeError, ConstructedCode, Family};

/// The family produced by extending a base code.
pub(crate) fn derived_family(base: Family) -> Option<Family> {
    match base {
        Family::Yb1 => Some(Family::Custom),
        Family::Yb2 => Some(Family::C2),
        Family::Iyb2 => Some(Family::C3),
        Family::LongC4p => Some(Family::C4),
        _ => None,
    }
}

fn check_xs(xs: &[Vec<Fe>], r: usize, n: usize) -> Result<(), CodeError> {
    if xs.len() != r || xs.iter().any(|row| row.len() != n) {
        return Err(CodeError::CoverageGap {
            r,
            n,
            got_rows: xs.len(),
            got_cols: xs.iter().map(Vec::len).min().unwrap_or(0),
        });
    }
    for (t, row) in xs.iter().enumerate() {
        if let Some(j) = row.iter().position(|x| x.is_zero()) {
            return Err(CodeError::CoefficientZero { t, j });
        }
    }
    Ok(())
}

/// Extends a base code to length `n` with coefficients `xs[t][j]`.
pub fn transform(base: &ConstructedCode, n: usize, xs: &[Vec<Fe>]) -> Result<ConstructedCode, CodeError> {
    let bspec = base.spec();
    let family = derived_family(bspec.family)
        .filter(|_| bspec.n == bspec.n_prime)
        .ok_or_else(|| CodeError::InvalidSpec(format!("{} is not a base code", bspec.family)))?;
    let spec = CodeSpec::new(family, n, bspec.r, bspec.n_prime, bspec.q, None)?;
    let mut asg = base.assignment().clone();
    asg.xs = xs.to_vec();
    if !asg.ys.is_empty() {
        let f = base.field();
        check_xs(xs, bspec.r, n)?;
        asg.zs =
            (0..bspec.r).map(|t| (0..n).map(|j| f.mul(xs[t][j], asg.ys[t][j % bspec.n_prime])).collect()).collect();
    }
    transform_into(base, spec, asg)
}

/// Builds the extended code with the given target spec and assignment,
/// taking `xs` from the assignment.
pub(crate) fn transform_into(
    base: &ConstructedCode,
    spec: CodeSpec,
    asg: Assignment,
) -> Result<ConstructedCode, CodeError> {
    let (r, n, n_prime) = (spec.r, spec.n, spec.n_prime);
    check_xs(&asg.xs, r, n)?;
    let f = base.field().clone();
    let mut blocks: Vec<Block> = Vec::with_capacity(r * n);
    for t in 0..r {
        for j in 0..n {
            blocks.push(base.block(t, j % n_prime).scaled(&f, asg.xs[t][j]));
        }
    }
    Ok(ConstructedCode::from_parts(spec, f, asg, blocks, base.repair_rule().clone()))
}
