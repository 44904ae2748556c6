//! Randomized or exhaustive search for transform coefficients that make
//! the extended code MDS.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf::Fe;
use crate::verify;

use super::spec::CodeSpec;
use super::transform::{derived_family, transform_into};
use super::{Assignment, CodeError, ConstructedCode, SearchRecord};

pub const DEFAULT_BUDGET: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of candidate assignments to test.
    pub budget: u64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions { budget: DEFAULT_BUDGET, seed: DEFAULT_SEED }
    }
}

fn advance(xs: &mut [Vec<Fe>], q: u32) -> bool {
    for v in xs.iter_mut().flatten() {
        if v.value() + 1 < q {
            *v = Fe(v.0 + 1);
            return true;
        }
        *v = Fe::ONE;
    }
    false
}

/// Finds `x_{t,j}` for which the extension of `base` to length `n` passes
/// the full determinant MDS check. The all-ones table is tried first.
/// When `(q-1)^(r n)` fits the budget every table is enumerated; otherwise
/// tables are drawn from a ChaCha8 stream seeded with `opts.seed`.
pub fn search_coefficients(base: &ConstructedCode, n: usize, opts: SearchOptions) -> Result<Assignment, CodeError> {
    let bspec = base.spec();
    let f = base.field().clone();
    let q = f.order();
    if q < 3 {
        return Err(CodeError::BadField { q, reason: "search needs at least two nonzero elements".into() });
    }
    let big_n = bspec.sub_packetization;
    for t in 0..bspec.r {
        for i in 0..bspec.n {
            if base.block_sparse(t, i).rank(&f) != big_n {
                return Err(CodeError::InvalidSpec(format!("base block ({t}, {i}) is singular")));
            }
        }
    }
    let r = bspec.r;
    let family = derived_family(bspec.family)
        .ok_or_else(|| CodeError::InvalidSpec(format!("{} is not a base code", bspec.family)))?;
    let spec = CodeSpec::new(family, n, r, bspec.n_prime, q, Some(opts.seed))?;
    let space = (q as u128 - 1).checked_pow((r * n) as u32);
    let exhaustive = space.is_some_and(|s| s <= opts.budget as u128);

    let mut trials: u64 = 0;
    let try_table = |xs: &[Vec<Fe>], trials: &mut u64| -> Result<Option<Assignment>, CodeError> {
        *trials += 1;
        let mut asg = base.assignment().clone();
        asg.xs = xs.to_vec();
        let code = transform_into(base, spec.clone(), asg.clone())?;
        let ok = verify::mds_holds(&code).map_err(|e| CodeError::InvalidSpec(e.to_string()))?;
        Ok(ok.then_some(asg))
    };

    let mut xs = Assignment::ones(r, n);
    if let Some(asg) = try_table(&xs, &mut trials)? {
        return Ok(finish(asg, opts.seed, 1, exhaustive));
    }
    if exhaustive {
        while advance(&mut xs, q) {
            if let Some(asg) = try_table(&xs, &mut trials)? {
                let used = trials;
                return Ok(finish(asg, opts.seed, used, true));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        while trials < opts.budget {
            for v in xs.iter_mut().flatten() {
                *v = Fe(rng.gen_range(1..q) as u16);
            }
            if let Some(asg) = try_table(&xs, &mut trials)? {
                let used = trials;
                return Ok(finish(asg, opts.seed, used, false));
            }
        }
    }
    Err(CodeError::SearchExhausted { trials })
}

fn finish(mut asg: Assignment, seed: u64, trials: u64, exhaustive: bool) -> Assignment {
    asg.search = Some(SearchRecord { seed, trials, exhaustive });
    asg
}
