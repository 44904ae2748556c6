use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gf::Field;
use crate::partitions::radix_size;

use super::search::{SearchOptions, DEFAULT_BUDGET, DEFAULT_SEED};
use super::{bases, families, CodeError, ConstructedCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "YB1")]
    Yb1,
    #[serde(rename = "YB2")]
    Yb2,
    #[serde(rename = "iYB2")]
    Iyb2,
    LongC4p,
    C1,
    C2,
    C3,
    C4,
    C5,
    Custom,
}

/// Which base construction a family is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BaseKind {
    Diagonal,
    Permutation {
        improved: bool,
    },
    Long,
    /// Not a transform: per-node diagonal blocks.
    Direct,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Yb1,
        Family::Yb2,
        Family::Iyb2,
        Family::LongC4p,
        Family::C1,
        Family::C2,
        Family::C3,
        Family::C4,
        Family::C5,
        Family::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Yb1 => "YB1",
            Family::Yb2 => "YB2",
            Family::Iyb2 => "iYB2",
            Family::LongC4p => "LongC4p",
            Family::C1 => "C1",
            Family::C2 => "C2",
            Family::C3 => "C3",
            Family::C4 => "C4",
            Family::C5 => "C5",
            Family::Custom => "Custom",
        }
    }

    /// Stable one-byte tag used in shard headers.
    pub fn code(self) -> u8 {
        Family::ALL.iter().position(|&f| f == self).unwrap() as u8
    }

    pub fn from_code(code: u8) -> Option<Family> {
        Family::ALL.get(code as usize).copied()
    }

    pub fn is_base(self) -> bool {
        matches!(self, Family::Yb1 | Family::Yb2 | Family::Iyb2 | Family::LongC4p)
    }

    pub(crate) fn base_kind(self) -> BaseKind {
        match self {
            Family::Yb1 | Family::C1 | Family::Custom => BaseKind::Diagonal,
            Family::Yb2 | Family::C2 => BaseKind::Permutation { improved: false },
            Family::Iyb2 | Family::C3 => BaseKind::Permutation { improved: true },
            Family::LongC4p | Family::C4 => BaseKind::Long,
            Family::C5 => BaseKind::Direct,
        }
    }

    /// Number of r-ary digits `m` with `N = r^m`.
    pub fn axis_count(self, r: usize, n_prime: usize) -> Result<usize, CodeError> {
        match self.base_kind() {
            BaseKind::Diagonal | BaseKind::Direct => Ok(n_prime),
            BaseKind::Permutation { .. } => {
                if n_prime < 2 {
                    Err(CodeError::InvalidSpec(format!("{} needs n' >= 2", self.name())))
                } else {
                    Ok(n_prime - 1)
                }
            }
            BaseKind::Long => {
                if !n_prime.is_multiple_of(r + 1) || n_prime == 0 {
                    Err(CodeError::InvalidSpec(format!("{} needs n' divisible by r + 1 = {}", self.name(), r + 1)))
                } else {
                    Ok(n_prime / (r + 1))
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Family, CodeError> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CodeError::InvalidSpec(format!("unknown family {s:?}")))
    }
}

/// Code parameters. `k = n - r`, `N = r^m`, `s = ceil(n / n')`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub n_prime: usize,
    pub m: usize,
    pub sub_packetization: usize,
    pub q: u32,
    pub s: usize,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalSpec {
    family: Family,
    n: usize,
    r: usize,
    n_prime: usize,
    m: usize,
    q: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl CodeSpec {
    pub fn new(
        family: Family,
        n: usize,
        r: usize,
        n_prime: usize,
        q: u32,
        seed: Option<u64>,
    ) -> Result<CodeSpec, CodeError> {
        if n <= r {
            return Err(CodeError::InvalidSpec(format!("need k = n - r >= 1, got n = {n}, r = {r}")));
        }
        CodeSpec::new_internal(family, n, r, n_prime, q, seed)
    }

    /// Like [`CodeSpec::new`] but allows `n <= r`, which only occurs for
    /// short base codes feeding a transform.
    pub(crate) fn new_internal(
        family: Family,
        n: usize,
        r: usize,
        n_prime: usize,
        q: u32,
        seed: Option<u64>,
    ) -> Result<CodeSpec, CodeError> {
        if r < 2 {
            return Err(CodeError::InvalidSpec(format!("r must be at least 2, got {r}")));
        }
        if n_prime == 0 || n_prime > n {
            return Err(CodeError::InvalidSpec(format!("need 1 <= n' <= n, got n' = {n_prime}, n = {n}")));
        }
        if family.is_base() && n != n_prime {
            return Err(CodeError::InvalidSpec(format!("base family {family} needs n = n', got {n} and {n_prime}")));
        }
        if n > u16::MAX as usize {
            return Err(CodeError::InvalidSpec(format!("n = {n} is too large")));
        }
        let m = family.axis_count(r, n_prime)?;
        let big_n = radix_size(r as u32, m as u32)
            .map_err(|_| CodeError::InvalidSpec(format!("sub-packetization {r}^{m} is too large")))?;
        Ok(CodeSpec {
            family,
            n,
            k: n.saturating_sub(r),
            r,
            n_prime,
            m,
            sub_packetization: big_n as usize,
            q,
            s: n.div_ceil(n_prime),
            seed,
        })
    }

    /// Canonical JSON: keys `family, n, r, n_prime, m, q` and `seed` when set.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&CanonicalSpec {
            family: self.family,
            n: self.n,
            r: self.r,
            n_prime: self.n_prime,
            m: self.m,
            q: self.q,
            seed: self.seed,
        })
        .expect("spec serializes")
    }

    /// Parses the output of [`CodeSpec::canonical_json`].
    pub fn from_canonical_json(text: &str) -> Result<CodeSpec, CodeError> {
        let c: CanonicalSpec = serde_json::from_str(text).map_err(|e| CodeError::InvalidSpec(e.to_string()))?;
        let spec = CodeSpec::new_internal(c.family, c.n, c.r, c.n_prime, c.q, c.seed)?;
        if spec.m != c.m {
            return Err(CodeError::InvalidSpec(format!(
                "m = {} does not match n_prime = {} for {}",
                c.m, c.n_prime, c.family
            )));
        }
        Ok(spec)
    }

    /// Optimal bandwidth `(n-1) N / r`, which is always an integer here.
    pub fn gamma_star(&self) -> usize {
        (self.n - 1) * self.sub_packetization / self.r
    }
}

/// User-facing configuration. Omitted fields take family defaults:
/// `n_prime` from `m` for the long families (or `n` for base families),
/// `q` from the family's field bound.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub r: Option<usize>,
    #[serde(default)]
    pub n_prime: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub q: Option<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Trial budget for coefficient search.
    #[serde(default)]
    pub budget: Option<u64>,
}

impl CodeConfig {
    fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T, CodeError> {
        v.ok_or_else(|| CodeError::InvalidSpec(format!("missing field {name:?}")))
    }

    /// Resolves `(family, n, r, n')`.
    pub fn resolve(&self) -> Result<(Family, usize, usize, usize), CodeError> {
        let family = Self::require(self.family, "family")?;
        let r = Self::require(self.r, "r")?;
        let n_prime = match (self.n_prime, self.m, family.base_kind()) {
            (Some(np), Some(m), _) => {
                if family.axis_count(r, np)? != m {
                    return Err(CodeError::InvalidSpec(format!("n_prime = {np} and m = {m} disagree for {family}")));
                }
                np
            }
            (Some(np), None, _) => np,
            (None, Some(m), super::spec::BaseKind::Long) => (r + 1) * m,
            (None, Some(m), super::spec::BaseKind::Permutation { .. }) => m + 1,
            (None, Some(m), _) => m,
            (None, None, _) if family.is_base() => Self::require(self.n, "n")?,
            (None, None, _) => return Err(CodeError::InvalidSpec("missing field \"n_prime\"".into())),
        };
        let n = if family.is_base() { self.n.unwrap_or(n_prime) } else { Self::require(self.n, "n")? };
        Ok((family, n, r, n_prime))
    }
}

/// Builds the code a configuration describes.
pub fn build_from_config(cfg: &CodeConfig) -> Result<ConstructedCode, CodeError> {
    let (family, n, r, n_prime) = cfg.resolve()?;
    let field = cfg.q.map(|q| Field::new(q as u64)).transpose()?;
    let opts = SearchOptions { budget: cfg.budget.unwrap_or(DEFAULT_BUDGET), seed: cfg.seed.unwrap_or(DEFAULT_SEED) };
    if family.is_base() && n != n_prime {
        return Err(CodeError::InvalidSpec(format!("base family {family} needs n = n', got {n} and {n_prime}")));
    }
    match family {
        Family::Yb1 => bases::build_yb1_default(n_prime, r, field),
        Family::Yb2 => bases::build_yb2(n_prime, r, field),
        Family::Iyb2 => bases::build_iyb2(n_prime, r, field),
        Family::LongC4p => {
            let m = family.axis_count(r, n_prime)?;
            bases::build_long_c4p(m, r, field, None, None)
        }
        Family::C1 => families::build_c1(n_prime, r, n, field),
        Family::C2 => families::build_c2(n_prime, r, n, field),
        Family::C3 => families::build_c3(n_prime, r, n, field),
        Family::C4 => {
            let m = family.axis_count(r, n_prime)?;
            if r == 2 {
                families::build_c4_r2(m, n, field)
            } else {
                families::build_c4(m, r, n, field, opts)
            }
        }
        Family::C5 => families::build_c5(n_prime, r, n, field),
        Family::Custom => families::build_custom(n_prime, r, n, field, opts),
    }
}
