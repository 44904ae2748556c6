//! The five length-extended families with explicit coefficient schedules,
//! plus the search-backed fallbacks.

use crate::gf::{prime_power, Fe, Field, MAX_ORDER};

use super::bases::{
    build_long_c4p, default_diagonal_lambdas, default_long_lambdas, diagonal_base, permutation_lambdas,
};
use super::search::{search_coefficients, SearchOptions};
use super::spec::CodeSpec;
use super::{assemble, Assignment, CodeError, ConstructedCode, Family};

/// Admissibility rule for a field order `q`: `q > bound` plus optional
/// divisibility conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRule {
    pub bound: u64,
    /// `r | (q - 1)`.
    pub order_divisible_by: Option<u64>,
    pub odd: bool,
    /// `(q - 1) ∤ value`.
    pub order_not_dividing: Option<u64>,
}

impl FieldRule {
    pub fn above(bound: u64) -> FieldRule {
        FieldRule { bound, order_divisible_by: None, odd: false, order_not_dividing: None }
    }

    pub fn order_divisible_by(mut self, r: u64) -> FieldRule {
        self.order_divisible_by = Some(r);
        self
    }

    pub fn odd(mut self) -> FieldRule {
        self.odd = true;
        self
    }

    pub fn order_not_dividing(mut self, v: u64) -> FieldRule {
        self.order_not_dividing = Some(v);
        self
    }

    fn side_conditions(&self, q: u64) -> Option<String> {
        if let Some(r) = self.order_divisible_by {
            if !(q - 1).is_multiple_of(r) {
                return Some(format!("{r} must divide q - 1"));
            }
        }
        if self.odd && q.is_multiple_of(2) {
            return Some("q must be odd".into());
        }
        if let Some(v) = self.order_not_dividing {
            if v % (q - 1) == 0 {
                return Some(format!("q - 1 must not divide {v}"));
            }
        }
        None
    }

    pub fn accepts(&self, q: u64) -> bool {
        q > self.bound && prime_power(q).is_some() && self.side_conditions(q).is_none()
    }

    fn extra(&self) -> String {
        let mut parts = Vec::new();
        if let Some(r) = self.order_divisible_by {
            parts.push(format!("{r} | q - 1"));
        }
        if self.odd {
            parts.push("q odd".to_string());
        }
        if let Some(v) = self.order_not_dividing {
            parts.push(format!("q - 1 ∤ {v}"));
        }
        if parts.is_empty() {
            String::new()
        } else {
            format!(" with {}", parts.join(", "))
        }
    }

    /// Validates a caller-supplied field, or picks the default.
    pub fn pick(&self, field: Option<Field>) -> Result<Field, CodeError> {
        match field {
            None => default_field(self),
            Some(f) => {
                let q = f.order() as u64;
                if q <= self.bound {
                    return Err(CodeError::FieldTooSmall { q, bound: self.bound, extra: self.extra() });
                }
                if let Some(reason) = self.side_conditions(q) {
                    return Err(CodeError::BadField { q: q as u32, reason });
                }
                Ok(f)
            }
        }
    }
}

/// Smallest prime power admitted by `rule`.
pub fn default_field(rule: &FieldRule) -> Result<Field, CodeError> {
    let q = crate::gf::smallest_prime_power_above(rule.bound, |q| rule.accepts(q))
        .ok_or_else(|| CodeError::NoAdmissibleField { bound: rule.bound, extra: rule.extra() })?;
    Ok(Field::new(q)?)
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Generic existence bound `N * C(n-1, r-1) + 1`.
pub(crate) fn generic_bound(big_n: usize, n: usize, r: usize) -> Result<u64, CodeError> {
    let b = big_n as u128 * binomial(n as u64 - 1, r as u64 - 1) + 1;
    if b >= MAX_ORDER as u128 {
        return Err(CodeError::NoAdmissibleField { bound: b.min(u64::MAX as u128) as u64, extra: String::new() });
    }
    Ok(b as u64)
}

/// The admissibility rule for `family` at the given parameters.
pub fn field_bound(family: Family, n: usize, r: usize, n_prime: usize) -> Result<FieldRule, CodeError> {
    let m = family.axis_count(r, n_prime)?;
    let big_n = r.pow(m as u32);
    let s = n.div_ceil(n_prime) as u64;
    let (n64, r64, np) = (n as u64, r as u64, n_prime as u64);
    let blocks = |unit: u64, tail: u64| -> u64 {
        // unit * (ceil(n / unit) - 1) + tail when 0 < n % unit < n', else unit * ceil(n / unit)
        let rem = n64 % unit;
        if rem > 0 && rem < np {
            unit * (n64.div_ceil(unit) - 1) + tail
        } else {
            unit * n64.div_ceil(unit)
        }
    };
    Ok(match family {
        Family::Yb1 => FieldRule::above(r64 * np),
        Family::Yb2 => FieldRule::above(np),
        Family::Iyb2 => FieldRule::above(2).order_not_dividing(r64 - 1),
        Family::LongC4p if r == 2 => FieldRule::above(2 * m as u64),
        Family::LongC4p => FieldRule::above(generic_bound(big_n, n_prime, r)?),
        Family::C1 | Family::C5 => FieldRule {
            order_divisible_by: (family == Family::C1).then_some(r64),
            ..FieldRule::above(blocks(r64 * np, r64 * (n64 % np)))
        },
        Family::C2 => FieldRule::above(r64 * np.div_ceil(r64) * (s - 1) + np),
        Family::C3 if r.is_multiple_of(2) => FieldRule::above(s).odd().order_not_dividing(r64 - 1),
        Family::C3 => FieldRule::above(r64 * s).order_not_dividing(r64 - 1),
        Family::C4 if r == 2 => {
            let m64 = m as u64;
            let rem = n64 % np;
            if rem > 0 && rem < m64 {
                FieldRule::above(2 * m64 * (s - 1) + 2 * rem)
            } else {
                FieldRule::above(2 * m64 * s)
            }
        }
        Family::C4 => FieldRule::above(generic_bound(big_n, n, r)?),
        Family::Custom => FieldRule::above((r64 * np).max(generic_bound(big_n, n, r)?)),
    })
}

fn pick(family: Family, n: usize, r: usize, n_prime: usize, field: Option<Field>) -> Result<Field, CodeError> {
    field_bound(family, n, r, n_prime)?.pick(field)
}

fn power_table(f: &Field, r: usize, n: usize, exponent: impl Fn(usize, usize) -> i64, c: Fe) -> Vec<Vec<Fe>> {
    (0..r).map(|t| (0..n).map(|i| f.pow(c, exponent(t, i)).unwrap()).collect()).collect()
}

fn empty_assignment(generator: Fe) -> Assignment {
    Assignment {
        generator,
        lambdas: Vec::new(),
        xs: Vec::new(),
        ys: Vec::new(),
        zs: Vec::new(),
        xis: Vec::new(),
        search: None,
    }
}

/// Diagonal base with `lambda_{i',t} = delta^t c^i'` and
/// `x_{t,i} = (c^(z n') delta^v)^t` for `i = z r n' + v n' + i'`.
pub fn build_c1(n_prime: usize, r: usize, n: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let f = pick(Family::C1, n, r, n_prime, field)?;
    let spec = CodeSpec::new(Family::C1, n, r, n_prime, f.order(), None)?;
    let c = f.primitive();
    let delta = f.rth_root_of_unity(r as u64)?;
    let lambdas = (0..n_prime)
        .map(|i| (0..r).map(|t| f.mul(f.pow(delta, t as i64).unwrap(), f.pow(c, i as i64).unwrap())).collect())
        .collect();
    let xs = (0..r)
        .map(|t| {
            (0..n)
                .map(|i| {
                    let z = i / (r * n_prime);
                    let v = (i / n_prime) % r;
                    let base = f.mul(f.pow(c, (z * n_prime) as i64).unwrap(), f.pow(delta, v as i64).unwrap());
                    f.pow(base, t as i64).unwrap()
                })
                .collect()
        })
        .collect();
    assemble(spec, f, Assignment { lambdas, xs, ..empty_assignment(c) })
}

/// Permutation base with `x_{t,i} = c^(floor(i/n') ceil(n'/r) t)`.
pub fn build_c2(n_prime: usize, r: usize, n: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let f = pick(Family::C2, n, r, n_prime, field)?;
    let spec = CodeSpec::new(Family::C2, n, r, n_prime, f.order(), None)?;
    let c = f.primitive();
    let step = n_prime.div_ceil(r);
    let xs = power_table(&f, r, n, |t, i| ((i / n_prime) * step * t) as i64, c);
    let lambdas = permutation_lambdas(&f, c, n_prime, false);
    assemble(spec, f, Assignment { lambdas, xs, ..empty_assignment(c) })
}

/// Improved permutation base with `x_{t,i} = c^(floor(i/n') t)`.
pub fn build_c3(n_prime: usize, r: usize, n: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let f = pick(Family::C3, n, r, n_prime, field)?;
    let c = f.primitive();
    c3_with(n_prime, r, n, f, c)
}

/// [`build_c3`] with an explicit generator `c` in place of the field's
/// designated primitive element.
pub fn build_c3_with_generator(
    n_prime: usize,
    r: usize,
    n: usize,
    field: Option<Field>,
    generator: u32,
) -> Result<ConstructedCode, CodeError> {
    let f = pick(Family::C3, n, r, n_prime, field)?;
    let c = f.elem(generator)?;
    if c.is_zero() || f.pow(c, r as i64 - 1)? == Fe::ONE {
        return Err(CodeError::BadLambdas(format!("generator {c} is zero or its order divides r - 1 = {}", r - 1)));
    }
    c3_with(n_prime, r, n, f, c)
}

fn c3_with(n_prime: usize, r: usize, n: usize, f: Field, c: Fe) -> Result<ConstructedCode, CodeError> {
    let spec = CodeSpec::new(Family::C3, n, r, n_prime, f.order(), None)?;
    let xs = power_table(&f, r, n, |t, i| ((i / n_prime) * t) as i64, c);
    let lambdas = permutation_lambdas(&f, c, n_prime, true);
    assemble(spec, f, Assignment { lambdas, xs, ..empty_assignment(c) })
}

/// Long base with `r = 2`, `n' = 3m` and `z_{t,i} = c^(2 m t floor(i/n'))`.
pub fn build_c4_r2(m: usize, n: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    build_c4_explicit(m, 2, n, field)
}

/// The explicit long-code family; only `r = 2` has a closed form.
pub fn build_c4_explicit(m: usize, r: usize, n: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    if r != 2 {
        return Err(CodeError::UnsupportedR(r));
    }
    let n_prime = 3 * m;
    let f = pick(Family::C4, n, r, n_prime, field)?;
    let spec = CodeSpec::new(Family::C4, n, r, n_prime, f.order(), None)?;
    let c = f.primitive();
    let zs = power_table(&f, r, n, |t, i| (2 * m * t * (i / n_prime)) as i64, c);
    let asg = Assignment {
        lambdas: default_long_lambdas(&f, c, m, r),
        xs: zs.clone(),
        ys: Assignment::ones(r, n_prime),
        zs,
        ..empty_assignment(c)
    };
    assemble(spec, f, asg)
}

/// Long-code family for any `r`: explicit for `r = 2`, coefficient search
/// over `q > N C(n-1, r-1) + 1` otherwise.
pub fn build_c4(
    m: usize,
    r: usize,
    n: usize,
    field: Option<Field>,
    opts: SearchOptions,
) -> Result<ConstructedCode, CodeError> {
    if r == 2 {
        return build_c4_explicit(m, r, n, field);
    }
    let n_prime = (r + 1) * m;
    let f = pick(Family::C4, n, r, n_prime, field)?;
    let base = build_long_c4p(m, r, Some(f.clone()), None, None)?;
    let mut asg = search_coefficients(&base, n, opts)?;
    asg.zs = (0..r).map(|t| (0..n).map(|i| f.mul(asg.xs[t][i], asg.ys[t][i % n_prime])).collect()).collect();
    let spec = CodeSpec::new(Family::C4, n, r, n_prime, f.order(), Some(opts.seed))?;
    assemble(spec, f, asg)
}

/// Number of distinct values the direct diagonal family needs.
pub(crate) fn xi_layout(n: usize, r: usize, n_prime: usize) -> Vec<usize> {
    // nodes per z-group that receive their own values
    let group = r * n_prime;
    let rem = n % group;
    if rem > 0 && rem < n_prime {
        let mut v = vec![n_prime; n / group];
        v.push(n % n_prime);
        v
    } else {
        vec![n_prime; n.div_ceil(group)]
    }
}

/// Diagonal blocks with `lambda_{i,t} = xi^(z)_{i', (t+u) mod r}` for
/// `i = z r n' + u n' + i'`; the `xi` are consecutive powers of `c` in
/// `(z, i', v)` order.
pub fn build_c5(n_prime: usize, r: usize, n: usize, field: Option<Field>) -> Result<ConstructedCode, CodeError> {
    let f = pick(Family::C5, n, r, n_prime, field)?;
    let spec = CodeSpec::new(Family::C5, n, r, n_prime, f.order(), None)?;
    let c = f.primitive();
    let mut next = 0i64;
    let xis: Vec<Vec<Vec<Fe>>> = xi_layout(n, r, n_prime)
        .into_iter()
        .map(|count| {
            (0..count)
                .map(|_| {
                    (0..r)
                        .map(|_| {
                            let v = f.exp(next);
                            next += 1;
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let lambdas = (0..n)
        .map(|i| {
            let z = i / (r * n_prime);
            let u = (i / n_prime) % r;
            let ip = i % n_prime;
            (0..r).map(|t| xis[z][ip][(t + u) % r]).collect()
        })
        .collect();
    let asg = Assignment { lambdas, xs: Assignment::ones(r, n), xis, ..empty_assignment(c) };
    assemble(spec, f, asg)
}

/// Diagonal base with eigenvalues `c^(i r + t)`, extended to length `n`
/// with searched coefficients over `q > N C(n-1, r-1) + 1`.
pub fn build_custom(
    n_prime: usize,
    r: usize,
    n: usize,
    field: Option<Field>,
    opts: SearchOptions,
) -> Result<ConstructedCode, CodeError> {
    let f = pick(Family::Custom, n, r, n_prime, field)?;
    let lambdas = default_diagonal_lambdas(&f, f.primitive(), n_prime, r);
    let base = diagonal_base(n_prime, r, &f, &lambdas)?;
    let asg = search_coefficients(&base, n, opts)?;
    let spec = CodeSpec::new(Family::Custom, n, r, n_prime, f.order(), Some(opts.seed))?;
    assemble(spec, f, asg)
}
