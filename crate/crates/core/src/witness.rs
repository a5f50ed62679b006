//! Systems with no nontrivial zero, built from anisotropic quaternary forms.
//!
//! `t` copies of an anisotropic quaternary form on disjoint blocks of
//! variables have no common zero: a nonzero point is nonzero on some block,
//! and that block's form is anisotropic there.

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::oracle::{certify_anisotropic, AnisotropyEvidence, DEFAULT_LIMIT};
use crate::padic::{is_prime, legendre, FieldContext};
use crate::qform::{FormSystem, QuadraticForm};

/// Default precision of witness systems.
pub const WITNESS_PRECISION: u32 = 64;

/// Smallest quadratic non-residue mod an odd prime `p`.
pub fn least_non_residue(p: u64) -> Result<u64> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    for a in 2..p {
        if legendre(a as i64, p)? == -1 {
            return Ok(a);
        }
    }
    unreachable!("every odd prime has a non-residue")
}

/// Diagonal coefficients of the anisotropic quaternary form:
/// `(1, -a, -p, a p)` with `a` the least non-residue, or `(1, 1, 1, 1)` for
/// `p = 2`.
pub fn quaternary_coefficients(p: u64) -> Result<[i64; 4]> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Ok([1, 1, 1, 1]);
    }
    let a = least_non_residue(p)? as i64;
    let pi = p as i64;
    Ok([1, -a, -pi, a * pi])
}

pub fn anisotropic_quaternary(ctx: &FieldContext) -> Result<QuadraticForm> {
    Ok(QuadraticForm::diagonal(ctx, &quaternary_coefficients(ctx.p())?))
}

/// Forms of `a` on the first `n_a` variables, forms of `b` on the rest.
pub fn direct_sum(a: &FormSystem, b: &FormSystem) -> Result<FormSystem> {
    if a.context() != b.context() {
        return Err(Error::ContextMismatch);
    }
    if b.t() == 0 && b.n() == 0 {
        return Ok(a.clone());
    }
    if a.t() == 0 && a.n() == 0 {
        return Ok(b.clone());
    }
    let n = a.n() + b.n();
    let pad = |g: &[Vec<BigRational>], offset: usize| -> Vec<Vec<BigRational>> {
        let mut out = vec![vec![BigRational::zero(); n]; n];
        for (i, row) in g.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                out[offset + i][offset + j] = x.clone();
            }
        }
        out
    };
    let grams =
        a.rational_grams().iter().map(|g| pad(g, 0)).chain(b.rational_grams().iter().map(|g| pad(g, a.n()))).collect();
    FormSystem::from_rational_grams(a.context(), grams)
}

/// Outcome of the per-block exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockEvidence {
    /// No primitive zero mod `p^k`.
    Certified(AnisotropyEvidence),
    /// Every level that proves anisotropy exceeds the search limit.
    Uncertified { p: u64, limit: u64 },
}

impl BlockEvidence {
    pub fn is_certified(&self) -> bool {
        matches!(self, BlockEvidence::Certified(_))
    }
}

#[derive(Debug, Clone)]
pub struct WitnessSystem {
    pub system: FormSystem,
    /// Variables touched by form `i`.
    pub blocks: Vec<Range<usize>>,
    pub evidence: Vec<BlockEvidence>,
}

/// Search level for the quaternary at `p`: mod 8 for `p = 2`, otherwise
/// `p^3` if it fits the limit, else `p^2` (already conclusive for these
/// forms).
pub fn evidence_level(p: u64, limit: u64) -> Option<u32> {
    let fits = |k: u32| (p as u128).checked_pow(4 * k).is_some_and(|pts| pts <= limit as u128);
    if p == 2 {
        return fits(3).then_some(3);
    }
    [3, 2].into_iter().find(|&k| fits(k))
}

pub fn quaternary_evidence(ctx: &FieldContext, limit: u64) -> Result<BlockEvidence> {
    let p = ctx.p();
    match evidence_level(p, limit) {
        Some(k) => Ok(BlockEvidence::Certified(certify_anisotropic(&anisotropic_quaternary(ctx)?, k, limit)?)),
        None => Ok(BlockEvidence::Uncertified { p, limit }),
    }
}

/// `t` forms in `4t` variables with no nontrivial common zero.
pub fn block_witness(t: usize, p: u64) -> Result<WitnessSystem> {
    block_witness_with(t, &FieldContext::new(p, WITNESS_PRECISION)?, DEFAULT_LIMIT)
}

pub fn block_witness_with(t: usize, ctx: &FieldContext, limit: u64) -> Result<WitnessSystem> {
    if t == 0 {
        return Err(Error::Precondition("t must be >= 1".into()));
    }
    let coeffs = quaternary_coefficients(ctx.p())?;
    let block = FormSystem::from_int_grams(
        ctx,
        &[(0..4).map(|i| (0..4).map(|j| if i == j { coeffs[i] } else { 0 }).collect()).collect()],
    )?;
    let mut system = FormSystem::empty(ctx);
    for _ in 0..t {
        system = direct_sum(&system, &block)?;
    }
    let evidence = quaternary_evidence(ctx, limit)?;
    Ok(WitnessSystem { system, blocks: (0..t).map(|i| 4 * i..4 * i + 4).collect(), evidence: vec![evidence; t] })
}

impl WitnessSystem {
    /// Gram matrix of form `i` restricted to its own block, as integers.
    pub fn block_gram(&self, i: usize) -> Vec<Vec<BigInt>> {
        let r = self.blocks[i].clone();
        let g = &self.system.rational_grams()[i];
        r.clone().map(|a| r.clone().map(|b| g[a][b].to_integer()).collect()).collect()
    }
}
