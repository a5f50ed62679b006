//! Finite-precision arithmetic in the p-adic field Q_p.
//!
//! An element is stored as `p^v * unit` with `unit` reduced modulo `p^digits`
//! and coprime to `p`. `digits` is the number of significant digits that are
//! still known; addition with cancellation lowers it. Values that cancel
//! completely become an inexact zero that remembers its absolute precision,
//! so every later "this is zero" decision can be checked against the
//! context's zero-threshold.

use std::borrow::Cow;
use std::cmp::{max, min};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Digits of relative precision below which a nonzero value is rejected.
pub const DEFAULT_DIGIT_FLOOR: u32 = 8;

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation, with `Infinite` for an exact zero.
///
/// For an inexact zero the finite value is the known lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// True when the valuation meets `threshold`.
    pub fn at_least(self, threshold: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= threshold,
            Valuation::Infinite => true,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug)]
struct ContextInner {
    p: u64,
    p_big: BigInt,
    precision: u32,
    max_precision: u32,
    zero_threshold: Option<i64>,
    digit_floor: u32,
    powers: Vec<BigInt>,
}

/// The ambient field Q_p together with its precision policy.
///
/// Cloning is cheap; all elements created from a context share it.
#[derive(Clone, Debug)]
pub struct FieldContext(Arc<ContextInner>);

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.precision == other.0.precision
                && self.zero_threshold() == other.zero_threshold())
    }
}

impl Eq for FieldContext {}

impl FieldContext {
    /// Context with `precision` significant digits and a retry cap of
    /// `max(8 * precision, 512)`.
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        Self::with_max_precision(p, precision, max(precision.saturating_mul(8), 512))
    }

    pub fn with_max_precision(p: u64, precision: u32, max_precision: u32) -> Result<Self> {
        Self::build(p, precision, max_precision, None)
    }

    fn build(p: u64, precision: u32, max_precision: u32, zero_threshold: Option<i64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 || precision > max_precision {
            return Err(Error::InvalidPrecision(format!(
                "need 1 <= precision ({precision}) <= max_precision ({max_precision})"
            )));
        }
        let p_big = BigInt::from(p);
        let mut powers = Vec::with_capacity(precision as usize + 3);
        let mut acc = BigInt::one();
        for _ in 0..precision + 3 {
            powers.push(acc.clone());
            acc *= &p_big;
        }
        Ok(FieldContext(Arc::new(ContextInner {
            p,
            p_big,
            precision,
            max_precision,
            zero_threshold,
            digit_floor: min(DEFAULT_DIGIT_FLOOR, precision),
            powers,
        })))
    }

    /// Same field with an explicit zero-threshold.
    pub fn with_zero_threshold(&self, threshold: i64) -> Self {
        let inner = &self.0;
        let mut ctx = Self::build(inner.p, inner.precision, inner.max_precision, Some(threshold))
            .expect("parameters already validated");
        Arc::get_mut(&mut ctx.0).unwrap().digit_floor = inner.digit_floor;
        ctx
    }

    /// Same field and policy at a different precision. A custom
    /// zero-threshold is carried over unchanged.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        let inner = &self.0;
        Self::build(inner.p, precision, max(inner.max_precision, precision), inner.zero_threshold)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn p_big(&self) -> &BigInt {
        &self.0.p_big
    }

    pub fn precision(&self) -> u32 {
        self.0.precision
    }

    pub fn max_precision(&self) -> u32 {
        self.0.max_precision
    }

    pub fn digit_floor(&self) -> u32 {
        self.0.digit_floor
    }

    /// Valuation at or above which a computed value counts as zero.
    ///
    /// Defaults to `N - N/4` so that elimination and lifting may spend a
    /// quarter of the working digits before a zero decision becomes
    /// ambiguous.
    pub fn zero_threshold(&self) -> i64 {
        let n = self.0.precision as i64;
        self.0.zero_threshold.unwrap_or(n - n / 4)
    }

    pub fn pow(&self, k: u32) -> Cow<'_, BigInt> {
        match self.0.powers.get(k as usize) {
            Some(x) => Cow::Borrowed(x),
            None => Cow::Owned(num_traits::pow(self.0.p_big.clone(), k as usize)),
        }
    }

    pub fn zero(&self) -> Padic {
        Padic { ctx: self.clone(), repr: Repr::Zero(None) }
    }

    pub fn one(&self) -> Padic {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Padic {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Padic {
        if n.is_zero() {
            return self.zero();
        }
        let (v, rest) = split_valuation(n, self.p());
        Padic::unit_part(self.clone(), v as i64, rest, self.precision())
    }

    /// Image of `num / den` in Q_p.
    pub fn from_rational(&self, num: &BigInt, den: &BigInt) -> Result<Padic> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(self.zero());
        }
        let (vn, un) = split_valuation(num, self.p());
        let (vd, ud) = split_valuation(den, self.p());
        let digits = self.precision();
        let modulus = self.pow(digits);
        let inv = mod_inverse(&ud, &modulus).expect("unit part is coprime to p");
        Ok(Padic::unit_part(self.clone(), vn as i64 - vd as i64, un * inv, digits))
    }

    pub fn from_big_rational(&self, q: &BigRational) -> Result<Padic> {
        self.from_rational(q.numer(), q.denom())
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Result<Padic> {
        self.from_rational(&BigInt::from(num), &BigInt::from(den))
    }
}

/// Splits `n != 0` as `p^v * rest` with `p` not dividing `rest`.
pub(crate) fn split_valuation(n: &BigInt, p: u64) -> (u32, BigInt) {
    debug_assert!(!n.is_zero());
    let p_big = BigInt::from(p);
    let mut rest = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = rest.div_rem(&p_big);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

pub(crate) fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    if modulus.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(modulus).extended_gcd(modulus);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(modulus))
}

fn mod_pow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Legendre symbol `(u / p)` for an odd prime `p` and a unit `u`.
pub fn legendre(u: i64, p: u64) -> Result<i8> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let r = (u as i128).rem_euclid(p as i128) as u64;
    if r == 0 {
        return Err(Error::NonUnit(u, p));
    }
    Ok(if mod_pow_u64(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Smallest `r` in `[0, p)` with `r^2 = a (mod p)`, for an odd prime `p`.
///
/// Tonelli-Shanks, then the smaller of the two roots.
pub(crate) fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if mod_pow_u64(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mul = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow_u64(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow_u64(z, q, p);
    let mut t = mod_pow_u64(a, q, p);
    let mut r = mod_pow_u64(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul(tt, tt);
            i += 1;
        }
        let b = mod_pow_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    Some(min(r, p - r))
}

#[derive(Clone, Debug)]
enum Repr {
    /// Zero known up to `O(p^abs)`; `None` is an exact zero.
    Zero(Option<i64>),
    Unit {
        v: i64,
        unit: BigInt,
        digits: u32,
    },
}

/// An element of Q_p at finite precision.
#[derive(Clone, Debug)]
pub struct Padic {
    ctx: FieldContext,
    repr: Repr,
}

/// Binary/unary operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
}

/// Applies `op` to `a` and `b` (`b` is ignored for `Neg`).
pub fn arith(a: &Padic, b: &Padic, op: ArithOp) -> Result<Padic> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b),
        ArithOp::Neg => Ok(a.neg()),
    }
}

impl Padic {
    fn unit_part(ctx: FieldContext, v: i64, unit: BigInt, digits: u32) -> Padic {
        let digits = min(digits, ctx.precision());
        let unit = unit.mod_floor(&ctx.pow(digits));
        debug_assert!(!unit.is_zero());
        Padic { ctx, repr: Repr::Unit { v, unit, digits } }
    }

    fn inexact_zero(ctx: FieldContext, abs: i64) -> Padic {
        Padic { ctx, repr: Repr::Zero(Some(abs)) }
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Zero(None) => Valuation::Infinite,
            Repr::Zero(Some(abs)) => Valuation::Finite(*abs),
            Repr::Unit { v, .. } => Valuation::Finite(*v),
        }
    }

    /// Absolute precision: the value is known modulo `p^abs`.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero(abs) => *abs,
            Repr::Unit { v, digits, .. } => Some(v + *digits as i64),
        }
    }

    /// Number of significant digits carried (0 for zeros).
    pub fn digits(&self) -> u32 {
        match &self.repr {
            Repr::Unit { digits, .. } => *digits,
            Repr::Zero(_) => 0,
        }
    }

    /// The unit part, absent for zeros.
    pub fn unit(&self) -> Option<&BigInt> {
        match &self.repr {
            Repr::Unit { unit, .. } => Some(unit),
            Repr::Zero(_) => None,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(None))
    }

    /// Zero by threshold: the (lower bound on the) valuation reaches the
    /// context's zero-threshold.
    pub fn is_zero(&self) -> bool {
        self.valuation().at_least(self.ctx.zero_threshold())
    }

    /// Like [`Padic::is_zero`], but an inexact zero whose precision falls
    /// short of the threshold is reported as exhausted precision instead of
    /// being guessed either way.
    pub fn zero_test(&self) -> Result<bool> {
        let thr = self.ctx.zero_threshold();
        match &self.repr {
            Repr::Zero(None) => Ok(true),
            Repr::Zero(Some(abs)) if *abs >= thr => Ok(true),
            Repr::Zero(Some(abs)) => Err(Error::precision(format!("value is O(p^{abs}), below zero-threshold {thr}"))),
            Repr::Unit { v, .. } => Ok(*v >= thr),
        }
    }

    fn check_ctx(&self, other: &Padic) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    fn check_floor(self) -> Result<Padic> {
        if let Repr::Unit { v, digits, .. } = &self.repr {
            if *digits < self.ctx.digit_floor() && *v < self.ctx.zero_threshold() {
                return Err(Error::precision(format!("only {digits} significant digits left at valuation {v}")));
            }
        }
        Ok(self)
    }

    fn add_raw(&self, other: &Padic) -> Padic {
        let ctx = &self.ctx;
        let abs = match (self.absolute_precision(), other.absolute_precision()) {
            (None, _) => return other.clone(),
            (_, None) => return self.clone(),
            (Some(a), Some(b)) => min(a, b),
        };
        let units: Vec<(i64, &BigInt)> = [&self.repr, &other.repr]
            .into_iter()
            .filter_map(|r| match r {
                Repr::Unit { v, unit, .. } if *v < abs => Some((*v, unit)),
                _ => None,
            })
            .collect();
        let Some(vmin) = units.iter().map(|(v, _)| *v).min() else {
            return Padic::inexact_zero(ctx.clone(), abs);
        };
        let width = (abs - vmin) as u32;
        let modulus = ctx.pow(width);
        let mut sum = BigInt::zero();
        for (v, u) in &units {
            sum += *u * ctx.pow((*v - vmin) as u32).as_ref();
        }
        let sum = sum.mod_floor(&modulus);
        if sum.is_zero() {
            return Padic::inexact_zero(ctx.clone(), abs);
        }
        let (w, rest) = split_valuation(&sum, ctx.p());
        let v = vmin + w as i64;
        Padic::unit_part(ctx.clone(), v, rest, (abs - v) as u32)
    }

    pub fn add(&self, other: &Padic) -> Result<Padic> {
        self.check_ctx(other)?;
        self.add_raw(other).check_floor()
    }

    pub fn sub(&self, other: &Padic) -> Result<Padic> {
        self.check_ctx(other)?;
        self.add_raw(&other.neg()).check_floor()
    }

    pub fn neg(&self) -> Padic {
        match &self.repr {
            Repr::Zero(_) => self.clone(),
            Repr::Unit { v, unit, digits } => {
                let m = self.ctx.pow(*digits);
                Padic {
                    ctx: self.ctx.clone(),
                    repr: Repr::Unit { v: *v, unit: (m.as_ref() - unit).mod_floor(&m), digits: *digits },
                }
            }
        }
    }

    pub fn mul(&self, other: &Padic) -> Result<Padic> {
        self.check_ctx(other)?;
        let ctx = self.ctx.clone();
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero(None), _) | (_, Repr::Zero(None)) => ctx.zero(),
            (Repr::Zero(Some(a)), Repr::Zero(Some(b))) => Padic::inexact_zero(ctx, a + b),
            (Repr::Zero(Some(a)), Repr::Unit { v, .. }) | (Repr::Unit { v, .. }, Repr::Zero(Some(a))) => {
                Padic::inexact_zero(ctx, a + v)
            }
            (Repr::Unit { v: va, unit: ua, digits: da }, Repr::Unit { v: vb, unit: ub, digits: db }) => {
                Padic::unit_part(ctx, va + vb, ua * ub, min(*da, *db))
            }
        })
    }

    pub fn div(&self, other: &Padic) -> Result<Padic> {
        self.check_ctx(other)?;
        let ctx = self.ctx.clone();
        let (vb, ub, db) = match &other.repr {
            Repr::Zero(None) => return Err(Error::DivisionByZero),
            Repr::Zero(Some(_)) => {
                return if other.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Err(Error::precision("divisor is an undetermined zero"))
                }
            }
            Repr::Unit { v, unit, digits } => (*v, unit, *digits),
        };
        Ok(match &self.repr {
            Repr::Zero(None) => ctx.zero(),
            Repr::Zero(Some(a)) => Padic::inexact_zero(ctx, a - vb),
            Repr::Unit { v, unit, digits } => {
                let d = min(*digits, db);
                let inv = mod_inverse(ub, &ctx.pow(d)).expect("units are invertible");
                Padic::unit_part(ctx, v - vb, unit * inv, d)
            }
        })
    }

    /// Multiplies by `p^k`; exact, no digits are lost.
    pub fn shift(&self, k: i64) -> Padic {
        let repr = match &self.repr {
            Repr::Zero(None) => Repr::Zero(None),
            Repr::Zero(Some(a)) => Repr::Zero(Some(a + k)),
            Repr::Unit { v, unit, digits } => Repr::Unit { v: v + k, unit: unit.clone(), digits: *digits },
        };
        Padic { ctx: self.ctx.clone(), repr }
    }

    /// Re-embeds this value in another context for the same prime, treating
    /// the stored digits as exact.
    pub fn with_context(&self, ctx: &FieldContext) -> Result<Padic> {
        if ctx.p() != self.ctx.p() {
            return Err(Error::ContextMismatch);
        }
        Ok(match &self.repr {
            Repr::Zero(_) => ctx.zero(),
            Repr::Unit { v, unit, .. } => Padic::unit_part(ctx.clone(), *v, unit.clone(), ctx.precision()),
        })
    }

    /// The rational `p^v * unit` (zero for zeros); a representative of the
    /// residue class this element denotes.
    pub fn to_rational(&self) -> BigRational {
        match &self.repr {
            Repr::Zero(_) => BigRational::zero(),
            Repr::Unit { v, unit, .. } => {
                let pp = self.ctx.pow(v.unsigned_abs() as u32).into_owned();
                if *v >= 0 {
                    BigRational::from_integer(unit * pp)
                } else {
                    BigRational::new(unit.clone(), pp)
                }
            }
        }
    }

    /// The value modulo `p^k`, for elements of Z_p known to at least that
    /// absolute precision.
    pub fn residue(&self, k: u32) -> Result<BigInt> {
        let m = self.ctx.pow(k).into_owned();
        match self.absolute_precision() {
            Some(abs) if abs < k as i64 => {
                return Err(Error::precision(format!("value known only mod p^{abs}, need p^{k}")))
            }
            _ => {}
        }
        match &self.repr {
            Repr::Zero(_) => Ok(BigInt::zero()),
            Repr::Unit { v, .. } if *v < 0 => Err(Error::Precondition("value is not p-integral".into())),
            Repr::Unit { v, unit, .. } => Ok((unit * self.ctx.pow(*v as u32).as_ref()).mod_floor(&m)),
        }
    }

    /// True iff the value is a square in Q_p.
    pub fn is_square(&self) -> Result<bool> {
        let (v, unit, digits) = match &self.repr {
            Repr::Unit { v, unit, digits } if !self.is_zero() => (*v, unit, *digits),
            _ => return Err(Error::ZeroInput),
        };
        if v.rem_euclid(2) == 1 {
            return Ok(false);
        }
        let p = self.ctx.p();
        if p == 2 {
            if digits < 3 {
                return Err(Error::precision("need three 2-adic digits to test squareness"));
            }
            let r = (unit % 8u32).to_u32().unwrap();
            return Ok(r == 1);
        }
        let r = (unit % p).to_i64().unwrap();
        Ok(legendre(r, p)? == 1)
    }

    /// Square root by Newton iteration; of the two roots, the one whose
    /// leading digit is smaller (for p = 2, the root that is 1 mod 4).
    pub fn sqrt(&self) -> Result<Padic> {
        self.sqrt_with_trace().map(|(r, _)| r)
    }

    /// Like [`Padic::sqrt`], also returning the valuation of `r_k^2 - a`
    /// (relative to `a`) after each Newton step, starting with the initial
    /// approximation.
    pub fn sqrt_with_trace(&self) -> Result<(Padic, Vec<u32>)> {
        if !self.is_square()? {
            return Err(Error::NotASquare(self.ctx.p()));
        }
        let Repr::Unit { v, unit, digits } = &self.repr else { unreachable!() };
        let ctx = &self.ctx;
        let p = ctx.p();
        let (root, out_digits, trace) = if p == 2 {
            let modulus = ctx.pow(*digits).into_owned();
            let half_mod = ctx.pow(*digits - 1).into_owned();
            let mut r = BigInt::one();
            let mut trace = Vec::new();
            loop {
                let f = (&r * &r - unit).mod_floor(&modulus);
                trace.push(if f.is_zero() { *digits } else { split_valuation(&f, 2).0 });
                if f.is_zero() {
                    break;
                }
                // r <- r - (r^2 - u) / (2r); the halving is exact since r^2 - u is even.
                let step = (&f >> 1u32) * mod_inverse(&r, &half_mod).unwrap();
                r = (&r - step).mod_floor(&half_mod);
                if trace.len() > 4 * (*digits as usize) + 8 {
                    return Err(Error::precision("2-adic Newton iteration did not converge"));
                }
            }
            if (&r % 4u32) == BigInt::from(3) {
                r = (&half_mod - &r).mod_floor(&half_mod);
            }
            (r, *digits - 1, trace)
        } else {
            let modulus = ctx.pow(*digits).into_owned();
            let u_mod_p = (unit % p).to_u64().unwrap();
            let r0 = sqrt_mod_prime(u_mod_p, p).expect("Legendre symbol already checked");
            let mut r = BigInt::from(r0);
            let mut trace = Vec::new();
            loop {
                let f = (&r * &r - unit).mod_floor(&modulus);
                trace.push(if f.is_zero() { *digits } else { split_valuation(&f, p).0 });
                if f.is_zero() {
                    break;
                }
                let two_r = &r * 2u32;
                let step = f * mod_inverse(&two_r, &modulus).unwrap();
                r = (&r - step).mod_floor(&modulus);
                if trace.len() > 2 * (*digits as usize) + 8 {
                    return Err(Error::precision("Newton iteration did not converge"));
                }
            }
            (r, *digits, trace)
        };
        if out_digits < ctx.digit_floor() {
            return Err(Error::precision("square root has too few digits"));
        }
        Ok((Padic::unit_part(ctx.clone(), v / 2, root, out_digits), trace))
    }
}

/// Agreement on every digit both operands know.
impl PartialEq for Padic {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p() == other.ctx.p() && self.add_raw(&other.neg()).unit().is_none()
    }
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero(None) => write!(f, "0"),
            Repr::Zero(Some(abs)) => write!(f, "O({}^{})", self.ctx.p(), abs),
            Repr::Unit { .. } => {
                let q = self.to_rational();
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

/// Balanced representative helper used by tests and documents: the integer
/// in `(-m/2, m/2]` congruent to `x` mod `m`.
pub fn balanced(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if (&r * 2u32) > *m {
        r - m
    } else {
        r
    }
}

impl Padic {
    /// Sign-balanced rational representative: the unit part is taken in
    /// `(-p^d/2, p^d/2]`, so small integers display as themselves.
    pub fn to_balanced_rational(&self) -> BigRational {
        match &self.repr {
            Repr::Zero(_) => BigRational::zero(),
            Repr::Unit { v, unit, digits } => {
                let u = balanced(unit, &self.ctx.pow(*digits));
                let pp = self.ctx.pow(v.unsigned_abs() as u32).into_owned();
                if *v >= 0 {
                    BigRational::from_integer(u * pp)
                } else {
                    BigRational::new(u, pp)
                }
            }
        }
    }

    /// True if the value is a p-adic integer (nonnegative valuation).
    pub fn is_integral(&self) -> bool {
        self.valuation() >= Valuation::Finite(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> FieldContext {
        FieldContext::new(p, 20).unwrap()
    }

    #[test]
    fn from_rational_examples() {
        let c = ctx(5);
        let a = c.from_ratio(50, 1).unwrap();
        assert_eq!(a.valuation(), Valuation::Finite(2));
        assert_eq!(a.unit().unwrap(), &BigInt::from(2));
        let b = c.from_ratio(3, 5).unwrap();
        assert_eq!(b.valuation(), Valuation::Finite(-1));
        assert_eq!(b.unit().unwrap(), &BigInt::from(3));
        assert!(c.from_ratio(0, 7).unwrap().is_exact_zero());
        assert_eq!(c.from_ratio(1, 0).unwrap_err(), Error::ZeroDenominator);
    }

    #[test]
    fn arithmetic_examples() {
        let c = ctx(7);
        let p = c.from_int(7);
        let lhs = c.one().add(&p).unwrap().mul(&c.one().sub(&p).unwrap()).unwrap();
        assert_eq!(lhs, c.from_int(1 - 49));

        let z = p.add(&p.neg()).unwrap();
        assert!(!z.is_exact_zero());
        assert!(z.valuation().at_least(1 + 20));

        let c5 = ctx(5);
        let s = c5.from_ratio(1, 5).unwrap().add(&c5.from_ratio(4, 5).unwrap()).unwrap();
        assert_eq!(s, c5.one());
    }

    #[test]
    fn cancellation_loses_digits() {
        let c = ctx(3);
        let a = c.from_int(1 + 3i64.pow(5));
        let b = c.from_int(1);
        let d = a.sub(&b).unwrap();
        assert_eq!(d.valuation(), Valuation::Finite(5));
        assert_eq!(d.digits(), 15);
    }

    #[test]
    fn digit_floor_triggers_precision_exhausted() {
        let c = FieldContext::new(3, 20).unwrap().with_zero_threshold(19);
        let a = c.from_int(1 + 3i64.pow(13));
        let err = a.sub(&c.one()).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted(_)));
    }

    #[test]
    fn division_by_zero() {
        let c = ctx(3);
        assert_eq!(c.one().div(&c.zero()).unwrap_err(), Error::DivisionByZero);
    }

    #[test]
    fn context_mismatch() {
        let a = ctx(3).one();
        let b = ctx(5).one();
        assert_eq!(a.add(&b).unwrap_err(), Error::ContextMismatch);
    }

    #[test]
    fn not_prime_rejected() {
        assert_eq!(FieldContext::new(9, 10).unwrap_err(), Error::NotPrime(9));
        assert!(FieldContext::new(3, 0).is_err());
        assert!(FieldContext::with_max_precision(3, 20, 10).is_err());
    }

    #[test]
    fn valuation_examples() {
        let c = ctx(5);
        assert_eq!(c.from_int(50).valuation(), Valuation::Finite(2));
        assert_eq!(c.from_ratio(3, 5).unwrap().valuation(), Valuation::Finite(-1));
        assert_eq!(c.zero().valuation(), Valuation::Infinite);
    }

    #[test]
    fn is_square_examples() {
        let c = ctx(5);
        assert!(c.from_int(-1).is_square().unwrap());
        assert!(!c.from_int(2).is_square().unwrap());
        assert!(!c.from_int(5).is_square().unwrap());
        assert_eq!(c.zero().is_square().unwrap_err(), Error::ZeroInput);
        let c2 = ctx(2);
        assert!(c2.from_int(17).is_square().unwrap());
        assert!(!c2.from_int(5).is_square().unwrap());
        assert!(c2.from_int(4 * 9).is_square().unwrap());
    }

    #[test]
    fn sqrt_examples() {
        let c7 = ctx(7);
        assert_eq!(c7.from_int(9).sqrt().unwrap(), c7.from_int(3));
        let c3 = ctx(3);
        assert_eq!(c3.from_int(9).sqrt().unwrap(), c3.from_int(3));

        let c5 = ctx(5);
        let r = c5.from_int(-1).sqrt().unwrap();
        assert_eq!(r.residue(2).unwrap(), BigInt::from(7));
        let sq = r.mul(&r).unwrap().add(&c5.one()).unwrap();
        assert!(sq.valuation().at_least(20));

        assert_eq!(c5.from_int(2).sqrt().unwrap_err(), Error::NotASquare(5));
    }

    #[test]
    fn sqrt_two_adic() {
        let c = ctx(2);
        let a = c.from_int(17);
        let r = a.sqrt().unwrap();
        assert_eq!(r.residue(2).unwrap(), BigInt::from(1));
        // The root keeps N - 1 digits.
        let diff = r.mul(&r).unwrap().sub(&a).unwrap();
        assert!(diff.valuation().at_least(19));
        let r = c.from_int(-7).sqrt().unwrap();
        let diff = r.mul(&r).unwrap().add(&c.from_int(7)).unwrap();
        assert!(diff.valuation().at_least(19));
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(4, 5).unwrap(), 1);
        assert_eq!(legendre(2, 5).unwrap(), -1);
        assert_eq!(legendre(1, 13).unwrap(), 1);
        assert_eq!(legendre(3, 2).unwrap_err(), Error::EvenPrime);
        assert_eq!(legendre(10, 5).unwrap_err(), Error::NonUnit(10, 5));
    }

    #[test]
    fn sqrt_mod_prime_is_smallest() {
        for p in [3u64, 5, 7, 11, 13, 17, 97, 101] {
            for a in 1..p {
                let brute = (1..p).find(|r| r * r % p == a);
                assert_eq!(sqrt_mod_prime(a, p), brute, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn balanced_repr() {
        let c = ctx(5);
        assert_eq!(c.from_int(-3).to_balanced_rational(), BigRational::from_integer(BigInt::from(-3)));
        assert_eq!(format!("{}", c.from_ratio(3, 5).unwrap()), "3/5");
    }
}
