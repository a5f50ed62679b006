//! Constructive zeros of quadratic forms and systems over Q_p.
//!
//! A single form in at least five variables (p odd) always has a zero:
//! after diagonalizing and normalizing the coefficients to valuations 0 or
//! 1, three coefficients share a valuation, the unit ternary form they span
//! has a zero mod p, and Hensel's lemma lifts it.
//!
//! Systems are handled by two mutually recursive steps:
//!
//! * [`solve_system`] peels off the last form: it finds a 5-dimensional
//!   subspace on which the first `t - 1` forms vanish identically, restricts
//!   the last form to it and solves that single form.
//! * [`find_zero_subspace`] finds one common zero `z`, moves it to the last
//!   coordinate vector, writes each form as `x_n^2 c + x_n L(x') + Q(x')`,
//!   keeps the common kernel of the linear parts `L_j`, and recurses on the
//!   `Q_j` restricted to that kernel for a subspace one dimension smaller.
//!   The result is that subspace plus `z`.
//!
//! With one form handled directly, this needs `2t(t+1) + 1` variables for a
//! zero of `t` forms and `(t + 1)` more per extra subspace dimension.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{extend_to_basis, saturated_kernel_basis, Matrix, Vector};
use crate::padic::{is_prime, split_valuation, sqrt_mod_prime, Padic, Valuation};
use crate::qform::{
    change_variables, decompose_at_last, diagonalize, evaluate, restrict, restrict_to_basis, FormSystem, QuadraticForm,
    Subspace,
};

/// Variables that guarantee a zero of one form over a local field.
pub const SINGLE_FORM_VARIABLES: usize = 5;

/// Points the opportunistic residue search may enumerate per level.
pub const RESIDUE_SEARCH_BUDGET: u64 = 1 << 20;

/// Smallest `n` at which [`solve_system`] is guaranteed to succeed on `t`
/// forms: `2t(t+1) + 1`.
pub fn constructive_threshold(t: usize) -> usize {
    assert!(t >= 1);
    2 * t * (t + 1) + 1
}

/// Smallest `n` at which [`find_zero_subspace`] is guaranteed to return an
/// `s`-dimensional subspace for `t` forms.
pub fn subspace_threshold(t: usize, s: usize) -> usize {
    assert!(t >= 1 && s >= 1);
    constructive_threshold(t) + (s - 1) * (t + 1)
}

/// One step of the reduction, recorded in certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    /// Single form: a diagonal coefficient vanished; its basis vector is a zero.
    Radical { n: usize },
    /// Single form, guaranteed branch: ternary zero mod p lifted.
    Ternary { n: usize, parity: u8, indices: [usize; 3], residues: [u64; 3] },
    /// Single form: `-d_j/d_i` is a square.
    BinarySquare { n: usize, i: usize, j: usize },
    /// Single form: Hensel-liftable point found by enumeration mod `p^level`.
    ResidueSearch { n: usize, level: u32, coordinate: usize },
    /// Last form solved on a zero subspace of the others.
    ReduceLastForm { t: usize, n: usize, subspace_dim: usize },
    /// One level of the subspace recursion.
    SubspaceStep { t: usize, n: usize, s: usize, kernel_dim: usize },
    /// Restarted from the inputs at a higher precision.
    PrecisionRetry { from: u32, to: u32 },
}

/// A common nontrivial zero with its residuals and the path that found it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveCertificate {
    /// Primitive (minimal valuation 0) zero in the original coordinates.
    pub zero: Vector,
    pub residual_valuations: Vec<Valuation>,
    pub trace: Vec<TraceStep>,
}

/// A subspace on which every form vanishes identically.
#[derive(Debug, Clone)]
pub struct SubspaceCertificate {
    pub subspace: Subspace,
    /// Smallest valuation among all entries of all restricted Gram matrices.
    pub residual: Valuation,
    pub trace: Vec<TraceStep>,
}

/// Outcome of [`verify_zero`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroReport {
    pub valuations: Vec<Valuation>,
    pub nontrivial: bool,
    pub threshold: i64,
    pub accepted: bool,
}

/// Checks that `v` is nontrivial and every `f_j(v)` has valuation at least
/// `threshold`.
pub fn verify_zero(sys: &FormSystem, v: &Vector, threshold: i64) -> Result<ZeroReport> {
    if v.dim() != sys.n() {
        return Err(Error::dims(sys.n(), v.dim()));
    }
    let valuations: Vec<Valuation> = sys.evaluate(v)?.iter().map(Padic::valuation).collect();
    let nontrivial = v.is_nontrivial();
    let accepted = nontrivial && valuations.iter().all(|x| x.at_least(threshold));
    Ok(ZeroReport { valuations, nontrivial, threshold, accepted })
}

/// Smallest valuation over all entries of the Gram matrices of `sys`
/// restricted to the columns of `basis`.
pub fn restricted_residual(sys: &FormSystem, basis: &Matrix) -> Result<Valuation> {
    let mut worst = Valuation::Infinite;
    for f in sys.forms() {
        worst = worst.min(restrict_to_basis(f, basis)?.gram().min_valuation());
    }
    Ok(worst)
}

/// Nonzero `(x, y, z)` mod p with `u1 x^2 + u2 y^2 + u3 z^2 = 0 (mod p)`,
/// the first in lexicographic order of `(x, y)` with the smallest `z`.
pub fn solve_ternary_unit_mod_p(u1: i64, u2: i64, u3: i64, p: u64) -> Result<[u64; 3]> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let red = |u: i64| -> Result<u64> {
        let r = (u as i128).rem_euclid(p as i128) as u64;
        if r == 0 {
            Err(Error::NonUnit(u, p))
        } else {
            Ok(r)
        }
    };
    let (a, b, c) = (red(u1)?, red(u2)?, red(u3)?);
    let pm = p as u128;
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % pm) as u64;
    let c_inv = crate::padic::mod_inverse(&BigInt::from(c), &BigInt::from(p)).unwrap().to_u64().unwrap();
    let table: Option<Vec<Option<u64>>> = (p <= 1 << 20).then(|| {
        let mut t = vec![None; p as usize];
        for r in 0..p {
            let s = mulm(r, r) as usize;
            if t[s].is_none() {
                t[s] = Some(r);
            }
        }
        t
    });
    let root = |w: u64| match &table {
        Some(t) => t[w as usize],
        None => sqrt_mod_prime(w, p),
    };
    for x in 0..p {
        for y in 0..p {
            if x == 0 && y == 0 {
                continue;
            }
            let s = (mulm(a, mulm(x, x)) + mulm(b, mulm(y, y))) % p;
            let w = mulm((p - s) % p, c_inv);
            if let Some(z) = root(w) {
                return Ok([x, y, z]);
            }
        }
    }
    unreachable!("a nondegenerate ternary form mod an odd prime always has a zero")
}

/// Lifts an approximate zero `a` of `f` by Newton iteration in coordinate
/// `i`, all other coordinates frozen. Requires the strong Hensel criterion
/// `val(g(a_i)) > 2 val(g'(a_i))` for `g(x) = f(a with x_i = x)`.
pub fn hensel_lift_zero(f: &QuadraticForm, a: &Vector, i: usize) -> Result<Vector> {
    let n = f.n();
    if a.dim() != n {
        return Err(Error::dims(n, a.dim()));
    }
    if i >= n {
        return Err(Error::Precondition(format!("coordinate {i} out of range")));
    }
    let ctx = f.context();
    let g = f.gram();
    // g(x) = A x^2 + B x + C
    let quad = g.get(i, i).clone();
    let mut rest = a.clone();
    rest.set(i, ctx.zero());
    let lin = g.row(i).dot(&rest)?.mul(&ctx.from_int(2))?;
    let constant = evaluate(f, &rest)?;
    let two_quad = quad.mul(&ctx.from_int(2))?;
    let value = |x: &Padic| -> Result<Padic> { quad.mul(x)?.mul(x)?.add(&lin.mul(x)?)?.add(&constant) };
    let deriv = |x: &Padic| -> Result<Padic> { two_quad.mul(x)?.add(&lin) };

    let mut x = a.get(i).clone();
    let gx = value(&x)?;
    if gx.zero_test()? {
        return Ok(a.clone());
    }
    let dx = deriv(&x)?;
    let criterion = match (gx.valuation(), dx.valuation()) {
        (Valuation::Finite(vg), Valuation::Finite(vd)) => !dx.zero_test()? && vg > 2 * vd,
        _ => false,
    };
    if !criterion {
        return Err(Error::HenselCriterionFails {
            value_val: gx.valuation().to_string(),
            derivative_val: dx.valuation().to_string(),
        });
    }
    // Iterate past the zero-threshold to full precision so later eliminations
    // never see a residual of valuation just under the threshold.
    let full = ctx.precision() as i64;
    let max_steps = 2 * (64 - ctx.precision().leading_zeros()) as usize + 8;
    for _ in 0..max_steps {
        let gx = value(&x)?;
        if gx.unit().is_none() || gx.valuation().at_least(full) {
            break;
        }
        x = x.sub(&gx.div(&deriv(&x)?)?)?;
    }
    if !value(&x)?.zero_test()? {
        return Err(Error::precision("Newton iteration did not reach the zero-threshold"));
    }
    let mut out = a.clone();
    out.set(i, x);
    Ok(out)
}

fn retry<T>(
    sys: &FormSystem,
    mut run: impl FnMut(&FormSystem, &mut Vec<TraceStep>) -> Result<T>,
) -> Result<(T, FormSystem, Vec<TraceStep>)> {
    let mut current = sys.clone();
    let mut trace = Vec::new();
    loop {
        let mut local = Vec::new();
        match run(&current, &mut local) {
            Ok(x) => {
                trace.extend(local);
                return Ok((x, current, trace));
            }
            Err(Error::PrecisionExhausted(msg)) => {
                let ctx = current.context();
                let from = ctx.precision();
                let to = from.saturating_mul(2);
                if to > ctx.max_precision() {
                    return Err(Error::PrecisionExhausted(format!("{msg} (gave up at precision {from})")));
                }
                trace.push(TraceStep::PrecisionRetry { from, to });
                current = sys.with_context(&ctx.with_precision(to)?)?;
            }
            Err(e) => return Err(e),
        }
    }
}

fn certify_zero(sys: &FormSystem, zero: Vector, trace: Vec<TraceStep>) -> Result<SolveCertificate> {
    let report = verify_zero(sys, &zero, sys.context().zero_threshold())?;
    if !report.accepted {
        return Err(Error::precision("computed zero fails verification"));
    }
    Ok(SolveCertificate { zero, residual_valuations: report.valuations, trace })
}

/// A nontrivial zero of one form. Guaranteed for `n >= 5` and odd `p`;
/// otherwise a best-effort search that may report
/// [`Error::NoZeroFoundBelowGuarantee`], which is not a proof of
/// anisotropy.
pub fn solve_single(f: &QuadraticForm) -> Result<SolveCertificate> {
    let sys = FormSystem::new(vec![f.clone()])?;
    run_certified(&sys, |s, trace| single_zero(s.form(0), trace))
}

/// A common nontrivial zero of all forms of `sys`. Guaranteed for
/// `n >= constructive_threshold(t)` and odd `p`; attempted best-effort below.
pub fn solve_system(sys: &FormSystem) -> Result<SolveCertificate> {
    run_certified(sys, system_zero)
}

fn run_certified(
    sys: &FormSystem,
    find: impl Fn(&FormSystem, &mut Vec<TraceStep>) -> Result<Vector>,
) -> Result<SolveCertificate> {
    let (mut cert, _, retries) = retry(sys, |s, trace| {
        let zero = find(s, trace)?;
        certify_zero(s, zero, std::mem::take(trace))
    })?;
    cert.trace = [retries, cert.trace].concat();
    Ok(cert)
}

/// An `s`-dimensional subspace on which every form of `sys` vanishes
/// identically. Guaranteed for `n >= subspace_threshold(t, s)` and odd `p`.
pub fn find_zero_subspace(sys: &FormSystem, s: usize) -> Result<SubspaceCertificate> {
    if s == 0 {
        return Err(Error::Precondition("subspace dimension must be >= 1".into()));
    }
    let (cert, _, trace) = retry(sys, |cur, trace| {
        let subspace = zero_subspace(cur, s, trace)?;
        let residual = restricted_residual(cur, subspace.basis())?;
        if !residual.at_least(cur.context().zero_threshold()) {
            return Err(Error::precision("restricted Gram matrices fail verification"));
        }
        if subspace.basis().rank()? != s {
            return Err(Error::precision("subspace basis lost rank"));
        }
        Ok((subspace, residual))
    })?;
    let (subspace, residual) = cert;
    Ok(SubspaceCertificate { subspace, residual, trace })
}

/// Re-runs the solver on `sys` and checks that it reproduces `cert`.
pub fn replay(sys: &FormSystem, cert: &SolveCertificate) -> Result<bool> {
    let again = solve_system(sys)?;
    Ok(again.zero == cert.zero && again.trace == cert.trace)
}

fn system_zero(sys: &FormSystem, trace: &mut Vec<TraceStep>) -> Result<Vector> {
    let t = sys.t();
    if t == 1 {
        return single_zero(sys.form(0), trace);
    }
    let head = sys.prefix(t - 1)?;
    let last = sys.form(t - 1);
    for s in (1..=SINGLE_FORM_VARIABLES.min(sys.n())).rev() {
        let mut local = Vec::new();
        let attempt = zero_subspace(&head, s, &mut local).and_then(|sub| {
            let restricted = restrict(last, &sub)?;
            let y = single_zero(&restricted, &mut local)?;
            sub.embed(&y)?.primitive()
        });
        match attempt {
            Ok(zero) => {
                trace.push(TraceStep::ReduceLastForm { t, n: sys.n(), subspace_dim: s });
                trace.extend(local);
                return Ok(zero);
            }
            Err(Error::NoZeroFoundBelowGuarantee(_) | Error::DimensionShortfall { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoZeroFoundBelowGuarantee(format!(
        "{t} forms in {} variables (guarantee needs {})",
        sys.n(),
        constructive_threshold(t)
    )))
}

fn zero_subspace(sys: &FormSystem, s: usize, trace: &mut Vec<TraceStep>) -> Result<Subspace> {
    let ctx = sys.context();
    let n = sys.n();
    if n < s {
        return Err(Error::DimensionShortfall { needed: s, found: n });
    }
    let z = system_zero(sys, trace)?;
    if s == 1 {
        return Subspace::line(&z);
    }
    let p = extend_to_basis(&z)?;
    let moved = change_variables(sys, &p)?;
    let mut linear_rows = Vec::with_capacity(sys.t());
    let mut quadratics = Vec::with_capacity(sys.t());
    for f in moved.forms() {
        let dec = decompose_at_last(f)?;
        if !dec.c.zero_test()? {
            return Err(Error::precision("found zero does not annihilate a form after the change of variables"));
        }
        linear_rows.push(dec.linear.into_entries());
        quadratics.push(dec.quadratic);
    }
    let lin = Matrix::from_rows(ctx, linear_rows)?;
    let kernel = saturated_kernel_basis(&lin)?;
    if kernel.len() < s - 1 {
        return Err(Error::DimensionShortfall { needed: s - 1, found: kernel.len() });
    }
    trace.push(TraceStep::SubspaceStep { t: sys.t(), n, s, kernel_dim: kernel.len() });
    let k = Matrix::from_columns(ctx, n - 1, &kernel)?;
    let restricted = FormSystem::new(quadratics.iter().map(|q| restrict_to_basis(q, &k)).collect::<Result<Vec<_>>>()?)?;
    let inner = zero_subspace(&restricted, s - 1, trace)?;
    let one = Matrix::identity(ctx, 1);
    let mut chain = vec![p, k.block_diag(&one)];
    chain.extend(inner.embedding_chain().iter().map(|m| m.block_diag(&one)));
    Subspace::from_chain(chain)
}

/// `d = p^e * u` split into valuation and unit part.
fn split(d: &Padic) -> (i64, Padic) {
    let e = d.valuation().finite().expect("nonzero coefficient");
    (e, d.shift(-e))
}

fn single_zero(f: &QuadraticForm, trace: &mut Vec<TraceStep>) -> Result<Vector> {
    let n = f.n();
    let ctx = f.context().clone();
    if n == 0 {
        return Err(Error::NoZeroFoundBelowGuarantee("form in zero variables".into()));
    }
    let diag = diagonalize(f)?;
    for (i, d) in diag.d.iter().enumerate() {
        if d.zero_test()? {
            trace.push(TraceStep::Radical { n });
            return diag.p.column(i).primitive();
        }
    }
    // Coefficient d_i = p^e_i u_i becomes p^(e_i mod 2) u_i after
    // x_i = p^(-floor(e_i/2)) y_i.
    let split_d: Vec<(i64, Padic)> = diag.d.iter().map(split).collect();
    let halves: Vec<i64> = split_d.iter().map(|(e, _)| e.div_floor(&2)).collect();
    let parities: Vec<u8> = split_d.iter().map(|(e, _)| e.rem_euclid(2) as u8).collect();
    let to_original = |y: &Vector| -> Result<Vector> {
        let x = Vector::new(&ctx, y.entries().iter().zip(&halves).map(|(yi, h)| yi.shift(-h)).collect());
        diag.p.mul_vec(&x)?.primitive()
    };

    let p = ctx.p();
    if p != 2 && n >= SINGLE_FORM_VARIABLES {
        let parity = if parities.iter().filter(|&&e| e == 0).count() >= 3 { 0 } else { 1 };
        let idx: Vec<usize> = (0..n).filter(|&i| parities[i] == parity).take(3).collect();
        let units: Vec<&Padic> = idx.iter().map(|&i| &split_d[i].1).collect();
        let residue = |u: &Padic| -> i64 { (u.unit().unwrap() % p).to_i64().unwrap() };
        let sol = solve_ternary_unit_mod_p(residue(units[0]), residue(units[1]), residue(units[2]), p)?;
        let ternary = QuadraticForm::diagonal_padic(&ctx, &units.iter().map(|u| (*u).clone()).collect::<Vec<_>>());
        let start = Vector::new(&ctx, sol.iter().map(|&r| ctx.from_int(r as i64)).collect());
        let coord = sol.iter().position(|&r| r != 0).unwrap();
        let lifted = hensel_lift_zero(&ternary, &start, coord)?;
        let mut y = Vector::zeros(&ctx, n);
        for (k, &i) in idx.iter().enumerate() {
            y.set(i, lifted.get(k).clone());
        }
        trace.push(TraceStep::Ternary { n, parity, indices: [idx[0], idx[1], idx[2]], residues: sol });
        return to_original(&y);
    }

    // Best effort from here on.
    for i in 0..n {
        for j in i + 1..n {
            let r = diag.d[j].div(&diag.d[i])?.neg();
            if r.is_square()? {
                let mut x = Vector::zeros(&ctx, n);
                x.set(i, r.sqrt()?);
                x.set(j, ctx.one());
                trace.push(TraceStep::BinarySquare { n, i, j });
                return diag.p.mul_vec(&x)?.primitive();
            }
        }
    }
    let scaled: Vec<Padic> = split_d.iter().zip(&parities).map(|((_, u), &e)| u.shift(e as i64)).collect();
    let width = n.min(SINGLE_FORM_VARIABLES);
    if let Some((y, level, coord)) = residue_search(&ctx, &scaled[..width], &parities[..width])? {
        let mut full = Vector::zeros(&ctx, n);
        for (i, yi) in y.into_entries().into_iter().enumerate() {
            full.set(i, yi);
        }
        trace.push(TraceStep::ResidueSearch { n, level, coordinate: coord });
        return to_original(&full);
    }
    Err(Error::NoZeroFoundBelowGuarantee(format!(
        "single form in {n} variables over Q_{p}{}",
        if p == 2 { "" } else { " (guarantee needs 5)" }
    )))
}

/// Enumerates primitive residue vectors mod `p^k`, `k = 1, 2, ...`, for a
/// point of the diagonal form `sum c_i y_i^2` that satisfies the strong
/// Hensel criterion in some coordinate, and lifts it.
fn residue_search(
    ctx: &crate::padic::FieldContext,
    coeffs: &[Padic],
    parities: &[u8],
) -> Result<Option<(Vector, u32, usize)>> {
    let n = coeffs.len();
    let p = ctx.p();
    let form = QuadraticForm::diagonal_padic(ctx, coeffs);
    let two_val: u32 = if p == 2 { 1 } else { 0 };
    for level in 1u32.. {
        let points = (p as u128).checked_pow(level * n as u32);
        if points.is_none_or(|pts| pts > RESIDUE_SEARCH_BUDGET as u128) {
            break;
        }
        let side = p.pow(level);
        // Valuations are read modulo p^cap; cap stays below 2^62.
        let mut cap = 2 * level + 2 * two_val + 4;
        while (p as u128).checked_pow(cap).is_none_or(|m| m > 1u128 << 62) {
            cap -= 1;
        }
        let modulus = p.pow(cap) as u128;
        let c: Vec<u128> =
            coeffs.iter().map(|x| x.residue(cap).map(|r| r.to_u128().unwrap())).collect::<Result<_>>()?;
        let mut y = vec![0u64; n];
        loop {
            if y.iter().any(|&v| v % p != 0) {
                let mut s = 0u128;
                for (ci, &yi) in c.iter().zip(&y) {
                    let yi = yi as u128 % modulus;
                    s = (s + ci * (yi * yi % modulus)) % modulus;
                }
                let vg = if s == 0 { cap } else { split_valuation(&BigInt::from(s), p).0 };
                for i in 0..n {
                    if y[i] == 0 {
                        continue;
                    }
                    let vy = split_valuation(&BigInt::from(y[i]), p).0;
                    let vd = two_val + parities[i] as u32 + vy;
                    if vg > 2 * vd {
                        let start = Vector::new(ctx, y.iter().map(|&v| ctx.from_int(v as i64)).collect());
                        match hensel_lift_zero(&form, &start, i) {
                            Ok(z) => return Ok(Some((z, level, i))),
                            Err(Error::HenselCriterionFails { .. }) => continue,
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
            // Odometer, last coordinate fastest.
            let mut pos = n;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                y[pos] += 1;
                if y[pos] < side {
                    break;
                }
                y[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    Ok(None)
}
