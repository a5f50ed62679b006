//! Quadratic forms as symmetric Gram matrices, `f(x) = xᵀ G x`.
//!
//! A polynomial cross coefficient `a_ij x_i x_j` (i < j) corresponds to
//! `G_ij = G_ji = a_ij / 2`, so the linear part of the decomposition at the
//! last variable has coefficients `2 G_{n,i}`.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::padic::{FieldContext, Padic};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    gram: Matrix,
}

impl QuadraticForm {
    /// Wraps a Gram matrix, which must be square and symmetric.
    pub fn from_gram(gram: Matrix) -> Result<Self> {
        if gram.rows() != gram.cols() {
            return Err(Error::dims(gram.rows(), gram.cols()));
        }
        if !gram.is_symmetric() {
            return Err(Error::Precondition("Gram matrix is not symmetric".into()));
        }
        Ok(QuadraticForm { gram })
    }

    pub fn from_int_gram(ctx: &FieldContext, rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_gram(Matrix::from_int_rows(ctx, rows)?)
    }

    /// `sum_i c_i x_i^2`.
    pub fn diagonal(ctx: &FieldContext, coeffs: &[i64]) -> Self {
        let mut g = Matrix::zeros(ctx, coeffs.len(), coeffs.len());
        for (i, &c) in coeffs.iter().enumerate() {
            g.set(i, i, ctx.from_int(c));
        }
        QuadraticForm { gram: g }
    }

    pub fn diagonal_padic(ctx: &FieldContext, coeffs: &[Padic]) -> Self {
        let mut g = Matrix::zeros(ctx, coeffs.len(), coeffs.len());
        for (i, c) in coeffs.iter().enumerate() {
            g.set(i, i, c.clone());
        }
        QuadraticForm { gram: g }
    }

    /// Builds the Gram matrix from polynomial coefficients: `coeffs[i][j]`
    /// for `i <= j` is the coefficient of `x_i x_j`; entries below the
    /// diagonal must be zero.
    pub fn from_polynomial(ctx: &FieldContext, coeffs: &[Vec<BigRational>]) -> Result<Self> {
        Self::from_rational_gram(ctx, &polynomial_to_gram(coeffs)?)
    }

    pub fn from_rational_gram(ctx: &FieldContext, gram: &[Vec<BigRational>]) -> Result<Self> {
        let rows = gram
            .iter()
            .map(|r| r.iter().map(|q| ctx.from_big_rational(q)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_gram(Matrix::from_rows(ctx, rows)?)
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn n(&self) -> usize {
        self.gram.rows()
    }

    pub fn context(&self) -> &FieldContext {
        self.gram.context()
    }

    pub fn is_zero(&self) -> bool {
        self.gram.is_zero()
    }
}

/// Converts upper-triangular polynomial coefficients into a symmetric
/// rational Gram matrix by halving cross terms.
pub fn polynomial_to_gram(coeffs: &[Vec<BigRational>]) -> Result<Vec<Vec<BigRational>>> {
    let n = coeffs.len();
    let two = BigRational::from_integer(2.into());
    let mut g = vec![vec![BigRational::zero(); n]; n];
    for (i, row) in coeffs.iter().enumerate() {
        if row.len() != n {
            return Err(Error::dims(n, row.len()));
        }
        for (j, a) in row.iter().enumerate() {
            if j < i {
                if !a.is_zero() {
                    return Err(Error::Precondition("polynomial coefficients must be upper triangular".into()));
                }
            } else if i == j {
                g[i][i] = a.clone();
            } else {
                g[i][j] = a / &two;
                g[j][i] = a / &two;
            }
        }
    }
    Ok(g)
}

/// `f(v) = vᵀ G v`.
pub fn evaluate(f: &QuadraticForm, v: &Vector) -> Result<Padic> {
    if v.dim() != f.n() {
        return Err(Error::dims(f.n(), v.dim()));
    }
    v.dot(&f.gram.mul_vec(v)?)
}

/// Restriction to a subspace, as a form in `S.dim()` variables: `Bᵀ G B`.
pub fn restrict(f: &QuadraticForm, s: &Subspace) -> Result<QuadraticForm> {
    restrict_to_basis(f, s.basis())
}

pub fn restrict_to_basis(f: &QuadraticForm, basis: &Matrix) -> Result<QuadraticForm> {
    if basis.rows() != f.n() {
        return Err(Error::dims(f.n(), basis.rows()));
    }
    Ok(QuadraticForm { gram: symmetrize(f.gram.congruence(basis)?)? })
}

// Congruence keeps symmetry mathematically; copying the upper triangle makes
// it hold entry-wise as well.
fn symmetrize(mut g: Matrix) -> Result<Matrix> {
    for i in 0..g.rows() {
        for j in 0..i {
            let x = g.get(j, i).clone();
            g.set(i, j, x);
        }
    }
    Ok(g)
}

/// `f(x) = x_n^2 c + x_n L(x') + Q(x')` with `x' = (x_1, ..., x_{n-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormDecomposition {
    pub c: Padic,
    pub linear: Vector,
    pub quadratic: QuadraticForm,
}

impl FormDecomposition {
    /// Evaluates the right-hand side of the decomposition at `x`.
    pub fn reassemble(&self, x: &Vector) -> Result<Padic> {
        let n = self.linear.dim() + 1;
        if x.dim() != n {
            return Err(Error::dims(n, x.dim()));
        }
        let head = Vector::new(x.context(), x.entries()[..n - 1].to_vec());
        let last = x.get(n - 1);
        let sq = last.mul(last)?.mul(&self.c)?;
        let lin = last.mul(&self.linear.dot(&head)?)?;
        sq.add(&lin)?.add(&evaluate(&self.quadratic, &head)?)
    }
}

pub fn decompose_at_last(f: &QuadraticForm) -> Result<FormDecomposition> {
    let n = f.n();
    if n < 2 {
        return Err(Error::dims(2, n));
    }
    let g = &f.gram;
    let ctx = g.context();
    let two = ctx.from_int(2);
    let linear = (0..n - 1).map(|i| g.get(n - 1, i).mul(&two)).collect::<Result<Vec<_>>>()?;
    Ok(FormDecomposition {
        c: g.get(n - 1, n - 1).clone(),
        linear: Vector::new(ctx, linear),
        quadratic: QuadraticForm { gram: g.leading(n - 1, n - 1) },
    })
}

/// `Pᵀ G P = diag(d)`.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub p: Matrix,
    pub d: Vec<Padic>,
}

fn swap_sym(g: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let n = g.rows();
    for j in 0..n {
        let (x, y) = (g.get(a, j).clone(), g.get(b, j).clone());
        g.set(a, j, y);
        g.set(b, j, x);
    }
    for i in 0..n {
        let (x, y) = (g.get(i, a).clone(), g.get(i, b).clone());
        g.set(i, a, y);
        g.set(i, b, x);
    }
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let (x, y) = (m.get(i, a).clone(), m.get(i, b).clone());
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

/// Substitution `x_target -> x_target + factor * x_source` applied to the
/// Gram matrix and recorded in the columns of `p`.
fn add_multiple(g: &mut Matrix, p: &mut Matrix, target: usize, source: usize, factor: &Padic) -> Result<()> {
    let n = g.rows();
    for i in 0..n {
        let v = g.get(i, target).add(&factor.mul(g.get(i, source))?)?;
        g.set(i, target, v);
    }
    for j in 0..n {
        let v = g.get(target, j).add(&factor.mul(g.get(source, j))?)?;
        g.set(target, j, v);
    }
    for i in 0..p.rows() {
        let v = p.get(i, target).add(&factor.mul(p.get(i, source))?)?;
        p.set(i, target, v);
    }
    Ok(())
}

/// Smallest-valuation candidate among `cands`, or `None`. Undetermined
/// entries raise only if no usable candidate exists.
fn pick_min<I: Iterator<Item = (usize, usize)>>(g: &Matrix, cands: I) -> Result<Option<(usize, usize)>> {
    let mut best: Option<((usize, usize), i64)> = None;
    let mut undetermined = false;
    for (i, j) in cands {
        match g.get(i, j).zero_test() {
            Ok(true) => {}
            Ok(false) => {
                let v = g.get(i, j).valuation().finite().unwrap();
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some(((i, j), v));
                }
            }
            Err(_) => undetermined = true,
        }
    }
    match best {
        Some((ij, _)) => Ok(Some(ij)),
        None if undetermined => Err(Error::precision("cannot decide whether a Gram entry vanishes")),
        None => Ok(None),
    }
}

/// Congruence diagonalization by symmetric elimination.
///
/// Pivots are the diagonal entries of minimal valuation; when every usable
/// diagonal entry vanishes but an off-diagonal one does not, the
/// substitution `x_i -> x_i + x_j` first creates a diagonal pivot. Columns of
/// `P` are finally scaled to be primitive with their first minimal-valuation
/// entry equal to a power of p.
pub fn diagonalize(f: &QuadraticForm) -> Result<Diagonalization> {
    let ctx = f.context().clone();
    let n = f.n();
    let mut g = f.gram.clone();
    let mut p = Matrix::identity(&ctx, n);
    for k in 0..n {
        let pivot = match pick_min(&g, (k..n).map(|i| (i, i)))? {
            Some((i, _)) => i,
            None => {
                let off = (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
                match pick_min(&g, off)? {
                    Some((i, j)) => {
                        add_multiple(&mut g, &mut p, i, j, &ctx.one())?;
                        if g.get(i, i).zero_test()? {
                            return Err(Error::precision("pivot creation cancelled"));
                        }
                        i
                    }
                    None => break,
                }
            }
        };
        swap_sym(&mut g, k, pivot);
        swap_cols(&mut p, k, pivot);
        let pivot_val = g.get(k, k).clone();
        for j in k + 1..n {
            let e = g.get(k, j).clone();
            if e.is_exact_zero() {
                continue;
            }
            if !e.zero_test().unwrap_or(false) {
                let factor = e.div(&pivot_val)?.neg();
                add_multiple(&mut g, &mut p, j, k, &factor)?;
            }
            g.set(k, j, ctx.zero());
            g.set(j, k, ctx.zero());
        }
    }
    let mut cols = Vec::with_capacity(n);
    for col in p.columns() {
        let lead_val = col.min_valuation().ok_or(Error::SingularMatrix)?;
        let lead = col
            .entries()
            .iter()
            .find(|e| !e.is_zero() && e.valuation().finite() == Some(lead_val))
            .unwrap()
            .shift(-lead_val);
        let scaled = col.shift(-lead_val);
        let inv = ctx.one().div(&lead)?;
        cols.push(scaled.scale(&inv)?);
    }
    let p = Matrix::from_columns(&ctx, n, &cols)?;
    let d = cols.iter().map(|c| evaluate(f, c)).collect::<Result<Vec<_>>>()?;
    Ok(Diagonalization { p, d })
}

/// A system `f_1, ..., f_t` of forms in the same `n` variables.
#[derive(Clone, Debug)]
pub struct FormSystem {
    ctx: FieldContext,
    n: usize,
    forms: Vec<QuadraticForm>,
    /// Exact rational Gram matrices the system was built from, kept so that
    /// precision retries can restart from the original inputs.
    source: Option<Arc<Vec<Vec<Vec<BigRational>>>>>,
}

impl PartialEq for FormSystem {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.forms == other.forms
    }
}

impl FormSystem {
    pub fn new(forms: Vec<QuadraticForm>) -> Result<Self> {
        let first = forms.first().ok_or_else(|| Error::Precondition("a system needs t >= 1 forms".into()))?;
        let ctx = first.context().clone();
        let n = first.n();
        for f in &forms {
            if f.context() != &ctx {
                return Err(Error::ContextMismatch);
            }
            if f.n() != n {
                return Err(Error::dims(n, f.n()));
            }
        }
        Ok(FormSystem { ctx, n, forms, source: None })
    }

    /// The system with no forms and no variables; the neutral element of
    /// direct sums.
    pub fn empty(ctx: &FieldContext) -> Self {
        FormSystem { ctx: ctx.clone(), n: 0, forms: Vec::new(), source: None }
    }

    pub fn from_rational_grams(ctx: &FieldContext, grams: Vec<Vec<Vec<BigRational>>>) -> Result<Self> {
        let forms = grams.iter().map(|g| QuadraticForm::from_rational_gram(ctx, g)).collect::<Result<Vec<_>>>()?;
        let mut sys = FormSystem::new(forms)?;
        sys.source = Some(Arc::new(grams));
        Ok(sys)
    }

    pub fn from_int_grams(ctx: &FieldContext, grams: &[Vec<Vec<i64>>]) -> Result<Self> {
        let rational = grams
            .iter()
            .map(|g| g.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect())
            .collect();
        Self::from_rational_grams(ctx, rational)
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[QuadraticForm] {
        &self.forms
    }

    pub fn form(&self, j: usize) -> &QuadraticForm {
        &self.forms[j]
    }

    pub fn source(&self) -> Option<&[Vec<Vec<BigRational>>]> {
        self.source.as_deref().map(|v| v.as_slice())
    }

    /// The exact rational Gram matrices, if the system was built from them.
    pub fn rational_grams(&self) -> Vec<Vec<Vec<BigRational>>> {
        match &self.source {
            Some(s) => s.as_ref().clone(),
            None => self
                .forms
                .iter()
                .map(|f| (0..self.n).map(|i| (0..self.n).map(|j| f.gram().get(i, j).to_rational()).collect()).collect())
                .collect(),
        }
    }

    /// The first `k` forms.
    pub fn prefix(&self, k: usize) -> Result<FormSystem> {
        let mut sys = FormSystem::new(self.forms[..k].to_vec())?;
        sys.source = self.source.as_ref().map(|s| Arc::new(s[..k].to_vec()));
        Ok(sys)
    }

    /// Rebuilds the system at another precision, from the exact inputs when
    /// they are known.
    pub fn with_context(&self, ctx: &FieldContext) -> Result<FormSystem> {
        if let Some(src) = &self.source {
            return FormSystem::from_rational_grams(ctx, src.as_ref().clone());
        }
        let forms = self
            .forms
            .iter()
            .map(|f| {
                let n = f.n();
                let rows = (0..n)
                    .map(|i| (0..n).map(|j| f.gram().get(i, j).with_context(ctx)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                QuadraticForm::from_gram(Matrix::from_rows(ctx, rows)?)
            })
            .collect::<Result<Vec<_>>>()?;
        if forms.is_empty() {
            return Ok(FormSystem::empty(ctx));
        }
        FormSystem::new(forms)
    }

    pub fn evaluate(&self, v: &Vector) -> Result<Vec<Padic>> {
        self.forms.iter().map(|f| evaluate(f, v)).collect()
    }
}

/// Substitutes `x = P y` in every form: each Gram becomes `Pᵀ G P`. A zero
/// `y` of the new system maps to the zero `P y` of the old one.
pub fn change_variables(sys: &FormSystem, p: &Matrix) -> Result<FormSystem> {
    if p.rows() != sys.n() || p.cols() != sys.n() {
        return Err(Error::dims(sys.n(), p.rows()));
    }
    if p.rank()? != sys.n() {
        return Err(Error::SingularMatrix);
    }
    let forms = sys.forms.iter().map(|f| restrict_to_basis(f, p)).collect::<Result<Vec<_>>>()?;
    FormSystem::new(forms)
}

/// An `s`-dimensional subspace of the ambient space, spanned by the columns
/// of `basis`. `embedding_chain` records the successive coordinate maps that
/// produced it; their product is `basis`.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: Matrix,
    embedding_chain: Vec<Matrix>,
}

impl Subspace {
    pub fn from_basis(basis: Matrix) -> Self {
        Subspace { embedding_chain: vec![basis.clone()], basis }
    }

    pub fn from_chain(chain: Vec<Matrix>) -> Result<Self> {
        let basis = compose(&chain)?;
        Ok(Subspace { basis, embedding_chain: chain })
    }

    pub fn line(v: &Vector) -> Result<Self> {
        Ok(Self::from_basis(Matrix::from_columns(v.context(), v.dim(), std::slice::from_ref(v))?))
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn embedding_chain(&self) -> &[Matrix] {
        &self.embedding_chain
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Maps internal coordinates `y` to the ambient vector `B y`.
    pub fn embed(&self, y: &Vector) -> Result<Vector> {
        self.basis.mul_vec(y)
    }
}

/// Product of a chain of matrices, left to right.
pub fn compose(chain: &[Matrix]) -> Result<Matrix> {
    let (first, rest) = chain.split_first().ok_or_else(|| Error::Precondition("empty chain".into()))?;
    rest.iter().try_fold(first.clone(), |acc, m| acc.mul(m))
}
