//! Dense linear algebra over Q_p at finite precision.
//!
//! Elimination always pivots on the candidate of minimal valuation, the
//! p-adic counterpart of partial pivoting. Entries that are zero by the
//! context's threshold are replaced by exact zeros as soon as they are seen,
//! so rank decisions follow a single rule.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{FieldContext, Padic, Valuation};

#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    ctx: FieldContext,
    entries: Vec<Padic>,
}

impl Vector {
    pub fn new(ctx: &FieldContext, entries: Vec<Padic>) -> Self {
        debug_assert!(entries.iter().all(|e| e.context() == ctx));
        Vector { ctx: ctx.clone(), entries }
    }

    pub fn zeros(ctx: &FieldContext, n: usize) -> Self {
        Vector { ctx: ctx.clone(), entries: vec![ctx.zero(); n] }
    }

    pub fn from_ints(ctx: &FieldContext, xs: &[i64]) -> Self {
        Vector::new(ctx, xs.iter().map(|&x| ctx.from_int(x)).collect())
    }

    /// The standard basis vector `e_i` of length `n`.
    pub fn unit(ctx: &FieldContext, n: usize, i: usize) -> Self {
        let mut v = Vector::zeros(ctx, n);
        v.entries[i] = ctx.one();
        v
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Padic] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Padic> {
        self.entries
    }

    pub fn get(&self, i: usize) -> &Padic {
        &self.entries[i]
    }

    pub fn set(&mut self, i: usize, x: Padic) {
        self.entries[i] = x;
    }

    /// Nontrivial iff some entry is not zero by threshold.
    pub fn is_nontrivial(&self) -> bool {
        self.entries.iter().any(|e| !e.is_zero())
    }

    /// Smallest valuation among entries that are not zero by threshold.
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().filter(|e| !e.is_zero()).filter_map(|e| e.valuation().finite()).min()
    }

    /// Rescales by a power of p so that the smallest valuation is 0.
    pub fn primitive(&self) -> Result<Vector> {
        let v = self.min_valuation().ok_or(Error::TrivialVector)?;
        Ok(self.shift(-v))
    }

    /// The same entries in another context with the same prime.
    pub fn with_context(&self, ctx: &FieldContext) -> Result<Vector> {
        let entries = self.entries.iter().map(|e| e.with_context(ctx)).collect::<Result<_>>()?;
        Ok(Vector::new(ctx, entries))
    }

    pub fn shift(&self, k: i64) -> Vector {
        Vector::new(&self.ctx, self.entries.iter().map(|e| e.shift(k)).collect())
    }

    pub fn scale(&self, c: &Padic) -> Result<Vector> {
        let entries = self.entries.iter().map(|e| e.mul(c)).collect::<Result<_>>()?;
        Ok(Vector::new(&self.ctx, entries))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        if self.dim() != other.dim() {
            return Err(Error::dims(self.dim(), other.dim()));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Vector::new(&self.ctx, entries))
    }

    pub fn dot(&self, other: &Vector) -> Result<Padic> {
        if self.dim() != other.dim() {
            return Err(Error::dims(self.dim(), other.dim()));
        }
        let mut acc = self.ctx.zero();
        for (a, b) in self.entries.iter().zip(&other.entries) {
            acc = acc.add(&a.mul(b)?)?;
        }
        Ok(acc)
    }

    /// Appends one coordinate.
    pub fn push(&mut self, x: Padic) {
        self.entries.push(x);
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    ctx: FieldContext,
    rows: usize,
    cols: usize,
    data: Vec<Padic>,
}

/// Result of [`Matrix::row_reduce`].
#[derive(Clone, Debug)]
pub struct RowReduction {
    /// Reduced row echelon form with pivots equal to 1.
    pub reduced: Matrix,
    pub rank: usize,
    /// Invertible matrix with `reduced = transform * M`.
    pub transform: Matrix,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(ctx: &FieldContext, rows: usize, cols: usize) -> Self {
        Matrix { ctx: ctx.clone(), rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: &FieldContext, n: usize) -> Self {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_rows(ctx: &FieldContext, rows: Vec<Vec<Padic>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::dims(c, row.len()));
            }
            data.extend(row);
        }
        Ok(Matrix { ctx: ctx.clone(), rows: r, cols: c, data })
    }

    pub fn from_int_rows(ctx: &FieldContext, rows: &[Vec<i64>]) -> Result<Self> {
        Matrix::from_rows(ctx, rows.iter().map(|r| r.iter().map(|&x| ctx.from_int(x)).collect()).collect())
    }

    /// Matrix whose columns are `cols`, each of length `n`.
    pub fn from_columns(ctx: &FieldContext, n: usize, cols: &[Vector]) -> Result<Self> {
        let mut m = Matrix::zeros(ctx, n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.dim() != n {
                return Err(Error::dims(n, c.dim()));
            }
            for i in 0..n {
                m.set(i, j, c.get(i).clone());
            }
        }
        Ok(m)
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn with_context(&self, ctx: &FieldContext) -> Result<Matrix> {
        let cols = self.columns().iter().map(|c| c.with_context(ctx)).collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(ctx, self.rows, &cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Padic {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Padic) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector::new(&self.ctx, self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector::new(&self.ctx, (0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dims(self.cols, other.rows));
        }
        let mut out = Matrix::zeros(&self.ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.ctx.zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if self.cols != v.dim() {
            return Err(Error::dims(self.cols, v.dim()));
        }
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = self.ctx.zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_exact_zero() || v.get(k).is_exact_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(v.get(k))?)?;
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(Vector::new(&self.ctx, entries))
    }

    /// `Bᵀ M B`, the congruence transform used for Gram matrices.
    pub fn congruence(&self, b: &Matrix) -> Result<Matrix> {
        b.transpose().mul(&self.mul(b)?)
    }

    /// Block diagonal `diag(self, other)`.
    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(&self.ctx, self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    /// Leading `rows x cols` block.
    pub fn leading(&self, rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(&self.ctx, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// True when every entry is zero by threshold.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    /// Smallest valuation over all entries (`Infinite` for an empty or exact
    /// zero matrix).
    pub fn min_valuation(&self) -> Valuation {
        self.data.iter().map(|e| e.valuation()).min().unwrap_or(Valuation::Infinite)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[target] -= factor * row[source]`.
    fn axpy_row(&mut self, target: usize, source: usize, factor: &Padic) -> Result<()> {
        for j in 0..self.cols {
            let s = self.get(source, j);
            if s.is_exact_zero() {
                continue;
            }
            let v = self.get(target, j).sub(&factor.mul(s)?)?;
            self.set(target, j, v);
        }
        Ok(())
    }

    fn scale_row(&mut self, i: usize, divisor: &Padic) -> Result<()> {
        for j in 0..self.cols {
            let v = self.get(i, j).div(divisor)?;
            self.set(i, j, v);
        }
        Ok(())
    }

    /// Reduced row echelon form by Gauss-Jordan elimination, pivoting on the
    /// entry of minimal valuation in each column.
    pub fn row_reduce(&self) -> Result<RowReduction> {
        let mut a = self.clone();
        let mut t = Matrix::identity(&self.ctx, self.rows);
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut best: Option<(usize, i64)> = None;
            let mut undetermined = false;
            for i in r..self.rows {
                match a.get(i, col).zero_test() {
                    Ok(true) => a.set(i, col, self.ctx.zero()),
                    Ok(false) => {
                        let v = a.get(i, col).valuation().finite().unwrap();
                        if best.is_none_or(|(_, bv)| v < bv) {
                            best = Some((i, v));
                        }
                    }
                    Err(_) => undetermined = true,
                }
            }
            let Some((pivot_row, _)) = best else {
                if undetermined {
                    return Err(Error::precision(format!("cannot decide rank at column {col}")));
                }
                continue;
            };
            a.swap_rows(r, pivot_row);
            t.swap_rows(r, pivot_row);
            let pivot = a.get(r, col).clone();
            a.scale_row(r, &pivot)?;
            t.scale_row(r, &pivot)?;
            a.set(r, col, self.ctx.one());
            for i in 0..self.rows {
                if i == r || a.get(i, col).is_exact_zero() {
                    continue;
                }
                let factor = a.get(i, col).clone();
                a.axpy_row(i, r, &factor)?;
                t.axpy_row(i, r, &factor)?;
                a.set(i, col, self.ctx.zero());
            }
            pivots.push(col);
            r += 1;
        }
        Ok(RowReduction { reduced: a, rank: pivots.len(), transform: t, pivots })
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.row_reduce()?.rank)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::dims(self.rows, self.cols));
        }
        let rr = self.row_reduce()?;
        if rr.rank < self.rows {
            return Err(Error::SingularMatrix);
        }
        Ok(rr.transform)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Basis of `{x : M x = 0}`, canonicalized to reduced echelon shape (each
/// vector has a leading 1 in a column where the others vanish).
pub fn kernel_basis(m: &Matrix) -> Result<Vec<Vector>> {
    let ctx = m.context();
    let rr = m.row_reduce()?;
    let free: Vec<usize> = (0..m.cols()).filter(|c| !rr.pivots.contains(c)).collect();
    if free.is_empty() {
        return Ok(Vec::new());
    }
    let mut raw = Vec::with_capacity(free.len());
    for &f in &free {
        let mut x = Vector::zeros(ctx, m.cols());
        x.set(f, ctx.one());
        for (row, &pc) in rr.pivots.iter().enumerate() {
            let e = rr.reduced.get(row, f);
            if !e.is_exact_zero() {
                x.set(pc, e.neg());
            }
        }
        raw.push(x);
    }
    let stacked = Matrix::from_rows(ctx, raw.into_iter().map(Vector::into_entries).collect())?;
    let canon = stacked.row_reduce()?;
    if canon.rank != free.len() {
        return Err(Error::precision("kernel vectors lost independence"));
    }
    let basis: Vec<Vector> = (0..canon.rank).map(|i| canon.reduced.row(i)).collect();
    audit_kernel(m, &basis)?;
    Ok(basis)
}

/// Every image `M u` must be zero by threshold; an undecidable entry means
/// the elimination ran out of digits.
fn audit_kernel(m: &Matrix, basis: &[Vector]) -> Result<()> {
    for u in basis {
        for x in m.mul_vec(u)?.entries() {
            if !x.zero_test()? {
                return Err(Error::precision("kernel vector does not annihilate the matrix"));
            }
        }
    }
    Ok(())
}

/// A Z_p-basis of the integral kernel `{x in Z_p^n : M x = 0}`.
///
/// Unimodular column operations, pivoting in each row on the entry of
/// minimal valuation, so every multiplier is integral. The columns of the
/// transform that carry no pivot span the kernel and, being part of a
/// unimodular basis, span all of its integral points. Restricting forms to
/// this basis adds no spurious powers of p.
pub fn saturated_kernel_basis(m: &Matrix) -> Result<Vec<Vector>> {
    let ctx = m.context();
    let cols = m.cols();
    // Rows of `a` are columns of `m`; rows of `u` are columns of the transform.
    let mut a = m.transpose();
    let mut u = Matrix::identity(ctx, cols);
    let mut next = 0;
    for r in 0..m.rows() {
        if next == cols {
            break;
        }
        let mut best: Option<(usize, i64)> = None;
        let mut undetermined = false;
        for j in next..cols {
            match a.get(j, r).zero_test() {
                Ok(true) => a.set(j, r, ctx.zero()),
                Ok(false) => {
                    let v = a.get(j, r).valuation().finite().unwrap();
                    if best.is_none_or(|(_, bv)| v < bv) {
                        best = Some((j, v));
                    }
                }
                Err(_) => undetermined = true,
            }
        }
        let Some((pc, _)) = best else {
            if undetermined {
                return Err(Error::precision(format!("cannot decide rank at row {r}")));
            }
            continue;
        };
        a.swap_rows(next, pc);
        u.swap_rows(next, pc);
        let pivot = a.get(next, r).clone();
        for j in next + 1..cols {
            if a.get(j, r).is_exact_zero() {
                continue;
            }
            let factor = a.get(j, r).div(&pivot)?;
            a.axpy_row(j, next, &factor)?;
            u.axpy_row(j, next, &factor)?;
            a.set(j, r, ctx.zero());
        }
        next += 1;
    }
    let basis: Vec<Vector> = (next..cols).map(|j| u.row(j)).collect();
    audit_kernel(m, &basis)?;
    Ok(basis)
}

/// Invertible `n x n` matrix whose last column is `v` and whose other
/// columns are the standard basis vectors except the one at the first
/// coordinate where `v` has minimal valuation.
pub fn extend_to_basis(v: &Vector) -> Result<Matrix> {
    let ctx = v.context();
    let n = v.dim();
    let mut drop: Option<(usize, i64)> = None;
    for (i, e) in v.entries().iter().enumerate() {
        if e.zero_test()? {
            continue;
        }
        let val = e.valuation().finite().unwrap();
        if drop.is_none_or(|(_, best)| val < best) {
            drop = Some((i, val));
        }
    }
    let (drop, _) = drop.ok_or(Error::TrivialVector)?;
    let mut cols: Vec<Vector> = (0..n).filter(|&j| j != drop).map(|j| Vector::unit(ctx, n, j)).collect();
    cols.push(v.clone());
    let p = Matrix::from_columns(ctx, n, &cols)?;
    if p.rank()? != n {
        return Err(Error::SingularMatrix);
    }
    Ok(p)
}
