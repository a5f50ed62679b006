//! Exhaustive search for primitive zeros modulo `p^k`.
//!
//! A zero over Q_p scales to a primitive integral vector, which reduces to a
//! primitive zero mod `p^k` for every `k`. So an empty search at one level
//! certifies that no nontrivial Q_p zero exists.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::is_prime;
use crate::qform::{FormSystem, QuadraticForm};
use crate::solver::SolveCertificate;

pub const DEFAULT_LIMIT: u64 = 10_000_000;

/// A form with integer polynomial coefficients `sum_{i<=j} a_ij x_i x_j`,
/// scaled so that some coefficient is a p-adic unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralForm {
    n: usize,
    /// Row-major upper triangle, `a_ij` at `i * n + j` for `i <= j`.
    coeffs: Vec<BigInt>,
}

impl IntegralForm {
    /// From an integer Gram matrix: `a_ii = G_ii`, `a_ij = 2 G_ij`.
    pub fn from_int_gram(gram: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<BigRational>> =
            gram.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
        Self::from_rational_gram(&rows, None)
    }

    /// From a rational Gram matrix, clearing denominators and, when `p` is
    /// given, dividing out the common power of `p`.
    pub fn from_rational_gram(gram: &[Vec<BigRational>], p: Option<u64>) -> Result<Self> {
        let n = gram.len();
        let mut poly = vec![BigRational::zero(); n * n];
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::dims(n, row.len()));
            }
            for j in i..n {
                if gram[j][i] != row[j] {
                    return Err(Error::Precondition("Gram matrix is not symmetric".into()));
                }
                poly[i * n + j] = if i == j { row[j].clone() } else { &row[j] * BigInt::from(2) };
            }
        }
        let den = poly.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let mut coeffs: Vec<BigInt> = poly.iter().map(|q| (q * &den).to_integer()).collect();
        if let Some(p) = p {
            let content = coeffs.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
            if !content.is_zero() {
                let pb = BigInt::from(p);
                let mut scale = BigInt::one();
                let mut rest = content;
                while (&rest % &pb).is_zero() {
                    rest /= &pb;
                    scale *= &pb;
                }
                for c in &mut coeffs {
                    *c /= &scale;
                }
            }
        }
        Ok(IntegralForm { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, i: usize, j: usize) -> &BigInt {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.coeffs[i * self.n + j]
    }

    fn reduced(&self, modulus: u64) -> Vec<u64> {
        let m = BigInt::from(modulus);
        self.coeffs.iter().map(|c| c.mod_floor(&m).to_u64().unwrap()).collect()
    }

    /// Exact value at an integer vector.
    pub fn evaluate(&self, x: &[BigInt]) -> BigInt {
        let mut s = BigInt::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let a = &self.coeffs[i * self.n + j];
                if !a.is_zero() {
                    s += a * &x[i] * &x[j];
                }
            }
        }
        s
    }
}

fn eval_mod(coeffs: &[u64], n: usize, x: &[u64], m: u64) -> u64 {
    let m = m as u128;
    let mut s: u128 = 0;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        let mut row: u128 = 0;
        for j in i..n {
            row = (row + coeffs[i * n + j] as u128 * x[j] as u128) % m;
        }
        s = (s + row * x[i] as u128) % m;
    }
    s as u64
}

/// An exhaustive search over `(Z/p^k)^n`.
#[derive(Debug, Clone)]
pub struct ResidueSearchSpec {
    forms: Vec<IntegralForm>,
    n: usize,
    p: u64,
    k: u32,
    limit: u64,
}

impl ResidueSearchSpec {
    /// Rejects the search up front unless `p^(k n) <= limit`.
    pub fn new(forms: Vec<IntegralForm>, p: u64, k: u32, limit: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::InvalidLevel(k));
        }
        let n = forms.first().map_or(0, IntegralForm::n);
        if let Some(f) = forms.iter().find(|f| f.n() != n) {
            return Err(Error::dims(n, f.n()));
        }
        let points = BigInt::from(p).pow(k * n as u32);
        if points > BigInt::from(limit) {
            return Err(Error::SearchSpaceTooLarge { points: points.to_string(), limit });
        }
        Ok(ResidueSearchSpec { forms, n, p, k, limit })
    }

    /// The forms of `sys` from its exact rational Gram matrices.
    pub fn from_system(sys: &FormSystem, k: u32, limit: u64) -> Result<Self> {
        let p = sys.context().p();
        let forms = sys
            .rational_grams()
            .iter()
            .map(|g| IntegralForm::from_rational_gram(g, Some(p)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(forms, p, k, limit)
    }

    pub fn from_int_grams(grams: &[Vec<Vec<i64>>], p: u64, k: u32, limit: u64) -> Result<Self> {
        let forms = grams.iter().map(|g| IntegralForm::from_int_gram(g)).collect::<Result<Vec<_>>>()?;
        Self::new(forms, p, k, limit)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.k)
    }

    pub fn points(&self) -> u64 {
        self.modulus().pow(self.n as u32)
    }

    /// Visits primitive zeros in lexicographic order (first coordinate most
    /// significant) until `visit` returns false.
    fn scan(&self, mut visit: impl FnMut(&[u64]) -> bool) {
        let m = self.modulus();
        let n = self.n;
        if n == 0 {
            return;
        }
        let coeffs: Vec<Vec<u64>> = self.forms.iter().map(|f| f.reduced(m)).collect();
        let mut x = vec![0u64; n];
        // Count of coordinates that are units mod p.
        let mut units = 0usize;
        loop {
            if units > 0 && coeffs.iter().all(|c| eval_mod(c, n, &x, m) == 0) && !visit(&x) {
                return;
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if !x[i].is_multiple_of(self.p) {
                    units -= 1;
                }
                x[i] += 1;
                if x[i] == m {
                    x[i] = 0;
                    if !x[i].is_multiple_of(self.p) {
                        units += 1;
                    }
                    continue;
                }
                if !x[i].is_multiple_of(self.p) {
                    units += 1;
                }
                break;
            }
        }
    }
}

/// The lexicographically smallest primitive common zero mod `p^k`.
pub fn primitive_zero_search(spec: &ResidueSearchSpec) -> Option<Vec<u64>> {
    let mut found = None;
    spec.scan(|x| {
        found = Some(x.to_vec());
        false
    });
    found
}

/// All primitive common zeros mod `p^k`, in lexicographic order.
pub fn primitive_zeros(spec: &ResidueSearchSpec) -> Vec<Vec<u64>> {
    let mut all = Vec::new();
    spec.scan(|x| {
        all.push(x.to_vec());
        true
    });
    all
}

/// Record of an exhaustive search that found no primitive zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnisotropyEvidence {
    pub p: u64,
    pub k: u32,
    pub searched: u64,
}

/// Searches all of `(Z/p^k)^n` for a primitive zero of `f`.
pub fn certify_anisotropic(f: &QuadraticForm, k: u32, limit: u64) -> Result<AnisotropyEvidence> {
    let spec = ResidueSearchSpec::from_system(&FormSystem::new(vec![f.clone()])?, k, limit)?;
    certify_spec(&spec)
}

pub fn certify_spec(spec: &ResidueSearchSpec) -> Result<AnisotropyEvidence> {
    match primitive_zero_search(spec) {
        Some(z) => Err(Error::ZeroExists(z)),
        None => Ok(AnisotropyEvidence { p: spec.p, k: spec.k, searched: spec.points() }),
    }
}

/// The certificate's zero as a primitive integral vector mod `p^k`.
pub fn reduce_zero(cert: &SolveCertificate, k: u32) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::InvalidLevel(k));
    }
    let v = cert.zero.primitive()?;
    v.entries().iter().map(|x| x.residue(k).map(|r| r.to_u64().unwrap())).collect()
}

/// True iff the certificate's zero reduces to a primitive common zero of
/// every form of `sys` mod `p^k`.
pub fn cross_check(cert: &SolveCertificate, sys: &FormSystem, k: u32) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidLevel(k));
    }
    if cert.zero.dim() != sys.n() {
        return Ok(false);
    }
    let p = sys.context().p();
    let Ok(x) = reduce_zero(cert, k) else {
        return Ok(false);
    };
    if x.iter().all(|xi| xi % p == 0) {
        return Ok(false);
    }
    let m = BigInt::from(p).pow(k);
    let xb: Vec<BigInt> = x.iter().map(|&xi| BigInt::from(xi)).collect();
    for g in sys.rational_grams() {
        let f = IntegralForm::from_rational_gram(&g, Some(p))?;
        if !f.evaluate(&xb).mod_floor(&m).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Number of points `p^(k n)` as a decimal string; never overflows.
pub fn search_size(p: u64, k: u32, n: usize) -> String {
    BigInt::from(p).pow(k * n as u32).abs().to_string()
}
