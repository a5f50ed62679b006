//! JSON documents exchanged by the command-line tool.
//!
//! Every document carries `"schema": 1` and a `"kind"` tag. Rationals are
//! strings (`"3"`, `"-1/2"`), valuations are integers with `null` for an
//! infinite valuation.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::oracle::AnisotropyEvidence;
use crate::padic::{FieldContext, Padic, Valuation};
use crate::qform::{polynomial_to_gram, Diagonalization, FormSystem};
use crate::solver::{SolveCertificate, SubspaceCertificate, TraceStep, ZeroReport};
use crate::witness::{BlockEvidence, WitnessSystem};

pub const SCHEMA: u32 = 1;
pub const DEFAULT_PRECISION: u32 = 64;

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Precondition(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let num = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if den == BigInt::from(0) {
                return Err(Error::ZeroDenominator);
            }
            Ok(BigRational::new(num, den))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Balanced digits, so small negative integers print as such.
fn padic_string(x: &Padic) -> String {
    format_rational(&x.to_balanced_rational())
}

fn valuation_json(v: Valuation) -> Option<i64> {
    v.finite()
}

/// Rationals accept JSON strings or integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Str(String),
}

impl Num {
    fn rational(&self) -> Result<BigRational> {
        match self {
            Num::Int(i) => Ok(BigRational::from_integer((*i).into())),
            Num::Str(s) => parse_rational(s),
        }
    }
}

impl From<&BigRational> for Num {
    fn from(q: &BigRational) -> Self {
        Num::Str(format_rational(q))
    }
}

type NumMatrix = Vec<Vec<Num>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceDoc {
    pub certified: bool,
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub searched: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
}

impl From<&BlockEvidence> for EvidenceDoc {
    fn from(e: &BlockEvidence) -> Self {
        match e {
            BlockEvidence::Certified(AnisotropyEvidence { p, k, searched }) => {
                EvidenceDoc { certified: true, p: *p, k: Some(*k), searched: Some(*searched), limit: None }
            }
            BlockEvidence::Uncertified { p, limit } => {
                EvidenceDoc { certified: false, p: *p, k: None, searched: None, limit: Some(*limit) }
            }
        }
    }
}

/// A system of forms, given as Gram matrices or as upper-triangular
/// polynomial coefficients. Witness output adds the block layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub schema: u32,
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forms: Option<Vec<NumMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polys: Option<Vec<NumMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<EvidenceDoc>>,
}

impl SystemDoc {
    pub fn from_system(sys: &FormSystem) -> Self {
        SystemDoc {
            schema: SCHEMA,
            p: sys.context().p(),
            precision: Some(sys.context().precision()),
            n: sys.n(),
            forms: Some(
                sys.rational_grams()
                    .iter()
                    .map(|g| g.iter().map(|r| r.iter().map(Num::from).collect()).collect())
                    .collect(),
            ),
            polys: None,
            blocks: None,
            evidence: None,
        }
    }

    pub fn from_witness(w: &WitnessSystem) -> Self {
        let mut doc = Self::from_system(&w.system);
        doc.blocks = Some(w.blocks.iter().map(|r| [r.start, r.end]).collect());
        doc.evidence = Some(w.evidence.iter().map(EvidenceDoc::from).collect());
        doc
    }

    /// Exact rational Gram matrices, validated as `n x n` and symmetric.
    pub fn rational_grams(&self) -> Result<Vec<Vec<Vec<BigRational>>>> {
        let parse = |m: &NumMatrix| -> Result<Vec<Vec<BigRational>>> {
            if m.len() != self.n {
                return Err(Error::dims(self.n, m.len()));
            }
            m.iter()
                .map(|r| {
                    if r.len() != self.n {
                        return Err(Error::dims(self.n, r.len()));
                    }
                    r.iter().map(Num::rational).collect()
                })
                .collect()
        };
        let mut grams = Vec::new();
        for g in self.forms.iter().flatten() {
            let g = parse(g)?;
            for i in 0..self.n {
                for j in 0..i {
                    if g[i][j] != g[j][i] {
                        return Err(Error::Precondition(format!("Gram matrix not symmetric at ({i}, {j})")));
                    }
                }
            }
            grams.push(g);
        }
        for c in self.polys.iter().flatten() {
            grams.push(polynomial_to_gram(&parse(c)?)?);
        }
        if grams.is_empty() {
            return Err(Error::Precondition("document has no forms".into()));
        }
        Ok(grams)
    }

    pub fn context(&self, precision: Option<u32>, max_precision: Option<u32>) -> Result<FieldContext> {
        let n = precision.or(self.precision).unwrap_or(DEFAULT_PRECISION);
        match max_precision {
            Some(m) => FieldContext::with_max_precision(self.p, n, m),
            None => FieldContext::new(self.p, n),
        }
    }

    pub fn system(&self, ctx: &FieldContext) -> Result<FormSystem> {
        FormSystem::from_rational_grams(ctx, self.rational_grams()?)
    }
}

fn vector_strings(v: &Vector) -> Vec<String> {
    v.entries().iter().map(padic_string).collect()
}

fn matrix_strings(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| padic_string(m.get(i, j))).collect()).collect()
}

pub fn parse_vector(ctx: &FieldContext, xs: &[String]) -> Result<Vector> {
    Ok(Vector::new(ctx, xs.iter().map(|s| ctx.from_big_rational(&parse_rational(s)?)).collect::<Result<_>>()?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub schema: u32,
    pub p: u64,
    pub precision: u32,
    pub zero: Vec<String>,
    pub residual_valuations: Vec<Option<i64>>,
    pub trace: Vec<TraceStep>,
}

impl CertificateDoc {
    pub fn new(cert: &SolveCertificate) -> Self {
        let ctx = cert.zero.context();
        CertificateDoc {
            schema: SCHEMA,
            p: ctx.p(),
            precision: ctx.precision(),
            zero: vector_strings(&cert.zero),
            residual_valuations: cert.residual_valuations.iter().map(|v| valuation_json(*v)).collect(),
            trace: cert.trace.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroDoc {
    pub schema: u32,
    pub zero: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceDoc {
    pub schema: u32,
    pub p: u64,
    pub precision: u32,
    pub dim: usize,
    /// Basis vectors, one per entry.
    pub basis: Vec<Vec<String>>,
    pub residual: Option<i64>,
    pub trace: Vec<TraceStep>,
}

impl SubspaceDoc {
    pub fn new(cert: &SubspaceCertificate) -> Self {
        let b = cert.subspace.basis();
        SubspaceDoc {
            schema: SCHEMA,
            p: b.context().p(),
            precision: b.context().precision(),
            dim: cert.subspace.dim(),
            basis: b.columns().iter().map(vector_strings).collect(),
            residual: valuation_json(cert.residual),
            trace: cert.trace.clone(),
        }
    }

    pub fn basis_matrix(&self, ctx: &FieldContext) -> Result<Matrix> {
        let cols = self.basis.iter().map(|c| parse_vector(ctx, c)).collect::<Result<Vec<_>>>()?;
        let n = cols.first().map_or(0, Vector::dim);
        Matrix::from_columns(ctx, n, &cols)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationDoc {
    pub schema: u32,
    pub threshold: i64,
    pub valuations: Vec<Option<i64>>,
    pub nontrivial: bool,
    pub accepted: bool,
}

impl VerificationDoc {
    pub fn new(r: &ZeroReport) -> Self {
        VerificationDoc {
            schema: SCHEMA,
            threshold: r.threshold,
            valuations: r.valuations.iter().map(|v| valuation_json(*v)).collect(),
            nontrivial: r.nontrivial,
            accepted: r.accepted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<[usize; 2]>,
    pub searched: u64,
    pub zero: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleDoc {
    pub schema: u32,
    pub p: u64,
    pub k: u32,
    pub limit: u64,
    pub results: Vec<OracleResult>,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalForm {
    /// Rows of `P`, where `Pᵀ G P = diag(d)`.
    pub p: Vec<Vec<String>>,
    pub d: Vec<String>,
}

impl From<&Diagonalization> for DiagonalForm {
    fn from(d: &Diagonalization) -> Self {
        DiagonalForm { p: matrix_strings(&d.p), d: d.d.iter().map(padic_string).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalizationDoc {
    pub schema: u32,
    pub p: u64,
    pub precision: u32,
    pub forms: Vec<DiagonalForm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedBound {
    pub name: String,
    #[serde(flatten)]
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub schema: u32,
    pub bounds: Vec<NamedBound>,
    pub constructive_threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    System(SystemDoc),
    Certificate(CertificateDoc),
    Zero(ZeroDoc),
    Subspace(SubspaceDoc),
    Verification(VerificationDoc),
    Oracle(OracleDoc),
    Diagonalization(DiagonalizationDoc),
    Bounds(BoundsDoc),
}

impl Document {
    pub fn parse(text: &str) -> Result<Document> {
        let doc: Document =
            serde_json::from_str(text).map_err(|e| Error::Precondition(format!("invalid document: {e}")))?;
        if doc.schema() != SCHEMA {
            return Err(Error::Precondition(format!("unsupported schema {}", doc.schema())));
        }
        Ok(doc)
    }

    pub fn schema(&self) -> u32 {
        match self {
            Document::System(d) => d.schema,
            Document::Certificate(d) => d.schema,
            Document::Zero(d) => d.schema,
            Document::Subspace(d) => d.schema,
            Document::Verification(d) => d.schema,
            Document::Oracle(d) => d.schema,
            Document::Diagonalization(d) => d.schema,
            Document::Bounds(d) => d.schema,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn into_system(self) -> Result<SystemDoc> {
        match self {
            Document::System(s) => Ok(s),
            _ => Err(Error::Precondition("expected a system document".into())),
        }
    }

    /// The zero carried by a certificate or zero document.
    pub fn zero_strings(&self) -> Result<&[String]> {
        match self {
            Document::Certificate(c) => Ok(&c.zero),
            Document::Zero(z) => Ok(&z.zero),
            _ => Err(Error::Precondition("expected a certificate or zero document".into())),
        }
    }
}
