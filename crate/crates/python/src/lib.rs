//! Python bindings. Rationals cross the boundary as strings or ints.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use quadsys::bounds;
use quadsys::document::{
    format_rational, parse_rational, parse_vector, CertificateDoc, Document, SubspaceDoc, SystemDoc,
};
use quadsys::oracle::{self, IntegralForm, ResidueSearchSpec};
use quadsys::random::random_system;
use quadsys::solver;
use quadsys::witness;
use quadsys::{Error, FieldContext, FormSystem, SolveCertificate};

create_exception!(pyquadsys, QuadsysError, PyException);
create_exception!(pyquadsys, NoZeroFound, QuadsysError);
create_exception!(pyquadsys, PrecisionExhausted, QuadsysError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoZeroFoundBelowGuarantee(_) | Error::DimensionShortfall { .. } => NoZeroFound::new_err(e.to_string()),
        Error::PrecisionExhausted(_) => PrecisionExhausted::new_err(e.to_string()),
        _ => QuadsysError::new_err(e.to_string()),
    }
}

/// Accepts Python ints or rational strings such as "-3/4".
#[derive(FromPyObject)]
enum Entry {
    Int(i64),
    Str(String),
}

impl Entry {
    fn rational(&self) -> PyResult<num_rational::BigRational> {
        match self {
            Entry::Int(i) => Ok(num_rational::BigRational::from_integer((*i).into())),
            Entry::Str(s) => parse_rational(s).map_err(to_py),
        }
    }
}

/// A system of quadratic forms over Q_p, given by Gram matrices.
#[pyclass(module = "pyquadsys", frozen, skip_from_py_object)]
#[derive(Clone)]
struct System {
    inner: FormSystem,
}

#[pymethods]
impl System {
    #[new]
    #[pyo3(signature = (p, grams, precision = 64))]
    fn new(p: u64, grams: Vec<Vec<Vec<Entry>>>, precision: u32) -> PyResult<Self> {
        let ctx = FieldContext::new(p, precision).map_err(to_py)?;
        let rational = grams
            .iter()
            .map(|g| g.iter().map(|r| r.iter().map(Entry::rational).collect()).collect())
            .collect::<PyResult<Vec<Vec<Vec<_>>>>>()?;
        let inner = FormSystem::from_rational_grams(&ctx, rational).map_err(to_py)?;
        Ok(System { inner })
    }

    /// Seeded random system with integer Gram entries in [-9, 9].
    #[staticmethod]
    #[pyo3(signature = (p, t, n, seed, precision = 64))]
    fn random(p: u64, t: usize, n: usize, seed: u64, precision: u32) -> PyResult<Self> {
        let ctx = FieldContext::new(p, precision).map_err(to_py)?;
        Ok(System { inner: random_system(&ctx, seed, t, n).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = Document::parse(text).and_then(Document::into_system).map_err(to_py)?;
        let ctx = doc.context(None, None).map_err(to_py)?;
        Ok(System { inner: doc.system(&ctx).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        Document::System(SystemDoc::from_system(&self.inner)).to_json()
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.context().p()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn t(&self) -> usize {
        self.inner.t()
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.inner.context().precision()
    }

    /// Gram matrices as rational strings.
    fn grams(&self) -> Vec<Vec<Vec<String>>> {
        self.inner
            .rational_grams()
            .iter()
            .map(|g| g.iter().map(|r| r.iter().map(format_rational).collect()).collect())
            .collect()
    }

    /// Valuation of each form at `zero`; None for an exact zero.
    fn valuations(&self, zero: Vec<String>) -> PyResult<Vec<Option<i64>>> {
        let v = parse_vector(self.inner.context(), &zero).map_err(to_py)?;
        let vals = self.inner.evaluate(&v).map_err(to_py)?;
        Ok(vals.iter().map(|x| x.valuation().finite()).collect())
    }

    fn __repr__(&self) -> String {
        format!("System(p={}, t={}, n={}, precision={})", self.p(), self.t(), self.n(), self.precision())
    }
}

/// A verified common zero.
#[pyclass(module = "pyquadsys", frozen)]
struct Certificate {
    inner: SolveCertificate,
}

#[pymethods]
impl Certificate {
    /// The zero as rational strings, primitive (minimal valuation 0).
    #[getter]
    fn zero(&self) -> Vec<String> {
        CertificateDoc::new(&self.inner).zero
    }

    #[getter]
    fn residual_valuations(&self) -> Vec<Option<i64>> {
        self.inner.residual_valuations.iter().map(|v| v.finite()).collect()
    }

    /// Reduction steps as a JSON array.
    #[getter]
    fn trace_json(&self) -> String {
        serde_json::to_string(&self.inner.trace).expect("trace serializes")
    }

    fn to_json(&self) -> String {
        Document::Certificate(CertificateDoc::new(&self.inner)).to_json()
    }

    fn __repr__(&self) -> String {
        format!("Certificate(zero={:?})", self.zero())
    }
}

#[pyfunction]
fn solve(system: &System) -> PyResult<Certificate> {
    Ok(Certificate { inner: solver::solve_system(&system.inner).map_err(to_py)? })
}

/// Basis vectors (as rational strings) of an `s`-dimensional zero subspace.
#[pyfunction]
fn zero_subspace(system: &System, s: usize) -> PyResult<Vec<Vec<String>>> {
    let cert = solver::find_zero_subspace(&system.inner, s).map_err(to_py)?;
    Ok(SubspaceDoc::new(&cert).basis)
}

/// True iff `zero` is nontrivial and every form has valuation >= threshold
/// there (default: the zero-threshold of the system's precision).
#[pyfunction]
#[pyo3(signature = (system, zero, threshold = None))]
fn verify(system: &System, zero: Vec<String>, threshold: Option<i64>) -> PyResult<bool> {
    let ctx = system.inner.context();
    let v = parse_vector(ctx, &zero).map_err(to_py)?;
    let r = solver::verify_zero(&system.inner, &v, threshold.unwrap_or(ctx.zero_threshold())).map_err(to_py)?;
    Ok(r.accepted)
}

/// Reduces the certificate's zero to a primitive vector mod p^k and checks it
/// against every form.
#[pyfunction]
fn cross_check(cert: &Certificate, system: &System, k: u32) -> PyResult<bool> {
    oracle::cross_check(&cert.inner, &system.inner, k).map_err(to_py)
}

/// Lexicographically smallest primitive common zero mod p^k of integer Gram
/// matrices, or None.
#[pyfunction]
#[pyo3(signature = (grams, p, k, limit = oracle::DEFAULT_LIMIT))]
fn oracle_search(grams: Vec<Vec<Vec<i64>>>, p: u64, k: u32, limit: u64) -> PyResult<Option<Vec<u64>>> {
    let forms = grams.iter().map(|g| IntegralForm::from_int_gram(g)).collect::<Result<Vec<_>, _>>().map_err(to_py)?;
    let spec = ResidueSearchSpec::new(forms, p, k, limit).map_err(to_py)?;
    Ok(oracle::primitive_zero_search(&spec))
}

#[pyfunction]
fn anisotropic_quaternary(p: u64) -> PyResult<Vec<i64>> {
    Ok(witness::quaternary_coefficients(p).map_err(to_py)?.to_vec())
}

/// `t` anisotropic quaternary forms on disjoint blocks of variables.
#[pyfunction]
fn block_witness(t: usize, p: u64) -> PyResult<System> {
    Ok(System { inner: witness::block_witness(t, p).map_err(to_py)?.system })
}

#[pyfunction]
fn theorem_bound(t: u64, m: u64, u1: u64) -> PyResult<u64> {
    Ok(bounds::theorem_bound(t, m, u1).map_err(to_py)?.value)
}

#[pyfunction]
fn local_field_bound(t: u64) -> PyResult<u64> {
    Ok(bounds::local_field_bound(t).map_err(to_py)?.value)
}

#[pyfunction]
fn qp_bound(t: u64, p: u64) -> PyResult<u64> {
    Ok(bounds::qp_bound(t, p).map_err(to_py)?.value)
}

#[pyfunction]
fn lower_bound(t: u64, u1: u64) -> PyResult<u64> {
    Ok(bounds::lower_bound(t, u1).map_err(to_py)?.value)
}

#[pyfunction]
fn constructive_threshold(t: usize) -> PyResult<usize> {
    if t == 0 {
        return Err(PyValueError::new_err("t must be >= 1"));
    }
    Ok(solver::constructive_threshold(t))
}

#[pyfunction]
fn subspace_threshold(t: usize, s: usize) -> PyResult<usize> {
    if t == 0 || s == 0 {
        return Err(PyValueError::new_err("t and s must be >= 1"));
    }
    Ok(solver::subspace_threshold(t, s))
}

/// Square root in Q_p of a rational, as a rational approximation.
#[pyfunction]
#[pyo3(signature = (value, p, precision = 64))]
fn padic_sqrt(value: Entry, p: u64, precision: u32) -> PyResult<String> {
    let ctx = FieldContext::new(p, precision).map_err(to_py)?;
    let x = ctx.from_big_rational(&value.rational()?).map_err(to_py)?;
    Ok(format_rational(&x.sqrt().map_err(to_py)?.to_balanced_rational()))
}

/// Runs the command-line tool; returns (exit code, stdout, stderr).
#[pyfunction]
#[pyo3(signature = (args, stdin = String::new()))]
fn run_cli(args: Vec<String>, stdin: String) -> (i32, String, String) {
    let argv = std::iter::once("quadsys".to_string()).chain(args);
    let out = quadsys::cli::run(argv, &mut stdin.as_bytes());
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn pyquadsys(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("QuadsysError", py.get_type::<QuadsysError>())?;
    m.add("NoZeroFound", py.get_type::<NoZeroFound>())?;
    m.add("PrecisionExhausted", py.get_type::<PrecisionExhausted>())?;
    m.add_class::<System>()?;
    m.add_class::<Certificate>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(zero_subspace, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(cross_check, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_search, m)?)?;
    m.add_function(wrap_pyfunction!(anisotropic_quaternary, m)?)?;
    m.add_function(wrap_pyfunction!(block_witness, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_bound, m)?)?;
    m.add_function(wrap_pyfunction!(local_field_bound, m)?)?;
    m.add_function(wrap_pyfunction!(qp_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(constructive_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(padic_sqrt, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
