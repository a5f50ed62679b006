//! Command-line front end.
//!
//! Exit codes: 0 success, 1 negative result (no zero found, zero rejected,
//! oracle found a zero), 2 invalid input, 3 precision exhausted.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{leep_bounds, local_field_bound, lower_bound, qp_bound, theorem_bound};
use crate::document::{
    parse_vector, BoundsDoc, CertificateDoc, DiagonalForm, DiagonalizationDoc, Document, NamedBound, OracleDoc,
    OracleResult, SubspaceDoc, SystemDoc, VerificationDoc, SCHEMA,
};
use crate::error::{Error, Result};
use crate::oracle::{primitive_zero_search, IntegralForm, ResidueSearchSpec, DEFAULT_LIMIT};
use crate::padic::FieldContext;
use crate::qform::diagonalize;
use crate::random::random_system;
use crate::solver::{constructive_threshold, find_zero_subspace, solve_system, verify_zero};
use crate::witness::{block_witness_with, WITNESS_PRECISION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "quadsys", version, about = "Zeros of systems of quadratic forms over Q_p")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Relative precision in p-adic digits; overrides the document.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Ceiling for automatic precision retries.
    #[arg(long, global = true)]
    pub max_precision: Option<u32>,
    /// Seed for randomly generated systems.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Maximum number of points the oracle may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_LIMIT)]
    pub limit: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Upper and lower bounds on the number of variables.
    Bound {
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 2)]
        m: u64,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 4)]
        u1: u64,
    },
    /// Common nontrivial zero of a system.
    Solve {
        /// System document, or `-` for stdin.
        input: Option<PathBuf>,
        /// Generate `T` random forms instead of reading a document.
        #[arg(long, value_name = "T", requires_all = ["vars", "p"])]
        random: Option<usize>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        /// Print the generated system instead of solving it.
        #[arg(long, requires = "random")]
        print_system: bool,
    },
    /// Subspace of common zeros.
    Subspace {
        input: PathBuf,
        #[arg(long)]
        dim: usize,
    },
    /// Block system with no nontrivial zero.
    Witness {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        p: u64,
    },
    /// Exhaustive primitive-zero search mod p^k.
    Oracle {
        input: PathBuf,
        #[arg(long)]
        level: u32,
    },
    /// Checks a zero against a system.
    Verify {
        input: PathBuf,
        /// Certificate or zero document.
        #[arg(long)]
        zero: PathBuf,
        /// Minimal residual valuation; defaults to the zero-threshold.
        #[arg(long)]
        threshold: Option<i64>,
    },
    /// Diagonalizes every form of a system.
    Diagonalize { input: PathBuf },
}

/// Exit code, standard output and standard error of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(doc: Document) -> Self {
        Self::with_code(EXIT_OK, doc)
    }

    fn with_code(code: i32, doc: Document) -> Self {
        Outcome { code, stdout: doc.to_json() + "\n", stderr: String::new() }
    }

    fn error(e: &Error) -> Self {
        Outcome { code: exit_code(e), stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoZeroFoundBelowGuarantee(_) | Error::DimensionShortfall { .. } | Error::ZeroExists(_) => EXIT_NEGATIVE,
        Error::PrecisionExhausted(_) => EXIT_PRECISION,
        _ => EXIT_INPUT,
    }
}

/// Runs one command. `args` includes the program name; `-` as an input path
/// reads `stdin`.
pub fn run<I, S>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(&cli, stdin) {
        Ok(out) => out,
        Err(e) => Outcome::error(&e),
    }
}

fn read_input(path: &PathBuf, stdin: &mut dyn Read) -> Result<Document> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s).map_err(|e| Error::Precondition(format!("reading stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("reading {}: {e}", path.display())))?
    };
    Document::parse(&text)
}

fn read_system(path: &PathBuf, stdin: &mut dyn Read) -> Result<SystemDoc> {
    read_input(path, stdin)?.into_system()
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Bound { t, m, p, u1 } => cmd_bound(*t, *m, *p, *u1),
        Command::Solve { input, random, vars, p, print_system } => {
            let (sys, _) = match (input, random) {
                (Some(_), Some(_)) => {
                    return Err(Error::Precondition("give either an input document or --random".into()))
                }
                (None, None) => return Err(Error::Precondition("missing input document".into())),
                (Some(path), None) => {
                    let doc = read_system(path, stdin)?;
                    let ctx = doc.context(g.precision, g.max_precision)?;
                    (doc.system(&ctx)?, doc)
                }
                (None, Some(t)) => {
                    let seed = g.seed.ok_or_else(|| Error::Precondition("--random needs --seed".into()))?;
                    let p = p.expect("required by clap");
                    let ctx = context(p, g.precision.unwrap_or(crate::document::DEFAULT_PRECISION), g.max_precision)?;
                    if *t == 0 {
                        return Err(Error::Precondition("--random needs T >= 1".into()));
                    }
                    let sys = random_system(&ctx, seed, *t, vars.expect("required by clap"))?;
                    let doc = SystemDoc::from_system(&sys);
                    (sys, doc)
                }
            };
            if *print_system {
                return Ok(Outcome::ok(Document::System(SystemDoc::from_system(&sys))));
            }
            let cert = solve_system(&sys)?;
            Ok(Outcome::ok(Document::Certificate(CertificateDoc::new(&cert))))
        }
        Command::Subspace { input, dim } => {
            let doc = read_system(input, stdin)?;
            let sys = doc.system(&doc.context(g.precision, g.max_precision)?)?;
            let cert = find_zero_subspace(&sys, *dim)?;
            Ok(Outcome::ok(Document::Subspace(SubspaceDoc::new(&cert))))
        }
        Command::Witness { t, p } => {
            let ctx = context(*p, g.precision.unwrap_or(WITNESS_PRECISION), g.max_precision)?;
            let w = block_witness_with(*t, &ctx, g.limit)?;
            Ok(Outcome::ok(Document::System(SystemDoc::from_witness(&w))))
        }
        Command::Oracle { input, level } => cmd_oracle(&read_system(input, stdin)?, *level, g.limit),
        Command::Verify { input, zero, threshold } => {
            let doc = read_system(input, stdin)?;
            let zdoc = read_input(zero, stdin)?;
            let mut precision = g.precision.or(doc.precision).unwrap_or(crate::document::DEFAULT_PRECISION);
            if let (Document::Certificate(c), None) = (&zdoc, g.precision) {
                precision = precision.max(c.precision);
            }
            let ctx = doc.context(Some(precision), g.max_precision)?;
            let sys = doc.system(&ctx)?;
            let v = parse_vector(&ctx, zdoc.zero_strings()?)?;
            let report = verify_zero(&sys, &v, threshold.unwrap_or(ctx.zero_threshold()))?;
            let code = if report.accepted { EXIT_OK } else { EXIT_NEGATIVE };
            Ok(Outcome::with_code(code, Document::Verification(VerificationDoc::new(&report))))
        }
        Command::Diagonalize { input } => {
            let doc = read_system(input, stdin)?;
            let ctx = doc.context(g.precision, g.max_precision)?;
            let sys = doc.system(&ctx)?;
            let forms =
                sys.forms().iter().map(|f| diagonalize(f).map(|d| DiagonalForm::from(&d))).collect::<Result<_>>()?;
            Ok(Outcome::ok(Document::Diagonalization(DiagonalizationDoc {
                schema: SCHEMA,
                p: ctx.p(),
                precision: ctx.precision(),
                forms,
            })))
        }
    }
}

fn context(p: u64, precision: u32, max_precision: Option<u32>) -> Result<FieldContext> {
    match max_precision {
        Some(m) => FieldContext::with_max_precision(p, precision, m),
        None => FieldContext::new(p, precision),
    }
}

fn cmd_bound(t: u64, m: u64, p: Option<u64>, u1: u64) -> Result<Outcome> {
    let named = |name: &str, report| NamedBound { name: name.into(), report };
    let mut bounds = vec![named("theorem_bound", theorem_bound(t, m, u1)?)];
    let (general, qp) = leep_bounds(t, u1)?;
    bounds.push(named("leep_bound", general));
    if let Some(qp) = qp {
        bounds.push(named("leep_qp_bound", qp));
    }
    bounds.push(named("local_field_bound", local_field_bound(t)?));
    if let Some(p) = p {
        bounds.push(named("qp_bound", qp_bound(t, p)?));
    }
    bounds.push(named("lower_bound", lower_bound(t, u1)?));
    let threshold = constructive_threshold(t as usize) as u64;
    Ok(Outcome::ok(Document::Bounds(BoundsDoc { schema: SCHEMA, bounds, constructive_threshold: threshold })))
}

fn cmd_oracle(doc: &SystemDoc, level: u32, limit: u64) -> Result<Outcome> {
    let grams = doc.rational_grams()?;
    let p = doc.p;
    let mut results = Vec::new();
    match &doc.blocks {
        Some(blocks) => {
            if blocks.len() != grams.len() {
                return Err(Error::dims(grams.len(), blocks.len()));
            }
            for (g, &[a, b]) in grams.iter().zip(blocks) {
                if a > b || b > doc.n {
                    return Err(Error::Precondition(format!("bad block [{a}, {b}]")));
                }
                let sub: Vec<Vec<_>> = g[a..b].iter().map(|r| r[a..b].to_vec()).collect();
                let spec =
                    ResidueSearchSpec::new(vec![IntegralForm::from_rational_gram(&sub, Some(p))?], p, level, limit)?;
                results.push(OracleResult {
                    block: Some([a, b]),
                    searched: spec.points(),
                    zero: primitive_zero_search(&spec),
                });
            }
        }
        None => {
            let forms =
                grams.iter().map(|g| IntegralForm::from_rational_gram(g, Some(p))).collect::<Result<Vec<_>>>()?;
            let spec = ResidueSearchSpec::new(forms, p, level, limit)?;
            results.push(OracleResult { block: None, searched: spec.points(), zero: primitive_zero_search(&spec) });
        }
    }
    let found = results.iter().any(|r| r.zero.is_some());
    let code = if found { EXIT_NEGATIVE } else { EXIT_OK };
    Ok(Outcome::with_code(code, Document::Oracle(OracleDoc { schema: SCHEMA, p, k: level, limit, results, found })))
}
