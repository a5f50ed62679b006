//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use quadsys::bounds::{inductwo_bound, laststop_bound, local_field_bound, qp_bound, theorem_bound, Formula, UTable};
use quadsys::oracle::{certify_anisotropic, cross_check, primitive_zeros, ResidueSearchSpec, DEFAULT_LIMIT};
use quadsys::qform::restrict_to_basis;
use quadsys::random::random_system;
use quadsys::solver::{
    constructive_threshold, find_zero_subspace, solve_system, solve_ternary_unit_mod_p, subspace_threshold, verify_zero,
};
use quadsys::witness::{anisotropic_quaternary, block_witness};
use quadsys::{Error, FieldContext, FormSystem, SolveCertificate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOLVER_PRIMES: [u64; 4] = [3, 5, 7, 13];
const SOLVER_SEEDS: u64 = 20;
const SOLVER_PRECISION: u32 = 64;
const VERIFY_THRESHOLD: i64 = 40;
const SUBSPACE_SEEDS: u64 = 5;
const CROSS_CHECK_LEVEL: u32 = 3;
const BOUND_TABLE_BUDGET: Duration = Duration::from_millis(1);
const WITNESS_BUDGET: Duration = Duration::from_secs(60);
const SQUARES_PER_PRIME: usize = 50;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn criterion_1() -> Outcome {
    let expected = [4u64, 8, 20, 32, 52, 72, 100, 128, 164, 200];
    let start = Instant::now();
    let values: Vec<u64> = (1..=10).map(|t| theorem_bound(t, 2, 4).unwrap().value).collect();
    let elapsed = start.elapsed();
    for (i, (&got, &want)) in values.iter().zip(&expected).enumerate() {
        let t = i as u64 + 1;
        let closed = if t % 2 == 1 { 2 * t * t + 2 } else { 2 * t * t };
        check(got == want && got == closed, || format!("t={t}: got {got}, table {want}, formula {closed}"))?;
        check(local_field_bound(t).unwrap().value == got, || format!("t={t}: local-field bound differs"))?;
    }
    check(elapsed < BOUND_TABLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("t=1..10 match {expected:?} in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    for t in 1..=10u64 {
        let got = theorem_bound(t, 3, 4).unwrap().value;
        let closed = if t % 3 == 0 { 2 * t * t - 2 * t } else { 2 * t * t - 2 * t + 4 };
        check(got == closed, || format!("t={t}: got {got}, formula {closed}"))?;
    }
    let b = qp_bound(3, 13).unwrap();
    check(b.value == 12 && b.formula == Formula::Corollary2, || format!("qp_bound(3, 13) = {b:?}"))?;
    Ok("t=1..10 match, t=3 gives 12".into())
}

fn criterion_3() -> Outcome {
    let mut cases = 0;
    for m in 1..=6u64 {
        for t in 1..=m {
            for u1 in 1..=8u64 {
                let got = theorem_bound(t, m, u1).unwrap().value;
                check(got == t * u1, || format!("t={t} m={m} u1={u1}: got {got}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases equal t*u1"))
}

fn criterion_4() -> Outcome {
    for u1 in [1u64, 2, 4, 8] {
        let table = UTable::new().with(1, u1, "u(1)");
        for t in 1..=50u64 {
            let want = t * (t + 1) * u1 / 2;
            let th = theorem_bound(t, 1, u1).unwrap().value;
            let ls = laststop_bound(t, 1, t - 1, &table).unwrap().value;
            check(th == want && ls == want, || format!("t={t} u1={u1}: theorem {th}, laststop {ls}, want {want}"))?;
        }
    }
    Ok("t=1..50 agree".into())
}

fn criterion_5() -> Outcome {
    let mut cases = 0;
    for u1 in [1u64, 4, 7] {
        for m in 1..=6u64 {
            for t in 1..=50u64 {
                let tau = quadsys::bounds::tau(t, m);
                let table = UTable::new().with(tau, tau * u1, "tau*u1").with(m, m * u1, "m*u1");
                let ind = inductwo_bound(t, m, &table).unwrap().value;
                let th = theorem_bound(t, m, u1).unwrap().value;
                check(ind == th, || format!("t={t} m={m} u1={u1}: inductwo {ind}, theorem {th}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases agree"))
}

struct SolverRun {
    p: u64,
    t: usize,
    seed: u64,
    system: FormSystem,
    result: quadsys::Result<SolveCertificate>,
    elapsed: Duration,
}

fn solver_runs() -> &'static Vec<SolverRun> {
    static RUNS: OnceLock<Vec<SolverRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        std::thread::scope(|scope| {
            let handles: Vec<_> = SOLVER_PRIMES
                .iter()
                .flat_map(|&p| (1..=3usize).map(move |t| (p, t)))
                .map(|(p, t)| {
                    scope.spawn(move || {
                        let ctx = FieldContext::new(p, SOLVER_PRECISION).unwrap();
                        let n = constructive_threshold(t);
                        (0..SOLVER_SEEDS)
                            .map(|seed| {
                                let system = random_system(&ctx, seed, t, n).unwrap();
                                let start = Instant::now();
                                let result = solve_system(&system);
                                SolverRun { p, t, seed, system, result, elapsed: start.elapsed() }
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        })
    })
}

fn criterion_6() -> Outcome {
    let runs = solver_runs();
    let mut slowest = Duration::ZERO;
    for r in runs {
        let tag = format!("p={} t={} seed={}", r.p, r.t, r.seed);
        let cert = r.result.as_ref().map_err(|e| format!("{tag}: {e}"))?;
        let zero = cert.zero.with_context(r.system.context()).map_err(|e| e.to_string())?;
        let report = verify_zero(&r.system, &zero, VERIFY_THRESHOLD).map_err(|e| e.to_string())?;
        check(report.accepted, || format!("{tag}: residual valuations {:?}", report.valuations))?;
        slowest = slowest.max(r.elapsed);
    }
    Ok(format!("{} systems solved and verified at threshold {VERIFY_THRESHOLD}; slowest {slowest:.2?}", runs.len()))
}

fn criterion_7() -> Outcome {
    let cases = [(1usize, 2usize), (1, 3), (2, 2)];
    let jobs: Vec<(u64, usize, usize, u64)> = cases
        .iter()
        .flat_map(|&(t, s)| {
            SOLVER_PRIMES.iter().flat_map(move |&p| (0..SUBSPACE_SEEDS).map(move |seed| (p, t, s, seed)))
        })
        .collect();
    let results: Vec<std::result::Result<(), String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(p, t, s, seed)| {
                scope.spawn(move || {
                    let tag = format!("p={p} t={t} s={s} seed={seed}");
                    let ctx = FieldContext::new(p, SOLVER_PRECISION).unwrap();
                    let n = subspace_threshold(t, s);
                    let sys = random_system(&ctx, 100 + seed, t, n).unwrap();
                    let cert = find_zero_subspace(&sys, s).map_err(|e| format!("{tag}: {e}"))?;
                    check(cert.subspace.dim() == s, || format!("{tag}: dimension {}", cert.subspace.dim()))?;
                    let basis = cert.subspace.basis().with_context(&ctx).map_err(|e| e.to_string())?;
                    check(basis.rank().map_err(|e| e.to_string())? == s, || format!("{tag}: basis rank"))?;
                    for f in sys.forms() {
                        let g = restrict_to_basis(f, &basis).map_err(|e| e.to_string())?;
                        let v = g.gram().min_valuation();
                        check(v.at_least(VERIFY_THRESHOLD), || format!("{tag}: restricted Gram valuation {v}"))?;
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for r in results {
        r?;
    }
    Ok(format!("{} subspaces for (t,s) in {cases:?} vanish to valuation >= {VERIFY_THRESHOLD}", jobs.len()))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    for (p, k, points) in [(3u64, 3u32, 531_441u64), (5, 2, 390_625), (2, 3, 4_096)] {
        let ctx = FieldContext::new(p, 16).unwrap();
        let q = anisotropic_quaternary(&ctx).unwrap();
        let ev = certify_anisotropic(&q, k, DEFAULT_LIMIT).map_err(|e| format!("p={p}: {e}"))?;
        check(ev.searched == points, || format!("p={p}: searched {}", ev.searched))?;
    }
    let w = block_witness(2, 3).map_err(|e| e.to_string())?;
    match solve_system(&w.system) {
        Err(Error::NoZeroFoundBelowGuarantee(_)) => {}
        other => return Err(format!("block_witness(2, 3): expected no zero, got {other:?}")),
    }
    let elapsed = start.elapsed();
    check(elapsed < WITNESS_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("quaternaries anisotropic mod 27, 25, 8; witness unsolved; {elapsed:.2?}"))
}

fn criterion_9() -> Outcome {
    let runs = solver_runs();
    for r in runs {
        let tag = format!("p={} t={} seed={}", r.p, r.t, r.seed);
        let cert = r.result.as_ref().map_err(|e| format!("{tag}: {e}"))?;
        let ok = cross_check(cert, &r.system, CROSS_CHECK_LEVEL).map_err(|e| e.to_string())?;
        check(ok, || format!("{tag}: not a primitive zero mod p^{CROSS_CHECK_LEVEL}"))?;
    }
    let mut triples = 0;
    for p in [3u64, 5, 7] {
        for a in 1..p as i64 {
            for b in 1..p as i64 {
                for c in 1..p as i64 {
                    let sol = solve_ternary_unit_mod_p(a, b, c, p).map_err(|e| e.to_string())?;
                    let g = vec![vec![a, 0, 0], vec![0, b, 0], vec![0, 0, c]];
                    let spec = ResidueSearchSpec::from_int_grams(&[g], p, 1, DEFAULT_LIMIT).unwrap();
                    let zeros = primitive_zeros(&spec);
                    check(zeros.contains(&sol.to_vec()), || format!("p={p} ({a},{b},{c}): {sol:?} not a zero"))?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("{} certificates pass mod p^3; {triples} ternary triples agree", runs.len()))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut cases = 0;
    for p in [3u64, 5, 7] {
        let ctx = FieldContext::new(p, 64).unwrap();
        for _ in 0..SQUARES_PER_PRIME {
            let v = rng.gen_range(-3i64..=3);
            let u = loop {
                let u = rng.gen_range(1i64..1_000_000);
                if u % p as i64 != 0 {
                    break u;
                }
            };
            let x = ctx.from_int(u).shift(v);
            let a = x.mul(&x).unwrap();
            let (r, trace) = a.sqrt_with_trace().map_err(|e| format!("p={p} u={u}: {e}"))?;
            let cap = a.digits();
            for w in trace.windows(2) {
                check(w[1] >= (2 * w[0]).min(cap), || format!("p={p} u={u}: trace {trace:?}"))?;
            }
            check(trace.last() == Some(&cap), || format!("p={p} u={u}: stopped early {trace:?}"))?;
            check(r.mul(&r).unwrap() == a, || format!("p={p} u={u}: root does not square back"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} squares, valuations double every step"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("bound table, local field u(t)", criterion_1),
        ("bound table, Q_p refinement", criterion_2),
        ("t <= m forces t*u1", criterion_3),
        ("m = 1 degeneration", criterion_4),
        ("recursion substitution", criterion_5),
        ("solver guarantee suite", criterion_6),
        ("subspace suite", criterion_7),
        ("witness anisotropy", criterion_8),
        ("oracle cross-checks", criterion_9),
        ("Newton doubling", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
