use num_bigint::BigInt;
use proptest::prelude::*;

use quadsys::bounds::{self, UTable};
use quadsys::linalg::{extend_to_basis, kernel_basis, saturated_kernel_basis};
use quadsys::oracle::{primitive_zero_search, ResidueSearchSpec, DEFAULT_LIMIT};
use quadsys::qform::{decompose_at_last, diagonalize, evaluate, restrict_to_basis};
use quadsys::random::random_system;
use quadsys::solver::{self, TraceStep};
use quadsys::witness::{block_witness, direct_sum};
use quadsys::{Error, FieldContext, FormSystem, Matrix, Padic, QuadraticForm, Vector};

const N: u32 = 24;

fn ctx(p: u64) -> FieldContext {
    FieldContext::new(p, N).unwrap()
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

fn odd_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7])
}

/// A nonzero rational `num / den` as an element of Q_p.
fn element(c: &FieldContext, num: i64, den: i64) -> Padic {
    c.from_ratio(num, den).unwrap()
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    ((-1_000_000i64..1_000_000).prop_filter("nonzero", |n| *n != 0), 1i64..1000)
}

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-9i64..=9, cols), rows)
}

fn sym_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    int_matrix(n, n).prop_map(|m| {
        let n = m.len();
        (0..n).map(|i| (0..n).map(|j| if i <= j { m[i][j] } else { m[j][i] }).collect()).collect()
    })
}

/// `x` and `y` agree on every digit both of them know.
fn agree(x: &Padic, y: &Padic) -> bool {
    let known = match (x.absolute_precision(), y.absolute_precision()) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return x == y,
    };
    x.sub(y).unwrap().valuation().at_least(known)
}

/// Entry-wise agreement at stored precision.
fn matrices_agree(a: &Matrix, b: &Matrix) -> bool {
    a.rows() == b.rows()
        && a.cols() == b.cols()
        && (0..a.rows()).all(|i| (0..a.cols()).all(|j| agree(a.get(i, j), b.get(i, j))))
}

/// Runs `f` at doubling precision until it stops running out of digits,
/// the contract the solver's own retry loop follows. Nearly singular
/// matrices legitimately exhaust a short precision.
fn at_sufficient_precision<T>(p: u64, f: impl Fn(&FieldContext) -> quadsys::Result<T>) -> (FieldContext, T) {
    let mut n = N;
    loop {
        let k = FieldContext::new(p, n).unwrap();
        match f(&k) {
            Err(Error::PrecisionExhausted(_)) if n < 512 => n *= 2,
            r => return (k, r.unwrap()),
        }
    }
}

fn is_square_by_search(u: u64, m: u64) -> bool {
    (0..m).any(|x| x * x % m == u % m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_associates(p in prime(), a in rational(), b in rational(), c in rational()) {
        let k = ctx(p);
        let (a, b, c) = (element(&k, a.0, a.1), element(&k, b.0, b.1), element(&k, c.0, c.1));
        let left = a.add(&b).unwrap().add(&c).unwrap();
        let right = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert!(agree(&left, &right));
    }

    #[test]
    fn multiplication_associates_and_distributes(p in prime(), a in rational(), b in rational(), c in rational()) {
        let k = ctx(p);
        let (a, b, c) = (element(&k, a.0, a.1), element(&k, b.0, b.1), element(&k, c.0, c.1));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(agree(&left, &right));
        let left = a.mul(&b.add(&c).unwrap()).unwrap();
        let right = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(agree(&left, &right));
    }

    #[test]
    fn valuation_is_additive(p in prime(), a in rational(), b in rational()) {
        let k = ctx(p);
        let (a, b) = (element(&k, a.0, a.1), element(&k, b.0, b.1));
        let (va, vb) = (a.valuation().finite().unwrap(), b.valuation().finite().unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().valuation().finite(), Some(va + vb));
    }

    #[test]
    fn sqrt_of_square_is_plus_or_minus(p in prime(), a in rational()) {
        let k = ctx(p);
        let a = element(&k, a.0, a.1);
        // a^2 at or past the zero-threshold counts as zero.
        prop_assume!(2 * a.valuation().finite().unwrap() < k.zero_threshold());
        let r = a.mul(&a).unwrap().sqrt().unwrap();
        prop_assert!(agree(&r, &a) || agree(&r, &a.neg()));
    }

    #[test]
    fn kernel_vectors_are_annihilated(p in odd_prime(), m in int_matrix(3, 5)) {
        let (k, (rank, cols, bases)) = at_sufficient_precision(p, |k| {
            let m = Matrix::from_int_rows(k, &m)?;
            let mut bases = Vec::new();
            for basis in [kernel_basis(&m)?, saturated_kernel_basis(&m)?] {
                let images = basis.iter().map(|u| m.mul_vec(u)).collect::<quadsys::Result<Vec<_>>>()?;
                let span = Matrix::from_columns(k, m.cols(), &basis)?.rank()?;
                bases.push((basis, images, span));
            }
            Ok((m.rank()?, m.cols(), bases))
        });
        for (basis, images, span) in bases {
            prop_assert_eq!(rank + basis.len(), cols);
            prop_assert_eq!(span, basis.len());
            prop_assert!(basis.iter().all(Vector::is_nontrivial));
            for image in images {
                prop_assert!(image.entries().iter().all(|x| x.valuation().at_least(k.zero_threshold())));
            }
        }
    }

    #[test]
    fn extended_basis_is_invertible(p in prime(), v in prop::collection::vec(-30i64..30, 1..6)) {
        prop_assume!(v.iter().any(|x| *x != 0));
        let k = ctx(p);
        let v = Vector::from_ints(&k, &v);
        let basis = extend_to_basis(&v).unwrap();
        prop_assert_eq!(basis.row_reduce().unwrap().rank, v.dim());
        prop_assert_eq!(basis.column(v.dim() - 1), v);
    }

    #[test]
    fn row_reduction_transform_reproduces(p in prime(), m in int_matrix(3, 4)) {
        let (_, (product, reduced)) = at_sufficient_precision(p, |k| {
            let m = Matrix::from_int_rows(k, &m)?;
            let rr = m.row_reduce()?;
            Ok((rr.transform.mul(&m)?, rr.reduced))
        });
        prop_assert!(matrices_agree(&product, &reduced));
    }

    #[test]
    fn restriction_is_functorial(p in prime(), g in sym_matrix(4), b1 in int_matrix(4, 3), b2 in int_matrix(3, 2)) {
        let k = ctx(p);
        let f = QuadraticForm::from_int_gram(&k, &g).unwrap();
        let b1 = Matrix::from_int_rows(&k, &b1).unwrap();
        let b2 = Matrix::from_int_rows(&k, &b2).unwrap();
        let twice = restrict_to_basis(&restrict_to_basis(&f, &b1).unwrap(), &b2).unwrap();
        let once = restrict_to_basis(&f, &b1.mul(&b2).unwrap()).unwrap();
        prop_assert!(twice.gram().is_symmetric());
        prop_assert!(matrices_agree(twice.gram(), once.gram()));
    }

    #[test]
    fn decomposition_reassembles(p in prime(), g in sym_matrix(4), x in prop::collection::vec(-50i64..50, 4)) {
        let k = ctx(p);
        let f = QuadraticForm::from_int_gram(&k, &g).unwrap();
        let x = Vector::from_ints(&k, &x);
        let d = decompose_at_last(&f).unwrap();
        prop_assert!(d.quadratic.gram().is_symmetric());
        let diff = evaluate(&f, &x).unwrap().sub(&d.reassemble(&x).unwrap()).unwrap();
        prop_assert!(diff.valuation().at_least(k.zero_threshold()));
    }

    #[test]
    fn diagonalization_is_a_congruence(p in prime(), g in sym_matrix(4)) {
        let (k, (diag, congruent)) = at_sufficient_precision(p, |k| {
            let gram = Matrix::from_int_rows(k, &g)?;
            let diag = diagonalize(&QuadraticForm::from_gram(gram.clone())?)?;
            let congruent = diag.p.transpose().mul(&gram)?.mul(&diag.p)?;
            Ok((diag, congruent))
        });
        let mut expected = Matrix::zeros(&k, 4, 4);
        for (i, d) in diag.d.iter().enumerate() {
            expected.set(i, i, d.clone());
        }
        prop_assert!(matrices_agree(&congruent, &expected));
        if diag.d.iter().all(|d| !d.is_zero()) {
            // val(det P) enters twice, so only the parity survives.
            let val_det = k.from_bigint(&BigInt::from(det4(&g))).valuation().finite().unwrap();
            let val_d: i64 = diag.d.iter().map(|d| d.valuation().finite().unwrap()).sum();
            prop_assert_eq!(val_det.rem_euclid(2), val_d.rem_euclid(2));
        }
    }

    #[test]
    fn bounds_sandwich_and_monotone(t in 3u64..=50, m in 1u64..=6) {
        let lower = bounds::lower_bound(t, 4).unwrap().value;
        let b1 = bounds::theorem_bound(t, 1, 4).unwrap().value;
        let b2 = bounds::theorem_bound(t, 2, 4).unwrap().value;
        let b3 = bounds::theorem_bound(t, 3, 4).unwrap().value;
        prop_assert!(b3 <= b2 && b2 <= b1);
        prop_assert!(lower <= bounds::theorem_bound(t, m, 4).unwrap().value);
    }

    #[test]
    fn inductwo_matches_theorem(t in 1u64..=50, m in 1u64..=6, u1 in 1u64..=8) {
        let tau = bounds::tau(t, m);
        let table = UTable::new().with(tau, tau * u1, "exact").with(m, m * u1, "exact");
        prop_assert_eq!(
            bounds::inductwo_bound(t, m, &table).unwrap().value,
            bounds::theorem_bound(t, m, u1).unwrap().value
        );
    }

    #[test]
    fn oracle_is_monotone_in_level(p in prop::sample::select(vec![2u64, 3, 5]), g in sym_matrix(3)) {
        let grams = vec![g];
        let search = |k| primitive_zero_search(&ResidueSearchSpec::from_int_grams(&grams, p, k, DEFAULT_LIMIT).unwrap());
        let upper = if p == 5 { 2 } else { 3 };
        for k in 1..upper {
            if search(k).is_none() {
                prop_assert!(search(k + 1).is_none());
            }
        }
    }

    #[test]
    fn direct_sum_associates(a in sym_matrix(2), b in sym_matrix(3), c in sym_matrix(2)) {
        let k = ctx(5);
        let sys = |g: &Vec<Vec<i64>>| FormSystem::from_int_grams(&k, std::slice::from_ref(g)).unwrap();
        let (a, b, c) = (sys(&a), sys(&b), sys(&c));
        let left = direct_sum(&direct_sum(&a, &b).unwrap(), &c).unwrap();
        let right = direct_sum(&a, &direct_sum(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.t(), 3);
        prop_assert_eq!(left.n(), 7);
        for j in 0..3 {
            prop_assert_eq!(left.form(j).gram(), right.form(j).gram());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solver_is_sound_and_deterministic(p in odd_prime(), t in 1usize..=2, n in 3usize..=9, seed in any::<u64>()) {
        let k = FieldContext::new(p, 48).unwrap();
        let sys = random_system(&k, seed, t, n).unwrap();
        match solver::solve_system(&sys) {
            Ok(cert) => {
                let report = solver::verify_zero(&sys, &cert.zero, k.zero_threshold()).unwrap();
                prop_assert!(report.accepted);
                prop_assert_eq!(cert.zero.min_valuation(), Some(0));
                prop_assert!(solver::replay(&sys, &cert).unwrap());
                prop_assert_eq!(solver::solve_system(&sys).unwrap(), cert);
            }
            Err(Error::NoZeroFoundBelowGuarantee(_)) => prop_assert!(n < solver::constructive_threshold(t)),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn subspace_levels_consume_at_most_t_plus_one(p in odd_prime(), s in 1usize..=3, seed in any::<u64>()) {
        let k = FieldContext::new(p, 48).unwrap();
        let n = solver::subspace_threshold(1, s);
        let sys = random_system(&k, seed, 1, n).unwrap();
        let cert = solver::find_zero_subspace(&sys, s).unwrap();
        prop_assert_eq!(cert.subspace.dim(), s);
        prop_assert!(cert.residual.at_least(k.zero_threshold()));
        for step in &cert.trace {
            if let TraceStep::SubspaceStep { t, n, kernel_dim, .. } = step {
                prop_assert!(n - kernel_dim <= t + 1);
            }
        }
    }
}

/// Determinant of a 4x4 integer matrix by cofactor expansion.
fn det4(m: &[Vec<i64>]) -> i128 {
    fn det(m: &[Vec<i128>]) -> i128 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| *x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor)
            })
            .sum()
    }
    det(&m.iter().map(|r| r.iter().map(|x| *x as i128).collect()).collect::<Vec<_>>())
}

#[test]
fn bracket_is_even() {
    for t in 1..=200 {
        for m in 1..=200 {
            assert_eq!(bounds::theorem_bracket(t, m).rem_euclid(2), 0, "t={t} m={m}");
        }
    }
}

#[test]
fn is_square_matches_exhaustive_squaring() {
    for p in [3u64, 5, 7] {
        let c = ctx(p);
        let m = p.pow(3);
        for u in (1..m).filter(|u| u % p != 0) {
            let x = c.from_int(u as i64);
            assert_eq!(x.is_square().unwrap(), is_square_by_search(u, m), "p={p} u={u}");
        }
    }
    let c = ctx(2);
    for u in (1..32u64).step_by(2) {
        assert_eq!(c.from_int(u as i64).is_square().unwrap(), is_square_by_search(u, 32), "p=2 u={u}");
    }
}

#[test]
fn witness_size_matches_lower_bound() {
    for p in [2, 3, 5] {
        for t in 1..=3 {
            let w = block_witness(t, p).unwrap();
            assert_eq!(w.system.n() as u64, bounds::lower_bound(t as u64, 4).unwrap().value);
            assert!(w.evidence.iter().all(|e| e.is_certified()));
            assert!(matches!(solver::solve_system(&w.system), Err(Error::NoZeroFoundBelowGuarantee(_))));
        }
    }
}
