"""Smoke test for the pyquadsys extension module."""

import json

import pyquadsys as q


def main():
    assert q.local_field_bound(3) == 20
    assert q.qp_bound(3, 13) == 12
    assert q.theorem_bound(3, 2, 4) == 20
    assert q.constructive_threshold(1) == 5

    # x1^2 + ... + x5^2 over Q_3 always has a nontrivial zero.
    eye = [[1 if i == j else 0 for j in range(5)] for i in range(5)]
    system = q.System(3, [eye])
    cert = q.solve(system)
    assert q.verify(system, cert.zero)
    assert all(v is None or v >= 40 for v in system.valuations(cert.zero))
    assert q.cross_check(cert, system, 3)

    # Rational entries and seeded systems.
    half = q.System(5, [[["1/2", 0], [0, "-1/2"]]])
    assert half.grams()[0][0][0] == "1/2"
    r1 = q.System.random(7, 2, 13, seed=4)
    r2 = q.System.from_json(r1.to_json())
    assert r1.grams() == r2.grams()
    cert = q.solve(r1)
    assert q.verify(r1, cert.zero)
    assert json.loads(cert.trace_json)

    basis = q.zero_subspace(q.System.random(5, 1, 7, seed=1), 2)
    assert len(basis) == 2

    # The block witness has no nontrivial zero.
    witness = q.block_witness(2, 3)
    assert witness.n == 8
    try:
        q.solve(witness)
    except q.NoZeroFound:
        pass
    else:
        raise AssertionError("witness should have no zero")
    coeffs = q.anisotropic_quaternary(3)
    quad = [[coeffs[i] if i == j else 0 for j in range(4)] for i in range(4)]
    assert q.oracle_search([quad], 3, 2) is None
    assert q.oracle_search([[[0, 1], [1, 0]]], 3, 2) == [0, 1]

    assert q.padic_sqrt(9, 7) == "3"
    code, out, _ = q.run_cli(["bound", "--t", "3", "--p", "13"])
    assert code == 0 and json.loads(out)["kind"] == "bounds"
    print("pyquadsys smoke test: ok")


if __name__ == "__main__":
    main()
