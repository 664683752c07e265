"""Smoke test for the `prisq` extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/prisq-*.whl
"""

import cmath
import math

import prisq


def main():
    sieve = prisq.Sieve(100_000)
    assert sieve.limit == 100_000
    assert sieve.mobius(30) == -1 and sieve.mobius(12) == 0
    assert sieve.primes_up_to(20) == [2, 3, 5, 7, 11, 13, 17, 19]
    assert prisq.segmented_primes(90, 110) == [97, 101, 103, 107, 109]
    assert prisq.mod_inverse(3, 7) == 5

    assert sieve.count_exact(1, 3, 10, 10) == 7
    assert sieve.count_via_mobius(1, 3, 10, 10) == 7
    by_residue = sieve.counts_by_residue(60, 10_000, 10_000)
    total = sum(n for _, n in by_residue)
    assert total == sieve.pi_q(60, 10_000) * sieve.s_q(60, 10_000)

    report = sieve.report(1, 3, 10, 10)
    assert report.exact == 7 and math.isclose(report.main_term, 5.0)
    assert report.regime == "SmallQ"

    k = sieve.kloosterman(1, 3, 10)
    expected = -1.5 - 1j * math.sqrt(3) / 2
    assert cmath.isclose(k.value, expected, abs_tol=1e-12), k
    mirror = sieve.kloosterman(2, 3, 10)
    assert cmath.isclose(mirror.value, k.value.conjugate(), abs_tol=1e-12)

    lhs, rhs = sieve.parseval(97, 10_000)
    assert math.isclose(lhs, rhs, rel_tol=1e-9)

    low, high = prisq.regime_thresholds(10**6)
    assert math.isclose(low, 190.8683319772223, rel_tol=1e-12)
    assert prisq.classify_regime(1000, 10**6) == "MediumQ"

    csv = prisq.sweep_csv("3", "10", "10")
    assert csv.splitlines()[0].startswith("a,q,P,S,regime")
    assert len(csv.strip().splitlines()) == 3

    try:
        sieve.count_exact(2, 4, 10, 10)
    except ValueError as err:
        assert "reduced residue" in str(err)
    else:
        raise AssertionError("expected ValueError")

    passed, text = prisq.run_selftest()
    assert passed, text
    print("python smoke test passed")


if __name__ == "__main__":
    main()
