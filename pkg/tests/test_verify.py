# tests/test_verify.py
import pytest

from starspec.models import Rationality
from starspec.verify import run_invariant_suite


def _names(results):
    return [r.name for r in results]


def test_independent_suite(sqrt2_pair):
    results = run_invariant_suite(sqrt2_pair, 1j, 20.0, samples=2_000)
    assert _names(results) == [
        "dirichlet_count",
        "secular_identity",
        "interlacing",
        "weyl_defect",
        "robin_checks",
        "quadrature_mass",
        "convergents",
    ]
    failed = [r for r in results if not r.passed]
    assert failed == []


def test_rational_suite(rational_12):
    results = run_invariant_suite(rational_12, 0.0, 30.0)
    assert "rational_atoms" in _names(results)
    assert "quadrature_mass" not in _names(results)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_unspecified_skips_measure_checks(equal_pair):
    assert equal_pair.rationality == Rationality.UNSPECIFIED
    results = run_invariant_suite(equal_pair, 1.0, 7.0)
    assert len(results) == 5
    assert all(r.passed for r in results)


@pytest.mark.parametrize("seed", [0, 1])
def test_suite_is_deterministic(sqrt2_pair, seed):
    first = run_invariant_suite(sqrt2_pair, 0.0, 15.0, samples=1_000, seed=seed)
    second = run_invariant_suite(sqrt2_pair, 0.0, 15.0, samples=1_000, seed=seed)
    assert first == second
