# tests/conftest.py
import math
from collections.abc import Callable
from pathlib import Path

import pytest

from starspec.graph import new_star_graph
from starspec.kirchhoff import kirchhoff_spectrum, range_for_count, truncate
from starspec.models import RationalDeclaration, Rationality, Spectrum, StarGraph
from starspec.robin import robin_spectrum


def make_rational(*fractions: tuple[int, int], base: str = "1") -> StarGraph:
    return new_star_graph(declaration=RationalDeclaration(base=base, fractions=fractions))


@pytest.fixture
def equal_pair() -> StarGraph:
    return new_star_graph([1.0, 1.0])


@pytest.fixture
def rational_12() -> StarGraph:
    return make_rational((1, 1), (2, 1))


@pytest.fixture
def rational_111() -> StarGraph:
    return make_rational((1, 1), (1, 1), (1, 1))


@pytest.fixture
def sqrt2_pair() -> StarGraph:
    return new_star_graph([1.0, math.sqrt(2.0)], rationality=Rationality.INDEPENDENT)


@pytest.fixture
def three_edges() -> StarGraph:
    return new_star_graph([1.0, math.sqrt(2.0), math.pi], rationality=Rationality.INDEPENDENT)


@pytest.fixture
def cache_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    path = tmp_path / "cache"
    monkeypatch.setenv("STARSPEC_CACHE_DIR", str(path))
    monkeypatch.setenv("STARSPEC_JOBS", "1")
    return path


@pytest.fixture(scope="session")
def sqrt2_kirchhoff_5000() -> Spectrum:
    graph = new_star_graph([1.0, math.sqrt(2.0)], rationality=Rationality.INDEPENDENT)
    return truncate(kirchhoff_spectrum(graph, range_for_count(graph, 5000)), 5000)


@pytest.fixture(scope="session")
def sqrt2_robin_5000(sqrt2_kirchhoff_5000: Spectrum) -> Callable[[complex], Spectrum]:
    """Robin spectra over the first 5000 eigenvalues of (1, √2), one solve per α."""
    solved: dict[complex, Spectrum] = {}

    def build(alpha: complex) -> Spectrum:
        alpha = complex(alpha)
        if alpha not in solved:
            kirchhoff = sqrt2_kirchhoff_5000
            solved[alpha] = robin_spectrum(
                kirchhoff.graph, alpha, kirchhoff.covered_to, kirchhoff=kirchhoff
            )
        return solved[alpha]

    return build
