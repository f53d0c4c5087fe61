"""Metric star graph: construction, Dirichlet spectrum and rational structure."""

import math
from collections.abc import Sequence
from fractions import Fraction
from functools import reduce

import numpy as np
import structlog

from starspec.config import DEFAULT_TOLERANCES, GraphDeclaration, RationalSpec, Tolerances
from starspec.errors import (
    InconsistentRationalDeclaration,
    NonPositiveLength,
    RationalityUndeclared,
    TooFewEdges,
)
from starspec.models import (
    DirichletPoint,
    RationalDeclaration,
    RationalRank,
    Rationality,
    StarGraph,
)

logger = structlog.get_logger()


def _parse_base(base: str) -> float:
    try:
        c = float(base)
    except ValueError as exc:
        raise InconsistentRationalDeclaration(f"base {base!r} is not a decimal") from exc
    if not math.isfinite(c) or c <= 0:
        raise InconsistentRationalDeclaration(f"base must be positive, got {base!r}")
    return c


def new_star_graph(
    lengths: Sequence[float] | None = None,
    rationality: Rationality | str = Rationality.UNSPECIFIED,
    declaration: RationalDeclaration | None = None,
) -> StarGraph:
    """Build a validated star graph.

    A rational declaration materializes the lengths as c·p_j/q_j; explicit
    lengths are then not accepted alongside it.
    """
    rationality = Rationality(rationality)

    if declaration is not None:
        if lengths is not None:
            raise InconsistentRationalDeclaration(
                "give either lengths or a rational declaration, not both"
            )
        c = _parse_base(declaration.base)
        if len(declaration.fractions) < 2:
            raise TooFewEdges(f"a star graph needs N >= 2 edges, got {len(declaration.fractions)}")
        for p, q in declaration.fractions:
            if p <= 0 or q <= 0:
                raise InconsistentRationalDeclaration(
                    f"numerators and denominators must be positive, got {p}/{q}"
                )
        built = tuple(c * p / q for p, q in declaration.fractions)
        return StarGraph(
            lengths=built,
            rationality=Rationality.RATIONAL,
            declaration=declaration,
            total_length=math.fsum(built),
        )

    if rationality == Rationality.RATIONAL:
        raise InconsistentRationalDeclaration(
            "rational graphs must be declared with a base and fractions"
        )
    if lengths is None:
        raise TooFewEdges("no edge lengths given")
    values = tuple(float(x) for x in lengths)
    if len(values) < 2:
        raise TooFewEdges(f"a star graph needs N >= 2 edges, got {len(values)}")
    for x in values:
        if not math.isfinite(x) or x <= 0:
            raise NonPositiveLength(f"edge lengths must be positive, got {x}")
    return StarGraph(lengths=values, rationality=rationality, total_length=math.fsum(values))


def from_declaration(decl: GraphDeclaration) -> StarGraph:
    """Build a graph from the config/JSON declaration format."""
    if isinstance(decl.rationality, RationalSpec):
        return new_star_graph(
            declaration=RationalDeclaration(
                base=decl.rationality.base,
                fractions=tuple(tuple(f) for f in decl.rationality.fractions),
            )
        )
    try:
        rationality = Rationality(decl.rationality.lower())
    except ValueError as exc:
        raise InconsistentRationalDeclaration(
            f"unknown rationality {decl.rationality!r}"
        ) from exc
    return new_star_graph(decl.lengths, rationality=rationality)


def _reduced_fractions(graph: StarGraph) -> list[Fraction]:
    assert graph.declaration is not None
    return [Fraction(p, q) for p, q in graph.declaration.fractions]


def dirichlet_arrays(
    graph: StarGraph, R: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, ...]]]:
    """Merged Dirichlet points in (0, R] as (taus, multiplicities, member edges)."""
    if R <= 0:
        return np.empty(0), np.empty(0, dtype=int), []

    if graph.rationality == Rationality.RATIONAL and graph.declaration is not None:
        return _rational_dirichlet(graph, R)

    taus: list[np.ndarray] = []
    edges: list[np.ndarray] = []
    for j, ell in enumerate(graph.lengths):
        k_max = math.floor(R * ell / math.pi)
        if k_max < 1:
            continue
        taus.append(np.arange(1, k_max + 1, dtype=float) * math.pi / ell)
        edges.append(np.full(k_max, j, dtype=int))
    if not taus:
        return np.empty(0), np.empty(0, dtype=int), []

    all_tau = np.concatenate(taus)
    all_edge = np.concatenate(edges)
    order = np.lexsort((all_edge, all_tau))
    all_tau, all_edge = all_tau[order], all_edge[order]

    # a new point starts wherever the gap to the previous value exceeds the merge tolerance
    gaps = np.diff(all_tau)
    starts = np.concatenate(([True], gaps >= tol.merge_rtol * all_tau[1:]))
    group = np.cumsum(starts) - 1
    n_points = int(group[-1]) + 1

    first = np.flatnonzero(starts)
    point_tau = all_tau[first]
    members: list[list[int]] = [[] for _ in range(n_points)]
    for g, j in zip(group.tolist(), all_edge.tolist(), strict=True):
        members[g].append(j)
    member_edges = [tuple(sorted(set(m))) for m in members]
    mult = np.array([len(m) for m in member_edges], dtype=int)
    return point_tau, mult, member_edges


def _rational_dirichlet(
    graph: StarGraph, R: float
) -> tuple[np.ndarray, np.ndarray, list[tuple[int, ...]]]:
    # τ = kπ/ℓ_j = (k·q_j/p_j)·π/c; points coincide iff their exact keys coincide
    assert graph.declaration is not None
    c = float(graph.declaration.base)
    points: dict[Fraction, list[int]] = {}
    pairs = zip(graph.declaration.fractions, graph.lengths, strict=True)
    for j, ((p, q), ell) in enumerate(pairs):
        k_max = math.floor(R * ell / math.pi)
        for k in range(1, k_max + 1):
            points.setdefault(Fraction(k * q, p), []).append(j)
    keys = sorted(points)
    taus = np.array([k.numerator * math.pi / (k.denominator * c) for k in keys], dtype=float)
    member_edges = [tuple(sorted(points[k])) for k in keys]
    mult = np.array([len(m) for m in member_edges], dtype=int)
    return taus, mult, member_edges


def dirichlet_spectrum(
    graph: StarGraph, R: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[DirichletPoint]:
    """All τ = kπ/ℓ_j in (0, R], merged across edges, with multiplicities."""
    taus, mult, members = dirichlet_arrays(graph, R, tol)
    return [
        DirichletPoint(tau=float(t), multiplicity=int(m), member_edges=e)
        for t, m, e in zip(taus, mult, members, strict=True)
    ]


def rational_rank(graph: StarGraph) -> RationalRank:
    """Rank of the length lattice, with the minimal period in the rational case."""
    if graph.rationality == Rationality.UNSPECIFIED:
        raise RationalityUndeclared(
            "rationality must be declared: floats cannot decide rational relations"
        )
    if graph.rationality == Rationality.INDEPENDENT:
        return RationalRank(rank=graph.n_edges)

    fractions = _reduced_fractions(graph)
    lcm_den = reduce(math.lcm, (f.denominator for f in fractions))
    gcd_num = reduce(math.gcd, (f.numerator for f in fractions))
    factor = Fraction(lcm_den, gcd_num)
    c = float(graph.declaration.base)  # type: ignore[union-attr]
    period = factor.numerator * math.pi / (factor.denominator * c)
    return RationalRank(rank=1, period=period, period_factor=str(factor))


def period_count(graph: StarGraph) -> int:
    """Eigenvalues of H₀ per period, with multiplicity: |Γ|·P/π, computed exactly."""
    rank = rational_rank(graph)
    if rank.period_factor is None:
        raise RationalityUndeclared("period_count needs a rational declaration")
    factor = Fraction(rank.period_factor)
    count = sum(_reduced_fractions(graph), Fraction(0)) * factor
    assert count.denominator == 1
    return count.numerator


def zero_eigenvalue_alpha(graph: StarGraph) -> float:
    """The unique α with 0 ∈ Sp(H_α).

    The kernel candidate u_j(x) = x/ℓ_j meets Σu′_j(v) + αu(v) = 0 iff α = −Σ1/ℓ_j.
    """
    return -math.fsum(1.0 / ell for ell in graph.lengths)
