"""The limit measure μ_ℓ of the normalized shifts s = Re(δ_n(α)/α).

Three estimates are available: exact atoms for rational lengths, co-area Monte Carlo
quadrature on the zero set of Ψ for independent lengths, and the empirical histogram
of a computed Robin spectrum.
"""

import math
from collections.abc import Callable, Sequence
from fractions import Fraction
from functools import partial

import numpy as np
import structlog
from scipy.stats import wasserstein_distance

from starspec.config import DEFAULT_TOLERANCES, Tolerances
from starspec.errors import (
    AlphaZero,
    InvalidParameter,
    NumericalError,
    RequiresIndependentLengths,
    RequiresRationalLengths,
    SampleNearPole,
    SpectrumTooShort,
    SupportMismatch,
)
from starspec.graph import period_count, rational_rank
from starspec.kirchhoff import kirchhoff_spectrum
from starspec.models import (
    Atom,
    EigenClass,
    KirchhoffEigenvalue,
    MeasureEstimate,
    MeasureKind,
    Rationality,
    RobinEigenvalue,
    StarGraph,
    TorusSample,
)
from starspec.parallel import run_tasks

logger = structlog.get_logger()

# Monte Carlo substreams; fixed so results do not depend on the worker count
_STREAMS = 16
_MIN_SAMPLES = 1_000


def _require_independent(graph: StarGraph) -> None:
    if graph.rationality != Rationality.INDEPENDENT:
        raise RequiresIndependentLengths(
            f"needs rationally independent lengths, graph is {graph.rationality}"
        )


# --- co-area quadrature ---


def _branch(y_rest: np.ndarray, graph: StarGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(y_1 on the (0, π) branch, Φ, surface weight w) for rows of y_2..y_N.

    Both branches y_1 and y_1 + π share sin²y_1 = 1/(1 + S²), hence Φ and w.
    """
    cot_rest = np.cos(y_rest) / np.sin(y_rest)
    total = np.sum(cot_rest, axis=-1)
    y1 = 0.5 * np.pi + np.arctan(total)
    sin2_first = 1.0 / (1.0 + total**2)
    gradient = graph.ell[0] / sin2_first + np.sum(graph.ell[1:] / np.sin(y_rest) ** 2, axis=-1)
    phi = 2.0 / gradient
    weight = gradient * sin2_first
    return y1, phi, weight


def _draw(
    rng: np.random.Generator, count: int, n_rest: int, tol: Tolerances
) -> tuple[np.ndarray, int]:
    y_rest = rng.uniform(0.0, 2.0 * np.pi, size=(count, n_rest))
    resamples = 0
    while True:
        near = np.any(np.abs(np.sin(y_rest)) < tol.sample_pole_tol, axis=-1)
        bad = int(np.sum(near))
        if bad == 0:
            return y_rest, resamples
        resamples += bad
        y_rest[near] = rng.uniform(0.0, 2.0 * np.pi, size=(bad, n_rest))


def draw_torus_sample(
    graph: StarGraph, rng: np.random.Generator, tol: Tolerances = DEFAULT_TOLERANCES
) -> TorusSample:
    """One uniform point y_2..y_N with both solutions y_1 of Ψ(y) = 0."""
    y_rest, _ = _draw(rng, 1, graph.n_edges - 1, tol)
    y1, _, weight = _branch(y_rest, graph)
    root = float(y1[0])
    w = float(weight[0])
    return TorusSample(
        y_rest=tuple(y_rest[0].tolist()), branch_roots=(root, root + math.pi), weights=(w, w)
    )


def _sample_stream(
    job: tuple[np.random.SeedSequence, int],
    graph: StarGraph,
    edges: np.ndarray,
    samples: int,
    tol: Tolerances,
) -> tuple[np.ndarray, float, float, int, float]:
    """Histogram contribution, Σx, Σx², resamples and max Φ for one substream."""
    seq, count = job
    rng = np.random.default_rng(seq)
    y_rest, resamples = _draw(rng, count, graph.n_edges - 1, tol)
    _, phi, weight = _branch(y_rest, graph)
    # two branches, each carrying w/(2|Γ|) per unit sample
    per_sample = weight / graph.total_length
    masses, _ = np.histogram(phi, bins=edges, weights=per_sample / samples)
    return (
        masses,
        float(np.sum(per_sample)),
        float(np.sum(per_sample**2)),
        resamples,
        float(np.max(phi)) if phi.size else 0.0,
    )


def quadrature_measure(
    graph: StarGraph,
    samples: int,
    bins: int = 64,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOLERANCES,
    jobs: int = 1,
) -> MeasureEstimate:
    """Histogram of Φ over the zero set of Ψ under the Barra–Gaspard measure."""
    _require_independent(graph)
    if samples < _MIN_SAMPLES:
        raise InvalidParameter(f"samples must be at least {_MIN_SAMPLES}, got {samples}")
    support = graph.support_max
    edges = np.linspace(0.0, support, bins + 1)

    streams = min(_STREAMS, samples)
    sizes = [samples // streams + (1 if i < samples % streams else 0) for i in range(streams)]
    seqs = np.random.SeedSequence(seed).spawn(streams)
    task = partial(_sample_stream, graph=graph, edges=edges, samples=samples, tol=tol)
    parts = run_tasks(task, list(zip(seqs, sizes, strict=True)), jobs)

    masses = np.sum([p[0] for p in parts], axis=0)
    total = sum(p[1] for p in parts) / samples
    second = sum(p[2] for p in parts) / samples
    resamples = sum(p[3] for p in parts)
    phi_max = max(p[4] for p in parts)

    if resamples > tol.max_pole_fraction * samples:
        raise SampleNearPole(f"{resamples} of {samples} draws fell within the pole tolerance")
    variance = max(second - total * total, 0.0) * samples / max(samples - 1, 1)
    stderr = math.sqrt(variance / samples)
    logger.info(
        "quadrature_measure_done",
        samples=samples,
        total_mass=total,
        stderr=stderr,
        resamples=resamples,
        phi_max=phi_max,
    )
    return MeasureEstimate(
        kind=MeasureKind.HISTOGRAM,
        support_max=support,
        bin_edges=tuple(edges.tolist()),
        masses=tuple(masses.tolist()),
        total_mass=total,
        mc_stderr=stderr,
        pole_resamples=resamples,
    )


# --- exact atoms ---


def rational_atoms(graph: StarGraph, tol: Tolerances = DEFAULT_TOLERANCES) -> MeasureEstimate:
    """Atoms of μ_ℓ read off one period of the Kirchhoff spectrum.

    Every regular entry puts mass 1/K at s = 2ρ; coincident entries put theirs at 0.
    """
    if graph.rationality != Rationality.RATIONAL:
        raise RequiresRationalLengths(f"needs rational lengths, graph is {graph.rationality}")
    period = rational_rank(graph).period
    assert period is not None
    expected = period_count(graph)
    spectrum = kirchhoff_spectrum(graph, period * (1.0 + 1e-12), tol)
    if len(spectrum) != expected:
        raise NumericalError(
            f"one period holds {len(spectrum)} eigenvalues, expected {expected}"
        )

    counts: dict[float, int] = {}
    for entry in spectrum:
        s = 0.0 if entry.kind == EigenClass.COINCIDENT else 2.0 * float(entry.rho)
        key = next((k for k in counts if abs(k - s) <= 1e-9), s)
        counts[key] = counts.get(key, 0) + 1
    atoms = []
    for s in sorted(counts):
        mass = Fraction(counts[s], expected)
        atoms.append(Atom(s=s, mass=float(mass), exact_mass=str(mass)))
    return MeasureEstimate(
        kind=MeasureKind.ATOMS,
        support_max=graph.support_max,
        atoms=tuple(atoms),
        total_mass=math.fsum(a.mass for a in atoms),
    )


# --- empirical distribution ---


def shift_ratios(deltas: Sequence[complex], alpha: complex, support: float) -> np.ndarray:
    """s_n = Re(δ_n/α) clipped to [0, support]."""
    ratio = np.asarray(deltas, dtype=complex) / complex(alpha)
    return np.clip(ratio.real, 0.0, support)


def empirical_delta_distribution(
    robin: Sequence[RobinEigenvalue],
    alpha: complex,
    bins: int = 64,
    graph: StarGraph | None = None,
    min_count: int = 100,
) -> MeasureEstimate:
    alpha = complex(alpha)
    if alpha == 0:
        raise AlphaZero("the shift distribution is taken relative to α ≠ 0")
    if len(robin) < min_count:
        raise SpectrumTooShort(f"need at least {min_count} eigenvalues, got {len(robin)}")
    graph = graph or robin.graph  # type: ignore[attr-defined]
    support = graph.support_max

    deltas = np.array([r.delta for r in robin], dtype=complex)
    s = shift_ratios(deltas, alpha, support)
    edges = np.linspace(0.0, support, bins + 1)
    masses, _ = np.histogram(s, bins=edges)
    masses = masses / len(robin)
    return MeasureEstimate(
        kind=MeasureKind.HISTOGRAM,
        support_max=support,
        bin_edges=tuple(edges.tolist()),
        masses=tuple(masses.tolist()),
        total_mass=float(np.sum(masses)),
        deltas=tuple(complex(d) for d in deltas),
        max_im_ratio=float(np.max(np.abs((deltas / alpha).imag))),
    )


# --- comparisons ---


def _check_support(a: MeasureEstimate, b: MeasureEstimate) -> None:
    if not math.isclose(a.support_max, b.support_max, rel_tol=1e-12):
        raise SupportMismatch(
            f"supports differ: [0, {a.support_max!r}] vs [0, {b.support_max!r}]"
        )


def _normalized(estimate: MeasureEstimate) -> tuple[np.ndarray, np.ndarray]:
    x = estimate.locations()
    w = estimate.weights()
    return x, w / np.sum(w)


def _cdf(x: np.ndarray, w: np.ndarray, at: np.ndarray) -> np.ndarray:
    order = np.argsort(x)
    cumulative = np.concatenate(([0.0], np.cumsum(w[order])))
    return cumulative[np.searchsorted(x[order], at, side="right")]


def ks_distance(a: MeasureEstimate, b: MeasureEstimate) -> float:
    """sup |F_a − F_b| of the CDFs, each estimate taken as a discrete measure."""
    _check_support(a, b)
    xa, wa = _normalized(a)
    xb, wb = _normalized(b)
    grid = np.union1d(xa, xb)
    return float(np.max(np.abs(_cdf(xa, wa, grid) - _cdf(xb, wb, grid))))


def wasserstein1(a: MeasureEstimate, b: MeasureEstimate) -> float:
    _check_support(a, b)
    xa, wa = _normalized(a)
    xb, wb = _normalized(b)
    return float(wasserstein_distance(xa, xb, u_weights=wa, v_weights=wb))


def levy_distance(a: MeasureEstimate, b: MeasureEstimate, iterations: int = 60) -> float:
    """Lévy distance between the two CDFs, by bisection on ε."""
    _check_support(a, b)
    xa, wa = _normalized(a)
    xb, wb = _normalized(b)
    points = np.union1d(xa, xb)

    def holds(eps: float) -> bool:
        grid = np.concatenate([points, points - eps, points + eps])
        grid = np.concatenate([grid, grid - 1e-12])
        fa, fb = _cdf(xa, wa, grid), _cdf(xb, wb, grid)
        upper_a = _cdf(xa, wa, grid + eps) + eps
        lower_a = _cdf(xa, wa, grid - eps) - eps
        upper_b = _cdf(xb, wb, grid + eps) + eps
        lower_b = _cdf(xb, wb, grid - eps) - eps
        tight = 1e-12
        return bool(
            np.all(fb <= upper_a + tight)
            and np.all(fb >= lower_a - tight)
            and np.all(fa <= upper_b + tight)
            and np.all(fa >= lower_b - tight)
        )

    lo, hi = 0.0, 1.0
    if holds(0.0):
        return 0.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def compare_atoms(
    empirical: MeasureEstimate, atoms: MeasureEstimate, alpha: complex, window: float = 0.02
) -> float:
    """Largest |empirical mass within ±window of an atom − atom mass|."""
    _check_support(empirical, atoms)
    if empirical.deltas:
        s = shift_ratios(empirical.deltas, alpha, empirical.support_max)
        x, w = s, np.full(s.size, 1.0 / s.size)
    else:
        x, w = _normalized(empirical)
    worst = 0.0
    for atom in atoms.atoms:
        nearby = float(np.sum(w[np.abs(x - atom.s) <= window]))
        worst = max(worst, abs(nearby - atom.mass))
    return worst


def test_function_average(
    deltas: Sequence[complex], f: Callable[[np.ndarray], np.ndarray]
) -> complex:
    """(1/n) Σ f(δ_k)."""
    values = np.asarray(f(np.asarray(deltas, dtype=complex)), dtype=complex)
    return complex(np.mean(values))


def limit_average(
    estimate: MeasureEstimate, alpha: complex, f: Callable[[np.ndarray], np.ndarray]
) -> complex:
    """∫ f(sα) dμ(s) against an atom or histogram estimate."""
    x, w = _normalized(estimate)
    values = np.asarray(f(x * complex(alpha)), dtype=complex)
    return complex(np.sum(w * values))


# --- singular strata ---


def singular_fraction(
    graph: StarGraph, kirchhoff: Sequence[KirchhoffEigenvalue], eps: float
) -> float:
    """Share of torus points τ_nℓ mod 2π within eps (max-norm modulo π) of {y ∈ πZ^N}."""
    _require_independent(graph)
    if eps <= 0 or not kirchhoff:
        return 0.0
    y = np.array([e.torus_point for e in kirchhoff], dtype=float)
    distance = np.abs(y - np.pi * np.round(y / np.pi))
    near = np.all(distance <= eps, axis=-1)
    return float(np.mean(near))
