"""Subsequences along which δ_n(α) approaches a prescribed value, and lattice quality.

Two constructions: convergents of ℓ_i/ℓ_j pin τ_n between two nearly coincident
Dirichlet points, forcing ρ_n and δ_n to be small; and dyadic scans of the torus orbit
τℓ pick the index nearest to a point y₀ of the secular surface with Φ(y₀) = s.
"""

import math
from fractions import Fraction

import numpy as np
import structlog

from starspec.config import DEFAULT_TOLERANCES, Tolerances
from starspec.errors import (
    InvalidConfig,
    InvalidTarget,
    NumericalError,
    OutOfComputedRange,
    RequiresIndependentLengths,
    TargetNotFound,
)
from starspec.kirchhoff import kirchhoff_spectrum, range_for_count, truncate
from starspec.models import (
    ConvergentSequence,
    EigenClass,
    KirchhoffEigenvalue,
    Rationality,
    RobinEigenvalue,
    Spectrum,
    StarGraph,
    SubsequenceHit,
    SubsequenceReport,
    VerificationParams,
)
from starspec.robin import robin_spectrum
from starspec.secular import eval_phi, eval_Psi

logger = structlog.get_logger()

# largest integer box diophantine_quality will enumerate
_MAX_BOX = 200_000_000


def _require_independent(graph: StarGraph) -> None:
    if graph.rationality != Rationality.INDEPENDENT:
        raise RequiresIndependentLengths(
            f"needs rationally independent lengths, graph is {graph.rationality}"
        )


def continued_fraction(
    x: float, k_max: int = 8, tol: float = DEFAULT_TOLERANCES.rational_cf_tol
) -> ConvergentSequence:
    """Convergents p/q of x, from the exact binary value of the float.

    Convergents with p = 0 or a repeated q are skipped. The expansion stops once x
    is reproduced to relative ``tol``.
    """
    if not x > 0:
        raise InvalidConfig(f"continued fractions need x > 0, got {x!r}")
    remainder = Fraction(x)
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    kept: list[tuple[int, int]] = []
    terminated = False
    while len(kept) < k_max:
        a = math.floor(remainder)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        if h > 0 and (not kept or k > kept[-1][1]):
            kept.append((h, k))
        rest = remainder - a
        if rest == 0 or abs(x - h / k) <= tol * x:
            terminated = True
            break
        remainder = 1 / rest
    return ConvergentSequence(x=x, convergents=tuple(kept), terminated=terminated)


def _fit_rate(lam0: np.ndarray, distance: np.ndarray) -> float | None:
    """−slope of log distance against log λ_n(0); None with fewer than two usable points."""
    usable = distance > 0
    if np.sum(usable) < 2:
        return None
    slope, _ = np.polyfit(np.log(lam0[usable]), np.log(distance[usable]), 1)
    return float(-slope)


def _robin_for(
    graph: StarGraph,
    alpha: complex,
    kirchhoff: Spectrum,
    params: VerificationParams | None,
    tol: Tolerances,
    jobs: int,
) -> Spectrum:
    return robin_spectrum(
        graph, alpha, kirchhoff.covered_to, params, tol, kirchhoff=kirchhoff, jobs=jobs
    )


# --- convergent subsequence: δ → 0 ---


def bracketed_entry(spectrum: Spectrum, lo: float, hi: float) -> KirchhoffEigenvalue:
    """Regular entry with the smallest ρ strictly inside (lo, hi)."""
    if hi > spectrum.covered_to:
        raise OutOfComputedRange(
            f"bracket ends at {hi!r}, spectrum covers {spectrum.covered_to!r}"
        )
    inside = [e for e in spectrum if e.kind == EigenClass.REGULAR and lo < e.tau < hi]
    if not inside:
        raise TargetNotFound(f"no regular eigenvalue between {lo!r} and {hi!r}")
    return min(inside, key=lambda e: e.rho)


def small_rho_subsequence(
    graph: StarGraph,
    pair: tuple[int, int] = (0, 1),
    alpha: complex = 0.0,
    k_max: int = 8,
    R: float | None = None,
    params: VerificationParams | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    jobs: int = 1,
) -> SubsequenceReport:
    """Indices n_k with τ_{n_k} between πq_k/ℓ_j and πp_k/ℓ_i for convergents of ℓ_i/ℓ_j."""
    _require_independent(graph)
    i, j = pair
    if i == j or not (0 <= i < graph.n_edges and 0 <= j < graph.n_edges):
        raise InvalidConfig(f"edge pair must name two distinct edges, got {pair}")
    alpha = complex(alpha)
    li, lj = graph.lengths[i], graph.lengths[j]
    cf = continued_fraction(li / lj, k_max, tol.rational_cf_tol)
    brackets = [
        tuple(sorted((math.pi * q / lj, math.pi * p / li))) for p, q in cf.convergents
    ]
    if R is None:
        R = max((b[1] for b in brackets), default=0.0) + 2.0 * math.pi / min(graph.lengths)

    kirchhoff = kirchhoff_spectrum(graph, R, tol, jobs)
    robin = _robin_for(graph, alpha, kirchhoff, params, tol, jobs)

    hits: list[SubsequenceHit] = []
    truncated = False
    for k, (lo, hi) in enumerate(brackets, start=1):
        try:
            entry = bracketed_entry(kirchhoff, lo, hi)
        except OutOfComputedRange:
            truncated = True
            logger.info("small_rho_truncated", k=k, tau=hi, covered_to=kirchhoff.covered_to)
            break
        except TargetNotFound:
            logger.warning("small_rho_empty_bracket", k=k, lo=lo, hi=hi)
            continue
        if hits and entry.index <= hits[-1].n:
            continue
        delta = robin[entry.index - 1].delta
        hits.append(
            SubsequenceHit(
                k=k, n=entry.index, tau=entry.tau, delta=delta, distance=abs(delta), window=k
            )
        )

    tau = np.array([h.tau for h in hits], dtype=float)
    distance = np.array([h.distance for h in hits], dtype=float)
    return SubsequenceReport(
        target=0j,
        hits=tuple(hits),
        rate_exponent=_fit_rate(tau**2, distance),
        bound_constant=float(np.max(distance * tau**2)) if hits else 0.0,
        truncated=truncated,
        windows_total=len(brackets),
        windows_hit=len(hits),
    )


# --- targeted subsequence: δ → sα ---


def target_point(
    graph: StarGraph, s: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """y₀ = (θ, π − θ, π/2, …, π/2) on the secular surface with Φ(y₀) = s.

    Ψ(y₀) = 0 for every θ; θ solves ℓ·∇Ψ(y₀) = 2/s in closed form.
    """
    ell = graph.ell
    sin2 = (ell[0] + ell[1]) / (2.0 / s - float(np.sum(ell[2:])))
    theta = math.asin(math.sqrt(min(sin2, 1.0)))
    y0 = np.full(graph.n_edges, 0.5 * math.pi)
    y0[0], y0[1] = theta, math.pi - theta
    phi = float(eval_phi(y0, graph, tol))
    if abs(phi - s) > 1e-10 or abs(float(eval_Psi(y0, tol))) > 1e-10:
        raise NumericalError(f"target point misses Φ = {s!r} (got {phi!r})")
    return y0


def torus_distance(points: np.ndarray, y0: np.ndarray) -> np.ndarray:
    """Max-norm distance modulo π per coordinate."""
    gap = np.mod(points - y0 + 0.5 * np.pi, np.pi) - 0.5 * np.pi
    return np.max(np.abs(gap), axis=-1)


def nearest_in_window(
    entries: list[KirchhoffEigenvalue], y0: np.ndarray, radius: float
) -> tuple[KirchhoffEigenvalue, float]:
    """Entry whose torus point is closest to y₀, provided it lies within radius."""
    if not entries:
        raise TargetNotFound("window holds no regular eigenvalue")
    points = np.array([e.torus_point for e in entries], dtype=float)
    distance = torus_distance(points, y0)
    best = int(np.argmin(distance))
    if distance[best] > radius:
        raise TargetNotFound(
            f"closest torus point is {distance[best]:.3g} away, radius {radius:.3g}"
        )
    return entries[best], float(distance[best])


def targeted_subsequence(
    graph: StarGraph,
    alpha: complex,
    s: float,
    n_max: int,
    eps_fit: float = 0.05,
    params: VerificationParams | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    jobs: int = 1,
) -> SubsequenceReport:
    """Per dyadic window [T, 2T), the index whose torus point is nearest y₀.

    The acceptance radius shrinks like T^{−1/(2N)+ε}; windows without a point inside
    it are flagged.
    """
    _require_independent(graph)
    support = graph.support_max
    if not (0.0 <= s <= support * (1.0 + 1e-12)):
        raise InvalidTarget(f"s must lie in [0, {support!r}], got {s!r}")
    alpha = complex(alpha)
    if s == 0:
        R = range_for_count(graph, n_max)
        return small_rho_subsequence(
            graph, (0, 1), alpha, R=R, params=params, tol=tol, jobs=jobs
        )

    s = min(s, support)
    y0 = target_point(graph, s, tol)
    full = kirchhoff_spectrum(graph, range_for_count(graph, n_max), tol, jobs)
    kirchhoff = truncate(full, n_max)
    robin = _robin_for(graph, alpha, kirchhoff, params, tol, jobs)
    target = s * alpha
    exponent = -1.0 / (2.0 * graph.n_edges) + eps_fit

    regular = [e for e in kirchhoff if e.kind == EigenClass.REGULAR]
    hits: list[SubsequenceHit] = []
    flagged: list[int] = []
    windows = 0
    if regular:
        start = regular[0].tau
        top = kirchhoff.covered_to
        window = 0
        while start * 2.0**window < top:
            lo, hi = start * 2.0**window, start * 2.0 ** (window + 1)
            members = [e for e in regular if lo <= e.tau < hi]
            windows += 1
            try:
                entry, _ = nearest_in_window(members, y0, lo**exponent)
            except TargetNotFound:
                flagged.append(window)
            else:
                rob: RobinEigenvalue = robin[entry.index - 1]
                hits.append(
                    SubsequenceHit(
                        k=len(hits) + 1,
                        n=entry.index,
                        tau=entry.tau,
                        delta=rob.delta,
                        distance=abs(rob.delta - target),
                        window=window,
                    )
                )
            window += 1

    tau = np.array([h.tau for h in hits], dtype=float)
    distance = np.array([h.distance for h in hits], dtype=float)
    claimed = 1.0 / (2.0 * graph.n_edges) - eps_fit
    logger.info("targeted_subsequence_done", s=s, windows=windows, hits=len(hits))
    return SubsequenceReport(
        target=target,
        hits=tuple(hits),
        rate_exponent=_fit_rate(tau**2, distance),
        bound_constant=float(np.max(distance * (tau**2) ** claimed)) if hits else 0.0,
        windows_total=windows,
        windows_hit=len(hits),
        flagged_windows=tuple(flagged),
    )


# --- lattice quality ---


def diophantine_quality(graph: StarGraph, gamma: float = 1.0, kappa_norm_max: int = 100) -> float:
    """min |κ·ℓ|·‖κ‖^γ over nonzero integer κ with ‖κ‖ ≤ kappa_norm_max. Diagnostic only."""
    _require_independent(graph)
    K = kappa_norm_max
    if K > 10_000:
        raise InvalidConfig(f"kappa_norm_max must be at most 10000, got {K}")
    n = graph.n_edges
    if (2 * K + 1) ** n > _MAX_BOX:
        raise InvalidConfig(f"a box of side {2 * K + 1} in {n} dimensions is too large to scan")

    ell = graph.ell
    axis = np.arange(-K, K + 1)
    rest = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
    rest_dot = rest @ ell[1:]
    rest_sq = np.sum(rest**2, axis=-1)
    best = math.inf
    for k1 in axis:
        norm_sq = rest_sq + k1 * k1
        keep = (norm_sq > 0) & (norm_sq <= K * K)
        if not np.any(keep):
            continue
        value = np.abs(k1 * ell[0] + rest_dot[keep]) * np.sqrt(norm_sq[keep]) ** gamma
        best = min(best, float(np.min(value)))
    return best
