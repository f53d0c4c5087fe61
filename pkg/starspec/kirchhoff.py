"""Spectrum of the Kirchhoff Laplacian H₀: interlaced regular roots plus coincident points."""

import math
from collections.abc import Sequence
from functools import partial

import numpy as np
import structlog

from starspec.config import DEFAULT_TOLERANCES, Tolerances
from starspec.errors import (
    BracketFailure,
    InvalidConfig,
    NotARegularRoot,
    PoleProximity,
    SpectrumTooShort,
)
from starspec.graph import dirichlet_arrays
from starspec.models import (
    EigenClass,
    KirchhoffEigenvalue,
    RobinEigenvalue,
    Spectrum,
    StarGraph,
    WeylReport,
    WeylWindow,
)
from starspec.parallel import run_tasks
from starspec.secular import eval_psi, eval_psi0_prime, psi_sign

logger = structlog.get_logger()

# minimum number of brackets per worker before enumeration is split across processes
_CHUNK_MIN = 2000


def _wall_offset(wall: np.ndarray, gap: np.ndarray, tol: Tolerances) -> np.ndarray:
    return np.minimum(np.maximum(tol.wall_offset, 16.0 * np.spacing(wall)), gap / 4.0)


def _psi_values(tau: np.ndarray, graph: StarGraph) -> np.ndarray:
    y = tau[:, None] * graph.ell
    return -np.sum(np.cos(y) / np.sin(y), axis=-1)


def _psi0_prime_values(tau: np.ndarray, graph: StarGraph) -> np.ndarray:
    y = tau[:, None] * graph.ell
    return np.sum(graph.ell / np.sin(y) ** 2, axis=-1)


def _polish_brackets(
    bounds: tuple[np.ndarray, np.ndarray], graph: StarGraph, tol: Tolerances
) -> np.ndarray:
    """One root of τ ↦ Ψ(τℓ) inside each open bracket (lo, hi)."""
    lo_wall, hi_wall = bounds
    if lo_wall.size == 0:
        return np.empty(0)
    gap = hi_wall - lo_wall
    lo = lo_wall + _wall_offset(lo_wall, gap, tol)
    hi = hi_wall - _wall_offset(hi_wall, gap, tol)

    s_lo = psi_sign(lo, graph)
    s_hi = psi_sign(hi, graph)
    bad = ~((s_lo < 0) & (s_hi > 0))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise BracketFailure(
            f"Ψ does not change sign on ({lo[k]!r}, {hi[k]!r}); wall offset too large "
            "for a near-coincident Dirichlet pair"
        )

    while True:
        width = hi - lo
        active = width > tol.bisect_width
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        positive = psi_sign(mid, graph) > 0
        hi = np.where(active & positive, mid, hi)
        lo = np.where(active & ~positive, mid, lo)

    # Newton with closed-form ψ₀′, clamped to the current bracket
    tau = 0.5 * (lo + hi)
    done = np.zeros(tau.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(tol.kirchhoff_newton_max_iter):
            psi = _psi_values(tau, graph)
            converged = np.abs(psi) <= tol.kirchhoff_newton_tol
            done |= converged
            if np.all(done):
                break
            hi = np.where(psi > 0, np.minimum(hi, tau), hi)
            lo = np.where(psi < 0, np.maximum(lo, tau), lo)
            step = psi / _psi0_prime_values(tau, graph)
            candidate = tau - step
            inside = np.isfinite(candidate) & (candidate > lo) & (candidate < hi)
            new_tau = np.where(inside, candidate, 0.5 * (lo + hi))
            tiny = np.abs(new_tau - tau) <= 4.0 * np.spacing(tau)
            tau = np.where(done, tau, new_tau)
            done |= tiny

    # entries Newton could not settle are bisected to machine precision
    stuck = np.flatnonzero(~done)
    for k in stuck:
        a, b = float(lo[k]), float(hi[k])
        while b - a > 2.0 * math.ulp(b):
            m = 0.5 * (a + b)
            if psi_sign(m, graph) > 0:
                b = m
            else:
                a = m
        tau[k] = 0.5 * (a + b)
        logger.debug("kirchhoff_bisection_fallback", tau=tau[k])
    return tau


def _chunks(n: int, jobs: int) -> list[slice]:
    if jobs <= 1 or n < 2 * _CHUNK_MIN:
        return [slice(0, n)]
    size = max(_CHUNK_MIN, math.ceil(n / jobs))
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def kirchhoff_spectrum(
    graph: StarGraph,
    R: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    jobs: int = 1,
) -> Spectrum:
    """Ordered spectrum of H₀ with τ_n in (0, R].

    Every component of (0, R] minus the Dirichlet points holds exactly one regular
    root; a Dirichlet point of multiplicity m adds m − 1 coincident entries.
    """
    if R <= 0:
        return Spectrum(entries=[], graph=graph, covered_to=R)

    d_tau, d_mult, _ = dirichlet_arrays(graph, R, tol)
    lo_walls = np.concatenate(([0.0], d_tau))
    hi_walls = np.concatenate((d_tau, [R]))
    closed = np.ones(lo_walls.size, dtype=bool)

    # last component (d_last, R]: its root lies in range iff Ψ(Rℓ) ≥ 0
    last_lo = lo_walls[-1]
    if R <= last_lo or psi_sign(np.array([R]), graph)[0] < 0:
        closed[-1] = False
    else:
        nxt, _, _ = dirichlet_arrays(graph, R + 2.0 * math.pi / min(graph.lengths), tol)
        beyond = nxt[nxt > last_lo * (1.0 + tol.merge_rtol)]
        hi_walls[-1] = beyond[0]

    lo_walls, hi_walls = lo_walls[closed], hi_walls[closed]
    n = lo_walls.size
    parts = _chunks(n, jobs)
    task = partial(_polish_brackets, graph=graph, tol=tol)
    pieces = run_tasks(task, [(lo_walls[p], hi_walls[p]) for p in parts], jobs=jobs)
    roots = np.concatenate(pieces) if pieces else np.empty(0)
    roots = roots[roots <= R]
    rhos = 1.0 / _psi0_prime_values(roots, graph)

    entries: list[tuple[float, EigenClass, int | None, float | None]] = [
        (float(t), EigenClass.REGULAR, None, float(r)) for t, r in zip(roots, rhos, strict=True)
    ]
    for t, m in zip(d_tau, d_mult, strict=True):
        entries.extend((float(t), EigenClass.COINCIDENT, int(m), None) for _ in range(m - 1))
    entries.sort(key=lambda e: e[0])

    ell = graph.ell
    spectrum = Spectrum(
        entries=[
            KirchhoffEigenvalue(
                index=i,
                tau=t,
                kind=kind,
                dirichlet_multiplicity=m,
                rho=r,
                torus_point=tuple(np.mod(t * ell, 2.0 * math.pi).tolist()),
            )
            for i, (t, kind, m, r) in enumerate(entries, start=1)
        ],
        graph=graph,
        covered_to=R,
    )
    logger.debug("kirchhoff_spectrum_done", R=R, count=len(spectrum), regular=int(roots.size))
    return spectrum


def truncate(spectrum: Spectrum, n_max: int) -> Spectrum:
    """First n_max entries; the covered range shrinks to the last kept τ."""
    if len(spectrum) <= n_max:
        return spectrum
    kept = list(spectrum[:n_max])
    return Spectrum(entries=kept, graph=spectrum.graph, covered_to=_parameter(kept[-1]))


def range_for_count(graph: StarGraph, n_max: int) -> float:
    """Spectral cutoff expected to hold n_max eigenvalues, with a 10% Weyl margin."""
    return 1.1 * n_max * math.pi / graph.total_length + 2.0 * math.pi / min(graph.lengths)


def rho(graph: StarGraph, tau: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """ρ = 1/ψ₀′(τ) at a regular root τ of Ψ(τℓ)."""
    try:
        psi = float(eval_psi(tau, graph, 0.0, tol))
        slope = float(eval_psi0_prime(tau, graph, tol))
    except PoleProximity as exc:
        raise NotARegularRoot(f"τ={tau!r} lies on the Dirichlet spectrum") from exc
    # at large τ the attainable residual is ψ₀′ times the rounding of τ
    floor = 8.0 * slope * math.ulp(tau)
    if abs(psi) > max(tol.regular_residual_tol, floor):
        raise NotARegularRoot(f"|Ψ(τℓ)| = {abs(psi):.3e} at τ={tau!r}")
    return 1.0 / slope


def _parameter(entry) -> float:
    if isinstance(entry, RobinEigenvalue):
        return entry.z.real
    return entry.tau


def _sorted_parameters(spectrum: Sequence) -> np.ndarray:
    return np.sort(np.array([_parameter(e) for e in spectrum], dtype=float))


def weyl_count(spectrum: Spectrum, R1: float, R2: float) -> tuple[int, float]:
    """#{n : R1 < τ_n ≤ R2} and its defect against |Γ|(R2 − R1)/π.

    Robin entries are counted by Re z_n.
    """
    if R1 > R2:
        raise InvalidConfig(f"window must satisfy R1 <= R2, got ({R1}, {R2})")
    if R1 == R2:
        return 0, 0.0
    if R2 > spectrum.covered_to:
        raise SpectrumTooShort(
            f"spectrum covers (0, {spectrum.covered_to}] but the window ends at {R2}"
        )
    values = _sorted_parameters(spectrum)
    count = int(np.searchsorted(values, R2, side="right") - np.searchsorted(values, R1, "right"))
    return count, count - spectrum.graph.total_length * (R2 - R1) / math.pi


def weyl_windows(spectrum: Spectrum, windows: int, seed: int = 0) -> WeylReport:
    """Defects over random windows (R1, R2) inside the covered range."""
    rng = np.random.default_rng(seed)
    ends = np.sort(rng.uniform(0.0, spectrum.covered_to, size=(windows, 2)), axis=1)
    values = _sorted_parameters(spectrum)
    lo = np.searchsorted(values, ends[:, 0], side="right")
    hi = np.searchsorted(values, ends[:, 1], side="right")
    counts = hi - lo
    defects = counts - spectrum.graph.total_length * (ends[:, 1] - ends[:, 0]) / math.pi
    rows = tuple(
        WeylWindow(r1=float(a), r2=float(b), count=int(c), defect=float(d))
        for (a, b), c, d in zip(ends, counts, defects, strict=True)
    )
    max_abs = float(np.max(np.abs(defects))) if windows else 0.0
    return WeylReport(windows=rows, max_abs_defect=max_abs)


def eigenvalue_gaps(spectrum: Sequence[KirchhoffEigenvalue | RobinEigenvalue]) -> np.ndarray:
    """dist(λ_n(0), Sp(H₀) minus λ_n(0)) for every entry.

    The top entry only sees its lower neighbour.
    """
    lam = np.array([e.tau**2 for e in spectrum], dtype=float)
    if lam.size == 0:
        return lam
    distinct, inverse = np.unique(lam, return_inverse=True)
    left = np.concatenate(([np.inf], np.diff(distinct)))
    right = np.concatenate((np.diff(distinct), [np.inf]))
    return np.minimum(left, right)[inverse]
