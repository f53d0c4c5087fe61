"""Robin eigenvalues z_n(α) of H_α, paired index by index with the Kirchhoff spectrum.

Past the certification onset every eigenvalue is a simple root of ψ_α in the disk
D(τ_n, γ₀ρ_n), found by Newton from τ_n + αρ_n/τ_n and certified by the argument
principle. Below the onset the eigenvalues are counted and, if needed, located on the
entire form of the secular equation inside a rectangle of the λ-plane.
"""

import cmath
import math
from collections.abc import Callable, Sequence
from functools import partial

import numpy as np
import structlog

from starspec.config import DEFAULT_TOLERANCES, Tolerances
from starspec.errors import (
    CoincidentEigenfunction,
    ContourIllConditioned,
    NewtonDiverged,
    NotARegularRoot,
    PoleProximity,
    SpectrumTooShort,
    StarSpecError,
    ZeroArgument,
)
from starspec.kirchhoff import eigenvalue_gaps, kirchhoff_spectrum
from starspec.models import (
    EigenClass,
    EigenfunctionCoefficients,
    KirchhoffEigenvalue,
    LocateMethod,
    RobinEigenvalue,
    SpectralReport,
    Spectrum,
    StarGraph,
    VerificationParams,
)
from starspec.parallel import run_tasks
from starspec.secular import eval_psi, eval_psi_prime, secular_entire_lambda

logger = structlog.get_logger()

SIGN_TOL = 1e-10

# off-centre cut positions tried in turn when a cell boundary passes through a root
_CUTS = (0.5 - 0.0371, 0.5 + 0.0589, 0.5 - 0.1123, 0.5 + 0.1417, 0.5 - 0.2011)
_MAX_BOUNDARY_POINTS = 2_000_000
_MAX_PHASE_STEP = math.pi / 4
_ARC_PROBES = 4096


# --- Newton on ψ_α ---


def _safe_psi(z: complex, graph: StarGraph, alpha: complex, tol: Tolerances) -> complex | None:
    try:
        value = complex(eval_psi(z, graph, alpha, tol))
    except (PoleProximity, ZeroArgument):
        return None
    return value if cmath.isfinite(value) else None


def _newton(
    graph: StarGraph,
    alpha: complex,
    z0: complex,
    params: VerificationParams,
    tol: Tolerances,
    damped: bool = False,
    right_half: bool = True,
) -> tuple[complex, bool]:
    """Newton iteration on ψ_α. Returns (z, converged).

    Leaving the right half plane (when ``right_half``), hitting a pole or a non-finite
    value counts as an escape.
    """
    z = complex(z0)
    f = _safe_psi(z, graph, alpha, tol)
    if f is None:
        return z, False
    for _ in range(params.newton_max_iter):
        if abs(f) <= params.newton_tol:
            return z, True
        try:
            slope = complex(eval_psi_prime(z, graph, alpha, tol))
        except (PoleProximity, ZeroArgument):
            return z, False
        if slope == 0 or not cmath.isfinite(slope):
            return z, False
        step = f / slope
        candidate, f_new = z - step, _safe_psi(z - step, graph, alpha, tol)
        if damped:
            halvings = 0
            while f_new is None or abs(f_new) >= abs(f):
                halvings += 1
                if halvings > 40:
                    return z, False
                step *= 0.5
                candidate = z - step
                f_new = _safe_psi(candidate, graph, alpha, tol)
        if f_new is None or not cmath.isfinite(candidate):
            return z, False
        if right_half and candidate.real <= 0:
            return z, False
        z, f = candidate, f_new
        if abs(step) <= 4.0 * math.ulp(abs(z)):
            return z, True
    return z, abs(f) <= params.newton_tol


# --- disk certification ---


def _disk_sums(
    graph: StarGraph,
    alpha: complex,
    center: float,
    radius: float,
    nodes: int,
    tol: Tolerances,
) -> tuple[complex, complex, float]:
    """Trapezoid winding number, first moment about the centre and min |ψ| on the circle."""
    w = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    z = center + w
    try:
        f = np.asarray(eval_psi(z, graph, alpha, tol))
        d = np.asarray(eval_psi_prime(z, graph, alpha, tol))
    except PoleProximity:
        return complex("nan"), complex("nan"), 0.0
    g = d / f
    return complex(np.mean(g * w)), complex(np.mean(g * w * w)), float(np.min(np.abs(f)))


def round_winding(
    raw: complex, residue_tol: float = DEFAULT_TOLERANCES.contour_residue_tol
) -> int:
    """Nearest integer to a quadrature winding value; refuses ambiguous values."""
    if not cmath.isfinite(raw):
        raise ContourIllConditioned("winding quadrature is not finite")
    count = round(raw.real)
    residue = abs(raw - count)
    if residue > residue_tol:
        raise ContourIllConditioned(f"winding value {raw:.4g} is {residue:.3g} from an integer")
    return int(count)


def _certify(
    graph: StarGraph,
    alpha: complex,
    entry: KirchhoffEigenvalue,
    params: VerificationParams,
    tol: Tolerances,
) -> tuple[int, complex]:
    if entry.kind != EigenClass.REGULAR or entry.rho is None:
        raise NotARegularRoot(f"entry {entry.index} is not a regular root", index=entry.index)
    radius = params.gamma0 * entry.rho
    nodes = params.contour_nodes
    while True:
        raw, moment, min_modulus = _disk_sums(graph, alpha, entry.tau, radius, nodes, tol)
        if min_modulus >= tol.contour_min_modulus:
            try:
                count = round_winding(raw, tol.contour_residue_tol)
            except ContourIllConditioned:
                if nodes >= params.contour_max_nodes:
                    raise
            else:
                return count, moment
        if nodes >= params.contour_max_nodes:
            raise ContourIllConditioned(
                f"|ψ_α| = {min_modulus:.3e} on the certification circle of τ={entry.tau!r}",
                index=entry.index,
            )
        nodes *= 2


def certify_disk(
    graph: StarGraph,
    alpha: complex,
    entry: KirchhoffEigenvalue,
    params: VerificationParams | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> int:
    """Number of roots of ψ_α inside the circle C(τ_n, γ₀ρ_n)."""
    params = params or VerificationParams.for_graph(graph)
    count, _ = _certify(graph, complex(alpha), entry, params, tol)
    return count


# --- single eigenvalue ---


def _result(
    entry: KirchhoffEigenvalue,
    alpha: complex,
    z: complex,
    residual: float,
    certified: bool,
    winding: int | None,
    method: LocateMethod,
) -> RobinEigenvalue:
    lam = z * z
    return RobinEigenvalue(
        index=entry.index,
        alpha=alpha,
        tau=entry.tau,
        z=z,
        eigenvalue=lam,
        delta=(z - entry.tau) * (z + entry.tau),
        residual=residual,
        certified=certified,
        winding=winding,
        kind=entry.kind,
        rho=entry.rho,
        method=method,
    )


def robin_eigenvalue(
    graph: StarGraph,
    alpha: complex,
    entry: KirchhoffEigenvalue,
    params: VerificationParams | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RobinEigenvalue:
    """Perturb one Kirchhoff entry into z_n(α).

    Coincident entries keep z = τ_n for every α. Regular entries go through Newton,
    damped Newton, and finally the disk's first moment when the disk is known to hold
    exactly one root.
    """
    alpha = complex(alpha)
    params = params or VerificationParams.for_graph(graph)
    tau = entry.tau

    if entry.kind == EigenClass.COINCIDENT:
        return _result(entry, alpha, complex(tau), 0.0, True, None, LocateMethod.EXACT)
    if entry.rho is None:
        raise NotARegularRoot(f"regular entry {entry.index} carries no ρ", index=entry.index)

    radius = params.gamma0 * entry.rho
    if alpha == 0:
        winding = certify_disk(graph, alpha, entry, params, tol)
        return _result(entry, alpha, complex(tau), 0.0, winding == 1, winding, LocateMethod.EXACT)

    seed = tau + alpha * entry.rho / tau
    z, ok = _newton(graph, alpha, seed, params, tol)
    method = LocateMethod.NEWTON
    if not ok:
        logger.debug("robin_damped_newton", index=entry.index, tau=tau)
        z, ok = _newton(graph, alpha, seed, params, tol, damped=True)
        method = LocateMethod.DAMPED

    winding: int | None = None
    moment = complex("nan")
    try:
        winding, moment = _certify(graph, alpha, entry, params, tol)
    except ContourIllConditioned:
        logger.debug("robin_contour_ill_conditioned", index=entry.index, tau=tau)

    in_disk = ok and abs(z - tau) <= radius
    if winding == 1 and not in_disk:
        # one root in the disk: its position is the first moment of ψ′/ψ
        estimate = tau + moment
        polished, polished_ok = _newton(graph, alpha, estimate, params, tol)
        if polished_ok and abs(polished - tau) <= radius:
            logger.debug("robin_contour_located", index=entry.index, tau=tau)
            z, ok, in_disk, method = polished, True, True, LocateMethod.CONTOUR

    if not ok:
        raise NewtonDiverged(
            f"no root of ψ_α found near τ={tau!r} (winding {winding})", index=entry.index
        )
    residual = abs(_safe_psi(z, graph, alpha, tol) or 0.0)
    return _result(entry, alpha, z, residual, in_disk and winding == 1, winding, method)


def certification_onset(entries: Sequence[RobinEigenvalue]) -> int | None:
    """Smallest index from which every regular entry is certified.

    Coincident entries never break the run. None when the last regular entry is not
    certified.
    """
    position = _tail_start(entries)
    if position >= len(entries):
        return None
    return entries[position].index


def _tail_start(entries: Sequence[RobinEigenvalue | None]) -> int:
    start = len(entries)
    for position in range(len(entries) - 1, -1, -1):
        entry = entries[position]
        if entry is not None and (entry.kind == EigenClass.COINCIDENT or entry.certified):
            start = position
        else:
            break
    return start


# --- low block: counting and locating on the entire secular function ---


def _rectangle(alpha: complex, top: float) -> tuple[float, float, float, float]:
    """λ-rectangle holding every eigenvalue with Re λ ≤ top, from the form's sector bound."""
    a2 = abs(alpha) ** 2
    eps = min(0.5, max(1e-6, abs(alpha) / math.sqrt(max(top, 1.0))))
    height = eps * (top + a2 / eps) / (1.0 - eps) + a2 / eps
    return -2.0 * a2 - 1.0, top, -height - 1.0, height + 1.0


def _side_points(a: complex, b: complex, initial: int, rate: float) -> np.ndarray:
    """Points from a towards b (b excluded), evenly spaced in √λ when ``rate`` > 0.

    ``rate`` is the phase turned by f per unit length of √λ; sides get enough points
    that a smooth stretch turns by at most π/8 between neighbours.
    """
    if rate <= 0:
        return a + (b - a) * np.linspace(0.0, 1.0, initial, endpoint=False)
    t = np.linspace(0.0, 1.0, _ARC_PROBES + 1)
    lam = a + (b - a) * t
    step = abs(b - a) / _ARC_PROBES
    mid = np.maximum(np.abs(0.5 * (lam[1:] + lam[:-1])), 1e-300)
    # |d√λ| = |dλ| / (2|√λ|)
    arc = np.concatenate(([0.0], np.cumsum(step / (2.0 * np.sqrt(mid)))))
    count = max(initial, math.ceil(8.0 * rate * arc[-1] / math.pi))
    targets = np.linspace(0.0, arc[-1], count, endpoint=False)
    return a + (b - a) * np.interp(targets, arc, t)


def boundary_winding(
    f: Callable[[np.ndarray], np.ndarray],
    rect: tuple[float, float, float, float],
    initial: int = 64,
    rate: float = 0.0,
) -> int:
    """Zeros of f inside the rectangle, by summing phase increments along its boundary.

    Each side starts from ``initial`` points, more when ``rate`` says f oscillates
    faster (see ``_side_points``). Segments whose phase jumps by more than π/4 are then
    bisected until none does.
    """
    x0, x1, y0, y1 = rect
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    path = np.concatenate(
        [
            _side_points(a, b, initial, rate)
            for a, b in zip(corners, corners[1:] + corners[:1], strict=True)
        ]
        + [np.array([corners[0]])]
    )
    values = np.asarray(f(path), dtype=complex)
    while True:
        if np.any(values == 0) or not np.all(np.isfinite(values)):
            raise ContourIllConditioned("the boundary passes through a root")
        steps = np.angle(values[1:] / values[:-1])
        coarse = np.abs(steps) > _MAX_PHASE_STEP
        if not np.any(coarse):
            break
        if path.size > _MAX_BOUNDARY_POINTS:
            raise ContourIllConditioned("phase sampling did not resolve along the boundary")
        mids = 0.5 * (path[:-1][coarse] + path[1:][coarse])
        where = np.flatnonzero(coarse) + 1
        path = np.insert(path, where, mids)
        values = np.insert(values, where, np.asarray(f(mids), dtype=complex))
    return round_winding(complex(np.sum(steps) / (2.0 * np.pi)))


def _polish_lambda(
    graph: StarGraph,
    alpha: complex,
    rect: tuple[float, float, float, float],
    params: VerificationParams,
    tol: Tolerances,
) -> complex | None:
    x0, x1, y0, y1 = rect
    z0 = cmath.sqrt(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)))
    if abs(z0) < 1e-8:
        return None
    z, ok = _newton(graph, alpha, z0, params, tol, damped=True, right_half=False)
    if not ok:
        return None
    lam = z * z
    if x0 <= lam.real <= x1 and y0 <= lam.imag <= y1:
        return lam
    return None


def _in_cell(lam: complex, rect: tuple[float, float, float, float]) -> bool:
    # half-open, so a point on a cut belongs to exactly one half
    x0, x1, y0, y1 = rect
    return x0 <= lam.real < x1 and y0 <= lam.imag < y1


def _locate_roots(
    graph: StarGraph,
    alpha: complex,
    rect: tuple[float, float, float, float],
    count: int,
    params: VerificationParams,
    tol: Tolerances,
    known: Sequence[complex] = (),
) -> list[complex]:
    """All zeros (with multiplicity) inside a cell known to hold ``count`` of them.

    ``known`` are zeros already found elsewhere, listed with multiplicity. A cell whose
    known zeros account for its whole count is not split further.
    """
    if count <= 0:
        return []
    inside = [lam for lam in known if _in_cell(lam, rect)]
    if len(inside) == count:
        return inside
    x0, x1, y0, y1 = rect
    center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    scale = max(1.0, abs(x0), abs(x1), abs(y0), abs(y1))
    if max(x1 - x0, y1 - y0) < 1e-10 * scale:
        return [center] * count
    if count == 1:
        lam = _polish_lambda(graph, alpha, rect, params, tol)
        if lam is not None:
            return [lam]

    def f(lam: np.ndarray) -> np.ndarray:
        return np.asarray(secular_entire_lambda(lam, graph, alpha, scaled=True))

    for cut in _CUTS:
        if x1 - x0 >= y1 - y0:
            split = x0 + cut * (x1 - x0)
            halves = [(x0, split, y0, y1), (split, x1, y0, y1)]
        else:
            split = y0 + cut * (y1 - y0)
            halves = [(x0, x1, y0, split), (x0, x1, split, y1)]
        try:
            counts = [boundary_winding(f, half, rate=graph.total_length) for half in halves]
        except ContourIllConditioned:
            continue
        if sum(counts) != count:
            continue
        roots: list[complex] = []
        for half, n in zip(halves, counts, strict=True):
            roots.extend(_locate_roots(graph, alpha, half, n, params, tol, inside))
        return roots
    raise ContourIllConditioned(f"could not split the cell {rect} holding {count} roots")


def _block_split(
    entries: Sequence[KirchhoffEigenvalue], results: Sequence[RobinEigenvalue | None]
) -> tuple[int, float] | None:
    """(block size, Λ) with every tail eigenvalue strictly right of Λ, or None."""
    position = _tail_start(results)

    def re_lambda(i: int) -> float:
        found = results[i]
        return found.eigenvalue.real if found is not None else entries[i].tau ** 2

    while position < len(results):
        if position == 0:
            return 0, 0.0
        lower = max(re_lambda(i) for i in range(position))
        upper = min(re_lambda(i) for i in range(position, len(results)))
        if lower < upper:
            return position, 0.5 * (lower + upper)
        position += 1
    return None


def _distinct(values: Sequence[complex]) -> bool:
    ordered = sorted(values, key=lambda v: (v.real, v.imag))
    return all(
        abs(b - a) > 1e-8 * max(1.0, abs(b)) for a, b in zip(ordered, ordered[1:], strict=False)
    )


def _known_roots(
    regular: Sequence[RobinEigenvalue],
    entries: Sequence[KirchhoffEigenvalue],
    rect: tuple[float, float, float, float],
) -> list[complex]:
    """Distinct Newton roots inside the rectangle, plus every coincident point."""
    found: list[complex] = []
    for r in regular:
        lam = r.eigenvalue
        if not _in_cell(lam, rect):
            continue
        if all(abs(lam - k) > 1e-8 * max(1.0, abs(lam)) for k in found):
            found.append(lam)
    found.extend(complex(e.tau**2) for e in entries if e.kind == EigenClass.COINCIDENT)
    return found


def _resolve_block(
    graph: StarGraph,
    alpha: complex,
    entries: Sequence[KirchhoffEigenvalue],
    results: list[RobinEigenvalue | None],
    size: int,
    top: float,
    params: VerificationParams,
    tol: Tolerances,
) -> None:
    rect = _rectangle(alpha, top)

    def f(lam: np.ndarray) -> np.ndarray:
        return np.asarray(secular_entire_lambda(lam, graph, alpha, scaled=True))

    count = boundary_winding(f, rect, rate=graph.total_length)
    block = results[:size]
    regular = [r for r in block if r is not None and r.kind == EigenClass.REGULAR]
    logger.info("robin_low_block", size=size, count=count, top=top)
    x0, x1, y0, y1 = rect
    inside = all(
        x0 < r.eigenvalue.real < x1 and y0 < r.eigenvalue.imag < y1 for r in regular
    )
    coincident_points = {complex(e.tau) for e in entries[:size] if e.kind == EigenClass.COINCIDENT}
    if (
        count == size
        and all(r is not None for r in block)
        and inside
        and _distinct([r.z for r in regular] + list(coincident_points))
    ):
        return

    logger.info("robin_block_subdivision", size=size, count=count)
    known = _known_roots(regular, entries[:size], rect)
    roots = _locate_roots(graph, alpha, rect, count, params, tol, known)
    for entry in entries[:size]:
        if entry.kind != EigenClass.COINCIDENT:
            continue
        target = entry.tau**2
        nearest = min(range(len(roots)), key=lambda i: abs(roots[i] - target), default=None)
        if nearest is not None and abs(roots[nearest] - target) <= 1e-6 * max(1.0, target):
            roots.pop(nearest)
        else:
            logger.warning("robin_block_missing_coincident", index=entry.index, tau=entry.tau)

    zs = sorted((_principal_root(lam) for lam in roots), key=lambda z: (z.real, z.imag))
    slots = [i for i in range(size) if entries[i].kind == EigenClass.REGULAR]
    if len(zs) < len(slots):
        raise NewtonDiverged(
            f"low block holds {len(zs)} regular eigenvalues for {len(slots)} indices",
            index=entries[slots[len(zs)]].index,
        )
    if len(zs) > len(slots):
        logger.warning("robin_block_extra_roots", extra=len(zs) - len(slots))
    for i, z in zip(slots, zs, strict=False):
        previous = results[i]
        if previous is not None and abs(previous.z - z) <= 1e-8 * max(1.0, abs(z)):
            continue
        residual = _safe_psi(z, graph, alpha, tol)
        results[i] = _result(
            entries[i],
            alpha,
            z,
            abs(residual) if residual is not None else math.nan,
            False,
            None,
            LocateMethod.BLOCK,
        )


def _principal_root(lam: complex) -> complex:
    z = cmath.sqrt(lam)
    return -z if z.real < 0 else z


def _solve_entry(
    entry: KirchhoffEigenvalue,
    graph: StarGraph,
    alpha: complex,
    params: VerificationParams,
    tol: Tolerances,
) -> RobinEigenvalue | None:
    try:
        return robin_eigenvalue(graph, alpha, entry, params, tol)
    except NewtonDiverged:
        # left for the low-block solver
        return None
    except StarSpecError as exc:
        raise exc.with_index(entry.index) from None


def robin_spectrum(
    graph: StarGraph,
    alpha: complex,
    R: float,
    params: VerificationParams | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    kirchhoff: Spectrum | None = None,
    jobs: int = 1,
) -> Spectrum:
    """One Robin eigenvalue per Kirchhoff entry in (0, R], in the same index order."""
    alpha = complex(alpha)
    params = params or VerificationParams.for_graph(graph)
    base = kirchhoff if kirchhoff is not None else kirchhoff_spectrum(graph, R, tol, jobs)
    task = partial(_solve_entry, graph=graph, alpha=alpha, params=params, tol=tol)

    entries: list[KirchhoffEigenvalue] = list(base)
    results: list[RobinEigenvalue | None] = run_tasks(task, entries, jobs)
    if alpha == 0:
        return Spectrum(entries=results, graph=graph, covered_to=base.covered_to)

    # sentinel entries above the range until a certified eigenvalue closes the block
    step = 2.0 * math.pi / min(graph.lengths)
    reach = base.covered_to + step
    limit = 4.0 * max(base.covered_to, abs(alpha) / params.gamma0) + 2.0 * step
    split = _block_split(entries, results) if entries else (0, 0.0)
    while split is None:
        if reach > limit:
            raise NewtonDiverged(
                f"no certified eigenvalue up to τ={reach:.6g}", index=len(base) + 1
            )
        extra = list(kirchhoff_spectrum(graph, reach, tol, jobs))[len(entries) :]
        entries.extend(extra)
        results.extend(run_tasks(task, extra, jobs))
        split = _block_split(entries, results)
        reach *= 2.0

    size, top = split
    if size > 0:
        _resolve_block(graph, alpha, entries, results, size, top, params, tol)

    missing = [e.index for e, r in zip(entries, results, strict=True) if r is None]
    if missing:
        raise NewtonDiverged("eigenvalue could not be located", index=missing[0])
    out = results[: len(base)]
    logger.debug(
        "robin_spectrum_done",
        count=len(out),
        onset=certification_onset(out),
        block=size,
    )
    return Spectrum(entries=out, graph=graph, covered_to=base.covered_to)


# --- eigenfunctions ---


def eigenfunction_coefficients(
    graph: StarGraph,
    alpha: complex,
    rob: RobinEigenvalue,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> EigenfunctionCoefficients:
    """β_j = 1/sin(zℓ_j), normalized by u(v) = 1, with the closed-form L² norm."""
    if rob.kind == EigenClass.COINCIDENT:
        raise CoincidentEigenfunction(
            "u(v) = 0 on a coincident eigenspace; β is not fixed by u(v) = 1",
            index=rob.index,
        )
    z = complex(rob.z)
    ell = graph.ell
    sines = np.sin(z * ell)
    beta = 1.0 / sines
    residual = abs(z * np.sum(beta * np.cos(z * ell)) + complex(alpha))

    tau, eta = z.real, z.imag
    oscillating = np.sin(2.0 * tau * ell) / (4.0 * tau)
    if abs(eta) < tol.eta_limit:
        growth = ell / 2.0
    else:
        growth = np.sinh(2.0 * eta * ell) / (4.0 * eta)
    norm = float(np.sum(np.abs(beta) ** 2 * (growth - oscillating)))
    return EigenfunctionCoefficients(
        beta=tuple(complex(b) for b in beta),
        l2_norm_sq=norm,
        kirchhoff_residual=float(residual),
    )


# --- reports ---


def spectral_checks(
    robin: Sequence[RobinEigenvalue], graph: StarGraph, alpha: complex
) -> SpectralReport:
    """Sign, strip, sector and shift-versus-gap diagnostics over a computed spectrum."""
    if not robin:
        raise SpectrumTooShort("spectral checks need at least one eigenvalue")
    alpha = complex(alpha)
    lam = np.array([r.eigenvalue for r in robin], dtype=complex)
    delta = np.array([r.delta for r in robin], dtype=complex)

    if alpha.imag != 0:
        wrong_side = np.sign(lam.imag) != np.sign(alpha.imag)
        sign_violations = int(np.sum(wrong_side & (np.abs(lam.imag) > SIGN_TOL)))
    else:
        sign_violations = int(np.sum(np.abs(lam.imag) > SIGN_TOL))

    top_half = lam[len(lam) // 2 :]
    a2 = abs(alpha) ** 2
    slack = 1e-9 * np.maximum(1.0, np.abs(lam))
    outside = (lam.real < -2.0 * a2 - slack) | (np.abs(lam.imag) > lam.real + 4.0 * a2 + slack)

    onset = certification_onset(robin)
    indices = np.array([r.index for r in robin])
    above = indices >= onset if onset is not None else np.zeros(len(robin), dtype=bool)
    too_far = np.abs(delta) > eigenvalue_gaps(robin)

    ratio = None
    if alpha != 0:
        ratio = float(np.max(np.abs((delta / alpha).imag)))

    return SpectralReport(
        count=len(robin),
        sign_violations=sign_violations,
        max_im_top_half=float(np.max(np.abs(top_half.imag))),
        strip_bound=2.0 * abs(alpha.imag) / graph.total_length,
        sector_violations=int(np.sum(outside)),
        max_abs_delta=float(np.max(np.abs(delta))),
        gap_violations_above_onset=int(np.sum(too_far & above)),
        gap_violations_below_onset=int(np.sum(too_far & ~above)),
        certification_onset=onset,
        max_im_delta_over_alpha=ratio,
    )
