"""Invariant suite run by ``starspec verify`` on a configured graph."""

import math
from collections.abc import Callable
from fractions import Fraction

import numpy as np
import structlog

from starspec.config import DEFAULT_TOLERANCES, Tolerances
from starspec.diophantine import bracketed_entry, continued_fraction
from starspec.errors import StarSpecError
from starspec.graph import dirichlet_arrays
from starspec.kirchhoff import kirchhoff_spectrum, weyl_windows
from starspec.measure import quadrature_measure, rational_atoms
from starspec.models import (
    CheckResult,
    EigenClass,
    Rationality,
    Spectrum,
    StarGraph,
    VerificationParams,
)
from starspec.robin import robin_spectrum, spectral_checks
from starspec.secular import eval_FD, eval_FN, eval_Psi, psi_sign

logger = structlog.get_logger()

Check = Callable[[], tuple[bool, str]]


def _run(name: str, check: Check) -> CheckResult:
    try:
        passed, detail = check()
    except StarSpecError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    logger.debug("invariant_checked", name=name, passed=passed)
    return CheckResult(name=name, passed=passed, detail=detail)


def _dirichlet_count(graph: StarGraph, R: float, tol: Tolerances) -> tuple[bool, str]:
    _, mult, _ = dirichlet_arrays(graph, R, tol)
    expected = sum(math.floor(R * ell / math.pi) for ell in graph.lengths)
    return int(np.sum(mult)) == expected, f"{int(np.sum(mult))} of {expected} edge points"


def _secular_identity(graph: StarGraph, seed: int, tol: Tolerances) -> tuple[bool, str]:
    # Ψ = −F_N/F_D and its sign agrees with −sign(F_N·F_D)
    rng = np.random.default_rng(seed)
    tau = rng.uniform(0.5, 50.0, size=200)
    y = tau[:, None] * graph.ell
    ratio = -eval_FN(y) / eval_FD(y)
    psi = eval_Psi(y, tol)
    worst = float(np.max(np.abs(psi - ratio) / np.maximum(1.0, np.abs(psi))))
    signs = bool(np.all(psi_sign(tau, graph) == np.sign(psi)))
    return worst < 1e-8 and signs, f"max relative gap {worst:.2e}"


def _interlacing(graph: StarGraph, spectrum: Spectrum, tol: Tolerances) -> tuple[bool, str]:
    walls, _, _ = dirichlet_arrays(graph, spectrum.covered_to, tol)
    walls = np.concatenate(([0.0], walls))
    regular = np.array([e.tau for e in spectrum if e.kind == EigenClass.REGULAR])
    per = np.histogram(regular, bins=np.concatenate((walls, [np.inf])))[0]
    # the last component may end beyond the range
    bad = int(np.sum(per[:-1] != 1)) + int(per[-1] > 1)
    return bad == 0, f"{bad} components without exactly one regular root"


def _weyl(spectrum: Spectrum, seed: int) -> tuple[bool, str]:
    report = weyl_windows(spectrum, 200, seed)
    # N(τ) − |Γ|τ/π lies in (−N, 1]
    bound = spectrum.graph.n_edges + 1
    return report.max_abs_defect <= bound, f"max |defect| {report.max_abs_defect:.3f}"


def _robin(
    graph: StarGraph, alpha: complex, kirchhoff: Spectrum, tol: Tolerances, jobs: int
) -> tuple[bool, str]:
    params = VerificationParams.for_graph(graph)
    robin = robin_spectrum(
        graph, alpha, kirchhoff.covered_to, params, tol, kirchhoff=kirchhoff, jobs=jobs
    )
    report = spectral_checks(robin, graph, alpha)
    outside = [
        r.index
        for r in robin
        if r.certified
        and r.kind == EigenClass.REGULAR
        and abs(r.z - r.tau) > 8.0 * abs(alpha) * r.rho / r.tau * (1.0 + 1e-6)
    ]
    passed = (
        report.sign_violations == 0
        and report.sector_violations == 0
        and report.gap_violations_above_onset == 0
        and not outside
    )
    detail = (
        f"sign {report.sign_violations}, sector {report.sector_violations}, "
        f"gap above onset {report.gap_violations_above_onset}, disk {len(outside)}, "
        f"onset {report.certification_onset}"
    )
    return passed, detail


def _atoms(graph: StarGraph, tol: Tolerances) -> tuple[bool, str]:
    estimate = rational_atoms(graph, tol)
    total = sum((Fraction(a.exact_mass) for a in estimate.atoms), Fraction(0))
    has_zero = any(a.s == 0.0 for a in estimate.atoms)
    return total == 1 and has_zero, f"{len(estimate.atoms)} atoms, total {total}"


def _quadrature(
    graph: StarGraph, samples: int, seed: int, tol: Tolerances, jobs: int
) -> tuple[bool, str]:
    estimate = quadrature_measure(graph, samples, 64, seed, tol, jobs)
    slack = 3.0 * estimate.mc_stderr + 1e-9
    return abs(estimate.total_mass - 1.0) <= slack, (
        f"total {estimate.total_mass:.6f} ± {estimate.mc_stderr:.2e}"
    )


def _convergents(graph: StarGraph, kirchhoff: Spectrum) -> tuple[bool, str]:
    li, lj = graph.lengths[0], graph.lengths[1]
    cf = continued_fraction(li / lj, 8)
    quality = all(abs(li / lj - p / q) <= 1.0 / q**2 for p, q in cf.convergents)
    placed = 0
    for p, q in cf.convergents:
        lo, hi = sorted((math.pi * q / lj, math.pi * p / li))
        if hi > kirchhoff.covered_to:
            break
        entry = bracketed_entry(kirchhoff, lo, hi)
        placed += int(lo < entry.tau < hi)
    return quality, f"{len(cf.convergents)} convergents, {placed} bracketed eigenvalues"


def run_invariant_suite(
    graph: StarGraph,
    alpha: complex,
    R: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    samples: int = 20_000,
    seed: int = 0,
    jobs: int = 1,
) -> list[CheckResult]:
    """Every check applicable to the graph's rationality, in a fixed order."""
    alpha = complex(alpha)
    kirchhoff = kirchhoff_spectrum(graph, R, tol, jobs)
    results = [
        _run("dirichlet_count", lambda: _dirichlet_count(graph, R, tol)),
        _run("secular_identity", lambda: _secular_identity(graph, seed, tol)),
        _run("interlacing", lambda: _interlacing(graph, kirchhoff, tol)),
        _run("weyl_defect", lambda: _weyl(kirchhoff, seed)),
        _run("robin_checks", lambda: _robin(graph, alpha, kirchhoff, tol, jobs)),
    ]
    if graph.rationality == Rationality.RATIONAL:
        results.append(_run("rational_atoms", lambda: _atoms(graph, tol)))
    if graph.rationality == Rationality.INDEPENDENT:
        results.append(
            _run("quadrature_mass", lambda: _quadrature(graph, samples, seed, tol, jobs))
        )
        results.append(_run("convergents", lambda: _convergents(graph, kirchhoff)))
    return results
