"""Command-line entrypoint: ``starspec spectrum | robin | measure | weyl | dioph | verify``."""

import argparse
import sys
import time
from collections.abc import Callable
from pathlib import Path

import numpy as np
import scipy
import structlog

from starspec import __version__
from starspec.config import RunConfig, Settings, load_run_config, parse_alpha, validate_run_config
from starspec.diophantine import diophantine_quality, small_rho_subsequence, targeted_subsequence
from starspec.errors import InvalidConfig, RationalityUndeclared, StarSpecError
from starspec.graph import from_declaration
from starspec.kirchhoff import kirchhoff_spectrum, range_for_count, truncate, weyl_windows
from starspec.logging import setup_logging
from starspec.measure import (
    compare_atoms,
    empirical_delta_distribution,
    ks_distance,
    levy_distance,
    limit_average,
    quadrature_measure,
    rational_atoms,
    singular_fraction,
    test_function_average,
    wasserstein1,
)
from starspec.models import (
    LatticeQuality,
    MeasureComparison,
    MeasureEstimate,
    Rationality,
    RunManifest,
    Spectrum,
    StarGraph,
    VerificationParams,
)
from starspec.parallel import default_jobs
from starspec.plotting import plot_measure
from starspec.robin import robin_spectrum, spectral_checks
from starspec.storage import ResultStorage, SpectrumCache, compute_hash, graph_hash
from starspec.verify import run_invariant_suite

logger = structlog.get_logger()


class Run:
    """Everything a command needs: the validated config, its graph and the output sink."""

    def __init__(self, command: str, config: RunConfig, settings: Settings, jobs: int) -> None:
        self.command = command
        self.config = config
        self.settings = settings
        self.jobs = jobs
        self.graph: StarGraph = from_declaration(config.graph)
        self.alpha = config.alpha_value
        self.tol = config.tolerances
        self.storage = ResultStorage(config.output_dir, graph_hash(self.graph), self.tol)

    @property
    def R(self) -> float:
        if self.config.R is not None:
            return self.config.R
        return range_for_count(self.graph, self.config.n_max)

    @property
    def n_max(self) -> int:
        if self.config.n_max is not None:
            return self.config.n_max
        return max(1, round(self.graph.total_length * self.config.R / np.pi))

    def kirchhoff(self) -> Spectrum:
        cache = SpectrumCache(self.settings.cache_dir)
        R = self.R
        spectrum = cache.load(self.graph, R, self.tol)
        if spectrum is None:
            spectrum = kirchhoff_spectrum(self.graph, R, self.tol, self.jobs)
            cache.save(spectrum, R, self.tol)
        if self.config.n_max is not None:
            spectrum = truncate(spectrum, self.config.n_max)
        return spectrum

    def robin(self, kirchhoff: Spectrum) -> Spectrum:
        params = VerificationParams.for_graph(
            self.graph,
            contour_nodes=self.tol.contour_nodes,
            contour_max_nodes=self.tol.contour_max_nodes,
            newton_tol=self.tol.robin_newton_tol,
            newton_max_iter=self.tol.robin_newton_max_iter,
        )
        return robin_spectrum(
            self.graph,
            self.alpha,
            kirchhoff.covered_to,
            params,
            self.tol,
            kirchhoff=kirchhoff,
            jobs=self.jobs,
        )

    def finish(self) -> list[Path]:
        manifest = RunManifest(
            command=self.command,
            starspec_version=__version__,
            numpy_version=np.__version__,
            scipy_version=scipy.__version__,
            graph_hash=self.storage.graph_hash,
            config_hash=compute_hash(self.config),
            tolerances=self.tol.model_dump(),
            seed=self.config.seed,
            files=list(self.storage.files),
        )
        self.storage.write_json("manifest.json", manifest)
        return [self.storage.output_dir / name for name in self.storage.files]


# --- commands ---


def cmd_spectrum(run: Run) -> int:
    kirchhoff = run.kirchhoff()
    run.storage.write_kirchhoff(kirchhoff)
    run.storage.write_robin(run.robin(kirchhoff))
    return 0


def cmd_robin(run: Run) -> int:
    kirchhoff = run.kirchhoff()
    robin = run.robin(kirchhoff)
    run.storage.write_robin(robin)
    if robin:
        run.storage.write_json("robin_checks.json", spectral_checks(robin, run.graph, run.alpha))
    return 0


def _reference(run: Run) -> MeasureEstimate | None:
    cfg = run.config
    if run.graph.rationality == Rationality.RATIONAL:
        atoms = rational_atoms(run.graph, run.tol)
        run.storage.write_measure("measure_atoms.csv", atoms)
        return atoms
    if run.graph.rationality == Rationality.INDEPENDENT:
        quad = quadrature_measure(run.graph, cfg.samples, cfg.bins, cfg.seed, run.tol, run.jobs)
        run.storage.write_measure("measure_quadrature.csv", quad)
        return quad
    return None


def cmd_measure(run: Run) -> int:
    cfg = run.config
    reference = _reference(run)
    kirchhoff = run.kirchhoff() if run.alpha != 0 else None
    empirical = None
    if kirchhoff is not None:
        empirical = empirical_delta_distribution(
            run.robin(kirchhoff), run.alpha, cfg.bins, run.graph
        )
        run.storage.write_measure("measure_empirical.csv", empirical)
    if reference is None and empirical is None:
        raise RationalityUndeclared(
            "measure needs declared rational or independent lengths, or α ≠ 0"
        )

    comparison = MeasureComparison()
    if reference is not None and empirical is not None:
        comparison.ks = ks_distance(empirical, reference)
        comparison.wasserstein1 = wasserstein1(empirical, reference)
        comparison.levy = levy_distance(empirical, reference)
        if reference.atoms:
            comparison.max_atom_error = compare_atoms(empirical, reference, run.alpha)
        comparison.mean_shift = test_function_average(empirical.deltas, lambda d: d)
        comparison.limit_mean_shift = limit_average(reference, run.alpha, lambda d: d)
    if kirchhoff is not None and run.graph.rationality == Rationality.INDEPENDENT:
        comparison.singular_fractions = {
            format(eps, "g"): singular_fraction(run.graph, kirchhoff, eps)
            for eps in cfg.singular_eps
        }
    run.storage.write_json("measure_comparison.json", comparison)

    shown, overlay = (empirical, reference) if empirical is not None else (reference, None)
    plot_measure(shown, run.storage.output_dir / "measure.svg", overlay=overlay)
    run.storage.record("measure.svg")
    return 0


def cmd_weyl(run: Run) -> int:
    windows = run.config.weyl_windows
    kirchhoff = run.kirchhoff()
    report = weyl_windows(kirchhoff, windows, run.config.seed)
    run.storage.write_weyl("weyl.csv", report)
    run.storage.write_json("weyl.json", report)
    logger.info("weyl_defect", max_abs_defect=report.max_abs_defect)
    if run.alpha != 0:
        robin = run.robin(kirchhoff)
        shifted = weyl_windows(robin, windows, run.config.seed)
        run.storage.write_weyl("weyl_robin.csv", shifted)
        run.storage.write_json("weyl_robin.json", shifted)
    return 0


def _write_quality(run: Run) -> None:
    cfg = run.config
    value = diophantine_quality(run.graph, cfg.gamma, cfg.kappa_norm_max)
    quality = LatticeQuality(gamma=cfg.gamma, kappa_norm_max=cfg.kappa_norm_max, value=value)
    run.storage.write_json("lattice_quality.json", quality)


def cmd_smallrho(run: Run) -> int:
    cfg = run.config
    report = small_rho_subsequence(
        run.graph,
        cfg.edge_pair,
        run.alpha,
        cfg.k_max,
        R=cfg.R,
        tol=run.tol,
        jobs=run.jobs,
    )
    run.storage.write_subsequence("smallrho.csv", report)
    run.storage.write_json("smallrho.json", report)
    _write_quality(run)
    return 0


def cmd_target(run: Run) -> int:
    cfg = run.config
    if cfg.target_s is None:
        raise InvalidConfig("the target command needs --s or target_s in the config")
    report = targeted_subsequence(
        run.graph, run.alpha, cfg.target_s, run.n_max, cfg.eps_fit, tol=run.tol, jobs=run.jobs
    )
    run.storage.write_subsequence("target.csv", report)
    run.storage.write_json("target.json", report)
    _write_quality(run)
    return 0


def cmd_verify(run: Run) -> int:
    cfg = run.config
    results = run_invariant_suite(
        run.graph, run.alpha, run.R, run.tol, cfg.samples, cfg.seed, run.jobs
    )
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS: dict[str, Callable[[Run], int]] = {
    "spectrum": cmd_spectrum,
    "robin": cmd_robin,
    "measure": cmd_measure,
    "weyl": cmd_weyl,
    "smallrho": cmd_smallrho,
    "target": cmd_target,
    "verify": cmd_verify,
}


# --- argument handling ---


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run config (YAML or JSON)")
    common.add_argument("--lengths", help="comma-separated edge lengths")
    common.add_argument(
        "--rationality", choices=[r.value for r in Rationality], help="declared rationality"
    )
    common.add_argument("--alpha", help="Robin coupling RE,IM")
    span = common.add_mutually_exclusive_group()
    span.add_argument("--R", type=float, dest="R", help="spectral cutoff for τ")
    span.add_argument("--n-max", type=int, dest="n_max", help="number of eigenvalues")
    common.add_argument("--bins", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    common.add_argument("--out", type=Path, dest="output_dir", help="output directory")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="starspec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"starspec {__version__}")
    common = _common_flags()
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("spectrum", "Kirchhoff and Robin spectra as CSV"),
        ("robin", "Robin spectrum with sign, sector and gap checks"),
        ("measure", "limit measure estimates and their distances"),
        ("weyl", "windowed Weyl-law defects"),
        ("verify", "run the invariant suite"),
    ):
        commands.add_parser(name, parents=[common], help=help_text)

    dioph = commands.add_parser("dioph", help="Diophantine subsequences")
    kinds = dioph.add_subparsers(dest="dioph_command", required=True)
    kinds.add_parser("smallrho", parents=[common], help="convergent-driven small shifts")
    target = kinds.add_parser("target", parents=[common], help="shifts approaching s·α")
    target.add_argument("--s", type=float, dest="target_s", help="target s in [0, 2/|Γ|]")
    return parser


_OVERRIDES = ("R", "n_max", "bins", "samples", "seed", "output_dir", "target_s")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (if any) with command-line flags applied on top."""
    overrides: dict = {
        key: getattr(args, key) for key in _OVERRIDES if getattr(args, key, None) is not None
    }
    if args.alpha is not None:
        overrides["alpha"] = parse_alpha(args.alpha)
    if args.lengths is not None:
        try:
            lengths = [float(x) for x in args.lengths.split(",")]
        except ValueError as exc:
            raise InvalidConfig(f"lengths must be numeric, got {args.lengths!r}") from exc
        overrides["graph"] = {
            "lengths": lengths,
            "rationality": args.rationality or Rationality.UNSPECIFIED.value,
        }
    elif args.rationality is not None and args.config is None:
        raise InvalidConfig("--rationality needs --lengths")

    if args.config is not None:
        config = load_run_config(args.config, overrides)
        if args.rationality is not None and args.lengths is None:
            graph = config.graph.model_copy(update={"rationality": args.rationality})
            config = config.model_copy(update={"graph": graph})
        return config
    if "graph" not in overrides:
        raise InvalidConfig("give --config or --lengths")
    return validate_run_config(overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings()
    setup_logging(level=settings.log_level, fmt=settings.log_format)
    name = args.dioph_command if args.command == "dioph" else args.command
    jobs = args.jobs or settings.jobs or default_jobs()

    started = time.perf_counter()
    try:
        run = Run(name, resolve_config(args), settings, jobs)
        status = COMMANDS[name](run)
        if name != "verify":
            run.finish()
    except StarSpecError as exc:
        logger.debug("command_failed", command=name, error=type(exc).__name__)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    logger.info("command_done", command=name, seconds=round(time.perf_counter() - started, 3))
    return status


if __name__ == "__main__":
    sys.exit(main())
