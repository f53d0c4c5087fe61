"""Result files: CSV tables, JSON documents and the on-disk Kirchhoff spectrum cache."""

import csv
import hashlib
import io
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
import structlog
from pydantic import BaseModel

from starspec.config import Tolerances
from starspec.models import (
    EigenClass,
    KirchhoffEigenvalue,
    MeasureEstimate,
    MeasureKind,
    RobinEigenvalue,
    Spectrum,
    StarGraph,
    SubsequenceReport,
    WeylReport,
)

logger = structlog.get_logger()

KIRCHHOFF_COLUMNS = ("n", "tau", "class", "dirichlet_multiplicity", "rho")
ROBIN_COLUMNS = (
    "n",
    "class",
    "re_z",
    "im_z",
    "re_lambda",
    "im_lambda",
    "re_delta",
    "im_delta",
    "residual",
    "certified",
)
SUBSEQUENCE_COLUMNS = ("k", "n_k", "tau", "re_delta", "im_delta", "dist_to_target", "window")


def compute_hash(model: BaseModel) -> str:
    """Short SHA-256 of a model's JSON form, for file names and manifests."""
    raw = model.model_dump_json()
    return hashlib.sha256(raw.encode()).hexdigest()[:16]


def graph_hash(graph: StarGraph) -> str:
    """Hash of the declaration when there is one, else of the graph itself."""
    if graph.declaration is not None:
        return compute_hash(graph.declaration)
    return compute_hash(graph)


def fmt(value: float | int | None) -> str:
    """17 significant digits, round-trip exact; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool | int | np.integer):
        return str(int(value))
    return format(float(value), ".17g")


def _csv_text(comments: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    for line in comments:
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def kirchhoff_rows(spectrum: Iterable[KirchhoffEigenvalue]) -> list[list[str]]:
    return [
        [str(e.index), fmt(e.tau), e.kind.value, fmt(e.dirichlet_multiplicity), fmt(e.rho)]
        for e in spectrum
    ]


def robin_rows(robin: Iterable[RobinEigenvalue]) -> list[list[str]]:
    return [
        [
            str(r.index),
            r.kind.value,
            fmt(r.z.real),
            fmt(r.z.imag),
            fmt(r.eigenvalue.real),
            fmt(r.eigenvalue.imag),
            fmt(r.delta.real),
            fmt(r.delta.imag),
            fmt(r.residual),
            "true" if r.certified else "false",
        ]
        for r in robin
    ]


class ResultStorage:
    """Writes every artifact of one run under ``output_dir`` and remembers the file names."""

    def __init__(self, output_dir: Path, graph_hash: str, tolerances: Tolerances) -> None:
        self.output_dir = output_dir
        self.graph_hash = graph_hash
        self.tolerances = tolerances
        self.files: list[str] = []

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _comments(self) -> list[str]:
        return [f"graph_hash={self.graph_hash}", f"tolerances={self.tolerances.model_dump_json()}"]

    def _write(self, name: str, text: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(name)
        path.write_text(text)
        self.record(name)
        logger.debug("result_written", path=str(path))
        return path

    def record(self, name: str) -> None:
        """Add a file written by another emitter to the run's file list."""
        if name not in self.files:
            self.files.append(name)

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
        return self._write(name, _csv_text(self._comments(), columns, rows))

    def write_json(self, name: str, model: BaseModel) -> Path:
        return self._write(name, model.model_dump_json(indent=2) + "\n")

    def write_kirchhoff(self, spectrum: Iterable[KirchhoffEigenvalue]) -> Path:
        return self.write_csv("kirchhoff.csv", KIRCHHOFF_COLUMNS, kirchhoff_rows(spectrum))

    def write_robin(self, robin: Iterable[RobinEigenvalue]) -> Path:
        return self.write_csv("robin.csv", ROBIN_COLUMNS, robin_rows(robin))

    def write_measure(self, name: str, estimate: MeasureEstimate) -> Path:
        if estimate.kind == MeasureKind.ATOMS:
            rows = [[fmt(a.s), fmt(a.mass)] for a in estimate.atoms]
            return self.write_csv(name, ("s", "mass"), rows)
        edges = estimate.bin_edges
        rows = [
            [fmt(edges[i]), fmt(edges[i + 1]), fmt(m)] for i, m in enumerate(estimate.masses)
        ]
        return self.write_csv(name, ("bin_left", "bin_right", "mass"), rows)

    def write_subsequence(self, name: str, report: SubsequenceReport) -> Path:
        rows = [
            [
                str(h.k),
                str(h.n),
                fmt(h.tau),
                fmt(h.delta.real),
                fmt(h.delta.imag),
                fmt(h.distance),
                str(h.window),
            ]
            for h in report.hits
        ]
        return self.write_csv(name, SUBSEQUENCE_COLUMNS, rows)

    def write_weyl(self, name: str, report: WeylReport) -> Path:
        rows = [[fmt(w.r1), fmt(w.r2), str(w.count), fmt(w.defect)] for w in report.windows]
        return self.write_csv(name, ("r1", "r2", "count", "defect"), rows)


class SpectrumCache:
    """Kirchhoff spectra keyed by graph hash, tolerance hash and range."""

    def __init__(self, cache_dir: Path) -> None:
        self.cache_dir = cache_dir

    def _path(self, graph: StarGraph, R: float, tolerances: Tolerances) -> Path:
        name = f"{graph_hash(graph)}-{compute_hash(tolerances)}-{fmt(R)}.csv"
        return self.cache_dir / name

    def save(self, spectrum: Spectrum, R: float, tolerances: Tolerances) -> Path:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self._path(spectrum.graph, R, tolerances)
        comments = [
            f"graph_hash={graph_hash(spectrum.graph)}",
            f"tolerances={tolerances.model_dump_json()}",
            f"covered_to={fmt(spectrum.covered_to)}",
        ]
        path.write_text(_csv_text(comments, KIRCHHOFF_COLUMNS, kirchhoff_rows(spectrum)))
        return path

    def load(self, graph: StarGraph, R: float, tolerances: Tolerances) -> Spectrum | None:
        path = self._path(graph, R, tolerances)
        if not path.exists():
            return None
        lines = path.read_text().splitlines()
        meta = dict(
            line[2:].split("=", 1) for line in lines if line.startswith("# ") and "=" in line
        )
        if meta.get("graph_hash") != graph_hash(graph):
            return None
        ell = graph.ell
        entries = []
        for row in csv.DictReader(line for line in lines if not line.startswith("#")):
            tau = float(row["tau"])
            entries.append(
                KirchhoffEigenvalue(
                    index=int(row["n"]),
                    tau=tau,
                    kind=EigenClass(row["class"]),
                    dirichlet_multiplicity=int(row["dirichlet_multiplicity"])
                    if row["dirichlet_multiplicity"]
                    else None,
                    rho=float(row["rho"]) if row["rho"] else None,
                    torus_point=tuple(np.mod(tau * ell, 2.0 * math.pi).tolist()),
                )
            )
        logger.info("spectrum_cache_hit", path=str(path), count=len(entries))
        return Spectrum(entries=entries, graph=graph, covered_to=float(meta.get("covered_to", R)))
