"""Pydantic models for starspec."""

import math
from collections.abc import Iterator

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11: backport with the 3.11 str()/format() semantics
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field


class Rationality(StrEnum):
    INDEPENDENT = "independent"
    RATIONAL = "rational"
    UNSPECIFIED = "unspecified"


class EigenClass(StrEnum):
    REGULAR = "regular"
    COINCIDENT = "coincident"


class MeasureKind(StrEnum):
    ATOMS = "atoms"
    HISTOGRAM = "histogram"


class LocateMethod(StrEnum):
    EXACT = "exact"
    NEWTON = "newton"
    DAMPED = "damped"
    CONTOUR = "contour"
    BLOCK = "block"


# --- Graph ---


class RationalDeclaration(BaseModel):
    """Lengths c·p_j/q_j with c given as a decimal string."""

    model_config = ConfigDict(frozen=True)

    base: str
    fractions: tuple[tuple[int, int], ...]


class StarGraph(BaseModel):
    model_config = ConfigDict(frozen=True)

    lengths: tuple[float, ...]
    rationality: Rationality = Rationality.UNSPECIFIED
    declaration: RationalDeclaration | None = None
    total_length: float

    @property
    def n_edges(self) -> int:
        return len(self.lengths)

    @property
    def ell(self) -> np.ndarray:
        return np.asarray(self.lengths, dtype=float)

    @property
    def support_max(self) -> float:
        """Right end 2/|Γ| of the limit-measure support."""
        return 2.0 / self.total_length


class DirichletPoint(BaseModel):
    tau: float
    multiplicity: int = Field(ge=1)
    member_edges: tuple[int, ...]


class RationalRank(BaseModel):
    rank: int
    period: float | None = None
    # P = π·period_factor/c as an exact fraction string
    period_factor: str | None = None


# --- Secular kernel ---


class SecularPoint(BaseModel):
    y: tuple[float, ...]
    f_n: float
    f_d: float
    psi: float | None = None


# --- Kirchhoff spectrum ---


class KirchhoffEigenvalue(BaseModel):
    index: int = Field(ge=1)
    tau: float
    kind: EigenClass
    dirichlet_multiplicity: int | None = None
    rho: float | None = None
    torus_point: tuple[float, ...]

    @computed_field
    @property
    def eigenvalue(self) -> float:
        return self.tau * self.tau


# --- Robin spectrum ---


class VerificationParams(BaseModel):
    gamma0: float
    contour_nodes: int = 256
    contour_max_nodes: int = 4096
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    @classmethod
    def for_graph(cls, graph: StarGraph, **overrides) -> "VerificationParams":
        return cls(gamma0=1.0 / (16.0 * math.e * graph.n_edges), **overrides)


class RobinEigenvalue(BaseModel):
    index: int = Field(ge=1)
    alpha: complex
    tau: float
    z: complex
    eigenvalue: complex
    delta: complex
    residual: float = 0.0
    certified: bool = False
    winding: int | None = None
    kind: EigenClass
    rho: float | None = None
    method: LocateMethod = LocateMethod.NEWTON


class Spectrum(BaseModel):
    """Index-ordered eigenvalue entries with the graph and the range (0, covered_to] they span."""

    entries: list[KirchhoffEigenvalue | RobinEigenvalue]
    graph: StarGraph
    covered_to: float

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(  # type: ignore[override]
        self,
    ) -> Iterator[KirchhoffEigenvalue | RobinEigenvalue]:
        return iter(self.entries)

    def __getitem__(self, item):
        return self.entries[item]


class EigenfunctionCoefficients(BaseModel):
    beta: tuple[complex, ...]
    l2_norm_sq: float
    kirchhoff_residual: float


class SpectralReport(BaseModel):
    count: int
    sign_violations: int
    max_im_top_half: float
    strip_bound: float
    sector_violations: int
    max_abs_delta: float
    gap_violations_above_onset: int
    gap_violations_below_onset: int
    certification_onset: int | None = None
    max_im_delta_over_alpha: float | None = None


# --- Limit measure ---


class Atom(BaseModel):
    s: float
    mass: float
    exact_mass: str | None = None


class MeasureEstimate(BaseModel):
    kind: MeasureKind
    support_max: float
    atoms: tuple[Atom, ...] = ()
    bin_edges: tuple[float, ...] = ()
    masses: tuple[float, ...] = ()
    total_mass: float
    mc_stderr: float = 0.0
    pole_resamples: int = 0
    deltas: tuple[complex, ...] = ()
    max_im_ratio: float | None = None

    def locations(self) -> np.ndarray:
        """Atom locations or bin midpoints."""
        if self.kind == MeasureKind.ATOMS:
            return np.array([a.s for a in self.atoms], dtype=float)
        edges = np.asarray(self.bin_edges, dtype=float)
        return 0.5 * (edges[:-1] + edges[1:])

    def weights(self) -> np.ndarray:
        if self.kind == MeasureKind.ATOMS:
            return np.array([a.mass for a in self.atoms], dtype=float)
        return np.asarray(self.masses, dtype=float)


class MeasureComparison(BaseModel):
    """Distances between the estimates emitted by one measure run."""

    ks: float | None = None
    wasserstein1: float | None = None
    levy: float | None = None
    max_atom_error: float | None = None
    mean_shift: complex | None = None
    limit_mean_shift: complex | None = None
    singular_fractions: dict[str, float] = Field(default_factory=dict)


class TorusSample(BaseModel):
    y_rest: tuple[float, ...]
    branch_roots: tuple[float, float]
    weights: tuple[float, float]


# --- Diophantine ---


class LatticeQuality(BaseModel):
    gamma: float
    kappa_norm_max: int
    value: float


class ConvergentSequence(BaseModel):
    x: float
    convergents: tuple[tuple[int, int], ...]
    terminated: bool = False


class SubsequenceHit(BaseModel):
    k: int
    n: int
    tau: float
    delta: complex
    distance: float
    window: int


class SubsequenceReport(BaseModel):
    target: complex
    hits: tuple[SubsequenceHit, ...] = ()
    rate_exponent: float | None = None
    bound_constant: float = 0.0
    truncated: bool = False
    windows_total: int = 0
    windows_hit: int = 0
    flagged_windows: tuple[int, ...] = ()

    @computed_field
    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(h.n for h in self.hits)

    @computed_field
    @property
    def values(self) -> tuple[complex, ...]:
        return tuple(h.delta for h in self.hits)

    @computed_field
    @property
    def hit_ratio(self) -> float:
        if self.windows_total == 0:
            return 0.0
        return self.windows_hit / self.windows_total


# --- Weyl law ---


class WeylWindow(BaseModel):
    r1: float
    r2: float
    count: int
    defect: float


class WeylReport(BaseModel):
    windows: tuple[WeylWindow, ...]
    max_abs_defect: float


# --- Verification / run artifacts ---


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class RunManifest(BaseModel):
    command: str
    starspec_version: str
    numpy_version: str
    scipy_version: str
    graph_hash: str
    config_hash: str
    tolerances: dict[str, float | int]
    seed: int
    files: list[str] = Field(default_factory=list)
