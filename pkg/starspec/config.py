"""Application configuration via pydantic-settings, plus run configs loaded from YAML/JSON."""

from pathlib import Path

import yaml
from pydantic import BaseModel, Field, PositiveFloat, PositiveInt, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from starspec.errors import ConfigNotFound, InvalidConfig


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="STARSPEC_")

    cache_dir: Path = Path(".starspec-cache")
    log_level: str = "info"
    log_format: str = "console"
    jobs: int | None = None


class Tolerances(BaseModel):
    """Every numeric knob the solvers use. Overrides must stay positive."""

    pole_tol: PositiveFloat = 1e-13
    imag_guard: PositiveFloat = 50.0
    merge_rtol: PositiveFloat = 1e-10
    bisect_width: PositiveFloat = 1e-6
    kirchhoff_newton_tol: PositiveFloat = 1e-12
    kirchhoff_newton_max_iter: PositiveInt = 30
    wall_offset: PositiveFloat = 1e-12
    regular_residual_tol: PositiveFloat = 1e-10
    contour_nodes: PositiveInt = 256
    contour_max_nodes: PositiveInt = 4096
    contour_min_modulus: PositiveFloat = 1e-8
    contour_residue_tol: PositiveFloat = 0.1
    robin_newton_tol: PositiveFloat = 1e-12
    robin_newton_max_iter: PositiveInt = 50
    eta_limit: PositiveFloat = 1e-8
    sample_pole_tol: PositiveFloat = 1e-9
    max_pole_fraction: PositiveFloat = 0.01
    rational_cf_tol: PositiveFloat = 1e-15


DEFAULT_TOLERANCES = Tolerances()


class RationalSpec(BaseModel):
    base: str
    fractions: list[tuple[int, int]]


class GraphDeclaration(BaseModel):
    """Graph section of a run config, mirroring the JSON declaration format."""

    lengths: list[float] | None = None
    rationality: str | RationalSpec = "unspecified"

    @model_validator(mode="after")
    def _lengths_or_fractions(self) -> "GraphDeclaration":
        if isinstance(self.rationality, RationalSpec):
            return self
        if self.lengths is None:
            raise ValueError("lengths are required unless a rational declaration is given")
        return self


class RunConfig(BaseModel):
    graph: GraphDeclaration
    alpha: tuple[str, str] = ("0", "0")
    R: PositiveFloat | None = None
    n_max: PositiveInt | None = None
    tolerances: Tolerances = Field(default_factory=Tolerances)
    seed: int = Field(default=0, ge=0)
    output_dir: Path = Path("starspec-out")

    bins: PositiveInt = 64
    samples: int = Field(100_000, ge=1_000)
    edge_pair: tuple[int, int] = (0, 1)
    k_max: PositiveInt = 8
    target_s: float | None = None
    eps_fit: PositiveFloat = 0.05
    gamma: PositiveFloat = 1.0
    kappa_norm_max: PositiveInt = 100
    singular_eps: list[PositiveFloat] = Field(default_factory=lambda: [0.2, 0.1, 0.05])
    weyl_windows: PositiveInt = 1000

    @model_validator(mode="after")
    def _exactly_one_range(self) -> "RunConfig":
        if (self.R is None) == (self.n_max is None):
            raise ValueError("exactly one of R / n_max must be set")
        return self

    @property
    def alpha_value(self) -> complex:
        return complex(float(self.alpha[0]), float(self.alpha[1]))


def parse_alpha(text: str) -> tuple[str, str]:
    """Parse the CLI form "RE,IM" (a bare "RE" means a real coupling)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2:
        raise InvalidConfig(f"alpha must look like RE,IM, got {text!r}")
    try:
        float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise InvalidConfig(f"alpha must be numeric, got {text!r}") from exc
    return parts[0], parts[1]


def load_run_config(path: Path, overrides: dict | None = None) -> RunConfig:
    """Load a run config file (YAML or JSON), applying CLI overrides on top."""
    if not path.exists():
        raise ConfigNotFound(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise InvalidConfig(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path} must hold a mapping, got {type(data).__name__}")
    if overrides:
        if "R" in overrides or "n_max" in overrides:
            data.pop("R", None)
            data.pop("n_max", None)
        data.update(overrides)
    return validate_run_config(data)


def validate_run_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise InvalidConfig(str(exc)) from exc
