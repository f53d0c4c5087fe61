# tests/test_config.py
import json
from pathlib import Path

import pytest
import yaml

from starspec.config import (
    DEFAULT_TOLERANCES,
    RationalSpec,
    Settings,
    Tolerances,
    load_run_config,
    parse_alpha,
    validate_run_config,
)
from starspec.errors import ConfigNotFound, InvalidConfig


def _make_config(**overrides) -> dict:
    data = {"graph": {"lengths": [1.0, 2.0]}, "R": 10.0}
    data.update(overrides)
    return data


def test_default_settings():
    settings = Settings()
    assert settings.cache_dir == Path(".starspec-cache")
    assert settings.log_level == "info"
    assert settings.jobs is None


def test_settings_from_env(monkeypatch):
    monkeypatch.setenv("STARSPEC_CACHE_DIR", "/tmp/elsewhere")
    monkeypatch.setenv("STARSPEC_JOBS", "3")
    monkeypatch.setenv("STARSPEC_LOG_FORMAT", "json")
    settings = Settings()
    assert settings.cache_dir == Path("/tmp/elsewhere")
    assert settings.jobs == 3
    assert settings.log_format == "json"


def test_default_tolerances():
    assert DEFAULT_TOLERANCES.pole_tol == 1e-13
    assert DEFAULT_TOLERANCES.contour_nodes == 256
    assert DEFAULT_TOLERANCES.max_pole_fraction == 0.01


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError):
        Tolerances(pole_tol=0.0)
    with pytest.raises(InvalidConfig):
        validate_run_config(_make_config(tolerances={"merge_rtol": -1e-9}))


def test_run_config_defaults():
    config = validate_run_config(_make_config())
    assert config.alpha_value == 0j
    assert config.seed == 0
    assert config.bins == 64
    assert config.tolerances == DEFAULT_TOLERANCES


def test_run_config_needs_exactly_one_range():
    with pytest.raises(InvalidConfig):
        validate_run_config(_make_config(n_max=100))
    with pytest.raises(InvalidConfig):
        validate_run_config({"graph": {"lengths": [1.0, 2.0]}})


def test_run_config_rejects_negative_seed():
    with pytest.raises(InvalidConfig):
        validate_run_config(_make_config(seed=-1))


def test_rational_declaration_needs_no_lengths():
    config = validate_run_config(
        {"graph": {"rationality": {"base": "1", "fractions": [[1, 1], [2, 1]]}}, "n_max": 50}
    )
    assert isinstance(config.graph.rationality, RationalSpec)
    assert config.graph.rationality.fractions == [(1, 1), (2, 1)]


def test_plain_graph_needs_lengths():
    with pytest.raises(InvalidConfig):
        validate_run_config({"graph": {"rationality": "independent"}, "R": 5.0})


def test_alpha_value():
    config = validate_run_config(_make_config(alpha=["1.5", "-2"]))
    assert config.alpha_value == complex(1.5, -2.0)


def test_parse_alpha():
    assert parse_alpha("1,2") == ("1", "2")
    assert parse_alpha(" 0.5 ") == ("0.5", "0")
    with pytest.raises(InvalidConfig):
        parse_alpha("1,2,3")
    with pytest.raises(InvalidConfig):
        parse_alpha("one")


def test_load_yaml(tmp_path: Path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(_make_config(seed=4)))
    config = load_run_config(path)
    assert config.R == 10.0
    assert config.seed == 4


def test_load_json(tmp_path: Path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(_make_config(alpha=["0", "1"])))
    config = load_run_config(path)
    assert config.alpha_value == 1j


def test_load_missing_file(tmp_path: Path):
    with pytest.raises(ConfigNotFound):
        load_run_config(tmp_path / "absent.yaml")


@pytest.mark.parametrize(
    "text",
    ["graph: [1, 2\n", "- 1.0\n- 2.0\n", "just a string\n"],
    ids=["broken", "list", "scalar"],
)
def test_load_rejects_malformed_file(tmp_path: Path, text: str):
    path = tmp_path / "run.yaml"
    path.write_text(text)
    with pytest.raises(InvalidConfig):
        load_run_config(path)


def test_quadrature_samples_floor():
    with pytest.raises(InvalidConfig):
        validate_run_config(_make_config(samples=999))


def test_overrides_replace_range(tmp_path: Path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(_make_config()))
    config = load_run_config(path, {"n_max": 20, "bins": 8})
    assert config.R is None
    assert config.n_max == 20
    assert config.bins == 8
