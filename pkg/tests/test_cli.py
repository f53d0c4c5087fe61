# tests/test_cli.py
import csv
import json
from pathlib import Path

import pytest
import yaml

from starspec import cli
from starspec.errors import NewtonDiverged


def _rows(path: Path) -> list[dict[str, str]]:
    lines = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


def _run(out: Path, *args: str) -> int:
    return cli.main([*args, "--out", str(out), "--jobs", "1"])


def test_spectrum(tmp_path: Path, cache_dir: Path):
    out = tmp_path / "out"
    assert _run(out, "spectrum", "--lengths", "1,1", "--R", "7") == 0
    assert len(_rows(out / "kirchhoff.csv")) == 4
    assert len(_rows(out / "robin.csv")) == 4
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["files"] == ["kirchhoff.csv", "robin.csv"]
    assert any(cache_dir.iterdir())


def test_rerun_is_byte_identical(tmp_path: Path, cache_dir: Path):
    args = ("spectrum", "--lengths", "1,1.4142135623730951", "--alpha", "1,1", "--R", "15")
    names = ("kirchhoff.csv", "robin.csv", "manifest.json")
    assert _run(tmp_path, *args) == 0
    first = [(tmp_path / name).read_bytes() for name in names]
    # the second run reads the Kirchhoff spectrum back from the cache
    assert _run(tmp_path, *args) == 0
    assert [(tmp_path / name).read_bytes() for name in names] == first


def test_yaml_config(tmp_path: Path, cache_dir: Path):
    config = tmp_path / "run.yaml"
    config.write_text(
        yaml.safe_dump(
            {
                "graph": {"rationality": {"base": "1", "fractions": [[1, 1], [2, 1]]}},
                "alpha": ["1", "0"],
                "n_max": 10,
            }
        )
    )
    assert _run(tmp_path / "out", "robin", "--config", str(config)) == 0
    assert len(_rows(tmp_path / "out" / "robin.csv")) == 10
    checks = json.loads((tmp_path / "out" / "robin_checks.json").read_text())
    assert checks["sign_violations"] == 0


def test_missing_config(tmp_path: Path, cache_dir: Path, capsys):
    status = _run(tmp_path / "out", "spectrum", "--config", str(tmp_path / "nope.yaml"))
    assert status == 2
    assert "ConfigNotFound" in capsys.readouterr().err


def test_malformed_config(tmp_path: Path, cache_dir: Path, capsys):
    path = tmp_path / "run.yaml"
    path.write_text("graph: {lengths: [1, 2\n")
    assert _run(tmp_path / "out", "spectrum", "--config", str(path)) == 2
    assert "InvalidConfig" in capsys.readouterr().err


def test_needs_a_graph(tmp_path: Path, cache_dir: Path, capsys):
    assert _run(tmp_path / "out", "spectrum", "--R", "5") == 2
    assert "InvalidConfig" in capsys.readouterr().err


def test_rationality_needs_lengths(tmp_path: Path, cache_dir: Path):
    assert _run(tmp_path / "out", "spectrum", "--rationality", "independent", "--R", "5") == 2


def test_range_is_required(tmp_path: Path, cache_dir: Path, capsys):
    assert _run(tmp_path / "out", "spectrum", "--lengths", "1,2") == 2
    assert "exactly one of R / n_max" in capsys.readouterr().err


def test_numerical_failure_exit_code(
    tmp_path: Path, cache_dir: Path, monkeypatch: pytest.MonkeyPatch, capsys
):
    def fail(*args, **kwargs):
        raise NewtonDiverged("stuck", index=3)

    monkeypatch.setattr(cli, "kirchhoff_spectrum", fail)
    assert _run(tmp_path / "out", "spectrum", "--lengths", "1,2", "--R", "5") == 3
    assert "NewtonDiverged" in capsys.readouterr().err


def test_verify(tmp_path: Path, cache_dir: Path, capsys):
    status = _run(tmp_path / "out", "verify", "--lengths", "1,1", "--alpha", "1", "--R", "7")
    assert status == 0
    out = capsys.readouterr().out
    assert "robin_checks" in out
    assert "PASS" in out
    assert "FAIL" not in out


def test_weyl(tmp_path: Path, cache_dir: Path):
    out = tmp_path / "out"
    args = ("weyl", "--lengths", "1,1.4142135623730951", "--alpha", "0,1", "--R", "20")
    assert _run(out, *args) == 0
    assert len(_rows(out / "weyl.csv")) == 1000
    assert (out / "weyl_robin.json").exists()


def test_measure_rational(tmp_path: Path, cache_dir: Path):
    config = tmp_path / "run.yaml"
    config.write_text(
        yaml.safe_dump(
            {
                "graph": {"rationality": {"base": "1", "fractions": [[1, 1], [2, 1]]}},
                "alpha": ["1", "0"],
                "R": 60.0,
                "bins": 16,
            }
        )
    )
    out = tmp_path / "out"
    assert _run(out, "measure", "--config", str(config)) == 0
    comparison = json.loads((out / "measure_comparison.json").read_text())
    assert comparison["max_atom_error"] is not None
    assert "<svg" in (out / "measure.svg").read_text()
    manifest = json.loads((out / "manifest.json").read_text())
    assert "measure.svg" in manifest["files"]


def test_measure_needs_declaration(tmp_path: Path, cache_dir: Path):
    assert _run(tmp_path / "out", "measure", "--lengths", "1,2", "--R", "10") == 2


def test_target_needs_s(tmp_path: Path, cache_dir: Path):
    args = ("dioph", "target", "--lengths", "1,1.4142135623730951")
    assert _run(tmp_path / "out", *args, "--rationality", "independent", "--n-max", "50") == 2


def test_smallrho(tmp_path: Path, cache_dir: Path):
    out = tmp_path / "out"
    args = ("dioph", "smallrho", "--lengths", "1,1.4142135623730951", "--rationality")
    assert _run(out, *args, "independent", "--R", "200") == 0
    assert _rows(out / "smallrho.csv")
    quality = json.loads((out / "lattice_quality.json").read_text())
    assert quality["value"] > 0
